//! The cone field spanned by `(1, 0)` and `(d, 1)` in Jacobi coordinates and
//! sampled checks of its strict invariance under the return map.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::linearization::{poincare_jacobi, uniform_entries};
use crate::math::{Mat2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeClass {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeMembership {
    pub class: ConeClass,
    pub lambda_l: f64,
    pub lambda_u: f64,
    /// `lambda_l * lambda_u / |xi|^2`.
    pub margin: f64,
}

/// Decomposes `xi = lambda_l (1, 0) + lambda_u (d, 1)` and classifies it.
/// Generators themselves count as boundary, not inside.
pub fn in_cone(xi: Vec2, d: f64) -> Result<ConeMembership> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!(
            "cone parameter d = {d} must be positive"
        )));
    }
    let n2 = xi.norm_squared();
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let lambda_u = xi.y;
    let lambda_l = xi.x - d * xi.y;
    let margin = lambda_l * lambda_u / n2;
    let class = if margin.abs() <= 1e-15 {
        ConeClass::Boundary
    } else if margin > 0.0 {
        ConeClass::Inside
    } else {
        ConeClass::Outside
    };
    Ok(ConeMembership {
        class,
        lambda_l,
        lambda_u,
        margin,
    })
}

/// `f(a) = a - 2 atan(r sin a / (1 + r cos a))` for `a` in `[0, pi]`,
/// `r` in `[0, 1)`.
pub fn f_arc_gap(alpha: f64, r: f64) -> Result<f64> {
    check_arc_domain(alpha, r)?;
    Ok(alpha - 2.0 * (r * alpha.sin() / (1.0 + r * alpha.cos())).atan())
}

/// `f'(a) = (1 - r^2) / (r^2 + 2 r cos a + 1)`.
pub fn f_arc_gap_prime(alpha: f64, r: f64) -> Result<f64> {
    check_arc_domain(alpha, r)?;
    Ok((1.0 - r * r) / (r * r + 2.0 * r * alpha.cos() + 1.0))
}

/// Linear lower bound `(1 - r) / (1 + r) * a` of `f`.
pub fn f_arc_gap_bound(alpha: f64, r: f64) -> Result<f64> {
    check_arc_domain(alpha, r)?;
    Ok((1.0 - r) / (1.0 + r) * alpha)
}

fn check_arc_domain(alpha: f64, r: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&alpha) {
        return Err(Error::Domain(format!("angle {alpha} outside [0, pi]")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("ratio {r} outside [0, 1)")));
    }
    Ok(())
}

/// One evaluated section state of a cone check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeSample {
    pub bump: usize,
    pub s: f64,
    pub u: f64,
    pub next: usize,
    pub det: f64,
    /// Margins of the images of `e_l` and `e_u` in the arrival cone.
    pub margin_l: f64,
    pub margin_u: f64,
    /// The same margins with the departure gap as cone parameter.
    pub alt_margin_l: f64,
    pub alt_margin_u: f64,
}

impl ConeSample {
    pub fn margin(&self) -> f64 {
        self.margin_l.min(self.margin_u)
    }

    pub fn alt_margin(&self) -> f64 {
        self.alt_margin_l.min(self.alt_margin_u)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    fn of(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins];
        if values.is_empty() {
            return Histogram {
                lo: 0.0,
                hi: 0.0,
                counts,
            };
        }
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        for &v in values {
            let k = (((v - lo) / width) * bins as f64) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeReport {
    pub seed: u64,
    pub requested: usize,
    pub evaluated: usize,
    /// Samples whose orbit escapes or glances before the next bump.
    pub skipped: usize,
    pub very_strong: bool,
    pub max_det_error: f64,
    pub min_margin: f64,
    pub violations: usize,
    /// Minimal margin with the departure gap as target cone parameter.
    pub min_margin_departure: f64,
    pub violations_departure: usize,
    pub histograms: Vec<Histogram>,
    pub pass: bool,
    pub samples: Vec<ConeSample>,
}

/// Samples `count` section states (cycling over the bumps, uniform in
/// arclength and inward angle) and maps both generators of each cone.
pub fn cone_invariance_check(scene: &Scene, count: usize, seed: u64) -> Result<ConeReport> {
    if scene.len() < 2 {
        return Err(Error::SingleBump);
    }
    let very_strong = scene.classify()?.very_strong;
    let gaps: Vec<f64> = (0..scene.len())
        .map(|l| scene.pairwise_gap(l))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<_> = (0..count)
        .map(|i| uniform_entries(scene, i % scene.len(), 1, &mut rng)[0])
        .collect();
    let results: Vec<Option<ConeSample>> = xs
        .par_iter()
        .map(|x| {
            let (g, y) = poincare_jacobi(x, scene).ok()?;
            let (dl, dm) = (gaps[x.bump], gaps[y.bump]);
            let images = [g * Vec2::new(1.0, 0.0), g * Vec2::new(dl, 1.0)];
            let m = |v: Vec2, d: f64| in_cone(v, d).map(|c| c.margin).unwrap_or(f64::NEG_INFINITY);
            Some(ConeSample {
                bump: x.bump,
                s: x.s,
                u: x.u,
                next: y.bump,
                det: Mat2::determinant(&g),
                margin_l: m(images[0], dm),
                margin_u: m(images[1], dm),
                alt_margin_l: m(images[0], dl),
                alt_margin_u: m(images[1], dl),
            })
        })
        .collect();
    let samples: Vec<ConeSample> = results.iter().flatten().copied().collect();
    let skipped = count - samples.len();
    let margins: Vec<f64> = samples.iter().map(ConeSample::margin).collect();
    let alt: Vec<f64> = samples.iter().map(ConeSample::alt_margin).collect();
    let histograms = (0..scene.len())
        .map(|l| {
            let vals: Vec<f64> = samples
                .iter()
                .filter(|s| s.bump == l)
                .map(ConeSample::margin)
                .collect();
            Histogram::of(&vals, 10)
        })
        .collect();
    let max_det_error = samples
        .iter()
        .map(|s| (s.det - 1.0).abs())
        .fold(0.0, f64::max);
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = margins.iter().filter(|&&m| m <= 0.0).count();
    Ok(ConeReport {
        seed,
        requested: count,
        evaluated: samples.len(),
        skipped,
        very_strong,
        max_det_error,
        min_margin,
        violations,
        min_margin_departure: alt.iter().copied().fold(f64::INFINITY, f64::min),
        violations_departure: alt.iter().filter(|&&m| m <= 0.0).count(),
        histograms,
        pass: !samples.is_empty() && violations == 0 && max_det_error < 1e-8,
        samples,
    })
}
