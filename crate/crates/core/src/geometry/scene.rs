use std::f64::consts::PI;

use serde::Serialize;

use super::shape::Bump;
use crate::error::{Error, Result};
use crate::math::{self, wrap_pi, Vec2, TAU};

/// A triple's minimal turning angle below this counts as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Field regime of a single bump, by strict comparison of `|b|` with the
/// boundary curvature range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldRegime {
    Weak,
    Strong,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct SceneRegime {
    pub bumps: Vec<FieldRegime>,
    pub very_strong: bool,
    /// Set when the very strong test is undefined (single bump).
    pub note: Option<String>,
}

/// An immutable arrangement of disjoint bumps with derived constants.
#[derive(Debug, Clone)]
pub struct Scene {
    bumps: Vec<Bump>,
    gaps: Vec<f64>,
    alpha: Option<std::result::Result<f64, (usize, usize, usize)>>,
}

impl Scene {
    pub fn new(bumps: Vec<Bump>) -> Result<Self> {
        let n = bumps.len();
        let mut gaps = vec![f64::INFINITY; n];
        for i in 0..n {
            for j in i + 1..n {
                let g = bump_distance(&bumps[i], &bumps[j]);
                if !(g > 0.0) {
                    return Err(Error::Overlap(i, j));
                }
                gaps[i] = gaps[i].min(g);
                gaps[j] = gaps[j].min(g);
            }
        }
        if n < 2 {
            gaps.clear();
        }
        let alpha = match n {
            0 | 1 => None,
            2 => Some(Ok(PI / 3.0)),
            _ => Some(min_turning_angle(&bumps)),
        };
        Ok(Scene { bumps, gaps, alpha })
    }

    pub fn empty() -> Self {
        Scene {
            bumps: Vec::new(),
            gaps: Vec::new(),
            alpha: None,
        }
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn bump(&self, i: usize) -> &Bump {
        &self.bumps[i]
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    /// Radius about the origin of a disk containing every bump.
    pub fn radius(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| b.center().norm() + b.outer_radius())
            .fold(0.0, f64::max)
    }

    /// Minimal distance `d_l` from bump `l` to the other bumps.
    pub fn pairwise_gap(&self, l: usize) -> Result<f64> {
        if self.bumps.len() < 2 {
            return Err(Error::SingleBump);
        }
        Ok(self.gaps[l])
    }

    /// `alpha_min`: `pi/3` for two bumps, otherwise the minimal turning
    /// angle over all bump triples.
    pub fn alpha_min(&self) -> Result<f64> {
        match self.alpha {
            None => Err(Error::SingleBump),
            Some(Ok(a)) => Ok(a),
            Some(Err((k, l, m))) => Err(Error::CollinearBumps(k, l, m)),
        }
    }

    /// True iff no straight line meets three bumps (vacuous for n <= 2).
    pub fn check_no_three_on_line(&self) -> bool {
        !matches!(self.alpha, Some(Err(_)))
    }

    /// Scene with every field negated: the time reversal of the dynamics.
    pub fn reversed(&self) -> Self {
        Scene {
            bumps: self
                .bumps
                .iter()
                .map(|b| b.with_field(-b.field()).expect("nonzero field"))
                .collect(),
            gaps: self.gaps.clone(),
            alpha: self.alpha,
        }
    }

    /// Scene after the rigid motion `q -> R(rotation) q + shift`.
    pub fn moved(&self, rotation: f64, shift: Vec2) -> Result<Self> {
        Scene::new(
            self.bumps
                .iter()
                .map(|b| b.moved(rotation, shift))
                .collect::<Result<_>>()?,
        )
    }

    /// Same geometry with new field strengths.
    pub fn with_fields(&self, fields: &[f64]) -> Result<Self> {
        Ok(Scene {
            bumps: self
                .bumps
                .iter()
                .zip(fields)
                .map(|(b, &f)| b.with_field(f))
                .collect::<Result<_>>()?,
            gaps: self.gaps.clone(),
            alpha: self.alpha,
        })
    }

    pub fn classify(&self) -> Result<SceneRegime> {
        classify_scene(self)
    }
}

pub fn curvature_range(bump: &Bump) -> (f64, f64) {
    bump.curvature_range()
}

pub fn classify_field(bump: &Bump) -> FieldRegime {
    let (lo, hi) = bump.curvature_range();
    let b = bump.field().abs();
    if b < lo {
        FieldRegime::Weak
    } else if b > hi {
        FieldRegime::Strong
    } else {
        FieldRegime::Neither
    }
}

/// Positive root `x` of `1/d = x (x - k) alpha / (x + k)`, the field strength
/// at which the linearized cone estimate becomes effective.
pub fn very_strong_threshold(d: f64, alpha: f64, kappa_max: f64) -> Result<f64> {
    if !(d > 0.0 && alpha > 0.0 && kappa_max > 0.0) || !(d.is_finite() && alpha.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold needs d, alpha, kappa > 0 (got {d}, {alpha}, {kappa_max})"
        )));
    }
    let c = 1.0 / (d * alpha);
    let k = kappa_max;
    Ok(0.5 * (c + k + (c * c + 6.0 * c * k + k * k).sqrt()))
}

pub fn classify_scene(scene: &Scene) -> Result<SceneRegime> {
    let bumps: Vec<FieldRegime> = scene.bumps.iter().map(classify_field).collect();
    if scene.len() < 2 {
        return Ok(SceneRegime {
            bumps,
            very_strong: false,
            note: Some("single bump: gap d undefined".into()),
        });
    }
    let alpha = scene.alpha_min()?;
    let very_strong = scene.bumps.iter().enumerate().all(|(l, b)| {
        let (_, kmax) = b.curvature_range();
        b.field().abs() > 1.0 / (scene.gaps[l] * alpha) + 2.0 * kmax
    });
    Ok(SceneRegime {
        bumps,
        very_strong,
        note: None,
    })
}

/// Euclidean distance between two disjoint bumps (non-positive if they meet).
pub fn bump_distance(a: &Bump, b: &Bump) -> f64 {
    if a.is_disk() && b.is_disk() {
        return (a.center() - b.center()).norm() - a.outer_radius() - b.outer_radius();
    }
    if a.contains(b.center()) || b.contains(a.center()) {
        return -1.0;
    }
    // distance from a boundary point of `a` to `b`, minimized along the boundary
    let dist = |t: f64| {
        let p = a.point(t);
        let q = b.point(b.closest_param(p));
        let d = (p - q).norm();
        if b.contains(p) {
            -d
        } else {
            d
        }
    };
    const N: usize = 128;
    let h = TAU / N as f64;
    let mut samples: Vec<(f64, f64)> = (0..N).map(|i| (i as f64 * h, dist(i as f64 * h))).collect();
    samples.sort_by(|x, y| x.1.total_cmp(&y.1));
    samples
        .iter()
        .take(3)
        .map(|&(t, _)| math::brent_min(dist, t - h, t + h, 1e-12).1)
        .fold(f64::INFINITY, f64::min)
}

/// Minimal angle at a point `y` of bump `l` between directions towards
/// bumps `k` and `m`: the gap between the two direction cones seen from `y`.
fn cone_gap(y: Vec2, bk: &Bump, bm: &Bump) -> f64 {
    let (k_lo, k_hi) = bk.direction_cone(y);
    let (m_lo, m_hi) = bm.direction_cone(y);
    let delta = wrap_pi(0.5 * (m_lo + m_hi) - 0.5 * (k_lo + k_hi));
    (delta.abs() - 0.5 * (k_hi - k_lo) - 0.5 * (m_hi - m_lo)).max(0.0)
}

fn min_turning_angle(bumps: &[Bump]) -> std::result::Result<f64, (usize, usize, usize)> {
    let n = bumps.len();
    let mut best = PI / 3.0;
    for l in 0..n {
        for k in 0..n {
            for m in k + 1..n {
                if k == l || m == l {
                    continue;
                }
                let angle = triple_min_angle(&bumps[k], &bumps[l], &bumps[m]);
                if angle < COLLINEAR_TOL {
                    return Err((k, l, m));
                }
                best = best.min(angle);
            }
        }
    }
    Ok(best)
}

/// Minimum over the boundary of `middle` of the cone gap towards `a` and `c`.
pub(crate) fn triple_min_angle(a: &Bump, middle: &Bump, c: &Bump) -> f64 {
    let f = |t: f64| cone_gap(middle.point(t), a, c);
    const N: usize = 360;
    let h = TAU / N as f64;
    let vals: Vec<f64> = (0..N).map(|i| f(i as f64 * h)).collect();
    let mut idx: Vec<usize> = (0..N)
        .filter(|&i| vals[i] <= vals[(i + N - 1) % N] && vals[i] <= vals[(i + 1) % N])
        .collect();
    idx.sort_by(|x, y| vals[*x].total_cmp(&vals[*y]));
    idx.iter()
        .take(4)
        .map(|&i| {
            if vals[i] == 0.0 {
                0.0
            } else {
                let t = i as f64 * h;
                math::brent_min(f, t - h, t + h, 1e-13).1
            }
        })
        .fold(f64::INFINITY, f64::min)
}
