//! Transverse Jacobi data `(J, J')` along orbits and derivatives of the
//! return map.
//!
//! `J = <dq, Jv>` and, outside the bumps, `J' = <dv, Jv>`. Inside a bump the
//! gauge-invariant derivative is `J' = <dv, Jv> - b <dq, v>`, which makes the
//! flow direction itself carry zero data. Where the field jumps by `db` on a
//! boundary with normal `N`, the event-time correction is a shear
//! `J' += db * J * <N, Jv> / <N, v>`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{Piece, State, ON_BOUNDARY};
use crate::geometry::{classify_field, Bump, FieldRegime, Scene};
use crate::math::{perp, Mat2, Vec2};
use crate::symbolic::{poincare_map, poincare_step, SectionState, GLANCING_CUTOFF};

/// Transverse displacement and its derivative in the frame `(v, Jv)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseJacobi {
    pub j: f64,
    pub jdot: f64,
}

impl TransverseJacobi {
    pub fn new(j: f64, jdot: f64) -> Self {
        TransverseJacobi { j, jdot }
    }

    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.j, self.jdot)
    }

    pub fn from_vec(v: Vec2) -> Self {
        TransverseJacobi { j: v.x, jdot: v.y }
    }

    pub fn mapped(self, m: &Mat2) -> Self {
        Self::from_vec(m * self.to_vec())
    }
}

/// Free flight of length `d`.
pub fn free_transfer(d: f64) -> Mat2 {
    Mat2::new(1.0, d, 0.0, 1.0)
}

/// Motion for time `t` in the constant field `b`.
pub fn arc_transfer(b: f64, t: f64) -> Mat2 {
    let (s, c) = (b * t).sin_cos();
    Mat2::new(c, s / b, -b * s, c)
}

/// Correction at a boundary with outward normal `normal` crossed with
/// velocity `v`, where the field jumps by `jump = b_after - b_before`.
pub fn crossing_transfer(jump: f64, v: Vec2, normal: Vec2) -> Result<Mat2> {
    let vn = v.dot(&normal);
    if vn.abs() < GLANCING_CUTOFF {
        return Err(Error::GlancingNearby(usize::MAX, vn));
    }
    Ok(Mat2::new(1.0, 0.0, jump * perp(v).dot(&normal) / vn, 1.0))
}

/// `d(J, J')/d(s, u)` at a boundary point with curvature `kappa` and normal
/// velocity `w = <v, N>`, in the field-free representation.
pub fn section_to_jacobi(kappa: f64, w: f64) -> Mat2 {
    Mat2::new(w, 0.0, kappa, 1.0 / w)
}

fn section_frame(x: &SectionState, scene: &Scene) -> Result<Mat2> {
    let bump = scene.bump(x.bump);
    let w = x.normal_speed();
    if w.abs() < GLANCING_CUTOFF {
        return Err(Error::GlancingNearby(x.bump, w));
    }
    let theta = bump.param_at(x.s);
    Ok(section_to_jacobi(bump.curvature(theta), w))
}

fn crossing_at(bump: &Bump, index: usize, q: Vec2, v: Vec2, jump: f64) -> Result<Mat2> {
    let normal = bump.normal(bump.param_of(q));
    crossing_transfer(jump, v, normal).map_err(|e| match e {
        Error::GlancingNearby(_, w) => Error::GlancingNearby(index, w),
        other => other,
    })
}

/// Transfer across one bump from just outside the entry point to just
/// outside the exit point: `K_exit * A * K_entry`.
pub fn interior_transfer(entry: &State, bump_index: usize, scene: &Scene) -> Result<(Mat2, State)> {
    let bump = scene.bump(bump_index);
    let b = bump.field();
    let arc = crate::flow::arc_exit(entry, scene)?;
    let k_in = crossing_at(bump, bump_index, entry.q, entry.v, b)?;
    let k_out = crossing_at(bump, bump_index, arc.exit.q, arc.exit.v, -b)?;
    Ok((k_out * arc_transfer(b, arc.duration) * k_in, arc.exit))
}

/// Return-map derivative in Jacobi coordinates (field-free representation at
/// both ends) together with the image point.
pub fn poincare_jacobi(x: &SectionState, scene: &Scene) -> Result<(Mat2, SectionState)> {
    let step = poincare_step(x, scene).map_err(not_in_domain)?;
    let (inner, _) = interior_transfer(&step.entry, x.bump, scene)?;
    let y = step.image;
    if y.normal_speed().abs() < GLANCING_CUTOFF {
        return Err(Error::GlancingNearby(y.bump, y.normal_speed()));
    }
    Ok((free_transfer(step.flight) * inner, y))
}

fn not_in_domain(e: Error) -> Error {
    match e {
        Error::Escaped => Error::NotInDomain("orbit escapes before reaching another bump".into()),
        Error::Glancing(i) => Error::GlancingNearby(i, 0.0),
        other => other,
    }
}

/// Derivative of the return map in section coordinates `(s, u)`.
pub fn linearize_poincare(x: &SectionState, scene: &Scene) -> Result<Mat2> {
    let (g, y) = poincare_jacobi(x, scene)?;
    let mx = section_frame(x, scene)?;
    let my = section_frame(&y, scene)?;
    let my_inv = my.try_inverse().ok_or(Error::GlancingNearby(y.bump, 0.0))?;
    Ok(my_inv * g * mx)
}

/// Central-difference Jacobian of the exact return map, step `eps` in both
/// section coordinates.
pub fn fd_oracle(x: &SectionState, scene: &Scene, eps: f64) -> Result<Mat2> {
    if !(1e-8..=1e-3).contains(&eps) {
        return Err(Error::Domain(format!("step {eps} outside [1e-8, 1e-3]")));
    }
    let centre = poincare_map(x, scene).map_err(not_in_domain)?;
    if x.normal_speed().abs() < GLANCING_CUTOFF {
        return Err(Error::GlancingNearby(x.bump, x.normal_speed()));
    }
    let mut d = Mat2::zeros();
    for (col, (ds, du)) in [(eps, 0.0), (0.0, eps)].into_iter().enumerate() {
        let plus = poincare_map(&x.offset(ds, du, scene), scene).map_err(not_in_domain)?;
        let minus = poincare_map(&x.offset(-ds, -du, scene), scene).map_err(not_in_domain)?;
        if plus.bump != centre.bump || minus.bump != centre.bump {
            return Err(Error::NotInDomain(
                "perturbed orbits reach different bumps".into(),
            ));
        }
        let diff = plus.difference(&minus, scene) / (2.0 * eps);
        d.set_column(col, &diff);
    }
    Ok(d)
}

/// Richardson-extrapolated central differences: `(4 D(eps/2) - D(eps)) / 3`.
pub fn fd_oracle_richardson(x: &SectionState, scene: &Scene, eps: f64) -> Result<Mat2> {
    let coarse = fd_oracle(x, scene, eps)?;
    let fine = fd_oracle(x, scene, 0.5 * eps)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Richardson estimates for steps `eps, eps/sqrt(10), ...` down to `1e-7`;
/// returns the estimate (and its step) agreeing best with the one at the
/// next finer step. Steps whose perturbed orbits leave the domain are
/// skipped, so states close to glancing settle on small steps.
pub fn fd_oracle_sweep(x: &SectionState, scene: &Scene, eps: f64) -> Result<(Mat2, f64)> {
    let steps: Vec<f64> = (0..)
        .map(|k| eps * 10f64.powf(-0.5 * k as f64))
        .take_while(|&e| e >= 1e-7 * (1.0 - 1e-9))
        .collect();
    let estimates: Vec<(Mat2, f64)> = steps
        .iter()
        .filter_map(|&e| fd_oracle_richardson(x, scene, e).ok().map(|d| (d, e)))
        .collect();
    let best = estimates
        .windows(2)
        .map(|w| (relative_error(&w[0].0, &w[1].0), w[1]))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| e);
    match (best, estimates.first()) {
        (Some(e), _) => Ok(e),
        (None, Some(&e)) => Ok(e),
        (None, None) => fd_oracle_richardson(x, scene, eps).map(|d| (d, eps)),
    }
}

/// `max|a - b| / max|b|`.
pub fn relative_error(a: &Mat2, b: &Mat2) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Transfer along consecutive orbit pieces, field-free representation at the
/// ends. Arcs starting or ending on their bump boundary pick up crossing
/// corrections there.
pub fn pieces_transfer(pieces: &[Piece], scene: &Scene) -> Result<Mat2> {
    let mut m = Mat2::identity();
    for piece in pieces {
        match *piece {
            Piece::Line { length, .. } => m = free_transfer(length) * m,
            Piece::Arc {
                bump,
                b,
                from,
                v_from,
                duration,
                ..
            } => {
                let bm = scene.bump(bump);
                let (q0, v0) = (Vec2::from(from), Vec2::from(v_from));
                if bm.level(q0).abs() < ON_BOUNDARY {
                    m = crossing_at(bm, bump, q0, v0, b)? * m;
                }
                m = arc_transfer(b, duration) * m;
                let (q1, v1) = piece.at(piece.t_end());
                if bm.level(q1).abs() < ON_BOUNDARY {
                    m = crossing_at(bm, bump, q1, v1, -b)? * m;
                }
            }
        }
    }
    Ok(m)
}

/// Per-sample outcome of a focusing check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FocusingSample {
    pub s: f64,
    pub u: f64,
    pub j: f64,
    pub jdot: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FocusingReport {
    pub bump: usize,
    pub b: f64,
    pub samples: Vec<FocusingSample>,
    /// Largest `J(T)` over the samples.
    pub max_j: f64,
    /// Largest `J'(T)` over the samples.
    pub max_jdot: f64,
    pub pass: bool,
}

/// Pushes the parallel field `(1, 0)` through the bump for every entry and
/// records the outgoing data.
pub fn focusing_check(
    scene: &Scene,
    bump: usize,
    entries: &[SectionState],
) -> Result<FocusingReport> {
    let bm = scene.bump(bump);
    if classify_field(bm) != FieldRegime::Strong {
        return Err(Error::NotStrong(bump));
    }
    let mut samples = Vec::with_capacity(entries.len());
    for x in entries {
        if x.bump != bump {
            return Err(Error::Domain(format!(
                "entry on bump {} instead of {bump}",
                x.bump
            )));
        }
        if x.normal_speed().abs() < GLANCING_CUTOFF {
            return Err(Error::GlancingNearby(bump, x.normal_speed()));
        }
        let (m, _) = interior_transfer(&x.to_state(scene), bump, scene)?;
        let out = m * Vec2::new(1.0, 0.0);
        samples.push(FocusingSample {
            s: x.s,
            u: x.u,
            j: out.x,
            jdot: out.y,
        });
    }
    let max_j = samples
        .iter()
        .map(|s| s.j)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_jdot = samples
        .iter()
        .map(|s| s.jdot)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FocusingReport {
        bump,
        b: bm.field(),
        pass: max_j < 0.0 && max_jdot < 0.0,
        samples,
        max_j,
        max_jdot,
    })
}

/// Entries of `count` parallel lines with direction angle `phi`, evenly
/// spaced across the shadow of the bump (endpoints excluded).
pub fn parallel_entries(scene: &Scene, bump: usize, phi: f64, count: usize) -> Vec<SectionState> {
    let bm = scene.bump(bump);
    let e = crate::math::unit(phi);
    let n = perp(e);
    let (hi, lo) = (bm.support(n), -bm.support(-n));
    let back = bm.outer_radius() + 1.0;
    (0..count)
        .filter_map(|i| {
            let p = lo + (hi - lo) * (i as f64 + 0.5) / count as f64;
            let q0 = p * n + (e.dot(&bm.center()) - back) * e;
            let r = bm.ray_roots(q0, e);
            (r.disc > 0.0).then(|| {
                let q = bm.snap(q0 + r.t_in * e);
                SectionState::from_state(&State::outside(q, e), bump, scene)
            })
        })
        .collect()
}

/// Entries uniform in boundary arclength and inward angle.
pub fn uniform_entries<R: Rng>(
    scene: &Scene,
    bump: usize,
    count: usize,
    rng: &mut R,
) -> Vec<SectionState> {
    let per = scene.bump(bump).perimeter();
    let half = std::f64::consts::FRAC_PI_2;
    (0..count)
        .map(|_| {
            let s = rng.random_range(0.0..per);
            let angle: f64 = rng.random_range(-half..half);
            SectionState::inward(bump, s, angle.sin())
        })
        .collect()
}

/// First focal point inside the bump of the parallel family through an
/// inward state on its boundary, if reached before the exit.
pub fn focal_point(entry: &State, bump: usize, scene: &Scene) -> Result<Option<Vec2>> {
    let bm = scene.bump(bump);
    let b = bm.field();
    let k = crossing_at(bm, bump, entry.q, entry.v, b)?;
    let start = k * Vec2::new(1.0, 0.0);
    // J(t) = cos(b t) + (J'_0 / b) sin(b t); first zero at |b| t = theta
    let a = start.y / b * b.signum();
    let theta = 1.0_f64.atan2(-a);
    let t = theta / b.abs();
    let arc = crate::flow::arc_exit(entry, scene)?;
    if t >= arc.duration {
        return Ok(None);
    }
    Ok(Some(crate::flow::advance_in_field(entry, b, t).q))
}

/// Oracle-agreement record for one section state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AgreementSample {
    pub bump: usize,
    pub s: f64,
    pub u: f64,
    pub step: f64,
    pub rel_error: f64,
    pub det: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub eps: f64,
    pub samples: Vec<AgreementSample>,
    pub skipped: usize,
    pub max_rel_error: f64,
    pub max_det_error: f64,
}

/// Compares `linearize_poincare` with [`fd_oracle_sweep`] started at `eps`
/// on random section states until `count` of them lie in the domain.
pub fn agreement_sweep<R: Rng>(
    scene: &Scene,
    count: usize,
    eps: f64,
    rng: &mut R,
) -> Result<AgreementReport> {
    let mut samples = Vec::with_capacity(count);
    let mut skipped = 0;
    while samples.len() < count {
        if skipped > 1000 * count.max(1) {
            return Err(Error::NotFound(
                "too few section states reach another bump".into(),
            ));
        }
        let bump = rng.random_range(0..scene.len());
        let x = uniform_entries(scene, bump, 1, rng)[0];
        let (d, (fd, step)) = match (
            linearize_poincare(&x, scene),
            fd_oracle_sweep(&x, scene, eps),
        ) {
            (Ok(d), Ok(fd)) => (d, fd),
            _ => {
                skipped += 1;
                continue;
            }
        };
        samples.push(AgreementSample {
            bump,
            s: x.s,
            u: x.u,
            step,
            rel_error: relative_error(&d, &fd),
            det: d.determinant(),
        });
    }
    Ok(AgreementReport {
        eps,
        max_rel_error: samples.iter().map(|s| s.rel_error).fold(0.0, f64::max),
        max_det_error: samples
            .iter()
            .map(|s| (s.det - 1.0).abs())
            .fold(0.0, f64::max),
        samples,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn disk(b: f64) -> Scene {
        Scene::new(vec![Bump::disk(Vec2::zeros(), 1.0, b).unwrap()]).unwrap()
    }

    fn triangle(b: f64) -> Scene {
        let bumps = (0..3)
            .map(|k| {
                let a = PI / 2.0 + k as f64 * 2.0 * PI / 3.0;
                Bump::disk(10.0 / 3f64.sqrt() * crate::math::unit(a), 1.0, b).unwrap()
            })
            .collect();
        Scene::new(bumps).unwrap()
    }

    #[test]
    fn factor_examples() {
        assert_eq!(free_transfer(0.0), Mat2::identity());
        assert_eq!(
            free_transfer(2.0) * Vec2::new(0.0, 1.0),
            Vec2::new(2.0, 1.0)
        );
        let a = arc_transfer(1.0, PI / 2.0) * Vec2::new(1.0, 0.0);
        assert!((a - Vec2::new(0.0, -1.0)).norm() < 1e-15);
        assert!((arc_transfer(3.0, 2.0 * PI / 3.0) - Mat2::identity()).amax() < 1e-14);
        for (b, t) in [(0.3, 1.7), (-4.0, 0.2), (9.0, 11.0)] {
            assert_relative_eq!(arc_transfer(b, t).determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diameter_entry_interior_map() {
        let s = disk(2.0);
        let entry = State::new(
            Vec2::new(-1.0, 0.0),
            Vec2::new(1.0, 0.0),
            crate::flow::Region::Inside(0),
        );
        let (m, _) = interior_transfer(&entry, 0, &s).unwrap();
        let out = m * Vec2::new(1.0, 0.0);
        assert!((out - Vec2::new(-0.6, -1.6)).norm() < 1e-12, "{out}");
    }

    #[test]
    fn analytic_matches_oracle() {
        let s = triangle(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rep = agreement_sweep(&s, 20, 1e-5, &mut rng).unwrap();
        assert!(rep.max_rel_error < 1e-6, "{}", rep.max_rel_error);
        assert!(rep.max_det_error < 1e-8, "{}", rep.max_det_error);
    }

    #[test]
    fn free_flight_oracle() {
        // exit-to-entry sub-map measured in Jacobi coordinates
        let d = 4.0;
        let q = Vec2::new(1.0, 0.0);
        let v = Vec2::new(1.0, 0.0);
        let line = Piece::Line {
            from: q.into(),
            dir: v.into(),
            t_start: 0.0,
            length: d,
        };
        let m = pieces_transfer(&[line], &Scene::empty()).unwrap();
        assert!((m - free_transfer(d)).amax() < 1e-15);
    }

    #[test]
    fn focusing_on_disks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for b in [1.5, 2.0, 5.0, -3.0] {
            let s = disk(b);
            let entries = uniform_entries(&s, 0, 100, &mut rng);
            let rep = focusing_check(&s, 0, &entries).unwrap();
            assert!(rep.pass, "b = {b}: {} {}", rep.max_j, rep.max_jdot);
        }
        assert!(matches!(
            focusing_check(&disk(0.5), 0, &[]),
            Err(Error::NotStrong(0))
        ));
    }

    #[test]
    fn focal_points_on_envelope() {
        for b in [2.0, -2.0, 5.0] {
            let s = disk(b);
            for x in parallel_entries(&s, 0, 0.0, 25) {
                let entry = x.to_state(&s);
                let f = focal_point(&entry, 0, &s).unwrap().expect("focus inside");
                let centre = perp(Vec2::new(1.0, 0.0)) / b;
                assert!(((f - centre).norm() - (1.0 - 1.0 / b.abs())).abs() < 1e-12);
            }
        }
    }
}
