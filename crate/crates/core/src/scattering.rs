//! Oriented lines, the single-bump scattering map and its degree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{propagate, GlancingPolicy, Limits, Orbit, Piece, State};
use crate::geometry::{classify_field, Bump, FieldRegime, Scene};
use crate::math::{angle_of, cross, perp, unit, wrap_2pi, wrap_pi, Vec2, TAU};

/// Free trajectory with direction angle `phi` and angular momentum
/// `l = <Jq, v>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrientedLine {
    pub phi: f64,
    pub l: f64,
}

impl OrientedLine {
    pub fn new(phi: f64, l: f64) -> Self {
        OrientedLine { phi, l }
    }
}

/// The point of the line at signed distance `-standoff` from its foot,
/// moving along the line.
pub fn line_to_state(line: &OrientedLine, standoff: f64) -> State {
    let e = unit(line.phi);
    State::outside(-standoff * e - line.l * perp(e), e)
}

pub fn state_to_line(state: &State) -> OrientedLine {
    OrientedLine {
        phi: wrap_2pi(angle_of(state.v)),
        l: cross(state.q, state.v),
    }
}

/// Sum of signed arc angles.
pub fn total_curvature(orbit: &Orbit) -> f64 {
    orbit
        .arcs()
        .map(|p| match *p {
            Piece::Arc { angle, .. } => angle,
            Piece::Line { .. } => 0.0,
        })
        .sum()
}

fn single(bump: &Bump) -> Result<Scene> {
    if classify_field(bump) == FieldRegime::Neither {
        return Err(Error::IndeterminateRegime(0));
    }
    Scene::new(vec![bump.clone()])
}

fn standoff(bump: &Bump) -> f64 {
    bump.center().norm() + bump.outer_radius() + 1.0
}

/// Outgoing line and the orbit producing it (straight-line glancing policy).
pub fn scatter(bump: &Bump, line: &OrientedLine) -> Result<(OrientedLine, Orbit)> {
    let scene = single(bump)?;
    scatter_in(&scene, line, standoff(bump))
}

fn scatter_in(scene: &Scene, line: &OrientedLine, r: f64) -> Result<(OrientedLine, Orbit)> {
    let orbit = propagate(
        &line_to_state(line, r),
        scene,
        Limits::default(),
        GlancingPolicy::Straight,
    )?;
    if orbit.interior_trapped() {
        return Err(Error::InteriorTrapped(0));
    }
    Ok((state_to_line(&orbit.end), orbit))
}

/// The scattering map `S` of a single bump on oriented lines.
pub fn scattering_map(bump: &Bump, line: &OrientedLine) -> Result<OrientedLine> {
    scatter(bump, line).map(|r| r.0)
}

/// Range `[lo, hi]` of angular momenta of lines with direction `phi` that
/// meet the bump.
pub fn shadow(bump: &Bump, phi: f64) -> (f64, f64) {
    // L = <Jq, e> = -<q, Je>
    let n = perp(unit(phi));
    (-bump.support(n), bump.support(-n))
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub phi: f64,
    pub degree: i64,
    pub samples: usize,
    pub max_increment: f64,
    /// Total curvature over `2 pi` at the grid points next to the lower and
    /// upper glancing values.
    pub turn_near_lo: f64,
    pub turn_near_hi: f64,
}

/// Winding number of `L -> phi'(L)` over the compactified `L` line.
///
/// Outside the shadow `S` is the identity, so the loop is closed there. The
/// grid clusters `points` values toward both glancing values, which are
/// included themselves.
pub fn scattering_degree(bump: &Bump, phi: f64, points: usize) -> Result<DegreeReport> {
    let scene = single(bump)?;
    let r = standoff(bump);
    let (lo, hi) = shadow(bump, phi);
    let n = points.max(4);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut ls: Vec<f64> = (0..=n)
        .map(|k| mid - half * (std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    ls[0] = lo;
    ls[n] = hi;
    ls.insert(0, lo - 1.0);
    ls.push(hi + 1.0);

    let mut total = 0.0;
    let mut max_inc: f64 = 0.0;
    let mut prev = phi;
    let mut turns = vec![0.0; ls.len()];
    for (i, &l) in ls.iter().enumerate() {
        let (out, orbit) = scatter_in(&scene, &OrientedLine::new(phi, l), r)?;
        turns[i] = total_curvature(&orbit) / TAU;
        let inc = wrap_pi(out.phi - prev);
        if inc.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::GridTooCoarse {
                at: l,
                increment: inc,
            });
        }
        max_inc = max_inc.max(inc.abs());
        total += inc;
        prev = out.phi;
    }
    total += wrap_pi(phi - prev);
    Ok(DegreeReport {
        phi,
        degree: (total / TAU).round() as i64,
        samples: ls.len(),
        max_increment: max_inc,
        turn_near_lo: turns[2],
        turn_near_hi: turns[turns.len() - 3],
    })
}

/// One row of an `L` sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub l: f64,
    pub phi_out: f64,
    pub l_out: f64,
    pub total_curvature: f64,
}

pub fn sweep_lines(bump: &Bump, phi: f64, ls: &[f64]) -> Result<Vec<SweepRow>> {
    let scene = single(bump)?;
    let r = standoff(bump);
    ls.iter()
        .map(|&l| {
            let (out, orbit) = scatter_in(&scene, &OrientedLine::new(phi, l), r)?;
            Ok(SweepRow {
                l,
                phi_out: out.phi,
                l_out: out.l,
                total_curvature: total_curvature(&orbit),
            })
        })
        .collect()
}

/// Stand-off distance used for lines against a whole scene.
pub fn scene_standoff(scene: &Scene) -> f64 {
    scene.radius() + 1.0
}

/// Oriented line of a point and direction.
pub fn line_through(q: Vec2, phi: f64) -> OrientedLine {
    OrientedLine::new(wrap_2pi(phi), cross(q, unit(phi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(b: f64) -> Bump {
        Bump::disk(Vec2::zeros(), 1.0, b).unwrap()
    }

    #[test]
    fn line_state_examples() {
        let s = line_to_state(&OrientedLine::new(0.0, 0.0), 10.0);
        assert!(
            (s.q - Vec2::new(-10.0, 0.0)).norm() < 1e-15
                && (s.v - Vec2::new(1.0, 0.0)).norm() < 1e-15
        );
        let s = line_to_state(&OrientedLine::new(PI / 2.0, 0.0), 10.0);
        assert!(
            (s.q - Vec2::new(0.0, -10.0)).norm() < 1e-14
                && (s.v - Vec2::new(0.0, 1.0)).norm() < 1e-15
        );
        for (phi, l) in [(0.3, 1.5), (4.0, -2.0), (6.0, 0.0)] {
            let back = state_to_line(&line_to_state(&OrientedLine::new(phi, l), 7.0));
            assert!((back.phi - phi).abs() < 1e-12 && (back.l - l).abs() < 1e-12);
        }
    }

    #[test]
    fn scattering_examples() {
        let miss = OrientedLine::new(0.4, 3.0);
        let out = scattering_map(&disk(2.0), &miss).unwrap();
        assert!((out.phi - miss.phi).abs() < 1e-15 && (out.l - miss.l).abs() < 1e-14);
        let (out, orbit) = scatter(&disk(2.0), &OrientedLine::new(0.0, 0.0)).unwrap();
        assert!((out.phi - 0.8f64.atan2(-0.6)).abs() < 1e-12);
        assert!(out.l.abs() < 1e-12);
        assert!((total_curvature(&orbit) - 0.8f64.atan2(-0.6)).abs() < 1e-12);
        assert!(matches!(
            scattering_map(&disk(1.0), &miss),
            Err(Error::IndeterminateRegime(_))
        ));
    }

    #[test]
    fn degrees() {
        // a mirror reflection flips b and reverses both L and phi, so the
        // winding number cannot depend on the sign of b
        for (b, want) in [(0.5, 0), (-0.5, 0), (2.0, 1), (-2.0, 1), (5.0, 1)] {
            for k in 0..8 {
                let phi = k as f64 * PI / 4.0 + 0.1;
                let rep = scattering_degree(&disk(b), phi, 400).unwrap();
                assert_eq!(rep.degree, want, "b = {b}, phi = {phi}");
            }
        }
    }

    #[test]
    fn glancing_turn_carries_field_sign() {
        let rep = scattering_degree(&disk(2.0), 0.0, 2000).unwrap();
        assert!((rep.turn_near_hi - 1.0).abs() < 0.05 && rep.turn_near_lo.abs() < 0.05);
        let rep = scattering_degree(&disk(-2.0), 0.0, 2000).unwrap();
        assert!((rep.turn_near_lo + 1.0).abs() < 0.05 && rep.turn_near_hi.abs() < 0.05);
        let rep = scattering_degree(&disk(0.5), 0.0, 2000).unwrap();
        assert!(rep.turn_near_lo.abs() < 0.05 && rep.turn_near_hi.abs() < 0.05);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(
            scattering_degree(&disk(2.0), 0.0, 4),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
