//! Scattering orbits: an incoming line realizing a finite word and leaving in
//! a prescribed direction.

use serde::Serialize;

use super::words::{Word, WordKind};
use crate::error::{Error, Result};
use crate::flow::{propagate, GlancingPolicy, Limits, Orbit};
use crate::geometry::Scene;
use crate::math::{angle_of, perp, unit, wrap_2pi, wrap_pi};
use crate::scattering::{line_to_state, scene_standoff, shadow, state_to_line, OrientedLine};

#[derive(Debug, Clone, Serialize)]
pub struct ScatteringOrbit {
    pub word: Word,
    pub incoming: OrientedLine,
    pub outgoing: OrientedLine,
    /// `|phi_out - phi_out(target)|`, wrapped.
    pub residual: f64,
    #[serde(skip)]
    pub orbit: Orbit,
}

/// Fails with `ExcludedDirection` if some line with direction `phi` meets two
/// bumps, i.e. two shadows on the axis normal to `phi` overlap.
pub fn check_direction(scene: &Scene, phi: f64) -> Result<()> {
    let shadows: Vec<(f64, f64)> = scene.bumps().iter().map(|b| shadow(b, phi)).collect();
    for i in 0..shadows.len() {
        for j in i + 1..shadows.len() {
            if shadows[i].0 <= shadows[j].1 && shadows[j].0 <= shadows[i].1 {
                return Err(Error::ExcludedDirection(phi));
            }
        }
    }
    Ok(())
}

struct Shot {
    symbols: Vec<usize>,
    phi_out: f64,
    orbit: Orbit,
}

fn shoot(scene: &Scene, phi: f64, l: f64, r: f64, max_events: usize) -> Option<Shot> {
    let limits = Limits {
        max_events,
        ..Limits::default()
    };
    let orbit = propagate(
        &line_to_state(&OrientedLine::new(phi, l), r),
        scene,
        limits,
        GlancingPolicy::Straight,
    )
    .ok()?;
    if orbit.glancing || orbit.interior_trapped() {
        return None;
    }
    Some(Shot {
        symbols: orbit.itinerary(),
        phi_out: wrap_2pi(angle_of(orbit.end.v)),
        orbit,
    })
}

/// Finds the incoming line with direction `phi_in` whose orbit visits exactly
/// the bumps of `word` in order and leaves with direction `phi_out`.
///
/// The incoming angular momentum is the only unknown: the search scans the
/// shadow of the first bump, refines where the itinerary changes and bisects
/// sign changes of the wrapped direction mismatch.
pub fn find_scattering_orbit(
    scene: &Scene,
    word: &Word,
    phi_in: f64,
    phi_out: f64,
) -> Result<ScatteringOrbit> {
    if word.kind != WordKind::Segment || !word.is_admissible() || word.alphabet_size() > scene.len()
    {
        return Err(Error::NotAdmissible(format!(
            "{word} is not an admissible segment word"
        )));
    }
    check_direction(scene, phi_in)?;
    check_direction(scene, phi_out)?;
    let r = scene_standoff(scene);
    if word.is_empty() {
        if wrap_pi(phi_out - phi_in).abs() > 1e-10 {
            return Err(Error::NotFound(
                "a free line cannot change direction".into(),
            ));
        }
        let n = perp(unit(phi_in));
        let l = scene
            .bumps()
            .iter()
            .map(|b| b.support(-n))
            .fold(0.0, f64::max)
            + 1.0;
        let shot = shoot(scene, phi_in, l, r, 4)
            .ok_or_else(|| Error::NotFound("free line blocked".into()))?;
        return Ok(ScatteringOrbit {
            word: word.clone(),
            incoming: OrientedLine::new(wrap_2pi(phi_in), l),
            outgoing: state_to_line(&shot.orbit.end),
            residual: wrap_pi(shot.phi_out - phi_in).abs(),
            orbit: shot.orbit,
        });
    }
    if !scene.classify()?.very_strong {
        return Err(Error::NotVeryStrong);
    }
    let max_events = 2 * word.len() + 4;
    let target = &word.symbols;
    let eval = |l: f64| -> Option<(f64, Shot)> {
        let shot = shoot(scene, phi_in, l, r, max_events)?;
        (shot.symbols == *target).then(|| (wrap_pi(shot.phi_out - phi_out), shot))
    };
    let (lo, hi) = shadow(scene.bump(target[0]), phi_in);
    let mut best = f64::INFINITY;
    let mut stack = vec![(lo, hi, 0usize)];
    let mut budget = 200_000usize;
    while let Some((a, b, depth)) = stack.pop() {
        let n = 64;
        let ls: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let vals: Vec<Option<f64>> = ls.iter().map(|&l| eval(l).map(|v| v.0)).collect();
        budget = budget.saturating_sub(n + 1);
        for k in 0..n {
            match (vals[k], vals[k + 1]) {
                (Some(fa), Some(fb)) => {
                    best = best.min(fa.abs()).min(fb.abs());
                    // a genuine sign change, not the branch cut of the wrap
                    if fa * fb <= 0.0 && (fa - fb).abs() < std::f64::consts::PI {
                        if let Some(found) = bisect(&eval, ls[k], ls[k + 1], fa) {
                            return Ok(ScatteringOrbit {
                                word: word.clone(),
                                incoming: OrientedLine::new(wrap_2pi(phi_in), found.0),
                                outgoing: state_to_line(&found.2.orbit.end),
                                residual: found.1.abs(),
                                orbit: found.2.orbit,
                            });
                        }
                    }
                }
                (va, vb) => {
                    if let Some(v) = va.or(vb) {
                        best = best.min(v.abs());
                    }
                    if depth < 12 && budget > 0 {
                        stack.push((ls[k], ls[k + 1], depth + 1));
                    }
                }
            }
        }
    }
    if best.is_finite() {
        Err(Error::NoConvergence {
            best_residual: best,
            detail: format!("no incoming line realizes {word} with the requested exit direction"),
        })
    } else {
        Err(Error::NotFound(format!(
            "no incoming line with direction {phi_in} realizes {word}"
        )))
    }
}

fn bisect<F>(eval: &F, mut a: f64, mut b: f64, mut fa: f64) -> Option<(f64, f64, Shot)>
where
    F: Fn(f64) -> Option<(f64, Shot)>,
{
    let mut last = None;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let (fm, shot) = eval(m)?;
        if fm.abs() < 1e-12 || b - a < 1e-15 * (1.0 + m.abs()) {
            return (fm.abs() < 1e-10).then_some((m, fm, shot));
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        last = Some((m, fm, shot));
    }
    last.filter(|x| x.1.abs() < 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bump;
    use crate::math::Vec2;
    use std::f64::consts::PI;

    fn triangle() -> Scene {
        let bumps = (0..3)
            .map(|k| {
                Bump::disk(
                    10.0 / 3f64.sqrt() * unit(PI / 2.0 + k as f64 * 2.0 * PI / 3.0),
                    1.0,
                    10.0,
                )
                .unwrap()
            })
            .collect();
        Scene::new(bumps).unwrap()
    }

    #[test]
    fn empty_word_is_free_line() {
        let s = Scene::new(vec![Bump::disk(Vec2::zeros(), 1.0, 3.0).unwrap()]).unwrap();
        let w = Word::segment(vec![]);
        let o = find_scattering_orbit(&s, &w, 0.7, 0.7).unwrap();
        assert!(o.orbit.events.is_empty() && o.residual < 1e-15);
        assert!(find_scattering_orbit(&s, &w, 0.7, 0.8).is_err());
    }

    #[test]
    fn line_through_two_bumps_excluded() {
        let s = triangle();
        let d = s.bump(1).center() - s.bump(0).center();
        let w = Word::segment(vec![0, 1]);
        let r = find_scattering_orbit(&s, &w, angle_of(d), 1.0);
        assert!(matches!(r, Err(Error::ExcludedDirection(_))), "{r:?}");
    }
}
