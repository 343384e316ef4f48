//! Periodic orbits from periodic words by multiple shooting.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::section::{poincare_map, SectionState};
use super::words::{Word, WordKind};
use crate::error::{Error, Result};
use crate::flow::{propagate, GlancingPolicy, Limits, Orbit};
use crate::geometry::Scene;
use crate::linearization::linearize_poincare;
use crate::math::Mat2;

/// Settings of the orbit search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShootingOptions {
    /// Grid cells per section coordinate for seeding.
    pub grid: usize,
    /// Sup-norm residual target.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Seeds tried (best cycles of the seeding grid) before giving up.
    pub attempts: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            grid: 32,
            tolerance: 1e-10,
            max_iterations: 100,
            attempts: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    pub word: Word,
    /// Entry states `x_k` on the bumps `word[k]`, with `P(x_k) = x_{k+1}`.
    pub states: Vec<SectionState>,
    pub residual: f64,
    pub iterations: usize,
}

impl PeriodicOrbit {
    /// The trajectory over one period starting at `x_0`.
    pub fn orbit(&self, scene: &Scene) -> Result<Orbit> {
        replay(&self.states[0], scene, 2 * self.states.len())
    }
}

/// Propagates from an inward section state through `events` boundary events.
pub fn replay(x: &SectionState, scene: &Scene, events: usize) -> Result<Orbit> {
    let limits = Limits {
        max_events: events,
        ..Limits::default()
    };
    match propagate(&x.to_state(scene), scene, limits, GlancingPolicy::Straight) {
        Err(Error::LimitExceeded(orbit)) => Ok(*orbit),
        other => other,
    }
}

/// Residuals `P(x_k) - x_{k+1}` stacked, or `None` if some image leaves the word.
fn residuals(word: &[usize], xs: &[SectionState], scene: &Scene) -> Option<DVector<f64>> {
    let p = xs.len();
    let mut f = DVector::zeros(2 * p);
    for k in 0..p {
        let y = poincare_map(&xs[k], scene).ok()?;
        let next = &xs[(k + 1) % p];
        if y.bump != word[(k + 1) % p] {
            return None;
        }
        let d = y.difference(next, scene);
        f[2 * k] = d.x;
        f[2 * k + 1] = d.y;
    }
    Some(f)
}

fn jacobian(xs: &[SectionState], scene: &Scene) -> Result<DMatrix<f64>> {
    let p = xs.len();
    let mut j = DMatrix::zeros(2 * p, 2 * p);
    for k in 0..p {
        let d = linearize_poincare(&xs[k], scene)?;
        j.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&d);
        let c = 2 * ((k + 1) % p);
        j[(2 * k, c)] -= 1.0;
        j[(2 * k + 1, c + 1)] -= 1.0;
    }
    Ok(j)
}

/// Damped Newton on the multiple-shooting system from `seed`.
fn newton(
    word: &[usize],
    seed: Vec<SectionState>,
    scene: &Scene,
    opts: &ShootingOptions,
) -> std::result::Result<(Vec<SectionState>, f64, usize), f64> {
    let mut xs = seed;
    let Some(mut f) = residuals(word, &xs, scene) else {
        return Err(f64::INFINITY);
    };
    for it in 0..=opts.max_iterations {
        let sup = f.amax();
        if sup < opts.tolerance {
            return Ok((xs, sup, it));
        }
        if it == opts.max_iterations {
            return Err(sup);
        }
        let Ok(jac) = jacobian(&xs, scene) else {
            return Err(sup);
        };
        let Some(step) = jac.lu().solve(&(-&f)) else {
            return Err(sup);
        };
        let norm = f.norm();
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let trial: Vec<SectionState> = xs
                .iter()
                .enumerate()
                .map(|(k, x)| x.offset(lambda * step[2 * k], lambda * step[2 * k + 1], scene))
                .collect();
            if trial.iter().all(|x| x.u.abs() < 1.0) {
                if let Some(ft) = residuals(word, &trial, scene) {
                    if ft.norm() <= (1.0 - 1e-4 * lambda) * norm || ft.amax() < opts.tolerance {
                        xs = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(sup);
        }
    }
    Err(f.amax())
}

/// Grid of inward states on one bump with cell offsets in `[0, 1)`.
fn grid_states(scene: &Scene, bump: usize, n: usize, jitter: &[(f64, f64)]) -> Vec<SectionState> {
    let per = scene.bump(bump).perimeter();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (os, ou) = jitter[i * n + j];
            out.push(SectionState::inward(
                bump,
                (i as f64 + os) * per / n as f64,
                -1.0 + (j as f64 + ou) * 2.0 / n as f64,
            ));
        }
    }
    out
}

/// Seeds for the cycle `word`, best first: one grid point per symbol whose
/// image lands on the next symbol, minimizing the summed mismatch.
fn seed_cycles(
    word: &[usize],
    scene: &Scene,
    grid: usize,
    rng: Option<&mut ChaCha8Rng>,
    count: usize,
) -> Vec<Vec<SectionState>> {
    let p = word.len();
    let jitter: Vec<(f64, f64)> = match rng {
        Some(r) => (0..grid * grid)
            .map(|_| (r.random::<f64>(), r.random::<f64>()))
            .collect(),
        None => vec![(0.5, 0.5); grid * grid],
    };
    let mut cache: Vec<Option<Vec<(SectionState, Option<SectionState>)>>> = vec![None; scene.len()];
    for &s in word {
        if cache[s].is_none() {
            cache[s] = Some(
                grid_states(scene, s, grid, &jitter)
                    .into_iter()
                    .map(|x| (x, poincare_map(&x, scene).ok()))
                    .collect(),
            );
        }
    }
    // candidate nodes per position: grid points of word[k] mapped onto word[k+1]
    let nodes: Vec<Vec<(SectionState, SectionState)>> = (0..p)
        .map(|k| {
            let next = word[(k + 1) % p];
            cache[word[k]]
                .as_ref()
                .unwrap()
                .iter()
                .filter_map(|(x, y)| y.filter(|y| y.bump == next).map(|y| (*x, y)))
                .collect()
        })
        .collect();
    if nodes.iter().any(Vec::is_empty) {
        return vec![];
    }
    let cost = |k: usize, i: usize, j: usize| -> f64 {
        let image = nodes[k][i].1;
        image.distance(&nodes[(k + 1) % p][j].0, scene)
    };
    let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
    for start in 0..nodes[0].len() {
        // dp[j]: best cost of a path from `start` to node j at position k
        let mut dp: Vec<f64> = vec![f64::INFINITY; nodes[0].len()];
        dp[start] = 0.0;
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(p);
        for k in 1..p {
            let mut next = vec![f64::INFINITY; nodes[k].len()];
            let mut arg = vec![0; nodes[k].len()];
            for (i, &c) in dp.iter().enumerate() {
                if !c.is_finite() {
                    continue;
                }
                for (j, slot) in next.iter_mut().enumerate() {
                    let v = c + cost(k - 1, i, j);
                    if v < *slot {
                        *slot = v;
                        arg[j] = i;
                    }
                }
            }
            back.push(arg);
            dp = next;
        }
        let (last, total) = dp
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, c + cost(p - 1, i, start)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut path = vec![0; p];
        path[p - 1] = last;
        for k in (1..p).rev() {
            path[k - 1] = back[k - 1][path[k]];
        }
        path[0] = start;
        found.push((total, path));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found
        .into_iter()
        .take(count)
        .map(|(_, path)| {
            path.iter()
                .enumerate()
                .map(|(k, &i)| nodes[k][i].0)
                .collect()
        })
        .collect()
}

fn check_word(scene: &Scene, word: &Word) -> Result<()> {
    if word.kind != WordKind::Periodic || !word.is_admissible() {
        return Err(Error::NotAdmissible(format!(
            "{word} is not a cyclically admissible periodic word"
        )));
    }
    if word.alphabet_size() > scene.len() {
        return Err(Error::NotAdmissible(format!(
            "{word} uses symbols beyond {}",
            scene.len()
        )));
    }
    Ok(())
}

/// Finds the periodic orbit with itinerary `word`, seeding from the regular
/// grid (`seed = None`) or from a grid jittered by a seeded generator.
pub fn find_periodic_orbit_seeded(
    scene: &Scene,
    word: &Word,
    opts: &ShootingOptions,
    seed: Option<u64>,
) -> Result<PeriodicOrbit> {
    check_word(scene, word)?;
    if !scene.classify()?.very_strong {
        return Err(Error::NotVeryStrong);
    }
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let seeds = seed_cycles(&word.symbols, scene, opts.grid, rng.as_mut(), opts.attempts);
    if seeds.is_empty() {
        return Err(Error::NoConvergence {
            best_residual: f64::INFINITY,
            detail: format!("no grid point of the seeding grid follows {word}"),
        });
    }
    let mut trace = Vec::new();
    let mut best = f64::INFINITY;
    for s in seeds {
        match newton(&word.symbols, s, scene, opts) {
            Ok((states, residual, iterations)) => {
                return Ok(PeriodicOrbit {
                    word: word.clone(),
                    states,
                    residual,
                    iterations,
                })
            }
            Err(r) => {
                best = best.min(r);
                trace.push(format!("{r:.3e}"));
            }
        }
    }
    Err(Error::NoConvergence {
        best_residual: best,
        detail: format!(
            "word {word}: seeds ended at residuals [{}]",
            trace.join(", ")
        ),
    })
}

pub fn find_periodic_orbit(
    scene: &Scene,
    word: &Word,
    opts: &ShootingOptions,
) -> Result<PeriodicOrbit> {
    find_periodic_orbit_seeded(scene, word, opts, None)
}

/// Cycle product of the return-map derivatives.
#[derive(Debug, Clone, Serialize)]
pub struct Monodromy {
    pub matrix: [[f64; 2]; 2],
    /// Product of the factor determinants; `ad - bc` of the product itself
    /// cancels catastrophically once the entries grow large.
    pub det: f64,
    pub trace: f64,
    pub hyperbolic: bool,
}

pub fn monodromy(orbit: &PeriodicOrbit, scene: &Scene) -> Result<Monodromy> {
    let mut m = Mat2::identity();
    let mut det = 1.0;
    for x in &orbit.states {
        let d = linearize_poincare(x, scene)?;
        det *= d.determinant();
        m = d * m;
    }
    let trace = m.trace();
    Ok(Monodromy {
        matrix: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        det,
        trace,
        hyperbolic: trace.abs() > 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bump;
    use crate::math::unit;
    use std::f64::consts::PI;

    fn triangle(b: f64) -> Scene {
        let bumps = (0..3)
            .map(|k| {
                Bump::disk(
                    10.0 / 3f64.sqrt() * unit(PI / 2.0 + k as f64 * 2.0 * PI / 3.0),
                    1.0,
                    b,
                )
                .unwrap()
            })
            .collect();
        Scene::new(bumps).unwrap()
    }

    #[test]
    fn three_cycle_found() {
        let s = triangle(10.0);
        let w: Word = "1,2,3".parse().unwrap();
        let orb = find_periodic_orbit(&s, &w, &ShootingOptions::default()).unwrap();
        assert!(orb.residual < 1e-10);
        let replayed = orb.orbit(&s).unwrap().itinerary();
        assert_eq!(&replayed[..3], &w.symbols[..]);
        let mono = monodromy(&orb, &s).unwrap();
        assert!((mono.det - 1.0).abs() < 1e-8 && mono.hyperbolic, "{mono:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let s = triangle(10.0);
        let w = Word::parse("1,2,1", WordKind::Periodic).unwrap();
        assert!(matches!(
            find_periodic_orbit(&s, &w, &ShootingOptions::default()),
            Err(Error::NotAdmissible(_))
        ));
        let w: Word = "1,2".parse().unwrap();
        assert!(matches!(
            find_periodic_orbit(&triangle(1.05), &w, &ShootingOptions::default()),
            Err(Error::NotVeryStrong)
        ));
    }
}
