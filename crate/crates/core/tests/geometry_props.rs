mod common;
mod oracles;

use std::f64::consts::PI;

use magbump::geometry::{classify_field, curvature_range, very_strong_threshold};
use magbump::{Bump, Error, Scene, Vec2};
use proptest::prelude::*;

fn three_disks(c: [(f64, f64); 3], r: [f64; 3]) -> Option<Scene> {
    let bumps = (0..3)
        .map(|i| Bump::disk(Vec2::new(c[i].0, c[i].1), r[i], 12.0))
        .collect::<Result<Vec<_>, _>>()
        .ok()?;
    let s = Scene::new(bumps).ok()?;
    s.alpha_min().ok()?;
    Some(s)
}

#[test]
fn ellipse_curvature_range_matches_sampling() {
    let e = Bump::ellipse(Vec2::new(1.0, 2.0), 2.0, 1.0, 0.4, 1.0).unwrap();
    let (lo, hi) = curvature_range(&e);
    // parametric curvature a b / (a^2 sin^2 + b^2 cos^2)^(3/2)
    let (a, b) = (2.0f64, 1.0f64);
    let samples: Vec<f64> = (0..200_000)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 200_000.0;
            a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5)
        })
        .collect();
    let smin = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = samples.iter().copied().fold(0.0, f64::max);
    assert!((lo - smin).abs() < 1e-9 && (hi - smax).abs() < 1e-9);
    assert!((lo - 0.25).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
}

#[test]
fn ellipse_gaps_match_grid() {
    let cases = [
        (
            Bump::ellipse(Vec2::zeros(), 2.0, 1.0, 0.3, 1.0),
            Bump::ellipse(Vec2::new(5.0, 1.0), 1.5, 0.7, 1.2, 1.0),
        ),
        (
            Bump::ellipse(Vec2::zeros(), 1.0, 0.5, 0.0, 1.0),
            Bump::disk(Vec2::new(0.5, 3.0), 1.0, 1.0),
        ),
    ];
    for (a, b) in cases {
        let s = Scene::new(vec![a.unwrap(), b.unwrap()]).unwrap();
        let g = s.pairwise_gap(0).unwrap();
        let oracle = oracles::gap_grid(s.bump(0), s.bump(1));
        assert!((g - oracle).abs() < 1e-8, "{g} vs {oracle}");
    }
}

#[test]
fn alpha_min_matches_grid_oracle() {
    let s = common::triangle(10.0);
    let a = s.alpha_min().unwrap();
    assert!((a - oracles::alpha_min_grid(&s)).abs() < 1e-6);
    let s = three_disks([(0.0, 0.0), (6.0, 1.0), (2.0, 5.0)], [1.0, 0.7, 1.2]).unwrap();
    assert!((s.alpha_min().unwrap() - oracles::alpha_min_grid(&s)).abs() < 1e-6);
}

#[test]
fn collinear_rejected() {
    let s = Scene::new(
        (0..3)
            .map(|i| Bump::disk(Vec2::new(5.0 * i as f64, 0.0), 1.0, 1.0).unwrap())
            .collect(),
    )
    .unwrap();
    assert!(matches!(s.alpha_min(), Err(Error::CollinearBumps(..))));
    assert!(!s.check_no_three_on_line());
    assert!(matches!(s.classify(), Err(Error::CollinearBumps(..))));
}

#[test]
fn threshold_example() {
    let x = very_strong_threshold(1.0, PI / 3.0, 1.0).unwrap();
    assert!((x - 2.3596).abs() < 1e-4);
    let c = 3.0 / PI;
    assert!(x <= c + 2.0);
    assert!((very_strong_threshold(1e12, 1.0, 0.7).unwrap() - 0.7).abs() < 1e-9);
    assert!(very_strong_threshold(0.0, 1.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn alpha_min_rigid_motion_invariant(rot in 0.0..6.3f64, sx in -20.0..20.0f64, sy in -20.0..20.0f64,
                                        y2 in 2.5..7.0f64, x2 in -2.0..8.0f64) {
        if let Some(s) = three_disks([(0.0, 0.0), (7.0, 0.0), (x2, y2)], [1.0, 1.0, 0.8]) {
            let m = s.moved(rot, Vec2::new(sx, sy)).unwrap();
            prop_assert!((s.alpha_min().unwrap() - m.alpha_min().unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_min_shrinks_under_inflation(f in 1.0..1.6f64, y2 in 3.0..7.0f64) {
        let base = [(0.0, 0.0), (8.0, 0.0), (4.0, y2)];
        if let (Some(a), Some(b)) = (three_disks(base, [1.0; 3]), three_disks(base, [f; 3])) {
            prop_assert!(b.alpha_min().unwrap() <= a.alpha_min().unwrap() + 1e-12);
        }
    }

    #[test]
    fn regime_depends_on_magnitude(b in 0.01..10.0f64, r in 0.2..3.0f64, ell in any::<bool>()) {
        let bump = if ell { Bump::ellipse(Vec2::zeros(), r, 0.6 * r, 0.5, b) } else { Bump::disk(Vec2::zeros(), r, b) }.unwrap();
        prop_assert_eq!(classify_field(&bump), classify_field(&bump.with_field(-b).unwrap()));
    }

    #[test]
    fn threshold_solves_quadratic(d in 0.01..100.0f64, alpha in 0.01..(PI / 3.0), k in 0.01..10.0f64) {
        let x = very_strong_threshold(d, alpha, k).unwrap();
        let c = 1.0 / (d * alpha);
        // 1/d = x (x - k) alpha / (x + k)  <=>  x^2 - (c + k) x - c k = 0
        let residual = (x * x - (c + k) * x - c * k) / (x * x + (c + k) * x + c * k);
        prop_assert!(residual.abs() < 1e-12);
        prop_assert!(x <= c + 2.0 * k);
    }
}
