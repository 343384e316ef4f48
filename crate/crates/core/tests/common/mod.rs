#![allow(dead_code)]

use std::f64::consts::PI;

use magbump::math::unit;
use magbump::{Bump, Scene, Vec2};

/// Three unit disks on an equilateral triangle of side 10, centroid at the origin.
pub fn triangle(b: f64) -> Scene {
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

pub fn disk(b: f64) -> Scene {
    Scene::new(vec![Bump::disk(Vec2::zeros(), 1.0, b).unwrap()]).unwrap()
}
