//! Scene model: convex bumps, boundary geometry, inter-bump constants and
//! field-regime classification.

mod config;
mod scene;
mod shape;

pub use config::{parse_scene, scene_to_toml};
pub use scene::{
    bump_distance, classify_field, classify_scene, curvature_range, very_strong_threshold,
    FieldRegime, Scene, SceneRegime, COLLINEAR_TOL,
};
pub use shape::{Bump, RayRoots, Shape};
