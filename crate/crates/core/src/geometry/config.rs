//! TOML scene files.
//!
//! ```toml
//! [[bump]]
//! kind = "disk"
//! center = [0.0, 0.0]
//! radius = 1.0
//! b = 2.0
//!
//! [[bump]]
//! kind = "ellipse"
//! center = [6.0, 0.0]
//! semi_axes = [2.0, 1.0]   # a >= b > 0
//! angle = 0.3              # radians, optional
//! b = -3.0
//! ```
//!
//! Errors cite the line (1-based) and field that caused them.

use serde::Deserialize;
use toml::Spanned;

use super::scene::Scene;
use super::shape::{Bump, Shape};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    bump: Vec<Spanned<BumpEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpEntry {
    kind: Spanned<String>,
    center: Spanned<[f64; 2]>,
    radius: Option<Spanned<f64>>,
    semi_axes: Option<Spanned<[f64; 2]>>,
    angle: Option<Spanned<f64>>,
    b: Spanned<f64>,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())]
        .bytes()
        .filter(|&c| c == b'\n')
        .count()
        + 1
}

/// Parses a scene description; see the module docs for the format.
pub fn parse_scene(src: &str) -> Result<Scene> {
    let file: SceneFile = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| line_of(src, s.start)).unwrap_or(0);
        Error::Config(format!("line {line}: {}", e.message()))
    })?;
    let fail = |span: std::ops::Range<usize>, field: &str, msg: &str| {
        Error::Config(format!(
            "line {}: field `{field}`: {msg}",
            line_of(src, span.start)
        ))
    };
    let mut bumps = Vec::with_capacity(file.bump.len());
    for entry in &file.bump {
        let e = entry.get_ref();
        let shape = match e.kind.get_ref().as_str() {
            "disk" => {
                let r = e
                    .radius
                    .as_ref()
                    .ok_or_else(|| fail(entry.span(), "radius", "missing for a disk"))?;
                if e.semi_axes.is_some() {
                    return Err(fail(entry.span(), "semi_axes", "not allowed for a disk"));
                }
                if !(*r.get_ref() > 0.0) {
                    return Err(fail(r.span(), "radius", "must be positive"));
                }
                Shape::Disk {
                    center: *e.center.get_ref(),
                    radius: *r.get_ref(),
                }
            }
            "ellipse" => {
                let ax = e
                    .semi_axes
                    .as_ref()
                    .ok_or_else(|| fail(entry.span(), "semi_axes", "missing for an ellipse"))?;
                if e.radius.is_some() {
                    return Err(fail(entry.span(), "radius", "not allowed for an ellipse"));
                }
                let [a, b] = *ax.get_ref();
                if !(b > 0.0 && a >= b) {
                    return Err(fail(ax.span(), "semi_axes", "must satisfy a >= b > 0"));
                }
                Shape::Ellipse {
                    center: *e.center.get_ref(),
                    semi_axes: [a, b],
                    angle: e.angle.as_ref().map(|x| *x.get_ref()).unwrap_or(0.0),
                }
            }
            other => {
                return Err(fail(
                    e.kind.span(),
                    "kind",
                    &format!("unknown kind {other:?} (expected \"disk\" or \"ellipse\")"),
                ))
            }
        };
        if *e.b.get_ref() == 0.0 || !e.b.get_ref().is_finite() {
            return Err(fail(
                e.b.span(),
                "b",
                "field strength must be finite and nonzero",
            ));
        }
        let bump = Bump::new(shape, *e.b.get_ref()).map_err(|err| match err {
            Error::InvalidBump { reason, .. } => fail(entry.span(), "bump", &reason),
            other => other,
        })?;
        bumps.push(bump);
    }
    Scene::new(bumps).map_err(|err| match err {
        Error::Overlap(i, j) => fail(
            file.bump[j].span(),
            "bump",
            &format!("bumps {} and {} overlap or touch", i + 1, j + 1),
        ),
        other => other,
    })
}

/// Serializes a scene back to the TOML format.
pub fn scene_to_toml(scene: &Scene) -> String {
    let mut out = String::new();
    for b in scene.bumps() {
        out.push_str("[[bump]]\n");
        match *b.shape() {
            Shape::Disk { center, radius } => {
                out.push_str("kind = \"disk\"\n");
                out.push_str(&format!("center = [{:?}, {:?}]\n", center[0], center[1]));
                out.push_str(&format!("radius = {radius:?}\n"));
            }
            Shape::Ellipse {
                center,
                semi_axes,
                angle,
            } => {
                out.push_str("kind = \"ellipse\"\n");
                out.push_str(&format!("center = [{:?}, {:?}]\n", center[0], center[1]));
                out.push_str(&format!(
                    "semi_axes = [{:?}, {:?}]\n",
                    semi_axes[0], semi_axes[1]
                ));
                out.push_str(&format!("angle = {angle:?}\n"));
            }
        }
        out.push_str(&format!("b = {:?}\n\n", b.field()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[[bump]]
kind = "disk"
center = [0.0, 0.0]
radius = 1.0
b = 2.0

[[bump]]
kind = "ellipse"
center = [6.0, 0.0]
semi_axes = [2.0, 1.0]
angle = 0.3
b = -3.0
"#;

    #[test]
    fn parses_and_roundtrips() {
        let s = parse_scene(GOOD).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.bump(1).field(), -3.0);
        let again = parse_scene(&scene_to_toml(&s)).unwrap();
        assert_eq!(again.bump(1).shape(), s.bump(1).shape());
    }

    #[test]
    fn syntax_error_cites_line() {
        let err = parse_scene("[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn bad_field_cites_line_and_field() {
        let src = "[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = -1.0\nb = 1.0\n";
        let err = parse_scene(src).unwrap_err().to_string();
        assert!(err.contains("line 4") && err.contains("radius"), "{err}");
        let src = "[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0\nb = 0.0\n";
        let err = parse_scene(src).unwrap_err().to_string();
        assert!(err.contains("line 5") && err.contains("`b`"), "{err}");
        let src = "[[bump]]\nkind = \"square\"\ncenter = [0.0, 0.0]\nb = 1.0\n";
        let err = parse_scene(src).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("kind"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let src =
            "[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0\nb = 1.0\ncolour = 3\n";
        let err = parse_scene(src).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn overlap_reported() {
        let src = "[[bump]]\nkind = \"disk\"\ncenter = [0.0, 0.0]\nradius = 1.0\nb = 1.0\n\n[[bump]]\nkind = \"disk\"\ncenter = [1.0, 0.0]\nradius = 1.0\nb = 1.0\n";
        let err = parse_scene(src).unwrap_err().to_string();
        assert!(err.contains("overlap") && err.contains("line 7"), "{err}");
    }
}
