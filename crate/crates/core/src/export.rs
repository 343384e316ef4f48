//! Trajectory CSV and SVG rendering.
//!
//! The SVG draws in scene coordinates inside a group that flips the y axis,
//! so arcs are written as true circular arc commands with the sweep flag set
//! for counter-clockwise motion when `b > 0`. Numbers use fixed precision,
//! making the output byte-stable.

use std::fmt::Write as _;
use std::io;

use crate::flow::{Orbit, Piece};
use crate::geometry::{Scene, Shape};
use crate::math::{rotate, Vec2};

/// Writes `orbit,piece_index,type,t_start,t_end,x,y,vx,vy,bump`, sampling
/// every piece at arclength steps of at most `step` (both ends included).
pub fn write_trajectory_csv<W: io::Write>(orbits: &[Orbit], step: f64, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "orbit",
        "piece_index",
        "type",
        "t_start",
        "t_end",
        "x",
        "y",
        "vx",
        "vy",
        "bump",
    ])?;
    for (j, orbit) in orbits.iter().enumerate() {
        for (i, piece) in orbit.pieces.iter().enumerate() {
            let (kind, bump) = match *piece {
                Piece::Line { .. } => ("line", String::new()),
                Piece::Arc { bump, .. } => ("arc", (bump + 1).to_string()),
            };
            let n = ((piece.duration() / step.max(1e-9)).ceil() as usize).max(1);
            for k in 0..=n {
                let t = piece.t_start() + piece.duration() * k as f64 / n as f64;
                let (q, v) = piece.at(t);
                w.write_record([
                    j.to_string(),
                    i.to_string(),
                    kind.to_string(),
                    fmt(piece.t_start()),
                    fmt(piece.t_end()),
                    fmt(q.x),
                    fmt(q.y),
                    fmt(v.x),
                    fmt(v.y),
                    bump.clone(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.12}");
    if s == "-0.000000000000" {
        "0.000000000000".into()
    } else {
        s
    }
}

fn f6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvgOptions {
    /// `[xmin, ymin, xmax, ymax]` in scene coordinates; defaults to the scene
    /// bounds with a margin.
    pub view: Option<[f64; 4]>,
    pub pixels: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            view: None,
            pixels: 800.0,
        }
    }
}

fn scene_view(scene: &Scene) -> [f64; 4] {
    if scene.is_empty() {
        return [-5.0, -5.0, 5.0, 5.0];
    }
    let mut v = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    for b in scene.bumps() {
        let (c, r) = (b.center(), b.outer_radius());
        v = [
            v[0].min(c.x - r),
            v[1].min(c.y - r),
            v[2].max(c.x + r),
            v[3].max(c.y + r),
        ];
    }
    let m = 0.5 * (v[2] - v[0]).max(v[3] - v[1]);
    [v[0] - m, v[1] - m, v[2] + m, v[3] + m]
}

/// Bumps (red for `b > 0`, blue for `b < 0`) and orbits as an SVG document.
pub fn render_svg(scene: &Scene, orbits: &[Orbit], opts: &SvgOptions) -> String {
    let [x0, y0, x1, y1] = opts.view.unwrap_or_else(|| scene_view(scene));
    let (w, h) = (x1 - x0, y1 - y0);
    let px = opts.pixels;
    let stroke = 1.5 * w.max(h) / px;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        f6(px),
        f6(px * h / w),
        f6(x0),
        f6(-y1),
        f6(w),
        f6(h)
    );
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    for (i, b) in scene.bumps().iter().enumerate() {
        let fill = if b.field() > 0.0 {
            "#f4b6b0"
        } else {
            "#b0c8f4"
        };
        let attrs = format!(
            r##"fill="{fill}" stroke="#555555" stroke-width="{}" data-bump="{}" data-b="{}""##,
            f6(stroke),
            i + 1,
            f6(b.field())
        );
        match *b.shape() {
            Shape::Disk { center, radius } => {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{}" cy="{}" r="{}" {attrs}/>"#,
                    f6(center[0]),
                    f6(center[1]),
                    f6(radius)
                );
            }
            Shape::Ellipse {
                center,
                semi_axes,
                angle,
            } => {
                let _ = writeln!(
                    s,
                    r#"<ellipse cx="0" cy="0" rx="{}" ry="{}" transform="translate({},{}) rotate({})" {attrs}/>"#,
                    f6(semi_axes[0]),
                    f6(semi_axes[1]),
                    f6(center[0]),
                    f6(center[1]),
                    f6(angle.to_degrees())
                );
            }
        }
    }
    for orbit in orbits {
        let _ = writeln!(
            s,
            r##"<path fill="none" stroke="#222222" stroke-width="{}" d="{}"/>"##,
            f6(stroke),
            orbit_path(orbit, x0.min(y0).abs() + x1.max(y1).abs() + w + h)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Path data of an orbit; an escaping orbit ends in a ray of length `reach`.
fn orbit_path(orbit: &Orbit, reach: f64) -> String {
    let mut d = String::new();
    let mut pen: Option<Vec2> = None;
    if orbit.pieces.is_empty() {
        let _ = write!(d, "M{} {} ", f6(orbit.start.q.x), f6(orbit.start.q.y));
        pen = Some(orbit.start.q);
    }
    for piece in &orbit.pieces {
        let (start, _) = piece.at(piece.t_start());
        if pen.is_none_or(|p| (p - start).norm() > 1e-9) {
            let _ = write!(d, "M{} {} ", f6(start.x), f6(start.y));
        }
        match *piece {
            Piece::Line { .. } => {
                let (end, _) = piece.at(piece.t_end());
                let _ = write!(d, "L{} {} ", f6(end.x), f6(end.y));
                pen = Some(end);
            }
            Piece::Arc {
                center,
                angle,
                from,
                b,
                ..
            } => {
                let c = Vec2::from(center);
                let r = 1.0 / b.abs();
                let n = (angle.abs() / std::f64::consts::PI).ceil().max(1.0) as usize;
                let sweep = if angle > 0.0 { 1 } else { 0 };
                let rel = Vec2::from(from) - c;
                let mut end = Vec2::from(from);
                for k in 1..=n {
                    end = c + rotate(rel, angle * k as f64 / n as f64);
                    let _ = write!(
                        d,
                        "A{} {} 0 0 {} {} {} ",
                        f6(r),
                        f6(r),
                        sweep,
                        f6(end.x),
                        f6(end.y)
                    );
                }
                pen = Some(end);
            }
        }
    }
    if let Some(p) = pen {
        // escape ray
        let tail = p + reach * orbit.end.v;
        if orbit.escaped() {
            let _ = write!(d, "L{} {}", f6(tail.x), f6(tail.y));
        }
    }
    d.trim_end().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{propagate, GlancingPolicy, Limits, State};
    use crate::geometry::Bump;

    fn orbit(b: f64) -> (Scene, Orbit) {
        let s = Scene::new(vec![Bump::disk(Vec2::zeros(), 1.0, b).unwrap()]).unwrap();
        let o = propagate(
            &State::outside(Vec2::new(-3.0, 0.2), Vec2::new(1.0, 0.0)),
            &s,
            Limits::default(),
            GlancingPolicy::Straight,
        )
        .unwrap();
        (s, o)
    }

    #[test]
    fn csv_columns_and_ends() {
        let (_, o) = orbit(2.0);
        let mut buf = Vec::new();
        write_trajectory_csv(std::slice::from_ref(&o), 0.1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "orbit,piece_index,type,t_start,t_end,x,y,vx,vy,bump"
        );
        assert!(text.contains(",arc,") && text.contains(",line,"));
        let last_line_row = text
            .lines()
            .filter(|l| l.starts_with("0,0,"))
            .last()
            .unwrap();
        assert!(last_line_row.contains(&fmt(-(1.0f64 - 0.04).sqrt())));
    }

    #[test]
    fn svg_arc_sweep_follows_field() {
        let (s, o) = orbit(2.0);
        let svg = render_svg(&s, &[o], &SvgOptions::default());
        assert!(svg.contains(" 0 0 1 "));
        let (s, o) = orbit(-2.0);
        let svg2 = render_svg(&s, std::slice::from_ref(&o), &SvgOptions::default());
        assert!(svg2.contains(" 0 0 0 "));
        assert_eq!(svg2, render_svg(&s, &[o], &SvgOptions::default()));
    }
}
