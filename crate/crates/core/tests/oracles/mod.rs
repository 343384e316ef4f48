//! Independent numerical oracles used only by the test suites.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use magbump::{Bump, Scene, Vec2};

fn jv(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

fn field_at(scene: &Scene, q: Vec2) -> (Option<usize>, f64) {
    for (i, b) in scene.bumps().iter().enumerate() {
        if b.contains(q) {
            return (Some(i), b.field());
        }
    }
    (None, 0.0)
}

fn rk4(q: Vec2, v: Vec2, b: f64, h: f64) -> (Vec2, Vec2) {
    let f = |v: Vec2| b * jv(v);
    let (k1q, k1v) = (v, f(v));
    let (k2q, k2v) = (v + 0.5 * h * k1v, f(v + 0.5 * h * k1v));
    let (k3q, k3v) = (v + 0.5 * h * k2v, f(v + 0.5 * h * k2v));
    let (k4q, k4v) = (v + h * k3v, f(v + h * k3v));
    (
        q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// A region change found by the ODE oracle.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub time: f64,
    pub q: Vec2,
    pub v: Vec2,
    pub bump: usize,
    pub entering: bool,
}

/// Integrates `q' = v, v' = b(q) J v` with classical RK4 (`|b| h <= bh`
/// inside bumps, `h_out` outside) and locates region changes by bisecting
/// the step length. Returns the first `max_crossings` crossings.
pub fn ode_crossings(
    scene: &Scene,
    q0: Vec2,
    v0: Vec2,
    max_crossings: usize,
    max_time: f64,
    bh: f64,
    h_out: f64,
) -> Vec<Crossing> {
    let (mut q, mut v) = (q0, v0);
    let mut t = 0.0;
    let (mut region, mut b) = field_at(scene, q);
    let mut out = Vec::new();
    while out.len() < max_crossings && t < max_time {
        let h = if b == 0.0 { h_out } else { bh / b.abs() };
        let (q1, v1) = rk4(q, v, b, h);
        let (r1, _) = field_at(scene, q1);
        if r1 == region {
            q = q1;
            v = v1;
            t += h;
            continue;
        }
        // bisect the step length on the region test
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (qm, _) = rk4(q, v, b, mid);
            if field_at(scene, qm).0 == region {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (qc, vc) = rk4(q, v, b, hi);
        t += hi;
        q = qc;
        v = vc;
        let (entering, bump) = match (region, r1) {
            (None, Some(k)) => (true, k),
            (Some(k), _) => (false, k),
            (None, None) => unreachable!(),
        };
        out.push(Crossing {
            time: t,
            q,
            v,
            bump,
            entering,
        });
        region = field_at(scene, q).0;
        b = region.map_or(0.0, |k| scene.bump(k).field());
    }
    out
}

/// Minimal distance between two bump boundaries by a dense double loop
/// followed by repeated local zooming.
pub fn gap_grid(a: &Bump, b: &Bump) -> f64 {
    let n = 720;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let s = TAU * i as f64 / n as f64;
        let p = a.point(s);
        for j in 0..n {
            let t = TAU * j as f64 / n as f64;
            let d = (p - b.point(t)).norm();
            if d < best.0 {
                best = (d, s, t);
            }
        }
    }
    let mut width = TAU / n as f64;
    for _ in 0..40 {
        let (_, s0, t0) = best;
        for i in -4..=4 {
            for j in -4..=4 {
                let s = s0 + width * i as f64 / 4.0;
                let t = t0 + width * j as f64 / 4.0;
                let d = (a.point(s) - b.point(t)).norm();
                if d < best.0 {
                    best = (d, s, t);
                }
            }
        }
        width *= 0.5;
    }
    best.0
}

fn angle_at(x: Vec2, y: Vec2, z: Vec2) -> f64 {
    let a = (y - x).normalize();
    let c = (y - z).normalize();
    a.dot(&c).clamp(-1.0, 1.0).acos()
}

/// Brute-force minimal turning angle: a grid over the boundary parameters
/// of every bump triple, then hierarchical zooming around the best cells.
/// Capped at `pi / 3`.
pub fn alpha_min_grid(scene: &Scene) -> f64 {
    let n = scene.len();
    let mut best = PI / 3.0;
    for l in 0..n {
        for k in 0..n {
            for m in k + 1..n {
                if k == l || m == l {
                    continue;
                }
                best = best.min(triple_grid(scene.bump(k), scene.bump(l), scene.bump(m)));
            }
        }
    }
    best
}

fn triple_grid(bk: &Bump, bl: &Bump, bm: &Bump) -> f64 {
    let f = |p: [f64; 3]| angle_at(bk.point(p[0]), bl.point(p[1]), bm.point(p[2]));
    let g = 64;
    let h = TAU / g as f64;
    let mut cells: Vec<(f64, [f64; 3])> = Vec::with_capacity(g * g * g);
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                let p = [i as f64 * h, j as f64 * h, k as f64 * h];
                cells.push((f(p), p));
            }
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for &(v0, p0) in cells.iter().take(16) {
        let (mut v, mut p) = (v0, p0);
        let mut width = h;
        for _ in 0..60 {
            let mut improved = (v, p);
            for a in -2..=2 {
                for b in -2..=2 {
                    for c in -2..=2 {
                        let q = [
                            p[0] + width * a as f64 / 2.0,
                            p[1] + width * b as f64 / 2.0,
                            p[2] + width * c as f64 / 2.0,
                        ];
                        let fq = f(q);
                        if fq < improved.0 {
                            improved = (fq, q);
                        }
                    }
                }
            }
            if improved.0 < v {
                (v, p) = improved;
            } else {
                width *= 0.5;
            }
            if width < 1e-10 {
                break;
            }
        }
        best = best.min(v);
    }
    best
}

/// Focal point of a parallel beam: intersection of the Larmor circles of two
/// neighbouring rays, taking the intersection nearer to `near`.
pub fn larmor_pair_focus(c1: Vec2, c2: Vec2, radius: f64, near: Vec2) -> Vec2 {
    let mid = 0.5 * (c1 + c2);
    let half = 0.5 * (c2 - c1).norm();
    let off = (radius * radius - half * half).max(0.0).sqrt();
    let n = jv((c2 - c1).normalize());
    let (p, q) = (mid + off * n, mid - off * n);
    if (p - near).norm() < (q - near).norm() {
        p
    } else {
        q
    }
}
