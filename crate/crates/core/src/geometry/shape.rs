//! Convex bump shapes and their boundary geometry.
//!
//! Boundaries are parameterized counterclockwise by an angle `theta`
//! (polar angle for disks, eccentric anomaly for ellipses). Section
//! coordinates use arclength `s`, which is exact for disks and tabulated by
//! Gauss-Legendre quadrature for ellipses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{self, angle_of, perp, rotate, wrap_2pi, wrap_pi, Vec2, TAU};

const ARCLEN_PANELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        /// `(a, b)` with `a >= b > 0`.
        semi_axes: [f64; 2],
        angle: f64,
    },
}

/// Roots of a ray `q + t v` against a bump boundary.
#[derive(Debug, Clone, Copy)]
pub struct RayRoots {
    pub t_in: f64,
    pub t_out: f64,
    /// Squared half-chord length along the ray; negative when the line misses.
    pub disc: f64,
    /// Parameter of the chord midpoint (closest approach for disks).
    pub t_mid: f64,
}

/// A convex region carrying the constant field `b`.
#[derive(Debug, Clone)]
pub struct Bump {
    shape: Shape,
    b: f64,
    /// Cumulative arclength at panel boundaries (ellipses only).
    arclen: Vec<f64>,
}

impl Bump {
    pub fn disk(center: Vec2, radius: f64, b: f64) -> Result<Self> {
        Self::new(
            Shape::Disk {
                center: [center.x, center.y],
                radius,
            },
            b,
        )
    }

    pub fn ellipse(center: Vec2, a: f64, b_axis: f64, angle: f64, b: f64) -> Result<Self> {
        Self::new(
            Shape::Ellipse {
                center: [center.x, center.y],
                semi_axes: [a, b_axis],
                angle,
            },
            b,
        )
    }

    pub fn new(shape: Shape, b: f64) -> Result<Self> {
        let bad = |reason: &str| {
            Err(Error::InvalidBump {
                index: 0,
                reason: reason.to_string(),
            })
        };
        if !(b.is_finite() && b != 0.0) {
            return bad("field strength b must be finite and nonzero");
        }
        match shape {
            Shape::Disk { center, radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return bad("radius must be positive");
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return bad("center must be finite");
                }
            }
            Shape::Ellipse {
                center,
                semi_axes: [a, bb],
                angle,
            } => {
                if !(a.is_finite() && bb.is_finite() && bb > 0.0 && a >= bb) {
                    return bad("semi_axes must satisfy a >= b > 0");
                }
                if !(center.iter().all(|c| c.is_finite()) && angle.is_finite()) {
                    return bad("center and angle must be finite");
                }
            }
        }
        let mut bump = Bump {
            shape,
            b,
            arclen: Vec::new(),
        };
        if let Shape::Ellipse { .. } = shape {
            let h = TAU / ARCLEN_PANELS as f64;
            let mut table = Vec::with_capacity(ARCLEN_PANELS + 1);
            let mut acc = 0.0;
            table.push(0.0);
            for i in 0..ARCLEN_PANELS {
                let lo = i as f64 * h;
                acc += math::gauss_legendre(|t| bump.speed(t), lo, lo + h);
                table.push(acc);
            }
            bump.arclen = table;
        }
        Ok(bump)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Field strength `b` (units 1/length at unit speed).
    pub fn field(&self) -> f64 {
        self.b
    }

    /// Same shape, different field.
    pub fn with_field(&self, b: f64) -> Result<Self> {
        Self::new(self.shape, b)
    }

    pub fn center(&self) -> Vec2 {
        match self.shape {
            Shape::Disk { center, .. } | Shape::Ellipse { center, .. } => {
                Vec2::new(center[0], center[1])
            }
        }
    }

    /// Radius of the smallest disk about the bump's center containing it.
    pub fn outer_radius(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => radius,
            Shape::Ellipse { semi_axes, .. } => semi_axes[0],
        }
    }

    /// Applies the rigid motion `q -> R(rotation) q + shift`.
    pub fn moved(&self, rotation: f64, shift: Vec2) -> Result<Self> {
        let c = rotate(self.center(), rotation) + shift;
        let shape = match self.shape {
            Shape::Disk { radius, .. } => Shape::Disk {
                center: [c.x, c.y],
                radius,
            },
            Shape::Ellipse {
                semi_axes, angle, ..
            } => Shape::Ellipse {
                center: [c.x, c.y],
                semi_axes,
                angle: angle + rotation,
            },
        };
        Self::new(shape, self.b)
    }

    /// Same shape with the boundary pushed out by a scale factor about the center.
    pub fn inflated(&self, factor: f64) -> Result<Self> {
        let shape = match self.shape {
            Shape::Disk { center, radius } => Shape::Disk {
                center,
                radius: radius * factor,
            },
            Shape::Ellipse {
                center,
                semi_axes,
                angle,
            } => Shape::Ellipse {
                center,
                semi_axes: [semi_axes[0] * factor, semi_axes[1] * factor],
                angle,
            },
        };
        Self::new(shape, self.b)
    }

    fn to_local(&self, q: Vec2) -> Vec2 {
        match self.shape {
            Shape::Disk { .. } => q - self.center(),
            Shape::Ellipse { angle, .. } => rotate(q - self.center(), -angle),
        }
    }

    fn from_local_dir(&self, v: Vec2) -> Vec2 {
        match self.shape {
            Shape::Disk { .. } => v,
            Shape::Ellipse { angle, .. } => rotate(v, angle),
        }
    }

    fn axes(&self) -> (f64, f64) {
        match self.shape {
            Shape::Disk { radius, .. } => (radius, radius),
            Shape::Ellipse { semi_axes, .. } => (semi_axes[0], semi_axes[1]),
        }
    }

    pub fn point(&self, theta: f64) -> Vec2 {
        let (a, b) = self.axes();
        let (s, c) = theta.sin_cos();
        self.center() + self.from_local_dir(Vec2::new(a * c, b * s))
    }

    /// `|d point / d theta|`.
    pub fn speed(&self, theta: f64) -> f64 {
        let (a, b) = self.axes();
        let (s, c) = theta.sin_cos();
        (a * a * s * s + b * b * c * c).sqrt()
    }

    /// Counterclockwise unit tangent.
    pub fn tangent(&self, theta: f64) -> Vec2 {
        let (a, b) = self.axes();
        let (s, c) = theta.sin_cos();
        self.from_local_dir(Vec2::new(-a * s, b * c)).normalize()
    }

    /// Outward unit normal.
    pub fn normal(&self, theta: f64) -> Vec2 {
        -perp(self.tangent(theta))
    }

    pub fn curvature(&self, theta: f64) -> f64 {
        let (a, b) = self.axes();
        let sp = self.speed(theta);
        a * b / (sp * sp * sp)
    }

    /// Exact extremal boundary curvatures `(min, max)`.
    pub fn curvature_range(&self) -> (f64, f64) {
        let (a, b) = self.axes();
        match self.shape {
            Shape::Disk { radius, .. } => (1.0 / radius, 1.0 / radius),
            Shape::Ellipse { .. } => (b / (a * a), a / (b * b)),
        }
    }

    /// Boundary parameter of a point (exact for boundary points, radial
    /// projection in the normalized frame otherwise).
    pub fn param_of(&self, q: Vec2) -> f64 {
        let (a, b) = self.axes();
        let m = self.to_local(q);
        wrap_2pi((m.y / b).atan2(m.x / a))
    }

    /// Projects a point near the boundary back onto it.
    pub fn snap(&self, q: Vec2) -> Vec2 {
        self.point(self.param_of(q))
    }

    /// Signed level function, negative inside. Equals the signed distance for disks.
    pub fn level(&self, q: Vec2) -> f64 {
        let (a, b) = self.axes();
        let m = self.to_local(q);
        match self.shape {
            Shape::Disk { radius, .. } => m.norm() - radius,
            Shape::Ellipse { .. } => b * (Vec2::new(m.x / a, m.y / b).norm() - 1.0),
        }
    }

    pub fn contains(&self, q: Vec2) -> bool {
        self.level(q) < 0.0
    }

    /// Intersection of the line `q + t v` with the boundary.
    pub fn ray_roots(&self, q: Vec2, v: Vec2) -> RayRoots {
        let (a, b) = self.axes();
        let m = self.to_local(q);
        let w = match self.shape {
            Shape::Disk { .. } => v,
            Shape::Ellipse { angle, .. } => rotate(v, -angle),
        };
        let ms = Vec2::new(m.x / a, m.y / b);
        let ws = Vec2::new(w.x / a, w.y / b);
        let qa = ws.norm_squared();
        let qb = ms.dot(&ws);
        let qc = ms.norm_squared() - 1.0;
        let disc = (qb * qb - qa * qc) / (qa * qa);
        let t_mid = -qb / qa;
        if disc < 0.0 {
            return RayRoots {
                t_in: t_mid,
                t_out: t_mid,
                disc,
                t_mid,
            };
        }
        let sq = (qb * qb - qa * qc).sqrt();
        let big = -(qb + sq.copysign(qb));
        let (mut t1, mut t2) = if big != 0.0 {
            let r1 = big / qa;
            let r2 = qc / big;
            (r1.min(r2), r1.max(r2))
        } else {
            (t_mid, t_mid)
        };
        // polish against the quadratic
        let poly = |t: f64| qa * t * t + 2.0 * qb * t + qc;
        let dpoly = |t: f64| 2.0 * (qa * t + qb);
        for t in [&mut t1, &mut t2] {
            for _ in 0..2 {
                let d = dpoly(*t);
                if d.abs() > 1e-8 {
                    *t -= poly(*t) / d;
                }
            }
        }
        RayRoots {
            t_in: t1,
            t_out: t2,
            disc,
            t_mid,
        }
    }

    /// Support function `max_{q in C} <q, n>`.
    pub fn support(&self, n: Vec2) -> f64 {
        let (a, b) = self.axes();
        let nl = match self.shape {
            Shape::Disk { .. } => n,
            Shape::Ellipse { angle, .. } => rotate(n, -angle),
        };
        self.center().dot(&n) + ((a * nl.x).powi(2) + (b * nl.y).powi(2)).sqrt()
    }

    /// Angular interval `(lo, hi)`, `hi - lo < pi`, of directions from an
    /// exterior point `y` into the bump.
    pub fn direction_cone(&self, y: Vec2) -> (f64, f64) {
        let beta = angle_of(self.center() - y);
        match self.shape {
            Shape::Disk { radius, .. } => {
                let dist = (self.center() - y).norm();
                let half = (radius / dist).min(1.0).asin();
                (beta - half, beta + half)
            }
            Shape::Ellipse { .. } => {
                let (a, b) = self.axes();
                let m = self.to_local(y);
                let ys = Vec2::new(m.x / a, m.y / b);
                let r = ys.norm().max(1.0);
                let gamma = angle_of(ys);
                let half = (1.0 / r).acos();
                let d1 = wrap_pi(angle_of(self.point(gamma + half) - y) - beta);
                let d2 = wrap_pi(angle_of(self.point(gamma - half) - y) - beta);
                (beta + d1.min(d2), beta + d1.max(d2))
            }
        }
    }

    /// Boundary parameter of the point closest to `p` (for `p` outside).
    pub fn closest_param(&self, p: Vec2) -> f64 {
        match self.shape {
            Shape::Disk { .. } => self.param_of(p),
            Shape::Ellipse { .. } => {
                const N: usize = 64;
                let dist2 = |t: f64| (self.point(t) - p).norm_squared();
                let h = TAU / N as f64;
                let best = (0..N)
                    .map(|i| i as f64 * h)
                    .min_by(|x, y| dist2(*x).total_cmp(&dist2(*y)))
                    .unwrap_or(0.0);
                let (t, _) = math::brent_min(dist2, best - h, best + h, 1e-12);
                wrap_2pi(t)
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => TAU * radius,
            Shape::Ellipse { .. } => self.arclen[ARCLEN_PANELS],
        }
    }

    /// Arclength from `theta = 0` counterclockwise to `theta` in `[0, 2 pi)`.
    pub fn arclength(&self, theta: f64) -> f64 {
        let t = wrap_2pi(theta);
        match self.shape {
            Shape::Disk { radius, .. } => radius * t,
            Shape::Ellipse { .. } => {
                let h = TAU / ARCLEN_PANELS as f64;
                let i = ((t / h) as usize).min(ARCLEN_PANELS - 1);
                let lo = i as f64 * h;
                self.arclen[i] + math::gauss_legendre(|x| self.speed(x), lo, t)
            }
        }
    }

    /// Inverse of [`Bump::arclength`]; `s` is reduced modulo the perimeter.
    pub fn param_at(&self, s: f64) -> f64 {
        match self.shape {
            Shape::Disk { radius, .. } => wrap_2pi(s / radius),
            Shape::Ellipse { .. } => {
                let per = self.perimeter();
                let s = s.rem_euclid(per);
                let h = TAU / ARCLEN_PANELS as f64;
                let i = self
                    .arclen
                    .partition_point(|&x| x <= s)
                    .clamp(1, ARCLEN_PANELS)
                    - 1;
                let frac = (s - self.arclen[i]) / (self.arclen[i + 1] - self.arclen[i]);
                let mut t = (i as f64 + frac) * h;
                for _ in 0..8 {
                    let lo = i as f64 * h;
                    let f = self.arclen[i] + math::gauss_legendre(|x| self.speed(x), lo, t) - s;
                    let step = f / self.speed(t);
                    t -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                wrap_2pi(t)
            }
        }
    }

    /// Swept angle `psi in (0, 2 pi)` along the circle `(center, radius)`,
    /// starting at `start` and turning with orientation `sigma = +-1`, at
    /// which the circle first leaves the bump. `None` if the circle never
    /// meets the boundary (or only touches it).
    ///
    /// `from_boundary` marks `start` as a boundary point entered by the
    /// circle; that root is excluded.
    pub fn circle_exit(
        &self,
        center: Vec2,
        radius: f64,
        start: Vec2,
        sigma: f64,
        from_boundary: bool,
    ) -> Option<f64> {
        let r0 = start - center;
        let swept = |p: Vec2| {
            let a = sigma * math::cross(r0, p - center).atan2(r0.dot(&(p - center)));
            wrap_2pi(a)
        };
        match self.shape {
            Shape::Disk { radius: rd, .. } => {
                let cd = self.center();
                let axis = cd - center;
                let dist = axis.norm();
                if from_boundary {
                    if dist == 0.0 {
                        return None;
                    }
                    // second intersection = mirror image of `start` in the line of centers
                    let e = axis / dist;
                    let rel = start - center;
                    let along = e * rel.dot(&e);
                    let mirrored = center + 2.0 * along - rel;
                    let psi = swept(mirrored);
                    if psi <= 0.0 || psi >= TAU || (mirrored - start).norm() < 1e-13 * radius {
                        return None;
                    }
                    Some(psi)
                } else {
                    if dist > radius + rd || dist < (rd - radius).abs() || dist == 0.0 {
                        return None;
                    }
                    let e = axis / dist;
                    let a = (dist * dist + radius * radius - rd * rd) / (2.0 * dist);
                    let h = (radius * radius - a * a).max(0.0).sqrt();
                    if h == 0.0 {
                        return None;
                    }
                    let p1 = center + a * e + h * perp(e);
                    let p2 = center + a * e - h * perp(e);
                    let psi = swept(p1).min(swept(p2));
                    (psi > 0.0).then_some(psi)
                }
            }
            Shape::Ellipse { .. } => {
                let (a, b) = self.axes();
                let point = |psi: f64| center + rotate(r0, sigma * psi);
                let g = |psi: f64| {
                    let m = self.to_local(point(psi));
                    (m.x / a).powi(2) + (m.y / b).powi(2) - 1.0
                };
                // from the boundary g vanishes at 0 and 2 pi; dividing by
                // sin(psi / 2) keeps the sign of the interior part
                let h = |psi: f64| {
                    if !from_boundary {
                        g(psi)
                    } else if psi <= 0.0 {
                        -1.0
                    } else {
                        g(psi) / (0.5 * psi).sin()
                    }
                };
                const N: usize = 1440;
                let step = TAU / N as f64;
                let mut prev_psi = 0.0;
                let mut prev = if from_boundary { -1.0 } else { g(0.0) };
                for k in 1..N {
                    let psi = k as f64 * step;
                    let val = h(psi);
                    if prev <= 0.0 && val > 0.0 {
                        let root = math::bisect(h, prev_psi, psi, 80);
                        return Some(root);
                    }
                    prev = val;
                    prev_psi = psi;
                }
                if from_boundary && prev <= 0.0 {
                    // nearly tangent entries exit just short of a full turn
                    for j in 1..60 {
                        let psi = TAU - step * 0.5f64.powi(j);
                        if psi >= TAU {
                            break;
                        }
                        if h(psi) > 0.0 {
                            return Some(math::bisect(h, prev_psi, psi, 80));
                        }
                        prev_psi = psi;
                    }
                }
                None
            }
        }
    }

    /// Angle (radians) of the rotation applied to the ellipse axes; 0 for disks.
    pub fn orientation(&self) -> f64 {
        match self.shape {
            Shape::Disk { .. } => 0.0,
            Shape::Ellipse { angle, .. } => angle,
        }
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::Disk { .. })
    }
}
