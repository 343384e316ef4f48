//! Exact event-driven propagation: straight lines outside the bumps, Larmor
//! arcs inside, with boundary crossings computed in closed form (disks) or
//! by bracketed root finding (ellipses).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{classify_field, FieldRegime, Scene};
use crate::math::{perp, rotate, Vec2, TAU};

/// Half-chord squared below which a ray counts as tangent to a boundary.
pub const GLANCING_DISC: f64 = 1e-10;
/// Roots of a ray closer than this to its origin count as behind it.
pub const RAY_EPS: f64 = 1e-9;
/// A point this close to a boundary (level function) counts as on it.
pub const ON_BOUNDARY: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Outside,
    Inside(usize),
}

/// Unit-speed phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub q: Vec2,
    pub v: Vec2,
    pub region: Region,
}

impl State {
    /// Normalizes `v` to unit length.
    pub fn new(q: Vec2, v: Vec2, region: Region) -> Self {
        State {
            q,
            v: v.normalize(),
            region,
        }
    }

    pub fn outside(q: Vec2, v: Vec2) -> Self {
        Self::new(q, v, Region::Outside)
    }

    /// Places the state in the bump containing `q`, if any.
    pub fn located(q: Vec2, v: Vec2, scene: &Scene) -> Self {
        let region = scene
            .bumps()
            .iter()
            .position(|b| b.contains(q))
            .map_or(Region::Outside, Region::Inside);
        Self::new(q, v, region)
    }
}

/// Continuation rule for trajectories tangent to a bump boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GlancingPolicy {
    /// Continue along the straight line.
    #[default]
    Straight,
    /// Insert the full Larmor circle when it curves into a strong bump.
    Larmor,
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_events: usize,
    pub max_time: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_events: 10_000,
            max_time: 1e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Piece {
    Line {
        from: [f64; 2],
        dir: [f64; 2],
        t_start: f64,
        length: f64,
    },
    Arc {
        bump: usize,
        center: [f64; 2],
        from: [f64; 2],
        v_from: [f64; 2],
        b: f64,
        /// Signed swept angle, `b * duration`.
        angle: f64,
        t_start: f64,
        duration: f64,
    },
}

impl Piece {
    pub fn t_start(&self) -> f64 {
        match *self {
            Piece::Line { t_start, .. } | Piece::Arc { t_start, .. } => t_start,
        }
    }

    pub fn duration(&self) -> f64 {
        match *self {
            Piece::Line { length, .. } => length,
            Piece::Arc { duration, .. } => duration,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start() + self.duration()
    }

    /// Position and velocity at absolute time `t` (clamped to the piece).
    pub fn at(&self, t: f64) -> (Vec2, Vec2) {
        let tau = (t - self.t_start()).clamp(0.0, self.duration());
        match *self {
            Piece::Line { from, dir, .. } => {
                let d = Vec2::from(dir);
                (Vec2::from(from) + tau * d, d)
            }
            Piece::Arc {
                from, v_from, b, ..
            } => {
                let s = advance_in_field(
                    &State::new(Vec2::from(from), Vec2::from(v_from), Region::Outside),
                    b,
                    tau,
                );
                (s.q, s.v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Entry,
    Exit,
    Glancing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub bump: usize,
    pub time: f64,
    pub q: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Escaped,
    EventLimit,
    TimeLimit,
    InteriorTrapped,
}

/// A trajectory as alternating straight segments and Larmor arcs.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub start: State,
    pub pieces: Vec<Piece>,
    pub events: Vec<Event>,
    /// State after the last piece (on the escaping ray when escaped).
    pub end: State,
    pub end_time: f64,
    pub termination: Termination,
    pub glancing: bool,
}

impl Orbit {
    pub fn escaped(&self) -> bool {
        self.termination == Termination::Escaped
    }

    pub fn interior_trapped(&self) -> bool {
        self.termination == Termination::InteriorTrapped
    }

    /// Bump indices in traversal order, starting with the initial bump if the
    /// orbit starts inside one.
    pub fn itinerary(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Region::Inside(l) = self.start.region {
            out.push(l);
        }
        out.extend(
            self.events
                .iter()
                .filter(|e| e.kind == EventKind::Entry)
                .map(|e| e.bump),
        );
        out
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Piece> {
        self.pieces
            .iter()
            .filter(|p| matches!(p, Piece::Arc { .. }))
    }
}

/// Result of a forward ray query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hit {
    Entry { bump: usize, point: Vec2, time: f64 },
    Glancing { bump: usize, point: Vec2, time: f64 },
    Escape,
}

/// Center `q + J v / b` of the Larmor circle through `(q, v)`.
pub fn larmor_center(q: Vec2, v: Vec2, b: f64) -> Result<Vec2> {
    if b == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(q + perp(v) / b)
}

/// Closed-form motion in the constant field `b` for time `t`.
pub fn advance_in_field(state: &State, b: f64, t: f64) -> State {
    let (s, c) = (b * t).sin_cos();
    let v0 = state.v;
    // (1/b) [[sin, cos - 1], [1 - cos, sin]] v0, written to stay accurate for small b t
    let one_minus_cos = 2.0 * (0.5 * b * t).sin().powi(2);
    let dq = Vec2::new(
        s * v0.x - one_minus_cos * v0.y,
        one_minus_cos * v0.x + s * v0.y,
    ) / b;
    State {
        q: state.q + dq,
        v: Vec2::new(c * v0.x - s * v0.y, s * v0.x + c * v0.y),
        region: state.region,
    }
}

/// First boundary met by the forward ray of an outside state.
pub fn next_entry(state: &State, scene: &Scene) -> Hit {
    next_hit(state.q, state.v, scene, None)
}

/// Forward ray query ignoring bump `skip` (the one just left).
pub(crate) fn next_hit_skipping(q: Vec2, v: Vec2, scene: &Scene, skip: usize) -> Hit {
    next_hit(q, v, scene, Some(skip))
}

fn next_hit(q: Vec2, v: Vec2, scene: &Scene, skip: Option<usize>) -> Hit {
    let mut best = Hit::Escape;
    let mut best_t = f64::INFINITY;
    for (i, bump) in scene.bumps().iter().enumerate() {
        if skip == Some(i) {
            continue;
        }
        let r = bump.ray_roots(q, v);
        if r.disc <= -GLANCING_DISC {
            continue;
        }
        if r.disc.abs() < GLANCING_DISC {
            if r.t_mid > RAY_EPS && r.t_mid < best_t {
                best_t = r.t_mid;
                best = Hit::Glancing {
                    bump: i,
                    point: bump.snap(q + r.t_mid * v),
                    time: r.t_mid,
                };
            }
            continue;
        }
        if r.t_out <= RAY_EPS {
            continue;
        }
        let t = r.t_in.max(0.0);
        if t < best_t {
            best_t = t;
            best = Hit::Entry {
                bump: i,
                point: bump.snap(q + t * v),
                time: t,
            };
        }
    }
    best
}

/// Exit of a Larmor arc from its bump.
#[derive(Debug, Clone, Copy)]
pub struct ArcExit {
    pub exit: State,
    pub center: Vec2,
    /// Duration `T > 0`.
    pub duration: f64,
    /// Signed swept angle `b T`.
    pub angle: f64,
}

/// Follows the Larmor circle of an inside state to its first exit point.
pub fn arc_exit(state: &State, scene: &Scene) -> Result<ArcExit> {
    let Region::Inside(l) = state.region else {
        return Err(Error::Domain("arc_exit needs an inside state".into()));
    };
    let bump = scene.bump(l);
    let b = bump.field();
    let center = larmor_center(state.q, state.v, b)?;
    let radius = 1.0 / b.abs();
    let sigma = b.signum();
    let from_boundary = bump.level(state.q).abs() < ON_BOUNDARY;
    let psi = bump
        .circle_exit(center, radius, state.q, sigma, from_boundary)
        .ok_or(Error::InteriorTrapped(l))?;
    let angle = sigma * psi;
    let q = bump.snap(center + rotate(state.q - center, angle));
    let v = rotate(state.v, angle).normalize();
    Ok(ArcExit {
        exit: State {
            q,
            v,
            region: Region::Outside,
        },
        center,
        duration: psi / b.abs(),
        angle,
    })
}

/// True iff the Larmor circle of an inside state never meets the boundary:
/// its center lies in the bump at distance more than `1/|b|` from the boundary.
pub fn interior_trapped(state: &State, scene: &Scene) -> bool {
    let Region::Inside(l) = state.region else {
        return false;
    };
    let bump = scene.bump(l);
    let Ok(c) = larmor_center(state.q, state.v, bump.field()) else {
        return false;
    };
    if !bump.contains(c) {
        return false;
    }
    let dist = if bump.is_disk() {
        -bump.level(c)
    } else {
        (bump.point(bump.closest_param(c)) - c).norm()
    };
    dist > 1.0 / bump.field().abs()
}

/// Alternates free flight and arcs until escape or a limit is reached.
pub fn propagate(
    start: &State,
    scene: &Scene,
    limits: Limits,
    policy: GlancingPolicy,
) -> Result<Orbit> {
    let mut orbit = Orbit {
        start: *start,
        pieces: Vec::new(),
        events: Vec::new(),
        end: *start,
        end_time: 0.0,
        termination: Termination::Escaped,
        glancing: false,
    };
    let mut state = *start;
    let mut t = 0.0;
    let mut skip = None;
    loop {
        if orbit.events.len() >= limits.max_events || t > limits.max_time {
            orbit.termination = if t > limits.max_time {
                Termination::TimeLimit
            } else {
                Termination::EventLimit
            };
            orbit.end = state;
            orbit.end_time = t;
            return Err(Error::LimitExceeded(Box::new(orbit)));
        }
        match state.region {
            Region::Outside => match next_hit(state.q, state.v, scene, skip) {
                Hit::Escape => {
                    orbit.termination = Termination::Escaped;
                    break;
                }
                Hit::Entry { bump, point, time } => {
                    push_line(&mut orbit, &state, t, time);
                    t += time;
                    orbit
                        .events
                        .push(event(EventKind::Entry, bump, t, point, state.v));
                    state = State {
                        q: point,
                        v: state.v,
                        region: Region::Inside(bump),
                    };
                    skip = None;
                }
                Hit::Glancing { bump, point, time } => {
                    push_line(&mut orbit, &state, t, time);
                    t += time;
                    orbit.glancing = true;
                    orbit
                        .events
                        .push(event(EventKind::Glancing, bump, t, point, state.v));
                    let bm = scene.bump(bump);
                    let b = bm.field();
                    let curls_in = perp(state.v).dot(&bm.normal(bm.param_of(point))) * b < 0.0;
                    if policy == GlancingPolicy::Larmor
                        && classify_field(bm) == FieldRegime::Strong
                        && curls_in
                    {
                        let duration = TAU / b.abs();
                        orbit.pieces.push(Piece::Arc {
                            bump,
                            center: (point + perp(state.v) / b).into(),
                            from: point.into(),
                            v_from: state.v.into(),
                            b,
                            angle: TAU * b.signum(),
                            t_start: t,
                            duration,
                        });
                        t += duration;
                    }
                    state = State {
                        q: point,
                        v: state.v,
                        region: Region::Outside,
                    };
                    skip = Some(bump);
                }
            },
            Region::Inside(l) => {
                let ex = match arc_exit(&state, scene) {
                    Ok(ex) => ex,
                    Err(Error::InteriorTrapped(_)) => {
                        orbit.termination = Termination::InteriorTrapped;
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let b = scene.bump(l).field();
                orbit.pieces.push(Piece::Arc {
                    bump: l,
                    center: ex.center.into(),
                    from: state.q.into(),
                    v_from: state.v.into(),
                    b,
                    angle: ex.angle,
                    t_start: t,
                    duration: ex.duration,
                });
                t += ex.duration;
                orbit
                    .events
                    .push(event(EventKind::Exit, l, t, ex.exit.q, ex.exit.v));
                state = ex.exit;
                skip = Some(l);
            }
        }
    }
    orbit.end = state;
    orbit.end_time = t;
    Ok(orbit)
}

fn push_line(orbit: &mut Orbit, state: &State, t: f64, length: f64) {
    if length > 0.0 {
        orbit.pieces.push(Piece::Line {
            from: state.q.into(),
            dir: state.v.into(),
            t_start: t,
            length,
        });
    }
}

fn event(kind: EventKind, bump: usize, time: f64, q: Vec2, v: Vec2) -> Event {
    Event {
        kind,
        bump,
        time,
        q: q.into(),
        v: v.into(),
    }
}
