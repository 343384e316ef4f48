//! Poincare sections over bump boundaries and the bump-to-bump return map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, arc_exit, ArcExit, Hit, Region, State};
use crate::geometry::Scene;
use crate::math::{wrap_pi, Vec2};

/// `|<v, N>|` below this is treated as tangential.
pub const GLANCING_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `<v, N> < 0`: entering the bump.
    Inward,
    /// `<v, N> > 0`: leaving the bump.
    Outward,
}

/// A unit-speed state on a bump boundary in arclength / tangential-velocity
/// coordinates `(s, u)`, `u = <v, tangent>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionState {
    pub bump: usize,
    pub s: f64,
    pub u: f64,
    pub side: Side,
}

impl SectionState {
    pub fn inward(bump: usize, s: f64, u: f64) -> Self {
        SectionState {
            bump,
            s,
            u,
            side: Side::Inward,
        }
    }

    /// Normal velocity component `<v, N>` implied by `u` and the side.
    pub fn normal_speed(&self) -> f64 {
        let w = (1.0 - self.u * self.u).max(0.0).sqrt();
        match self.side {
            Side::Inward => -w,
            Side::Outward => w,
        }
    }

    /// Boundary point and velocity. Inward states are placed inside their
    /// bump (just entered), outward ones outside (just left).
    pub fn to_state(&self, scene: &Scene) -> State {
        let bump = scene.bump(self.bump);
        let theta = bump.param_at(self.s);
        let q = bump.point(theta);
        let v = self.u * bump.tangent(theta) + self.normal_speed() * bump.normal(theta);
        let region = match self.side {
            Side::Inward => Region::Inside(self.bump),
            Side::Outward => Region::Outside,
        };
        State::new(q, v, region)
    }

    /// Section coordinates of a state on the boundary of `bump`.
    pub fn from_state(state: &State, bump: usize, scene: &Scene) -> Self {
        let b = scene.bump(bump);
        let theta = b.param_of(state.q);
        let side = if state.v.dot(&b.normal(theta)) < 0.0 {
            Side::Inward
        } else {
            Side::Outward
        };
        SectionState {
            bump,
            s: b.arclength(theta),
            u: state.v.dot(&b.tangent(theta)).clamp(-1.0, 1.0),
            side,
        }
    }

    /// Difference `self - other` with `s` wrapped into half a perimeter.
    pub fn difference(&self, other: &SectionState, scene: &Scene) -> Vec2 {
        let per = scene.bump(self.bump).perimeter();
        let ds =
            per / std::f64::consts::TAU * wrap_pi((self.s - other.s) / per * std::f64::consts::TAU);
        Vec2::new(ds, self.u - other.u)
    }

    /// Sup-norm distance in section coordinates; infinite across bumps or sides.
    pub fn distance(&self, other: &SectionState, scene: &Scene) -> f64 {
        if self.bump != other.bump || self.side != other.side {
            return f64::INFINITY;
        }
        self.difference(other, scene).amax()
    }

    /// Shifts the coordinates, reducing `s` modulo the perimeter.
    pub fn offset(&self, ds: f64, du: f64, scene: &Scene) -> Self {
        SectionState {
            s: (self.s + ds).rem_euclid(scene.bump(self.bump).perimeter()),
            u: self.u + du,
            ..*self
        }
    }
}

/// Everything computed along one application of the return map.
#[derive(Debug, Clone, Copy)]
pub struct PoincareStep {
    pub entry: State,
    pub arc: ArcExit,
    /// Free-flight length from the exit point to the next bump.
    pub flight: f64,
    /// State at the next entry point (still outside representation).
    pub arrival: State,
    pub image: SectionState,
}

/// One step of the return map from an inward section state.
pub fn poincare_step(x: &SectionState, scene: &Scene) -> Result<PoincareStep> {
    if x.side != Side::Inward {
        return Err(Error::NotInDomain("section state is not inward".into()));
    }
    if !(x.u.abs() < 1.0) {
        return Err(Error::NotInDomain(format!(
            "tangential velocity u = {} not in (-1, 1)",
            x.u
        )));
    }
    let entry = x.to_state(scene);
    let arc = arc_exit(&entry, scene)?;
    match flow::next_hit_skipping(arc.exit.q, arc.exit.v, scene, x.bump) {
        Hit::Escape => Err(Error::Escaped),
        Hit::Glancing { bump, .. } => Err(Error::Glancing(bump)),
        Hit::Entry { bump, point, time } => {
            let arrival = State::new(point, arc.exit.v, Region::Inside(bump));
            let image = SectionState::from_state(&arrival, bump, scene);
            Ok(PoincareStep {
                entry,
                arc,
                flight: time,
                arrival,
                image,
            })
        }
    }
}

/// The return map `P = P_ext . P_int` on inward section states.
pub fn poincare_map(x: &SectionState, scene: &Scene) -> Result<SectionState> {
    poincare_step(x, scene).map(|s| s.image)
}
