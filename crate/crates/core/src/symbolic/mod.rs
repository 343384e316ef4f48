//! Symbol sequences over the bumps and the orbits realizing them.

mod periodic;
mod scattering_orbit;
mod section;
mod words;

pub use periodic::{
    find_periodic_orbit, find_periodic_orbit_seeded, monodromy, replay, Monodromy, PeriodicOrbit,
    ShootingOptions,
};
pub use scattering_orbit::{check_direction, find_scattering_orbit, ScatteringOrbit};
pub use section::{poincare_map, poincare_step, PoincareStep, SectionState, Side, GLANCING_CUTOFF};
pub use words::{is_admissible, itinerary, periodic_word_count, periodic_words, Word, WordKind};
