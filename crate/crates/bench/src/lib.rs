//! Shared fixtures for the benchmarks.

use std::collections::BTreeMap;

use ostro_core::{euler_lagrange, solve_explicit, to_first_order};
pub use ostro_core::{
    EquationOfMotion, IntegratorConfig, Lagrangian, OdeSystem, PhaseState, Trajectory,
};

pub const HARMONIC: &str = "0.5*x'^2 - 0.5*x^2";
pub const PAIS_UHLENBECK: &str = "0.5*x''^2 - 2.5*x'^2 + 2*x^2";
pub const PERTURBED: &str = "0.5*x'^2 - 0.5*x^2 - 0.0001*x''^2";

pub struct Fixture {
    pub lagrangian: Lagrangian,
    pub eom: EquationOfMotion,
    pub system: OdeSystem,
}

pub fn fixture(text: &str) -> Fixture {
    let lagrangian = Lagrangian::parse(text, BTreeMap::new()).expect("fixture parses");
    let eom = solve_explicit(&euler_lagrange(&lagrangian)).expect("fixture is regular");
    let system = to_first_order(&eom).expect("fixture has numeric coefficients");
    Fixture {
        lagrangian,
        eom,
        system,
    }
}

/// Slow-mode initial state `x = cos t` for either reference system.
pub fn cosine_start(dim: usize) -> PhaseState {
    PhaseState::new(
        0.0,
        (0..dim).map(|k| [1.0, 0.0, -1.0, 0.0][k % 4]).collect(),
    )
}
