//! Taylor kinematics against its Newtonian truncation, actions, and the
//! diagnostics built on them.

mod action;
mod compare;
mod diagnostics;
mod taylor;

pub use action::{
    action_gap, action_integral, simpson, uniform_grid, DEFAULT_QUADRATURE_INTERVALS,
};
pub use compare::{compare, CompareOptions, ComparisonReport};
pub use diagnostics::{
    energy_decomposition, quantum_potential, uncertainty_pair, EnergyCoefficients, EnergySplit,
    QuantumPotential,
};
pub use taylor::{model_from_state, TaylorModel};
