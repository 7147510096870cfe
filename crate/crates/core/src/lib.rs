//! Higher-derivative Lagrangian mechanics in one coordinate.
//!
//! The crate is organized bottom-up:
//!
//! * [`expr`] parses, differentiates, simplifies and evaluates symbolic
//!   expressions in `t`, `x`, `x'`, ..., `x⁽ᵏ⁾` and named parameters.
//! * [`variational`] derives the order-`2N` Euler–Lagrange equation of a
//!   Lagrangian `L(t, x, ..., x⁽ᴺ⁾)`, the even/odd force and momentum ladder,
//!   and the Ostrogradski momenta and Hamiltonian.
//! * [`dynamics`] turns the explicit equation of motion into a first-order
//!   system and integrates it (fixed-step RK4 or adaptive Dormand–Prince).
//! * [`analysis`] compares full dynamics against the Newtonian (second-order)
//!   truncation: Taylor residuals, action integrals and their gap, the
//!   uncertainty product, the quantum potential and an energy split.

pub mod analysis;
pub mod dynamics;
mod error;
pub mod expr;
pub mod variational;

pub use analysis::{
    action_gap, action_integral, compare, energy_decomposition, model_from_state,
    quantum_potential, uncertainty_pair, CompareOptions, ComparisonReport, EnergyCoefficients,
    EnergySplit, QuantumPotential, TaylorModel,
};
pub use dynamics::{
    integrate, integrate_with, state_derivatives, to_first_order, DerivativeTower, IntegrateError,
    Integration, IntegratorConfig, Method, OdeSystem, PhaseState, Trajectory,
};
pub use error::{Error, Result};
pub use expr::{parse, Binding, EvalError, Expr, Func, ParseError};
pub use variational::{
    euler_lagrange, force_balance_eval, force_ladder, ladder_momentum, ostrogradski_hamiltonian,
    ostrogradski_momenta, solve_explicit, EquationOfMotion, EquationsDocument, ForceBalanceRow,
    ForceLadder, Lagrangian, MomentumSet,
};
