use thiserror::Error;

use crate::dynamics::IntegrateError;
use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The coefficient of the highest derivative in the equation of motion
    /// vanishes or depends on the state, so it cannot be solved explicitly.
    #[error("degenerate Lagrangian: coefficient of d(x,{order}) is {coefficient}")]
    DegenerateLagrangian { order: u32, coefficient: String },
    #[error("equation of motion has no explicit form; call solve_explicit first")]
    MissingExplicitForm,
    #[error("state has {got} entries but {needed} are required")]
    InsufficientState { needed: usize, got: usize },
    #[error(transparent)]
    Integration(#[from] IntegrateError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
