use std::collections::BTreeMap;

use super::PhaseState;
use crate::error::{Error, Result};
use crate::expr::{EvalError, Expr};
use crate::variational::EquationOfMotion;

/// First-order form `y' = f(t, y)` of an explicit order-`2N` equation:
/// `y'[k] = y[k+1]` for `k < 2N − 1` and `y'[2N−1] = g(t, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSystem {
    dim: usize,
    rhs: Expr,
}

static NO_PARAMS: BTreeMap<String, f64> = BTreeMap::new();

impl OdeSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The highest-derivative right-hand side with parameters folded in.
    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn derivative(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), EvalError> {
        let n = self.dim;
        dy[..n - 1].copy_from_slice(&y[1..n]);
        dy[n - 1] = self.rhs.evaluate_at(t, y, &NO_PARAMS)?;
        Ok(())
    }
}

fn bind_all(e: &Expr, params: &BTreeMap<String, f64>) -> Result<Expr> {
    let bound = e.bind_parameters(params);
    match bound.parameters().into_iter().next() {
        Some(name) => Err(EvalError::MissingParameter(name).into()),
        None => Ok(bound),
    }
}

pub fn to_first_order(eom: &EquationOfMotion) -> Result<OdeSystem> {
    let rhs = bind_all(eom.explicit()?, &eom.parameters)?;
    Ok(OdeSystem {
        dim: eom.state_dim(),
        rhs,
    })
}

/// Closed-form expressions for `x⁽²ᴺ⁾, x⁽²ᴺ⁺¹⁾, ...` in terms of the phase
/// state, obtained by differentiating the explicit equation of motion and
/// eliminating `x⁽²ᴺ⁾` after every step.
#[derive(Debug, Clone)]
pub struct DerivativeTower {
    dim: usize,
    max_order: u32,
    levels: Vec<Expr>,
}

impl DerivativeTower {
    pub fn new(eom: &EquationOfMotion, max_order: u32) -> Result<Self> {
        let top = eom.order;
        let g = bind_all(eom.explicit()?, &eom.parameters)?;
        let mut levels = Vec::new();
        if max_order >= top {
            levels.push(g.clone());
            for _ in top..max_order {
                let next = levels.last().unwrap().time_derivative().substitute(top, &g);
                levels.push(next);
            }
        }
        Ok(DerivativeTower {
            dim: eom.state_dim(),
            max_order,
            levels,
        })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Expression for `x⁽ᵏ⁾` with `k ≥ 2N`, if within the tower.
    pub fn level(&self, order: u32) -> Option<&Expr> {
        (order as usize)
            .checked_sub(self.dim)
            .and_then(|j| self.levels.get(j))
    }

    /// `c[k] = x⁽ᵏ⁾(t)` for `k = 0..=max_order`.
    pub fn eval(&self, s: &PhaseState) -> Result<Vec<f64>> {
        if s.dim() < self.dim {
            return Err(Error::InsufficientState {
                needed: self.dim,
                got: s.dim(),
            });
        }
        let n = self.max_order as usize + 1;
        let mut c: Vec<f64> = s.y[..self.dim.min(n)].to_vec();
        let state = &s.y[..self.dim];
        for level in &self.levels {
            c.push(level.evaluate_at(s.t, state, &NO_PARAMS)?);
        }
        Ok(c)
    }
}

/// `x⁽ᵏ⁾` at `s` for `k = 0..=max_order`.
pub fn state_derivatives(
    eom: &EquationOfMotion,
    s: &PhaseState,
    max_order: u32,
) -> Result<Vec<f64>> {
    DerivativeTower::new(eom, max_order)?.eval(s)
}
