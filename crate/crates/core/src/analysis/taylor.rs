use serde::{Deserialize, Serialize};

use crate::dynamics::{state_derivatives, PhaseState};
use crate::error::{Error, Result};
use crate::variational::EquationOfMotion;

/// Taylor expansion of `x(t)` about `t0` with derivative coefficients
/// `c[k] = x⁽ᵏ⁾(t0)`: position, velocity, acceleration, jerk, ...
///
/// The first three coefficients form the Newtonian kinematics
/// `x0 + v τ + a τ²/2`; everything from `c[3]` on is the hidden residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorModel {
    t0: f64,
    c: Vec<f64>,
}

impl TaylorModel {
    pub fn new(t0: f64, c: Vec<f64>) -> Result<Self> {
        if c.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "a Taylor model needs at least 3 coefficients, got {}",
                c.len()
            )));
        }
        if !t0.is_finite() || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "Taylor coefficients must be finite".into(),
            ));
        }
        Ok(TaylorModel { t0, c })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// `M`, the highest derivative order kept.
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// Terms `c[k] τᵏ / k!` for `k` in `range`, and the compensated sum of
    /// `c[k + shift] τᵏ / k!`.
    fn series(&self, t: f64, shift: usize, range: std::ops::Range<usize>) -> f64 {
        let tau = t - self.t0;
        let mut acc = Neumaier::default();
        let mut basis = 1.0; // τᵏ / k!
        for k in 0..range.end {
            if k >= range.start {
                if let Some(c) = self.c.get(k + shift) {
                    acc.add(c * basis);
                }
            }
            basis *= tau / (k + 1) as f64;
        }
        acc.total()
    }

    /// `Σ_{k=0}^{M} c[k] τᵏ / k!`.
    pub fn taylor_eval(&self, t: f64) -> f64 {
        self.series(t, 0, 0..self.c.len())
    }

    /// `c[0] + c[1] τ + c[2] τ² / 2`.
    pub fn newton_eval(&self, t: f64) -> f64 {
        self.series(t, 0, 0..3)
    }

    /// `Σ_{k=3}^{M} c[k] τᵏ / k!`.
    pub fn hidden_residual(&self, t: f64) -> f64 {
        self.series(t, 0, 3..self.c.len())
    }

    /// Derivative of [`taylor_eval`](Self::taylor_eval) in `t`.
    pub fn velocity(&self, t: f64) -> f64 {
        self.series(t, 1, 0..self.c.len() - 1)
    }

    /// `c[1] + c[2] τ`.
    pub fn newton_velocity(&self, t: f64) -> f64 {
        self.series(t, 1, 0..2)
    }
}

/// Taylor model of the solution through `s`, with coefficients from the
/// equation of motion up to order `m`.
pub fn model_from_state(eom: &EquationOfMotion, s: &PhaseState, m: u32) -> Result<TaylorModel> {
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "Taylor order must be at least 2, got {m}"
        )));
    }
    TaylorModel::new(s.t, state_derivatives(eom, s, m)?)
}

/// Neumaier's compensated summation.
#[derive(Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
