use serde::{Deserialize, Serialize};

use super::taylor::TaylorModel;
use crate::dynamics::{DerivativeTower, PhaseState};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::variational::{ladder_momentum, EquationOfMotion, Lagrangian};

/// `(lhs, rhs)` with `lhs = m (r ṙ − r_N ṙ_N)` and
/// `rhs = m (r − r_N)(ṙ − ṙ_N)`; the two agree only when the Newtonian
/// part vanishes, so both are returned.
pub fn uncertainty_pair(full: &TaylorModel, m: f64, t: f64) -> Result<(f64, f64)> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "mass must be positive, got {m}"
        )));
    }
    let (r, v) = (full.taylor_eval(t), full.velocity(t));
    let (rn, vn) = (full.newton_eval(t), full.newton_velocity(t));
    Ok((m * (r * v - rn * vn), m * (r - rn) * (v - vn)))
}

/// `Q = Σ_{α<n} p⁽ᵅ⁾ x⁽ᵅ⁺²⁾` with `p⁽ᵅ⁾ = ∂L/∂x⁽²ᵅ⁺¹⁾`, prepared once for
/// evaluation at many states.
#[derive(Debug, Clone)]
pub struct QuantumPotential {
    momenta: Vec<Expr>,
    parameters: std::collections::BTreeMap<String, f64>,
    dim: usize,
    tower: DerivativeTower,
}

impl QuantumPotential {
    pub fn new(l: &Lagrangian, eom: &EquationOfMotion, n_terms: u32) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidInput(
                "the quantum potential needs at least one term".into(),
            ));
        }
        let momenta: Vec<Expr> = (0..n_terms).map(|a| ladder_momentum(l, a)).collect();
        let needed = momenta
            .iter()
            .filter_map(Expr::max_deriv_order)
            .fold(n_terms + 1, u32::max);
        Ok(QuantumPotential {
            momenta,
            parameters: l.parameters().clone(),
            dim: eom.state_dim(),
            tower: DerivativeTower::new(eom, needed.max(eom.order))?,
        })
    }

    /// `p⁽ᵅ⁾` for `α = 0..n_terms`.
    pub fn momenta(&self) -> &[Expr] {
        &self.momenta
    }

    pub fn eval(&self, s: &PhaseState) -> Result<f64> {
        if s.dim() < self.dim {
            return Err(Error::InsufficientState {
                needed: self.dim,
                got: s.dim(),
            });
        }
        let derivs = self.tower.eval(s)?;
        let mut q = 0.0;
        for (a, p) in self.momenta.iter().enumerate() {
            q += p.evaluate_at(s.t, &derivs, &self.parameters)? * derivs[a + 2];
        }
        Ok(q)
    }
}

pub fn quantum_potential(
    l: &Lagrangian,
    eom: &EquationOfMotion,
    s: &PhaseState,
    n_terms: u32,
) -> Result<f64> {
    QuantumPotential::new(l, eom, n_terms)?.eval(s)
}

/// `α₁ x² + α₂ ẋ² + Σ_{k≥3} α_k (x⁽ᵏ⁻¹⁾)²` split into its parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EnergyCoefficients {
    alphas: Vec<f64>,
}

impl EnergyCoefficients {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "energy decomposition needs at least 2 coefficients, got {}",
                alphas.len()
            )));
        }
        if alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(
                "energy coefficients must be finite".into(),
            ));
        }
        Ok(EnergyCoefficients { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Highest derivative order the decomposition reads.
    pub fn max_order(&self) -> u32 {
        self.alphas.len() as u32 - 1
    }
}

impl TryFrom<Vec<f64>> for EnergyCoefficients {
    type Error = Error;

    fn try_from(alphas: Vec<f64>) -> Result<Self> {
        EnergyCoefficients::new(alphas)
    }
}

impl From<EnergyCoefficients> for Vec<f64> {
    fn from(c: EnergyCoefficients) -> Self {
        c.alphas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub v: f64,
    pub w: f64,
    pub q: f64,
    pub e: f64,
}

/// `derivs[k] = x⁽ᵏ⁾`.
pub fn energy_decomposition(coeffs: &EnergyCoefficients, derivs: &[f64]) -> Result<EnergySplit> {
    let a = coeffs.alphas();
    if derivs.len() < a.len() {
        return Err(Error::InsufficientState {
            needed: a.len(),
            got: derivs.len(),
        });
    }
    let v = a[0] * derivs[0] * derivs[0];
    let w = a[1] * derivs[1] * derivs[1];
    let q: f64 = a[2..]
        .iter()
        .zip(&derivs[2..])
        .map(|(a, d)| a * d * d)
        .sum();
    Ok(EnergySplit {
        v,
        w,
        q,
        e: v + w + q,
    })
}
