//! Euler–Lagrange equations, force/momentum ladders and the Ostrogradski
//! canonical quantities for Lagrangians `L(t, x, ẋ, ..., x⁽ᴺ⁾)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DerivativeTower, Trajectory};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};

/// A Lagrangian body together with its order `N` and parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    body: Expr,
    order: u32,
    parameters: BTreeMap<String, f64>,
}

impl Lagrangian {
    /// The order is the highest derivative occurring in the simplified body,
    /// with a floor of 1 so that state-independent bodies still describe a
    /// (trivial) second-order system.
    pub fn new(body: Expr, parameters: BTreeMap<String, f64>) -> Self {
        let body = body.simplify();
        let order = body.max_deriv_order().unwrap_or(0).max(1);
        Lagrangian {
            body,
            order,
            parameters,
        }
    }

    pub fn parse(text: &str, parameters: BTreeMap<String, f64>) -> Result<Self> {
        Ok(Lagrangian::new(parse(text)?, parameters))
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    /// `N`, the highest derivative order of the coordinate.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    /// Same Lagrangian with the parameter values folded into the body.
    ///
    /// The order is recomputed, so a coefficient set to zero can lower it.
    pub fn bound(&self) -> Lagrangian {
        Lagrangian::new(
            self.body.bind_parameters(&self.parameters),
            self.parameters.clone(),
        )
    }

    pub fn is_time_independent(&self) -> bool {
        !self.body.contains_time()
    }
}

/// Order-`2N` equation of motion `residual = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationOfMotion {
    pub residual: Expr,
    pub order: u32,
    /// `g` with `x⁽²ᴺ⁾ = g(t, x, ..., x⁽²ᴺ⁻¹⁾)`, once solved.
    pub explicit_rhs: Option<Expr>,
    pub parameters: BTreeMap<String, f64>,
}

impl EquationOfMotion {
    /// Dimension of the first-order phase space, `2N`.
    pub fn state_dim(&self) -> usize {
        self.order as usize
    }

    pub fn explicit(&self) -> Result<&Expr> {
        self.explicit_rhs.as_ref().ok_or(Error::MissingExplicitForm)
    }
}

/// `Σₙ (−1)ⁿ (d/dt)ⁿ ∂L/∂x⁽ⁿ⁾` for `n = 0..=N`, with the `n = 0` term positive.
pub fn euler_lagrange(l: &Lagrangian) -> EquationOfMotion {
    let terms = (0..=l.order)
        .map(|n| {
            let term = l.body.partial(n).time_derivative_n(n);
            if n % 2 == 1 {
                term.neg()
            } else {
                term
            }
        })
        .collect();
    EquationOfMotion {
        residual: Expr::sum(terms),
        order: 2 * l.order,
        explicit_rhs: None,
        parameters: l.parameters.clone(),
    }
}

/// Isolates the highest derivative: `x⁽²ᴺ⁾ = −(residual|x⁽²ᴺ⁾=0) / coefficient`.
///
/// The residual must be affine in `x⁽²ᴺ⁾` with a coefficient that does not
/// depend on `t` or the state and does not vanish for the bound parameters.
pub fn solve_explicit(eom: &EquationOfMotion) -> Result<EquationOfMotion> {
    let top = eom.order;
    let coefficient = eom.residual.partial(top);
    let degenerate = || Error::DegenerateLagrangian {
        order: top,
        coefficient: coefficient.to_string(),
    };

    if coefficient.is_zero() || !coefficient.is_state_independent() {
        return Err(degenerate());
    }
    let unbound = coefficient
        .parameters()
        .iter()
        .any(|p| !eom.parameters.contains_key(p));
    if !unbound {
        match coefficient.evaluate_at(0.0, &[], &eom.parameters) {
            Ok(v) if v != 0.0 => {}
            _ => return Err(degenerate()),
        }
    }

    let rest = eom.residual.substitute(top, &Expr::zero());
    let rhs = Expr::product(vec![Expr::constant(-1.0), rest, Expr::pow(coefficient, -1)]);
    Ok(EquationOfMotion {
        explicit_rhs: Some(rhs),
        ..eom.clone()
    })
}

/// The even/odd ladder `F⁽ᵅ⁾ = ∂L/∂x⁽²ᵅ⁾`, `p⁽ᵅ⁾ = ∂L/∂x⁽²ᵅ⁺¹⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceLadder {
    /// `F⁽ᵅ⁾` for `α = 0..=⌊N/2⌋`.
    pub forces: Vec<Expr>,
    /// `p⁽ᵅ⁾` for `α = 0..⌈N/2⌉`.
    pub momenta: Vec<Expr>,
}

pub fn force_ladder(l: &Lagrangian) -> ForceLadder {
    let n = l.order;
    ForceLadder {
        forces: (0..=n / 2).map(|a| l.body.partial(2 * a)).collect(),
        momenta: (0..n.div_ceil(2))
            .map(|a| l.body.partial(2 * a + 1))
            .collect(),
    }
}

/// `p⁽ᵅ⁾ = ∂L/∂x⁽²ᵅ⁺¹⁾` for any `α`; zero beyond the ladder.
pub fn ladder_momentum(l: &Lagrangian, alpha: u32) -> Expr {
    l.body.partial(2 * alpha + 1)
}

/// `p_k = Σ_{j=k+1}^{N} (−1)^{j−k−1} (d/dt)^{j−k−1} ∂L/∂x⁽ʲ⁾` for `k = 0..N`.
pub fn ostrogradski_momenta(l: &Lagrangian) -> Vec<Expr> {
    let n = l.order;
    let partials: Vec<Expr> = (0..=n).map(|j| l.body.partial(j)).collect();
    (0..n)
        .map(|k| {
            let terms = (k + 1..=n)
                .map(|j| {
                    let m = j - k - 1;
                    let t = partials[j as usize].time_derivative_n(m);
                    if m % 2 == 1 {
                        t.neg()
                    } else {
                        t
                    }
                })
                .collect();
            Expr::sum(terms)
        })
        .collect()
}

/// `H = Σ_k p_k x⁽ᵏ⁺¹⁾ − L`.
pub fn ostrogradski_hamiltonian(l: &Lagrangian) -> Expr {
    hamiltonian_from(l, &ostrogradski_momenta(l))
}

fn hamiltonian_from(l: &Lagrangian, momenta: &[Expr]) -> Expr {
    let mut terms: Vec<Expr> = momenta
        .iter()
        .enumerate()
        .map(|(k, p)| p.clone().mul(Expr::deriv(k as u32 + 1)))
        .collect();
    terms.push(l.body.clone().neg());
    Expr::sum(terms)
}

/// Ladder quantities plus the Ostrogradski momenta and Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSet {
    pub forces: Vec<Expr>,
    pub momenta: Vec<Expr>,
    pub ostro_momenta: Vec<Expr>,
    pub hamiltonian: Expr,
}

impl MomentumSet {
    pub fn new(l: &Lagrangian) -> Self {
        let ForceLadder { forces, momenta } = force_ladder(l);
        let ostro_momenta = ostrogradski_momenta(l);
        let hamiltonian = hamiltonian_from(l, &ostro_momenta);
        MomentumSet {
            forces,
            momenta,
            ostro_momenta,
            hamiltonian,
        }
    }
}

/// One row of [`force_balance_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceBalanceRow {
    pub t: f64,
    /// `Σ F⁽ᵅ⁾`.
    pub lhs: f64,
    /// `Σ (d/dt)^{α+1} p⁽ᵅ⁾`.
    pub rhs: f64,
    pub el_residual: f64,
}

/// Evaluates both sides of the force balance `F + F⁽¹⁾ + ... = dp/dt +
/// d²p⁽¹⁾/dt² + ...` as written, together with the Euler–Lagrange residual,
/// at every sample of `traj`. Nothing is asserted; the residual is the
/// correctness signal.
pub fn force_balance_eval(l: &Lagrangian, traj: &Trajectory) -> Result<Vec<ForceBalanceRow>> {
    let dim = 2 * l.order as usize;
    if traj.state_dim() < dim {
        return Err(Error::InsufficientState {
            needed: dim,
            got: traj.state_dim(),
        });
    }
    let ladder = force_ladder(l);
    let lhs = Expr::sum(ladder.forces.clone());
    let rhs = Expr::sum(
        ladder
            .momenta
            .iter()
            .enumerate()
            .map(|(a, p)| p.time_derivative_n(a as u32 + 1))
            .collect(),
    );
    let eom = euler_lagrange(l);
    let needed = [&lhs, &rhs, &eom.residual]
        .iter()
        .filter_map(|e| e.max_deriv_order())
        .max()
        .unwrap_or(0);

    let tower = if needed as usize >= dim {
        Some(DerivativeTower::new(&solve_explicit(&eom)?, needed)?)
    } else {
        None
    };
    traj.samples()
        .iter()
        .map(|s| {
            let derivs = match &tower {
                Some(tower) => tower.eval(s)?,
                None => s.y[..dim].to_vec(),
            };
            let at = |e: &Expr| e.evaluate_at(s.t, &derivs, &l.parameters);
            Ok(ForceBalanceRow {
                t: s.t,
                lhs: at(&lhs)?,
                rhs: at(&rhs)?,
                el_residual: at(&eom.residual)?,
            })
        })
        .collect()
}

/// Serializable summary of every derived quantity, expressions as DSL text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationsDocument {
    pub residual: String,
    pub explicit_rhs: Option<String>,
    pub order: u32,
    #[serde(rename = "F_alpha")]
    pub f_alpha: Vec<String>,
    pub p_alpha: Vec<String>,
    pub ostro_momenta: Vec<String>,
    pub hamiltonian: String,
}

impl EquationsDocument {
    pub fn new(l: &Lagrangian, eom: &EquationOfMotion) -> Self {
        let set = MomentumSet::new(l);
        let text = |v: &[Expr]| v.iter().map(Expr::to_string).collect();
        EquationsDocument {
            residual: eom.residual.to_string(),
            explicit_rhs: eom.explicit_rhs.as_ref().map(Expr::to_string),
            order: eom.order,
            f_alpha: text(&set.forces),
            p_alpha: text(&set.momenta),
            ostro_momenta: text(&set.ostro_momenta),
            hamiltonian: set.hamiltonian.to_string(),
        }
    }
}
