use crate::dynamics::{to_first_order, DerivativeTower, OdeSystem, PhaseState, Trajectory};
use crate::error::{Error, Result};
use crate::variational::{EquationOfMotion, Lagrangian};

pub const DEFAULT_QUADRATURE_INTERVALS: usize = 1024;

/// `n + 1` equally spaced times from `a` to `b`, both ends exact.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / n as f64;
    (0..=n)
        .map(|i| if i == n { b } else { a + i as f64 * step })
        .collect()
}

/// Composite Simpson's rule over `values` equally spaced across an
/// interval of length `span`.
pub fn simpson(values: &[f64], span: f64) -> Result<f64> {
    let n = values.len().saturating_sub(1);
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "Simpson's rule needs an even number of intervals, got {n}"
        )));
    }
    let mut acc = super::taylor::Neumaier::default();
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.add(w * v);
    }
    // weights sum to 3n, so a constant integrand gives exactly c * span
    Ok(acc.total() / (3 * n) as f64 * span)
}

/// Evaluates a Lagrangian along trajectory samples, extending the state
/// with the derivative tower when `L` needs orders the state lacks.
pub(crate) struct LagrangianSampler<'a> {
    l: &'a Lagrangian,
    dim: usize,
    tower: Option<DerivativeTower>,
}

impl<'a> LagrangianSampler<'a> {
    pub(crate) fn new(
        l: &'a Lagrangian,
        eom: Option<&EquationOfMotion>,
        dim: usize,
    ) -> Result<Self> {
        let needed = l.body().max_deriv_order().unwrap_or(0);
        let tower = if needed as usize >= dim {
            match eom {
                Some(eom) if eom.state_dim() == dim => Some(DerivativeTower::new(eom, needed)?),
                _ => {
                    return Err(Error::InsufficientState {
                        needed: needed as usize + 1,
                        got: dim,
                    });
                }
            }
        } else {
            None
        };
        Ok(LagrangianSampler { l, dim, tower })
    }

    pub(crate) fn eval(&self, s: &PhaseState) -> Result<f64> {
        let value = match &self.tower {
            Some(tower) => self
                .l
                .body()
                .evaluate_at(s.t, &tower.eval(s)?, self.l.parameters())?,
            None => self
                .l
                .body()
                .evaluate_at(s.t, &s.y[..self.dim], self.l.parameters())?,
        };
        Ok(value)
    }
}

/// `S = ∫ L dt` over the span of `traj` by composite Simpson on a uniform
/// grid of `intervals` (even) intervals.
///
/// The trajectory is resampled by cubic Hermite interpolation; `eom`, when
/// given, supplies exact slopes for that and the derivatives of order
/// `≥ 2N` that `L` may reference.
pub fn action_integral(
    l: &Lagrangian,
    eom: Option<&EquationOfMotion>,
    traj: &Trajectory,
    intervals: usize,
) -> Result<f64> {
    let (Some(first), Some(last)) = (traj.first(), traj.last()) else {
        return Err(Error::InvalidInput(
            "cannot integrate along an empty trajectory".into(),
        ));
    };
    let sampler = LagrangianSampler::new(l, eom, traj.state_dim())?;
    let system: Option<OdeSystem> = match eom {
        Some(e) if e.explicit_rhs.is_some() && e.state_dim() == traj.state_dim() => {
            Some(to_first_order(e)?)
        }
        _ => None,
    };
    let times = uniform_grid(first.t, last.t, intervals);
    let states = traj.resample(&times, system.as_ref())?;
    let values = states
        .iter()
        .map(|s| sampler.eval(s))
        .collect::<Result<Vec<f64>>>()?;
    simpson(&values, last.t - first.t)
}

/// `(ΔS, n)` with `ΔS = S − S_Newton` and `n = ΔS / h`, unrounded.
pub fn action_gap(s: f64, s_newton: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "action quantum h must be positive, got {h}"
        )));
    }
    let delta = s - s_newton;
    Ok((delta, delta / h))
}
