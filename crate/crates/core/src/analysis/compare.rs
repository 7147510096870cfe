use std::io::Write;

use serde::{Deserialize, Serialize};

use super::action::{
    action_gap, simpson, uniform_grid, LagrangianSampler, DEFAULT_QUADRATURE_INTERVALS,
};
use super::diagnostics::{
    energy_decomposition, uncertainty_pair, EnergyCoefficients, QuantumPotential,
};
use super::taylor::model_from_state;
use crate::dynamics::{
    format_float, integrate_with, to_first_order, DerivativeTower, IntegratorConfig, PhaseState,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::variational::{euler_lagrange, solve_explicit, EquationOfMotion, Lagrangian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareOptions {
    /// Action quantum.
    pub h: f64,
    /// Mass used in the uncertainty pair.
    pub m: f64,
    pub alphas: Option<EnergyCoefficients>,
    pub report_samples: usize,
    pub quadrature_intervals: usize,
    /// Highest derivative order of the Taylor model built at `t0`.
    pub taylor_order: u32,
    /// Terms of the quantum potential; `None` takes the whole ladder.
    pub q_terms: Option<u32>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            h: 1.0,
            m: 1.0,
            alphas: None,
            report_samples: 256,
            quadrature_intervals: DEFAULT_QUADRATURE_INTERVALS,
            taylor_order: 8,
            q_terms: None,
        }
    }
}

impl CompareOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mass must be positive, got {}",
                self.m
            )));
        }
        if self.report_samples < 2 {
            return Err(Error::InvalidInput(
                "report_samples must be at least 2".into(),
            ));
        }
        if self.quadrature_intervals < 2 || self.quadrature_intervals % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "quadrature_intervals must be even and at least 2, got {}",
                self.quadrature_intervals
            )));
        }
        if self.taylor_order < 2 {
            return Err(Error::InvalidInput(
                "taylor_order must be at least 2".into(),
            ));
        }
        if self.q_terms == Some(0) {
            return Err(Error::InvalidInput("q_terms must be at least 1".into()));
        }
        Ok(())
    }
}

/// Full versus Newtonian comparison sampled on a uniform report grid.
///
/// Series rows: `q_r` is `[t, taylor, trajectory]` where `taylor` is the
/// hidden residual of the Taylor model at `t0` and `trajectory` is
/// `x_full − x_newton`; `uncertainty` is `[t, lhs, rhs]`;
/// `quantum_potential` is `[t, Q]`; `energy` is `[t, V, W, Q, E]` and is
/// empty without energy coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub s: f64,
    pub s_newton: f64,
    pub delta_s: f64,
    pub n: f64,
    pub h: f64,
    pub m: f64,
    pub q_r: Vec<[f64; 3]>,
    pub uncertainty: Vec<[f64; 3]>,
    pub quantum_potential: Vec<[f64; 2]>,
    pub energy: Vec<[f64; 5]>,
}

impl ComparisonReport {
    pub fn write_q_r_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &["t", "q_r_taylor", "q_r_trajectory"], &self.q_r)
    }

    pub fn write_uncertainty_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &["t", "lhs", "rhs"], &self.uncertainty)
    }

    pub fn write_quantum_potential_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &["t", "q"], &self.quantum_potential)
    }

    pub fn write_energy_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &["t", "v", "w", "q", "e"], &self.energy)
    }
}

fn write_rows<W: Write, const K: usize>(w: W, header: &[&str; K], rows: &[[f64; K]]) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| format_float(*v)))?;
    }
    out.flush()?;
    Ok(())
}

fn explicit_equation(l: &Lagrangian) -> Result<EquationOfMotion> {
    solve_explicit(&euler_lagrange(l))
}

fn check_state(name: &str, eom: &EquationOfMotion, s: &PhaseState) -> Result<()> {
    if s.dim() != eom.state_dim() {
        return Err(Error::InvalidInput(format!(
            "{name} initial state has {} entries but the equation of motion has order {}",
            s.dim(),
            eom.order
        )));
    }
    Ok(())
}

/// Action of `l` along `traj` at the exact quadrature nodes `times`.
fn action_on_nodes(
    l: &Lagrangian,
    eom: &EquationOfMotion,
    traj: &Trajectory,
    times: &[f64],
) -> Result<f64> {
    let sampler = LagrangianSampler::new(l, Some(eom), traj.state_dim())?;
    let sys = to_first_order(eom)?;
    let states = traj.resample(times, Some(&sys))?;
    let values = states
        .iter()
        .map(|s| sampler.eval(s))
        .collect::<Result<Vec<f64>>>()?;
    simpson(&values, times[times.len() - 1] - times[0])
}

/// Integrates both systems from matched initial states over `[t0, t_end]`
/// and assembles the report. `S` is the action of `l_full` along the full
/// trajectory and `S_Newton` that of `l_newton` along the Newtonian one.
pub fn compare(
    l_full: &Lagrangian,
    l_newton: &Lagrangian,
    init_full: &PhaseState,
    init_newton: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    opts.validate()?;
    let eom_full = explicit_equation(l_full)?;
    let eom_newton = explicit_equation(l_newton)?;
    check_state("full", &eom_full, init_full)?;
    check_state("Newtonian", &eom_newton, init_newton)?;
    if init_full.t != init_newton.t {
        return Err(Error::InvalidInput(
            "initial states must share their time".into(),
        ));
    }
    let shared = init_full.dim().min(init_newton.dim()).min(2);
    if init_full.y[..shared] != init_newton.y[..shared] {
        return Err(Error::InvalidInput(
            "initial position and velocity must match between the two systems".into(),
        ));
    }
    let t0 = init_full.t;
    // Also rejects NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!(
            "t_end {t_end} must exceed t0 {t0}"
        )));
    }

    let quad = uniform_grid(t0, t_end, opts.quadrature_intervals);
    let report = uniform_grid(t0, t_end, opts.report_samples - 1);
    let mut stops: Vec<f64> = quad.iter().chain(&report).copied().collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let sys_full = to_first_order(&eom_full)?;
    let sys_newton = to_first_order(&eom_newton)?;
    let full = integrate_with(&sys_full, init_full, t_end, cfg, &stops)?.trajectory;
    let newton = integrate_with(&sys_newton, init_newton, t_end, cfg, &stops)?.trajectory;

    let s = action_on_nodes(l_full, &eom_full, &full, &quad)?;
    let s_newton = action_on_nodes(l_newton, &eom_newton, &newton, &quad)?;
    let (delta_s, n) = action_gap(s, s_newton, opts.h)?;

    let model = model_from_state(&eom_full, init_full, opts.taylor_order)?;
    let full_states = full.resample(&report, Some(&sys_full))?;
    let newton_states = newton.resample(&report, Some(&sys_newton))?;

    let q_terms = opts.q_terms.unwrap_or_else(|| l_full.order().div_ceil(2));
    let qp = QuantumPotential::new(l_full, &eom_full, q_terms)?;
    let energy_tower = match &opts.alphas {
        Some(a) => Some((
            a,
            DerivativeTower::new(&eom_full, a.max_order().max(eom_full.order))?,
        )),
        None => None,
    };

    let mut out = ComparisonReport {
        s,
        s_newton,
        delta_s,
        n,
        h: opts.h,
        m: opts.m,
        q_r: Vec::with_capacity(report.len()),
        uncertainty: Vec::with_capacity(report.len()),
        quantum_potential: Vec::with_capacity(report.len()),
        energy: Vec::new(),
    };
    for ((&t, fs), ns) in report.iter().zip(&full_states).zip(&newton_states) {
        out.q_r
            .push([t, model.hidden_residual(t), fs.y[0] - ns.y[0]]);
        let (lhs, rhs) = uncertainty_pair(&model, opts.m, t)?;
        out.uncertainty.push([t, lhs, rhs]);
        out.quantum_potential.push([t, qp.eval(fs)?]);
        if let Some((alphas, tower)) = &energy_tower {
            let e = energy_decomposition(alphas, &tower.eval(fs)?)?;
            out.energy.push([t, e.v, e.w, e.q, e.e]);
        }
    }
    Ok(out)
}
