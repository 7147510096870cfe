//! Fixed-step RK4 and adaptive Dormand–Prince 5(4) integrators.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{OdeSystem, PhaseState, Trajectory};
use crate::expr::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "rk45" => Ok(Method::Rk45),
            other => Err(format!("unknown method {other:?} (expected rk4 or rk45)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for `rk4`.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            step: 1e-3,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step,
            ..Default::default()
        }
    }

    pub fn rk45(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidConfig(msg.to_string()));
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        match self.method {
            Method::Rk4 if !(self.step > 0.0 && self.step.is_finite()) => {
                bad("step must be positive")
            }
            Method::Rk45 if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) => {
                bad("rel_tol and abs_tol must be positive")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state has dimension {got}, system needs {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("end time {t_end} must be after start time {t0}")]
    InvalidSpan { t0: f64, t_end: f64 },
    #[error("step size underflow ({step:e}) at t = {t}")]
    StepUnderflow {
        t: f64,
        step: f64,
        partial: Box<Trajectory>,
    },
    #[error("solution diverged at t = {t}")]
    Diverged { t: f64, partial: Box<Trajectory> },
    #[error("maximum number of steps ({steps}) exceeded at t = {t}")]
    MaxStepsExceeded {
        t: f64,
        steps: usize,
        partial: Box<Trajectory>,
    },
    #[error(transparent)]
    Eval(EvalError),
}

impl IntegrateError {
    /// Time at which integration stopped, for failures that have one.
    pub fn failure_time(&self) -> Option<f64> {
        match self {
            IntegrateError::StepUnderflow { t, .. }
            | IntegrateError::Diverged { t, .. }
            | IntegrateError::MaxStepsExceeded { t, .. } => Some(*t),
            _ => None,
        }
    }

    /// The samples accepted before the failure.
    pub fn partial_trajectory(&self) -> Option<&Trajectory> {
        match self {
            IntegrateError::StepUnderflow { partial, .. }
            | IntegrateError::Diverged { partial, .. }
            | IntegrateError::MaxStepsExceeded { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest scaled local error estimate over accepted steps (`≤ 1` means
    /// within tolerance). Zero for fixed-step RK4.
    pub max_error_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: Trajectory,
    pub stats: IntegrationStats,
}

pub fn integrate(
    sys: &OdeSystem,
    init: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    integrate_with(sys, init, t_end, cfg, &[]).map(|i| i.trajectory)
}

/// Integrates from `init.t` to `t_end`, landing exactly on every time in
/// `stops` that lies inside the span. Every accepted step is sampled.
pub fn integrate_with(
    sys: &OdeSystem,
    init: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
    stops: &[f64],
) -> Result<Integration, IntegrateError> {
    cfg.validate()?;
    if init.dim() != sys.dim() {
        return Err(IntegrateError::DimensionMismatch {
            expected: sys.dim(),
            got: init.dim(),
        });
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t_end > init.t) || !init.is_finite() {
        return Err(IntegrateError::InvalidSpan { t0: init.t, t_end });
    }
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|t| *t > init.t && *t < t_end)
        .collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut run = Run {
        sys,
        cfg,
        traj: Trajectory::new(sys.dim()),
        stats: IntegrationStats::default(),
    };
    run.traj.push_unchecked(init.clone());
    match cfg.method {
        Method::Rk4 => run.rk4(&targets)?,
        Method::Rk45 => run.dopri5(&targets)?,
    }
    Ok(Integration {
        trajectory: run.traj,
        stats: run.stats,
    })
}

struct Run<'a> {
    sys: &'a OdeSystem,
    cfg: &'a IntegratorConfig,
    traj: Trajectory,
    stats: IntegrationStats,
}

/// Outcome of one right-hand-side evaluation.
enum Eval {
    Ok,
    NonFinite,
}

impl Run<'_> {
    fn f(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<Eval, IntegrateError> {
        self.stats.rhs_evals += 1;
        if !y.iter().all(|v| v.is_finite()) {
            return Ok(Eval::NonFinite);
        }
        match self.sys.derivative(t, y, dy) {
            Ok(()) => Ok(Eval::Ok),
            Err(EvalError::NonFinite(_)) => Ok(Eval::NonFinite),
            Err(e) => Err(IntegrateError::Eval(e)),
        }
    }

    fn current(&self) -> &PhaseState {
        self.traj
            .last()
            .expect("trajectory starts with the initial state")
    }

    fn take(&mut self) -> Box<Trajectory> {
        Box::new(std::mem::take(&mut self.traj))
    }

    fn rk4(&mut self, targets: &[f64]) -> Result<(), IntegrateError> {
        let n = self.sys.dim();
        let (mut k1, mut k2, mut k3, mut k4) =
            (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut tmp = vec![0.0; n];
        let t0 = self.current().t;
        let mut t = t0;
        let mut y = self.current().y.clone();
        let mut steps = 0usize;

        for &target in targets {
            // fixed grid t0 + i*step, plus a short last step onto each target
            while t < target {
                if steps >= self.cfg.max_steps {
                    return Err(IntegrateError::MaxStepsExceeded {
                        t,
                        steps,
                        partial: self.take(),
                    });
                }
                let mut next_grid =
                    t0 + (((t - t0) / self.cfg.step + 1e-9).floor() + 1.0) * self.cfg.step;
                if next_grid <= t {
                    next_grid += self.cfg.step;
                }
                let t_next = if next_grid >= target - 1e-12 * self.cfg.step {
                    target
                } else {
                    next_grid
                };
                let h = t_next - t;

                let mut ok = matches!(self.f(t, &y, &mut k1)?, Eval::Ok);
                if ok {
                    axpy(&mut tmp, &y, 0.5 * h, &k1);
                    ok = matches!(self.f(t + 0.5 * h, &tmp, &mut k2)?, Eval::Ok);
                }
                if ok {
                    axpy(&mut tmp, &y, 0.5 * h, &k2);
                    ok = matches!(self.f(t + 0.5 * h, &tmp, &mut k3)?, Eval::Ok);
                }
                if ok {
                    axpy(&mut tmp, &y, h, &k3);
                    ok = matches!(self.f(t_next, &tmp, &mut k4)?, Eval::Ok);
                }
                if ok {
                    for i in 0..n {
                        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                    ok = y.iter().all(|v| v.is_finite());
                }
                if !ok {
                    return Err(IntegrateError::Diverged {
                        t,
                        partial: self.take(),
                    });
                }
                t = t_next;
                steps += 1;
                self.stats.accepted += 1;
                self.traj.push_unchecked(PhaseState::new(t, y.clone()));
            }
        }
        Ok(())
    }

    fn dopri5(&mut self, targets: &[f64]) -> Result<(), IntegrateError> {
        const SAFE: f64 = 0.9;
        const FAC_MIN: f64 = 0.2;
        const FAC_MAX: f64 = 10.0;
        const BETA: f64 = 0.04;
        let expo1 = 0.2 - BETA * 0.75;

        let n = self.sys.dim();
        let t0 = self.current().t;
        let span = targets.last().copied().unwrap() - t0;
        let h_min = 1e-14 * span;
        let mut t = t0;
        let mut y = self.current().y.clone();
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
        let mut stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];

        {
            let (k0, _) = k.split_first_mut().unwrap();
            if let Eval::NonFinite = self.f(t, &y, k0)? {
                return Err(IntegrateError::Diverged {
                    t,
                    partial: self.take(),
                });
            }
        }
        let mut h = self.initial_step(t, &y, &k[0].clone(), span)?;
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;
        let mut last_nonfinite = false;
        let mut attempts = 0usize;
        let mut target_idx = 0;

        while target_idx < targets.len() {
            let target = targets[target_idx];
            if attempts >= self.cfg.max_steps {
                return Err(IntegrateError::MaxStepsExceeded {
                    t,
                    steps: attempts,
                    partial: self.take(),
                });
            }
            if h < h_min {
                let partial = self.take();
                return Err(if last_nonfinite {
                    IntegrateError::Diverged { t, partial }
                } else {
                    IntegrateError::StepUnderflow {
                        t,
                        step: h,
                        partial,
                    }
                });
            }
            let lands = t + 1.01 * h >= target;
            let step = if lands { target - t } else { h };
            attempts += 1;

            let mut finite = true;
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    stage[i] = y[i] + step * acc;
                }
                if let Eval::NonFinite = self.f(t + C[s] * step, &stage, &mut k[s])? {
                    finite = false;
                    break;
                }
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }

            let err = if finite {
                let mut sum = 0.0;
                for i in 0..n {
                    let mut e = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        e += E[j] * kj[i];
                    }
                    let sk = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(y_new[i].abs());
                    sum += (step * e / sk).powi(2);
                }
                (sum / n as f64).sqrt()
            } else {
                f64::INFINITY
            };
            last_nonfinite = !finite;

            let fac11 = err.powf(expo1);
            if err <= 1.0 {
                let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                // a step shortened to land on a target does not limit the next one
                let mut h_new = if lands { h.max(step) } else { step } / fac;
                if last_rejected {
                    h_new = h_new.min(step);
                }
                fac_old = err.max(1e-4);
                self.stats.accepted += 1;
                self.stats.max_error_ratio = self.stats.max_error_ratio.max(err);

                t = if lands { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                let (first, last) = k.split_at_mut(6);
                std::mem::swap(&mut first[0], &mut last[0]);
                self.traj.push_unchecked(PhaseState::new(t, y.clone()));
                if lands {
                    target_idx += 1;
                }
                last_rejected = false;
                h = h_new.min(span);
            } else {
                self.stats.rejected += 1;
                let shrink = if err.is_finite() {
                    (fac11 / SAFE).min(1.0 / FAC_MIN)
                } else {
                    1.0 / FAC_MIN
                };
                h = step / shrink;
                last_rejected = true;
            }
        }
        Ok(())
    }

    /// Starting step from the scaled size of `y` and its first two derivatives.
    fn initial_step(
        &mut self,
        t: f64,
        y: &[f64],
        f0: &[f64],
        span: f64,
    ) -> Result<f64, IntegrateError> {
        let n = y.len();
        let sk: Vec<f64> = y
            .iter()
            .map(|v| self.cfg.abs_tol + self.cfg.rel_tol * v.abs())
            .collect();
        let dnf: f64 = f0.iter().zip(&sk).map(|(f, s)| (f / s).powi(2)).sum();
        let dny: f64 = y.iter().zip(&sk).map(|(v, s)| (v / s).powi(2)).sum();
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(span);

        let y1: Vec<f64> = (0..n).map(|i| y[i] + h * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        let der2 = match self.f(t + h, &y1, &mut f1)? {
            Eval::Ok => {
                f1.iter()
                    .zip(f0)
                    .zip(&sk)
                    .map(|((a, b), s)| ((a - b) / s).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    / h
            }
            Eval::NonFinite => f64::INFINITY,
        };
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        Ok((100.0 * h).min(h1).min(span))
    }
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, x: &[f64]) {
    for ((o, yi), xi) in out.iter_mut().zip(y).zip(x) {
        *o = yi + a * xi;
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
