use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use ostro_core::dynamics::{format_float, integrate_with};
use ostro_core::{
    compare, euler_lagrange, ostrogradski_hamiltonian, solve_explicit, to_first_order,
    CompareOptions, ComparisonReport, DerivativeTower, EnergyCoefficients, EquationOfMotion,
    EquationsDocument, Lagrangian, PhaseState, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

struct System {
    lagrangian: Lagrangian,
    eom: EquationOfMotion,
}

impl System {
    fn new(
        field: &str,
        text: &str,
        params: &BTreeMap<String, f64>,
        bind: bool,
    ) -> Result<Self, CliError> {
        let l = Lagrangian::parse(text, params.clone())
            .map_err(|e| CliError::config(format!("{field}: {e}")))?;
        let lagrangian = if bind { l.bound() } else { l };
        let eom = solve_explicit(&euler_lagrange(&lagrangian)).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{field}: {}", err.message);
            err
        })?;
        Ok(System { lagrangian, eom })
    }

    fn document(&self) -> EquationsDocument {
        EquationsDocument::new(&self.lagrangian, &self.eom)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut Vec<u8>) -> ostro_core::Result<()>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_file(path, &buf)
}

pub fn derive(cfg: &RunConfig, bind: bool, write: bool) -> Result<(), CliError> {
    let sys = System::new("lagrangian", &cfg.lagrangian, &cfg.parameters, bind)?;
    let json = to_json(&sys.document())?;
    if write {
        write_file(&output_dir(cfg)?.join("equations.json"), json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    version: &'static str,
    samples: usize,
    final_state: PhaseState,
    hamiltonian_initial: f64,
    hamiltonian_final: f64,
    /// Largest `|H(t) − H(t0)|` over the samples.
    hamiltonian_drift: f64,
    /// The same divided by `|H(t0)|`; absent when `H(t0) = 0`.
    hamiltonian_relative_drift: Option<f64>,
    divergence_time: Option<f64>,
    failure: Option<String>,
    accepted_steps: Option<usize>,
    rejected_steps: Option<usize>,
}

fn hamiltonian_series(sys: &System, traj: &Trajectory) -> Result<Vec<f64>, CliError> {
    let h = ostrogradski_hamiltonian(&sys.lagrangian);
    let order = h.max_deriv_order().unwrap_or(0).max(sys.eom.order - 1);
    let tower = DerivativeTower::new(&sys.eom, order)?;
    let mut out = Vec::with_capacity(traj.len());
    for s in traj.samples() {
        let derivs = tower.eval(s)?;
        match h.evaluate_at(s.t, &derivs, sys.lagrangian.parameters()) {
            Ok(v) => out.push(v),
            Err(_) => break,
        }
    }
    Ok(out)
}

pub fn simulate(cfg: &RunConfig, gnuplot: bool) -> Result<(), CliError> {
    let t_end = cfg.t_end()?;
    let sys = System::new("lagrangian", &cfg.lagrangian, &cfg.parameters, true)?;
    let dim = sys.eom.state_dim();
    if cfg.initial_state.len() != dim {
        return Err(CliError::config(format!(
            "initial_state has {} entries but the equation of motion has order {dim}",
            cfg.initial_state.len()
        )));
    }
    let ode = to_first_order(&sys.eom)?;
    let init = PhaseState::new(cfg.t0, cfg.initial_state.clone());
    let dir = output_dir(cfg)?;

    let (traj, stats, failure) = match integrate_with(&ode, &init, t_end, &cfg.integrator, &[]) {
        Ok(run) => (run.trajectory, Some(run.stats), None),
        Err(e) => match e.partial_trajectory() {
            Some(partial) => (partial.clone(), None, Some(e)),
            None => return Err(e.into()),
        },
    };
    write_with(&dir.join("trajectory.csv"), |buf| traj.write_csv(buf))?;

    let energies = hamiltonian_series(&sys, &traj)?;
    let h0 = energies.first().copied().unwrap_or(f64::NAN);
    let drift = energies.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
    let summary = SimulationSummary {
        version: VERSION,
        samples: traj.len(),
        final_state: traj.last().cloned().unwrap_or(init),
        hamiltonian_initial: h0,
        hamiltonian_final: energies.last().copied().unwrap_or(f64::NAN),
        hamiltonian_drift: drift,
        hamiltonian_relative_drift: (h0 != 0.0).then(|| drift / h0.abs()),
        divergence_time: failure.as_ref().and_then(|e| e.failure_time()),
        failure: failure.as_ref().map(|e| e.to_string()),
        accepted_steps: stats.as_ref().map(|s| s.accepted),
        rejected_steps: stats.as_ref().map(|s| s.rejected),
    };
    write_file(&dir.join("summary.json"), to_json(&summary)?.as_bytes())?;
    if gnuplot {
        write_file(&dir.join("plot.gp"), simulate_plot(dim).as_bytes())?;
    }
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub struct Analysis {
    equations: BTreeMap<&'static str, EquationsDocument>,
    pub report: ComparisonReport,
}

pub fn run_analysis(cfg: &RunConfig) -> Result<Analysis, CliError> {
    let newton_text = cfg.newtonian()?;
    let t_end = cfg.t_end()?;
    let full = System::new("lagrangian", &cfg.lagrangian, &cfg.parameters, true)?;
    let newton = System::new("newtonian_lagrangian", newton_text, &cfg.parameters, true)?;
    let (n_full, n_newton) = (full.eom.state_dim(), newton.eom.state_dim());
    let needed = n_full.max(n_newton);
    if cfg.initial_state.len() < needed {
        return Err(CliError::config(format!(
            "initial_state has {} entries but the equations of motion need {needed}",
            cfg.initial_state.len()
        )));
    }
    if cfg.initial_state.len() > n_full {
        info!("using the first {n_full} entries of initial_state for the full system");
    }
    let init_full = PhaseState::new(cfg.t0, cfg.initial_state[..n_full].to_vec());
    let init_newton = PhaseState::new(cfg.t0, cfg.initial_state[..n_newton].to_vec());
    let alphas = cfg
        .alphas
        .clone()
        .map(EnergyCoefficients::new)
        .transpose()?;
    let opts = CompareOptions {
        h: cfg.h,
        m: cfg.mass,
        alphas,
        report_samples: cfg.report_samples,
        quadrature_intervals: cfg.quadrature_intervals,
        taylor_order: cfg.taylor_order,
        q_terms: cfg.q_terms,
    };
    let report = compare(
        &full.lagrangian,
        &newton.lagrangian,
        &init_full,
        &init_newton,
        t_end,
        &cfg.integrator,
        &opts,
    )?;
    let equations = BTreeMap::from([("full", full.document()), ("newtonian", newton.document())]);
    Ok(Analysis { equations, report })
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    equations: &'a BTreeMap<&'static str, EquationsDocument>,
    report: &'a ComparisonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_seconds: Option<f64>,
}

pub fn analyze(cfg: &RunConfig, gnuplot: bool, timing: bool) -> Result<(), CliError> {
    let start = Instant::now();
    let analysis = run_analysis(cfg)?;
    let dir = output_dir(cfg)?;
    let report = &analysis.report;
    let doc = ReportDocument {
        tool: "ostro",
        version: VERSION,
        config: cfg,
        equations: &analysis.equations,
        report,
        duration_seconds: timing.then(|| start.elapsed().as_secs_f64()),
    };
    write_file(&dir.join("report.json"), to_json(&doc)?.as_bytes())?;
    write_with(&dir.join("q_r.csv"), |b| report.write_q_r_csv(b))?;
    write_with(&dir.join("uncertainty.csv"), |b| {
        report.write_uncertainty_csv(b)
    })?;
    write_with(&dir.join("quantum_potential.csv"), |b| {
        report.write_quantum_potential_csv(b)
    })?;
    if cfg.alphas.is_some() {
        write_with(&dir.join("energy.csv"), |b| report.write_energy_csv(b))?;
    }
    if gnuplot {
        write_file(
            &dir.join("plot.gp"),
            analyze_plot(cfg.alphas.is_some()).as_bytes(),
        )?;
    }
    println!(
        "delta_s = {}, n = {}",
        format_float(report.delta_s),
        format_float(report.n)
    );
    Ok(())
}

type SweepRow = (f64, Result<(f64, f64), CliError>);

pub fn sweep(
    cfg: &RunConfig,
    param: &str,
    values: &[f64],
    jobs: Option<usize>,
) -> Result<(), CliError> {
    if !cfg.parameters.contains_key(param) {
        return Err(CliError::config(format!(
            "cannot sweep unknown parameter {param:?}"
        )));
    }
    cfg.newtonian()?;
    cfg.t_end()?;
    if values.is_empty() {
        return Err(CliError::config("no sweep values given"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                let mut row_cfg = cfg.clone();
                row_cfg.parameters.insert(param.to_string(), v);
                (
                    v,
                    run_analysis(&row_cfg).map(|a| (a.report.delta_s, a.report.n)),
                )
            })
            .collect()
    });
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut text = String::from("param,delta_s,n\n");
    let mut failures = Vec::new();
    for (v, row) in &rows {
        let (ds, n) = match row {
            Ok(pair) => *pair,
            Err(e) => {
                warn!("{param} = {v}: {e}");
                failures.push((*v, e));
                (f64::NAN, f64::NAN)
            }
        };
        text.push_str(&format!(
            "{},{},{}\n",
            format_float(*v),
            format_float(ds),
            format_float(n)
        ));
    }
    let dir = output_dir(cfg)?;
    write_file(&dir.join("sweep.csv"), text.as_bytes())?;
    match failures.first() {
        None => Ok(()),
        Some((v, e)) => Err(CliError {
            code: e.code,
            message: format!(
                "{} of {} sweep rows failed; first at {param} = {v}: {e}",
                failures.len(),
                rows.len()
            ),
        }),
    }
}

const PLOT_HEADER: &str = "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n";

fn simulate_plot(dim: usize) -> String {
    let mut s = String::from(PLOT_HEADER);
    s.push_str("set output 'trajectory.png'\nset xlabel 't'\nplot ");
    let cols: Vec<String> = (0..dim)
        .map(|k| format!("'trajectory.csv' using 1:{} with lines", k + 2))
        .collect();
    s.push_str(&cols.join(", "));
    s.push('\n');
    s
}

fn analyze_plot(energy: bool) -> String {
    let mut s = String::from(PLOT_HEADER);
    s.push_str("set xlabel 't'\n");
    s.push_str(
        "set output 'q_r.png'\nplot 'q_r.csv' using 1:2 with lines, '' using 1:3 with lines\n",
    );
    s.push_str("set output 'uncertainty.png'\nplot 'uncertainty.csv' using 1:2 with lines, '' using 1:3 with lines\n");
    s.push_str(
        "set output 'quantum_potential.png'\nplot 'quantum_potential.csv' using 1:2 with lines\n",
    );
    if energy {
        s.push_str("set output 'energy.png'\nplot for [i=2:5] 'energy.csv' using 1:i with lines\n");
    }
    s
}
