use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use ostro_core::{IntegratorConfig, Method};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const PLANCK: f64 = 6.62607015e-34;

fn one() -> f64 {
    1.0
}

fn report_samples() -> usize {
    256
}

fn quadrature_intervals() -> usize {
    ostro_core::analysis::DEFAULT_QUADRATURE_INTERVALS
}

fn taylor_order() -> u32 {
    8
}

/// One run, as read from a JSON file and then adjusted by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lagrangian: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newtonian_lagrangian: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub initial_state: Vec<f64>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "one")]
    pub h: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "report_samples")]
    pub report_samples: usize,
    #[serde(default = "quadrature_intervals")]
    pub quadrature_intervals: usize,
    #[serde(default = "taylor_order")]
    pub taylor_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_terms: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn t_end(&self) -> Result<f64, CliError> {
        self.t_end
            .ok_or_else(|| CliError::config("config field `t_end` is required"))
    }

    pub fn newtonian(&self) -> Result<&str, CliError> {
        self.newtonian_lagrangian.as_deref().ok_or_else(|| {
            CliError::config("config field `newtonian_lagrangian` is required for analysis")
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Flags that override config fields.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Action quantum h.
    #[arg(long, conflicts_with = "planck")]
    pub h: Option<f64>,
    /// Use the Planck constant in SI units for h.
    #[arg(long)]
    pub planck: bool,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// rk4 or rk45.
    #[arg(long)]
    pub method: Option<Method>,
    /// Fixed step for rk4.
    #[arg(long)]
    pub step: Option<f64>,
    /// Relative tolerance for rk45.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if self.planck {
            cfg.h = PLANCK;
        }
        if let Some(m) = self.mass {
            cfg.mass = m;
        }
        if let Some(t) = self.t_end {
            cfg.t_end = Some(t);
        }
        if let Some(m) = self.method {
            cfg.integrator.method = m;
        }
        if let Some(s) = self.step {
            cfg.integrator.step = s;
        }
        if let Some(t) = self.tol {
            cfg.integrator.rel_tol = t;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = Some(d.clone());
        }
    }
}
