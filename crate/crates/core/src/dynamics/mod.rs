//! Phase-space states, trajectories and their numerical integration.

mod integrate;
mod system;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use integrate::{
    integrate, integrate_with, IntegrateError, Integration, IntegrationStats, IntegratorConfig,
    Method,
};
pub use system::{state_derivatives, to_first_order, DerivativeTower, OdeSystem};

/// Ostrogradski phase point: `y[k] = x⁽ᵏ⁾(t)` for `k = 0..2N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub y: Vec<f64>,
}

impl PhaseState {
    pub fn new(t: f64, y: Vec<f64>) -> Self {
        PhaseState { t, y }
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.y.iter().all(|v| v.is_finite())
    }
}

/// Time-ordered samples of one solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    eom_order: usize,
    samples: Vec<PhaseState>,
}

impl Trajectory {
    pub fn new(eom_order: usize) -> Self {
        Trajectory {
            eom_order,
            samples: Vec::new(),
        }
    }

    /// Validates strictly increasing times and a uniform state dimension.
    pub fn from_samples(eom_order: usize, samples: Vec<PhaseState>) -> Result<Self> {
        let mut traj = Trajectory::new(eom_order);
        for s in samples {
            traj.push(s)?;
        }
        Ok(traj)
    }

    pub fn push(&mut self, s: PhaseState) -> Result<()> {
        if s.dim() != self.eom_order {
            return Err(Error::InvalidInput(format!(
                "sample has dimension {} but trajectory has {}",
                s.dim(),
                self.eom_order
            )));
        }
        if let Some(last) = self.samples.last() {
            if s.t.partial_cmp(&last.t) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidInput(format!(
                    "sample times must increase strictly ({} after {})",
                    s.t, last.t
                )));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, s: PhaseState) {
        debug_assert!(self.samples.last().map_or(true, |l| l.t < s.t));
        self.samples.push(s);
    }

    pub fn eom_order(&self) -> usize {
        self.eom_order
    }

    pub fn state_dim(&self) -> usize {
        self.eom_order
    }

    pub fn samples(&self) -> &[PhaseState] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&PhaseState> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Cubic Hermite interpolation between samples.
    ///
    /// Component `k` uses component `k + 1` as its slope. The slope of the
    /// last component comes from `system` when given, otherwise from a
    /// three-point difference over neighbouring samples.
    pub fn resample(&self, times: &[f64], system: Option<&OdeSystem>) -> Result<Vec<PhaseState>> {
        let (Some(first), Some(last)) = (self.first(), self.last()) else {
            return Err(Error::InvalidInput(
                "cannot resample an empty trajectory".into(),
            ));
        };
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if !(t >= first.t && t <= last.t) {
                return Err(Error::InvalidInput(format!(
                    "resample time {t} outside [{}, {}]",
                    first.t, last.t
                )));
            }
            // index of the first sample with time >= t
            let hi = self.samples.partition_point(|s| s.t < t);
            if self.samples[hi].t == t {
                out.push(self.samples[hi].clone());
                continue;
            }
            let lo = hi - 1;
            let (a, b) = (&self.samples[lo], &self.samples[hi]);
            let ma = self.slope(lo, system)?;
            let mb = self.slope(hi, system)?;
            let h = b.t - a.t;
            let s = (t - a.t) / h;
            let (s2, s3) = (s * s, s * s * s);
            let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
            let h10 = s3 - 2.0 * s2 + s;
            let h01 = -2.0 * s3 + 3.0 * s2;
            let h11 = s3 - s2;
            let y = (0..self.eom_order)
                .map(|k| h00 * a.y[k] + h10 * h * ma[k] + h01 * b.y[k] + h11 * h * mb[k])
                .collect();
            out.push(PhaseState::new(t, y));
        }
        Ok(out)
    }

    fn slope(&self, i: usize, system: Option<&OdeSystem>) -> Result<Vec<f64>> {
        let s = &self.samples[i];
        if let Some(sys) = system {
            let mut dy = vec![0.0; s.dim()];
            sys.derivative(s.t, &s.y, &mut dy)?;
            return Ok(dy);
        }
        let n = s.dim();
        let mut dy: Vec<f64> = s.y[1..].to_vec();
        let last = n - 1;
        let (l, r) = match (i.checked_sub(1), self.samples.get(i + 1)) {
            (Some(l), Some(_)) => (l, i + 1),
            (None, Some(_)) => (i, i + 1),
            (Some(l), None) => (l, i),
            (None, None) => (i, i),
        };
        let (a, b) = (&self.samples[l], &self.samples[r]);
        dy.push(if l == r {
            0.0
        } else {
            (b.y[last] - a.y[last]) / (b.t - a.t)
        });
        Ok(dy)
    }

    /// CSV with header `t,x0,...,x{2N-1}` and shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.eom_order).map(|k| format!("x{k}")));
        out.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![format_float(s.t)];
            row.extend(s.y.iter().map(|v| format_float(*v)));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let dim = headers
            .len()
            .checked_sub(1)
            .filter(|d| *d > 0)
            .ok_or_else(|| {
                Error::InvalidInput(
                    "trajectory CSV needs a t column and at least one state column".into(),
                )
            })?;
        let expected: Vec<String> = std::iter::once("t".to_string())
            .chain((0..dim).map(|k| format!("x{k}")))
            .collect();
        if headers.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::InvalidInput(format!(
                "unexpected trajectory CSV header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut traj = Trajectory::new(dim);
        for record in rdr.records() {
            let record = record?;
            let values = record
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("not a number: {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            traj.push(PhaseState::new(values[0], values[1..].to_vec()))?;
        }
        Ok(traj)
    }
}

/// Shortest decimal that round-trips through `f64` parsing.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}
