use std::collections::BTreeMap;

use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value bound for derivative order {0}")]
    MissingDeriv(u32),
    #[error("no value bound for parameter {0:?}")]
    MissingParameter(String),
    #[error("evaluation produced a non-finite value ({0})")]
    NonFinite(f64),
}

/// Values for every symbol an expression may reference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    pub time: f64,
    /// Entry `k` is the value of `x⁽ᵏ⁾`.
    pub deriv_values: Vec<f64>,
    pub parameters: BTreeMap<String, f64>,
}

impl Binding {
    pub fn new(time: f64, deriv_values: Vec<f64>) -> Self {
        Binding {
            time,
            deriv_values,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_parameter(mut self, name: impl Into<String>, value: f64) -> Self {
        self.parameters.insert(name.into(), value);
        self
    }

    pub fn with_parameters(mut self, params: &BTreeMap<String, f64>) -> Self {
        self.parameters
            .extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }
}

impl Expr {
    pub fn evaluate(&self, b: &Binding) -> Result<f64, EvalError> {
        self.evaluate_at(b.time, &b.deriv_values, &b.parameters)
    }

    /// Evaluation without building a [`Binding`]; used in integrator loops.
    pub fn evaluate_at(
        &self,
        time: f64,
        derivs: &[f64],
        params: &BTreeMap<String, f64>,
    ) -> Result<f64, EvalError> {
        let v = self.eval_raw(time, derivs, params)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(v))
        }
    }

    fn eval_raw(
        &self,
        time: f64,
        derivs: &[f64],
        params: &BTreeMap<String, f64>,
    ) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Constant(v) => *v,
            Expr::Parameter(name) => *params
                .get(name)
                .ok_or_else(|| EvalError::MissingParameter(name.clone()))?,
            Expr::Time => time,
            Expr::Deriv(k) => *derivs.get(*k as usize).ok_or(EvalError::MissingDeriv(*k))?,
            Expr::Sum(ops) => {
                let mut acc = 0.0;
                for op in ops {
                    acc += op.eval_raw(time, derivs, params)?;
                }
                acc
            }
            Expr::Product(ops) => {
                let mut acc = 1.0;
                for op in ops {
                    acc *= op.eval_raw(time, derivs, params)?;
                }
                acc
            }
            Expr::Power(base, n) => base.eval_raw(time, derivs, params)?.powi(*n),
            Expr::Call(func, arg) => func.apply(arg.eval_raw(time, derivs, params)?),
        })
    }
}
