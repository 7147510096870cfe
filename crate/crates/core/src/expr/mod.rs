//! Symbolic expressions in one generalized coordinate `x`, its time
//! derivatives `x⁽ᵏ⁾`, the time variable `t`, and named parameters.
//!
//! Every [`Expr`] produced by the public constructors, the parser, or any of
//! the calculus operations is in canonical form:
//!
//! * sums and products are flattened and carry at least two operands,
//! * constants are folded and like terms / like factors are collected,
//! * products distribute over sums, and small positive powers of sums are
//!   expanded, so polynomial expressions have a unique shape,
//! * operands are sorted by a total order (constants, parameters by name,
//!   `t`, derivative coordinates by order, then composites).
//!
//! Canonical form makes structural equality (`==`) a meaningful and
//! deterministic test of equivalence for the polynomial Lagrangians this
//! crate is built around.

mod calculus;
mod eval;
mod format;
mod parse;
mod simplify;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

pub use eval::{Binding, EvalError};
pub use parse::{parse, ParseError, ParseErrorKind};

/// Elementary functions understood by the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    pub fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Immutable expression tree.
///
/// The variants are public so callers can pattern match, but trees should be
/// built through the constructor functions ([`Expr::sum`], [`Expr::product`],
/// [`Expr::pow`], ...) which keep them canonical. A hand-assembled tree can be
/// brought into canonical form with [`Expr::simplify`].
#[derive(Debug, Clone)]
pub enum Expr {
    Constant(f64),
    Parameter(String),
    Time,
    /// `x⁽ᵏ⁾`; order 0 is the coordinate itself.
    Deriv(u32),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Integer power with a non-zero exponent.
    Power(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(v: f64) -> Expr {
        // -0.0 and 0.0 must compare equal structurally
        Expr::Constant(if v == 0.0 { 0.0 } else { v })
    }

    pub fn zero() -> Expr {
        Expr::Constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::Constant(1.0)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Parameter(name.into())
    }

    pub fn time() -> Expr {
        Expr::Time
    }

    /// The coordinate `x` itself.
    pub fn coord() -> Expr {
        Expr::Deriv(0)
    }

    pub fn deriv(order: u32) -> Expr {
        Expr::Deriv(order)
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        simplify::make_sum(terms)
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        simplify::make_product(factors)
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        simplify::make_pow(base, exponent)
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        simplify::make_call(func, arg)
    }

    pub fn neg(self) -> Expr {
        Expr::product(vec![Expr::Constant(-1.0), self])
    }

    pub fn add(self, other: Expr) -> Expr {
        Expr::sum(vec![self, other])
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::sum(vec![self, other.neg()])
    }

    pub fn mul(self, other: Expr) -> Expr {
        Expr::product(vec![self, other])
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::product(vec![self, Expr::pow(other, -1)])
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Expr::Constant(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Constant(v) if *v == 0.0)
    }

    /// Rebuilds the tree bottom-up through the canonicalizing constructors.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Highest derivative order `k` such that `x⁽ᵏ⁾` occurs, if any.
    pub fn max_deriv_order(&self) -> Option<u32> {
        let mut best: Option<u32> = None;
        self.visit(&mut |e| {
            if let Expr::Deriv(k) = e {
                best = Some(best.map_or(*k, |b| b.max(*k)));
            }
        });
        best
    }

    pub fn contains_deriv(&self, order: u32) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Deriv(k) if *k == order));
        found
    }

    pub fn contains_time(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Time));
        found
    }

    /// True when the expression depends on neither `t` nor any `x⁽ᵏ⁾`
    /// (it may still contain parameters).
    pub fn is_state_independent(&self) -> bool {
        let mut dependent = false;
        self.visit(&mut |e| dependent |= matches!(e, Expr::Time | Expr::Deriv(_)));
        !dependent
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Parameter(name) = e {
                names.insert(name.clone());
            }
        });
        names
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Sum(ops) | Expr::Product(ops) => ops.iter().for_each(|op| op.visit(f)),
            Expr::Power(base, _) => base.visit(f),
            Expr::Call(_, arg) => arg.visit(f),
            _ => {}
        }
    }

    /// Rebuilds the tree replacing leaves through `leaf`; composite nodes are
    /// reassembled with the canonicalizing constructors.
    pub fn map_leaves(&self, leaf: &impl Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Sum(ops) => Expr::sum(ops.iter().map(|op| op.map_leaves(leaf)).collect()),
            Expr::Product(ops) => Expr::product(ops.iter().map(|op| op.map_leaves(leaf)).collect()),
            Expr::Power(base, n) => Expr::pow(base.map_leaves(leaf), *n),
            Expr::Call(func, arg) => Expr::call(*func, arg.map_leaves(leaf)),
            _ => leaf(self),
        }
    }

    /// Replaces named parameters by constants. Unknown names are left alone.
    pub fn bind_parameters<'a, I>(&self, params: I) -> Expr
    where
        I: IntoIterator<Item = (&'a String, &'a f64)>,
    {
        let params: Vec<(&String, &f64)> = params.into_iter().collect();
        self.map_leaves(&|e| match e {
            Expr::Parameter(name) => params
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| Expr::constant(**v))
                .unwrap_or_else(|| e.clone()),
            _ => e.clone(),
        })
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Constant(_) => 0,
            Expr::Parameter(_) => 1,
            Expr::Time => 2,
            Expr::Deriv(_) => 3,
            Expr::Power(..) => 4,
            Expr::Product(_) => 5,
            Expr::Sum(_) => 6,
            Expr::Call(..) => 7,
        }
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expr::Constant(a), Expr::Constant(b)) => a.total_cmp(b),
            (Expr::Parameter(a), Expr::Parameter(b)) => a.cmp(b),
            (Expr::Time, Expr::Time) => Ordering::Equal,
            (Expr::Deriv(a), Expr::Deriv(b)) => a.cmp(b),
            (Expr::Power(a, m), Expr::Power(b, n)) => a.cmp(b).then(m.cmp(n)),
            (Expr::Product(a), Expr::Product(b)) | (Expr::Sum(a), Expr::Sum(b)) => a.cmp(b),
            (Expr::Call(f, a), Expr::Call(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}
