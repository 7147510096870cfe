use super::{Expr, Func};

impl Expr {
    /// `∂e/∂x⁽ᵏ⁾`, treating each derivative order as an independent variable.
    pub fn partial(&self, k: u32) -> Expr {
        self.chain_rule(&|leaf| match leaf {
            Expr::Deriv(j) if *j == k => Expr::one(),
            _ => Expr::zero(),
        })
    }

    /// `d/dt` along a trajectory: `t ↦ 1`, `x⁽ᵏ⁾ ↦ x⁽ᵏ⁺¹⁾`.
    pub fn time_derivative(&self) -> Expr {
        self.chain_rule(&|leaf| match leaf {
            Expr::Time => Expr::one(),
            Expr::Deriv(j) => Expr::deriv(j + 1),
            _ => Expr::zero(),
        })
    }

    /// `(d/dt)ⁿ e`.
    pub fn time_derivative_n(&self, n: u32) -> Expr {
        (0..n).fold(self.clone(), |acc, _| acc.time_derivative())
    }

    /// Replaces every `x⁽ᵏ⁾` by `replacement`.
    pub fn substitute(&self, k: u32, replacement: &Expr) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Deriv(j) if *j == k => replacement.clone(),
            _ => leaf.clone(),
        })
    }

    /// Differentiation with the leaf derivatives supplied by `leaf`.
    fn chain_rule(&self, leaf: &impl Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Constant(_) | Expr::Parameter(_) | Expr::Time | Expr::Deriv(_) => leaf(self),
            Expr::Sum(ops) => Expr::sum(ops.iter().map(|op| op.chain_rule(leaf)).collect()),
            Expr::Product(ops) => {
                let mut terms = Vec::with_capacity(ops.len());
                for (i, op) in ops.iter().enumerate() {
                    let d = op.chain_rule(leaf);
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(ops.len());
                    factors.extend(ops[..i].iter().cloned());
                    factors.push(d);
                    factors.extend(ops[i + 1..].iter().cloned());
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Power(base, n) => {
                let d = base.chain_rule(leaf);
                if d.is_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![
                    Expr::constant(f64::from(*n)),
                    Expr::pow((**base).clone(), n - 1),
                    d,
                ])
            }
            Expr::Call(func, arg) => {
                let d = arg.chain_rule(leaf);
                if d.is_zero() {
                    return Expr::zero();
                }
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, (**arg).clone()),
                    Func::Cos => Expr::call(Func::Sin, (**arg).clone()).neg(),
                    Func::Exp => self.clone(),
                };
                Expr::product(vec![outer, d])
            }
        }
    }
}
