use std::collections::BTreeMap;

use super::{Expr, Func};

/// Positive powers of a sum up to this exponent are multiplied out.
const MAX_EXPANDED_POWER: i32 = 8;

pub(super) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Constant(v) => Expr::constant(*v),
        Expr::Parameter(_) | Expr::Time | Expr::Deriv(_) => e.clone(),
        Expr::Sum(ops) => make_sum(ops.iter().map(simplify).collect()),
        Expr::Product(ops) => make_product(ops.iter().map(simplify).collect()),
        Expr::Power(base, n) => make_pow(simplify(base), *n),
        Expr::Call(func, arg) => make_call(*func, simplify(arg)),
    }
}

/// Splits a canonical term into its numeric coefficient and the rest.
fn split_coefficient(term: Expr) -> (f64, Expr) {
    match term {
        Expr::Product(mut ops) => match ops[0] {
            Expr::Constant(c) => {
                ops.remove(0);
                let rest = if ops.len() == 1 {
                    ops.pop().unwrap()
                } else {
                    Expr::Product(ops)
                };
                (c, rest)
            }
            _ => (1.0, Expr::Product(ops)),
        },
        other => (1.0, other),
    }
}

fn scale(coef: f64, rest: Expr) -> Expr {
    if coef == 1.0 {
        return rest;
    }
    let mut ops = vec![Expr::constant(coef)];
    match rest {
        Expr::Product(factors) => ops.extend(factors),
        other => ops.push(other),
    }
    Expr::Product(ops)
}

/// Canonical sum of canonical terms.
pub(super) fn make_sum(terms: Vec<Expr>) -> Expr {
    let mut constant = 0.0;
    let mut groups: BTreeMap<Expr, f64> = BTreeMap::new();
    let mut stack: Vec<Expr> = terms;
    stack.reverse();
    while let Some(term) = stack.pop() {
        match term {
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Constant(v) => constant += v,
            other => {
                let (coef, rest) = split_coefficient(other);
                *groups.entry(rest).or_insert(0.0) += coef;
            }
        }
    }

    let mut out: Vec<Expr> = Vec::with_capacity(groups.len() + 1);
    if constant != 0.0 {
        out.push(Expr::constant(constant));
    }
    out.extend(
        groups
            .into_iter()
            .filter(|(_, coef)| *coef != 0.0)
            .map(|(rest, coef)| scale(coef, rest)),
    );
    out.sort();
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Sum(out),
    }
}

/// Canonical product of canonical factors.
pub(super) fn make_product(factors: Vec<Expr>) -> Expr {
    let mut coef = 1.0;
    let mut flat: Vec<Expr> = Vec::with_capacity(factors.len());
    let mut stack = factors;
    stack.reverse();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
            Expr::Constant(v) => coef *= v,
            other => flat.push(other),
        }
    }
    if coef == 0.0 {
        return Expr::zero();
    }

    if let Some(pos) = flat.iter().position(|f| matches!(f, Expr::Sum(_))) {
        let Expr::Sum(terms) = flat.swap_remove(pos) else {
            unreachable!()
        };
        let expanded = terms
            .into_iter()
            .map(|term| {
                let mut ops = Vec::with_capacity(flat.len() + 2);
                ops.push(Expr::constant(coef));
                ops.extend(flat.iter().cloned());
                ops.push(term);
                make_product(ops)
            })
            .collect();
        return make_sum(expanded);
    }

    let mut powers: BTreeMap<Expr, i32> = BTreeMap::new();
    for f in flat {
        let (base, n) = match f {
            Expr::Power(base, n) => (*base, n),
            other => (other, 1),
        };
        *powers.entry(base).or_insert(0) += n;
    }

    let mut out: Vec<Expr> = Vec::with_capacity(powers.len() + 1);
    let mut deferred: Vec<Expr> = Vec::new();
    for (base, n) in powers {
        if n == 0 {
            continue;
        }
        match make_pow(base, n) {
            Expr::Constant(v) => coef *= v,
            p @ (Expr::Power(..) | Expr::Parameter(_) | Expr::Time | Expr::Deriv(_)) => out.push(p),
            p @ Expr::Call(..) => out.push(p),
            // collected exponents that re-expand (sums) or split (products)
            other => deferred.push(other),
        }
    }
    if !deferred.is_empty() {
        let mut ops = vec![Expr::constant(coef)];
        ops.extend(out);
        ops.extend(deferred);
        return make_product(ops);
    }
    if coef == 0.0 {
        return Expr::zero();
    }
    out.sort();
    if coef != 1.0 {
        out.insert(0, Expr::constant(coef));
    }
    match out.len() {
        0 => Expr::one(),
        1 => out.pop().unwrap(),
        _ => Expr::Product(out),
    }
}

/// Canonical integer power of a canonical base.
pub(super) fn make_pow(base: Expr, n: i32) -> Expr {
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return base;
    }
    match base {
        Expr::Constant(v) => {
            let folded = v.powi(n);
            if folded.is_finite() {
                Expr::constant(folded)
            } else {
                Expr::Power(Box::new(Expr::Constant(v)), n)
            }
        }
        Expr::Power(inner, m) => match m.checked_mul(n) {
            Some(mn) => make_pow(*inner, mn),
            None => Expr::Power(Box::new(Expr::Power(inner, m)), n),
        },
        Expr::Product(factors) => {
            make_product(factors.into_iter().map(|f| make_pow(f, n)).collect())
        }
        sum @ Expr::Sum(_) if n > 0 && n <= MAX_EXPANDED_POWER => {
            let mut acc = sum.clone();
            for _ in 1..n {
                acc = make_product(vec![acc, sum.clone()]);
            }
            acc
        }
        other => Expr::Power(Box::new(other), n),
    }
}

pub(super) fn make_call(func: Func, arg: Expr) -> Expr {
    if let Expr::Constant(v) = arg {
        let folded = func.apply(v);
        if folded.is_finite() {
            return Expr::constant(folded);
        }
    }
    Expr::Call(func, Box::new(arg))
}
