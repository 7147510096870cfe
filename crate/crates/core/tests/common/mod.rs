#![allow(dead_code)]

use std::collections::BTreeMap;

use ostro_core::{Expr, Func};
use proptest::prelude::*;

pub const PARAMS: [&str; 3] = ["a", "b", "k"];

pub fn params() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("a".to_string(), 0.7),
        ("b".to_string(), -1.3),
        ("k".to_string(), 2.0),
    ])
}

fn leaf(max_order: u32) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4i32..=4).prop_map(|v| Expr::Constant(v as f64)),
        (-3.0f64..3.0).prop_map(Expr::Constant),
        prop::sample::select(PARAMS.to_vec()).prop_map(|p| Expr::Parameter(p.to_string())),
        Just(Expr::Time),
        (0..=max_order).prop_map(Expr::Deriv),
    ]
}

/// Arbitrary trees assembled from the raw variants, not yet canonical.
pub fn raw_expr(max_order: u32) -> impl Strategy<Value = Expr> {
    leaf(max_order).prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Product),
            (inner.clone(), prop::sample::select(vec![-2, -1, 2, 3]))
                .prop_map(|(b, n)| Expr::Power(Box::new(b), n)),
            (
                prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp]),
                inner
            )
                .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

pub fn point(dim: usize) -> impl Strategy<Value = (f64, Vec<f64>)> {
    (-1.5f64..1.5, prop::collection::vec(-1.5f64..1.5, dim))
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Fourth-order central difference of `f` at `x`.
pub fn central_diff(f: impl Fn(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    let f1 = f(x + h)? - f(x - h)?;
    let f2 = f(x + 2.0 * h)? - f(x - 2.0 * h)?;
    Some((8.0 * f1 - f2) / (12.0 * h))
}
