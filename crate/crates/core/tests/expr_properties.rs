mod common;

use common::{central_diff, close, params, point, raw_expr};
use ostro_core::{parse, Expr};
use proptest::prelude::*;

fn eval(e: &Expr, t: f64, y: &[f64]) -> Option<f64> {
    e.evaluate_at(t, y, &params())
        .ok()
        .filter(|v| v.abs() < 1e8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn display_parse_round_trip(raw in raw_expr(3)) {
        let e = raw.simplify();
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "{}", text);
    }

    #[test]
    fn simplify_is_idempotent(raw in raw_expr(3)) {
        let once = raw.simplify();
        prop_assert_eq!(once.simplify(), once);
    }

    #[test]
    fn simplify_preserves_value(raw in raw_expr(3), (t, y) in point(4)) {
        if let (Some(a), Some(b)) = (eval(&raw, t, &y), eval(&raw.simplify(), t, &y)) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn partials_match_finite_differences(raw in raw_expr(2), (t, y) in point(3), k in 0u32..3) {
        let e = raw.simplify();
        let d = e.partial(k);
        let at = |v: f64| {
            let mut y = y.clone();
            y[k as usize] = v;
            eval(&e, t, &y)
        };
        let x = y[k as usize];
        let (Some(f), Some(sym)) = (at(x), eval(&d, t, &y)) else { return Ok(()) };
        let (Some(fd), Some(fd2)) = (central_diff(at, x, 1e-3), central_diff(at, x, 2e-3)) else {
            return Ok(());
        };
        // skip points where the difference quotient itself is unreliable
        if (fd - fd2).abs() > 1e-6 * fd.abs().max(1.0) || sym.abs() < 1e-3 * f.abs().max(1.0) {
            return Ok(());
        }
        prop_assert!((sym - fd).abs() <= 1e-6 * sym.abs(), "{e}: {sym} vs {fd}");
    }

    #[test]
    fn substitution_matches_evaluation(
        raw in raw_expr(3),
        repl in raw_expr(3),
        (t, y) in point(4),
        k in 0u32..4,
    ) {
        let (e, r) = (raw.simplify(), repl.simplify());
        let Some(rv) = eval(&r, t, &y) else { return Ok(()) };
        let mut y2 = y.clone();
        y2[k as usize] = rv;
        if let (Some(direct), Some(sub)) = (eval(&e, t, &y2), eval(&e.substitute(k, &r), t, &y)) {
            prop_assert!(close(direct, sub, 1e-9), "{direct} vs {sub}");
        }
    }

    #[test]
    fn time_derivative_follows_a_path(raw in raw_expr(2), t in -1.0f64..1.0) {
        // x(t) = sin(1.3 t) + 0.5 cos(0.7 t), with derivatives in closed form
        let path = |t: f64| -> Vec<f64> {
            let (s1, c1) = (1.3 * t).sin_cos();
            let (s2, c2) = (0.7 * t).sin_cos();
            let mut out = Vec::new();
            let (mut w1, mut w2) = (1.0, 0.5);
            for n in 0..4 {
                let a = [s1, c1, -s1, -c1][n % 4] * w1;
                let b = [c2, -s2, -c2, s2][n % 4] * w2;
                out.push(a + b);
                w1 *= 1.3;
                w2 *= 0.7;
            }
            out
        };
        let e = raw.simplify();
        let along = |s: f64| eval(&e, s, &path(s));
        let (Some(sym), Some(fd), Some(fd2)) = (
            eval(&e.time_derivative(), t, &path(t)),
            central_diff(along, t, 1e-3),
            central_diff(along, t, 2e-3),
        ) else {
            return Ok(());
        };
        if (fd - fd2).abs() > 1e-6 * fd.abs().max(1.0) {
            return Ok(());
        }
        prop_assert!(close(sym, fd, 1e-6), "{e}: {sym} vs {fd}");
    }
}

#[test]
fn worked_partials() {
    let e = parse("a*x'^2 + sin(x)*t").unwrap();
    assert_eq!(e.partial(1), parse("2*a*x'").unwrap());
    assert_eq!(e.partial(0), parse("t*cos(x)").unwrap());
    assert_eq!(e.partial(2), Expr::zero());
}
