//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ostro_core::{
    action_integral, euler_lagrange, integrate, model_from_state, ostrogradski_hamiltonian, parse,
    solve_explicit, to_first_order, uncertainty_pair, EquationOfMotion, Expr, Func,
    IntegratorConfig, Lagrangian, OdeSystem, PhaseState, TaylorModel, Trajectory,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const SEED: u64 = 0x0000_57A0_6AD5;

const AC1_REL_TOL: f64 = 1e-6;
const AC1_MIN_PAIRS: usize = 100;
const AC1_TIME: Duration = Duration::from_secs(5);
const AC3_TOL: f64 = 1e-6;
const AC3_TIME: Duration = Duration::from_secs(1);
const AC4_DRIFT: f64 = 1e-6;
const AC5_REL_TOL: f64 = 1e-12;
const AC6_REL_TOL: f64 = 0.05;
const AC7_FREE_TOL: f64 = 1e-10;
const AC7_HARMONIC_TOL: f64 = 1e-8;
const AC8_SLOPE_TOL: f64 = 0.05;
const AC8_MIN_R2: f64 = 0.999;
const AC8_TIME: Duration = Duration::from_secs(30);
const AC9_TOL: f64 = 1e-12;
const AC10_RATIO_TOL: f64 = 0.2;

const HARMONIC: &str = "0.5*x'^2 - 0.5*x^2";
const PAIS_UHLENBECK: &str = "0.5*x''^2 - 2.5*x'^2 + 2*x^2";

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn system(text: &str) -> (Lagrangian, EquationOfMotion, OdeSystem) {
    let l = Lagrangian::parse(text, BTreeMap::new()).unwrap();
    let eom = solve_explicit(&euler_lagrange(&l)).unwrap();
    let sys = to_first_order(&eom).unwrap();
    (l, eom, sys)
}

fn random_expr(rng: &mut StdRng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..5) {
            0 => Expr::constant(rng.gen_range(-6..=6) as f64 / 2.0),
            1 => Expr::param(["a", "b", "k"][rng.gen_range(0..3)]),
            2 => Expr::time(),
            _ => Expr::deriv(rng.gen_range(0..3)),
        };
    }
    let sub = |rng: &mut StdRng| random_expr(rng, depth - 1);
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(2..=3);
            Expr::sum((0..n).map(|_| sub(rng)).collect())
        }
        1 => {
            let n = rng.gen_range(2..=3);
            Expr::product((0..n).map(|_| sub(rng)).collect())
        }
        2 => {
            let e = [-2, -1, 2, 3][rng.gen_range(0..4)];
            Expr::pow(sub(rng), e)
        }
        _ => {
            let f = [Func::Sin, Func::Cos, Func::Exp][rng.gen_range(0..3)];
            Expr::call(f, sub(rng))
        }
    }
}

fn central_diff(f: &impl Fn(f64) -> Option<f64>, x: f64, h: f64) -> Option<f64> {
    let f1 = f(x + h)? - f(x - h)?;
    let f2 = f(x + 2.0 * h)? - f(x - 2.0 * h)?;
    Some((8.0 * f1 - f2) / (12.0 * h))
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(SEED);
    let params = BTreeMap::from([
        ("a".to_string(), 0.7),
        ("b".to_string(), -1.3),
        ("k".to_string(), 2.0),
    ]);
    let (mut pairs, mut worst) = (0usize, 0.0f64);
    let mut tries = 0;
    while pairs < 2 * AC1_MIN_PAIRS && tries < 100_000 {
        tries += 1;
        let e = random_expr(&mut rng, 3);
        let k = rng.gen_range(0..3u32);
        let t = rng.gen_range(-1.5..1.5);
        let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let eval =
            |e: &Expr, y: &[f64]| e.evaluate_at(t, y, &params).ok().filter(|v| v.abs() < 1e8);
        let at = |v: f64| {
            let mut y = y.clone();
            y[k as usize] = v;
            eval(&e, &y)
        };
        let x = y[k as usize];
        let (Some(f), Some(sym)) = (at(x), eval(&e.partial(k), &y)) else {
            continue;
        };
        let (Some(fd), Some(fd2)) = (central_diff(&at, x, 1e-3), central_diff(&at, x, 2e-3)) else {
            continue;
        };
        // keep only points where the difference quotient is trustworthy and
        // the derivative is not negligible next to the function
        if (fd - fd2).abs() > 1e-6 * fd.abs().max(1.0) || sym.abs() < 1e-3 * f.abs().max(1.0) {
            continue;
        }
        pairs += 1;
        worst = worst.max((sym - fd).abs() / sym.abs());
    }
    let elapsed = start.elapsed();
    check(
        pairs >= AC1_MIN_PAIRS && worst <= AC1_REL_TOL && elapsed < AC1_TIME,
        format!("{pairs} pairs, max rel err {worst:.2e}, {elapsed:.2?}"),
    )
}

fn normalized(eom: &EquationOfMotion) -> Expr {
    let lead = eom.residual.partial(eom.order);
    Expr::product(vec![eom.residual.clone(), Expr::pow(lead, -1)])
}

fn ac2() -> Outcome {
    let l = Lagrangian::parse("0.5*m*x'^2 - 0.5*k*x^2", BTreeMap::new()).unwrap();
    let harmonic = euler_lagrange(&l);
    let want = parse("x'' + k*x/m").unwrap();
    let pu = euler_lagrange(&Lagrangian::parse(PAIS_UHLENBECK, BTreeMap::new()).unwrap());
    let want_pu = parse("d(x,4) + 5*x'' + 4*x").unwrap();
    let (a, b) = (normalized(&harmonic), normalized(&pu));
    check(
        harmonic.order == 2 && pu.order == 4 && a == want && b == want_pu,
        format!("{} = 0; {} = 0", a, b),
    )
}

fn ac3() -> Outcome {
    let start = Instant::now();
    let (_, _, sys) = system(PAIS_UHLENBECK);
    let init = PhaseState::new(0.0, vec![1.0, 0.0, -1.0, 0.0]);
    let traj = integrate(&sys, &init, 2.0 * PI, &IntegratorConfig::rk45(1e-9, 1e-12)).unwrap();
    let err = traj
        .samples()
        .iter()
        .map(|s| (s.y[0] - s.t.cos()).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        err <= AC3_TOL && elapsed < AC3_TIME,
        format!("max |x - cos t| = {err:.2e}, {elapsed:.2?}"),
    )
}

fn relative_drift(l: &Lagrangian, traj: &Trajectory) -> f64 {
    let h = ostrogradski_hamiltonian(l);
    let at = |s: &PhaseState| h.evaluate_at(s.t, &s.y, l.parameters()).unwrap();
    let h0 = at(traj.first().unwrap());
    traj.samples()
        .iter()
        .map(|s| (at(s) - h0).abs())
        .fold(0.0, f64::max)
        / h0.abs()
}

fn ac4() -> Outcome {
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12);
    let mut details = Vec::new();
    let mut worst = 0.0f64;
    for (name, text, y0) in [
        ("harmonic", HARMONIC, vec![1.0, 0.0]),
        ("pais-uhlenbeck", PAIS_UHLENBECK, vec![1.0, 0.0, -1.0, 0.0]),
        (
            "pais-uhlenbeck mixed",
            PAIS_UHLENBECK,
            vec![1.0, 0.5, -0.3, 0.2],
        ),
    ] {
        let (l, _, sys) = system(text);
        let traj = integrate(&sys, &PhaseState::new(0.0, y0), 100.0, &cfg).unwrap();
        let d = relative_drift(&l, &traj);
        worst = worst.max(d);
        details.push(format!("{name} {d:.1e}"));
    }
    check(worst <= AC4_DRIFT, details.join(", "))
}

fn ac5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(2..=12);
        let c: Vec<f64> = (0..=m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let model = TaylorModel::new(rng.gen_range(-5.0..5.0), c).unwrap();
        let t = model.t0() + rng.gen_range(-10.0..10.0);
        let (full, newton, hidden) = (
            model.taylor_eval(t),
            model.newton_eval(t),
            model.hidden_residual(t),
        );
        let scale = full
            .abs()
            .max(newton.abs())
            .max(hidden.abs())
            .max(f64::MIN_POSITIVE);
        worst = worst.max((full - newton - hidden).abs() / scale);
    }
    check(
        worst <= AC5_REL_TOL,
        format!("1000 models, max rel residual {worst:.1e}"),
    )
}

fn ac6() -> Outcome {
    let (_, eom, sys) = system(PAIS_UHLENBECK);
    let init = PhaseState::new(0.0, vec![0.0, 1.0, 0.0, -1.0]);
    let model = model_from_state(&eom, &init, 8).unwrap();
    let expected = model.coefficients()[3] / 6.0;
    let mut ok = true;
    let mut details = Vec::new();
    for delta in [1e-2, 1e-3] {
        let traj = integrate(&sys, &init, delta, &IntegratorConfig::rk4(delta / 16.0)).unwrap();
        let x = traj.last().unwrap().y[0];
        let ratio = (x - model.newton_eval(delta)) / delta.powi(3);
        let rel = (ratio - expected).abs() / expected.abs();
        ok &= rel <= AC6_REL_TOL;
        details.push(format!("delta {delta:e}: {ratio:.6} vs {expected:.6}"));
    }
    check(ok, details.join(", "))
}

fn ac7() -> Outcome {
    let cfg = IntegratorConfig::rk45(1e-12, 1e-14);
    let (l, eom, sys) = system("0.5*x'^2");
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![0.0, 1.0]), 1.0, &cfg).unwrap();
    let free = action_integral(&l, Some(&eom), &traj, 1024).unwrap();
    let (l, eom, sys) = system(HARMONIC);
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![1.0, 0.0]), 2.0 * PI, &cfg).unwrap();
    let harmonic = action_integral(&l, Some(&eom), &traj, 1024).unwrap();
    check(
        (free - 0.5).abs() <= AC7_FREE_TOL && harmonic.abs() <= AC7_HARMONIC_TOL,
        format!("free {free:.12}, harmonic {harmonic:.2e}"),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ostro")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(bin())
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("run ostro");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Least-squares slope and R² of `ys` against `xs`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

fn ac8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let cfg = config("perturbed.json");
    let (code, err) = run(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "eps",
            "--values",
            "1e-6,1e-5,1e-4,1e-3",
        ],
        dir.path(),
    );
    let elapsed = start.elapsed();
    if code != 0 {
        return Err(format!("sweep exited {code}: {err}"));
    }
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.abs().ln()).collect();
    let (slope, r2) = fit(&xs, &ys);
    let monotone = rows.windows(2).all(|w| w[0].1.abs() < w[1].1.abs());
    check(
        monotone && (slope - 1.0).abs() <= AC8_SLOPE_TOL && r2 >= AC8_MIN_R2 && elapsed < AC8_TIME,
        format!(
            "slope {slope:.4}, R² {r2:.6}, |dS| = {:?}, {elapsed:.2?}",
            rows.iter()
                .map(|r| format!("{:.3e}", r.1))
                .collect::<Vec<_>>()
        ),
    )
}

fn ac9() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 9);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut c = vec![0.0; 3];
        c.extend((0..rng.gen_range(1..8)).map(|_| rng.gen_range(-10.0..10.0)));
        let model = TaylorModel::new(0.0, c).unwrap();
        let (lhs, rhs) =
            uncertainty_pair(&model, rng.gen_range(0.1..10.0), rng.gen_range(-3.0..3.0)).unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
    }
    let example = TaylorModel::new(0.0, vec![1.0, 1.0, 0.0, 6.0]).unwrap();
    let pair = uncertainty_pair(&example, 1.0, 1.0).unwrap();
    check(
        worst <= AC9_TOL && pair == (10.0, 3.0),
        format!("degenerate max rel diff {worst:.1e}; example (lhs, rhs) = {pair:?}"),
    )
}

fn rk4_period_error(steps: usize) -> f64 {
    let (_, _, sys) = system(HARMONIC);
    let cfg = IntegratorConfig::rk4(2.0 * PI / steps as f64);
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![1.0, 0.0]), 2.0 * PI, &cfg).unwrap();
    let end = traj.last().unwrap();
    ((end.y[0] - 1.0).powi(2) + end.y[1].powi(2)).sqrt()
}

fn ac10() -> Outcome {
    let ratio = rk4_period_error(64) / rk4_period_error(128);
    check(
        (ratio - 16.0).abs() <= AC10_RATIO_TOL * 16.0,
        format!("error ratio {ratio:.3}"),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn ac11() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (cmd, name) in [
        ("analyze", "perturbed.json"),
        ("simulate", "pais_uhlenbeck.json"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(name);
        let args = [cmd, cfg.to_str().unwrap()];
        let (c1, _) = run(&args, dir.path());
        let first = snapshot(dir.path());
        let (c2, _) = run(&args, dir.path());
        let same = c1 == 0 && c2 == 0 && !first.is_empty() && first == snapshot(dir.path());
        ok &= same;
        details.push(format!(
            "{cmd} rerun {}",
            if same { "identical" } else { "differs" }
        ));
    }
    for (name, cmd, want) in [
        ("fail_parse.json", "analyze", 2),
        ("fail_degenerate.json", "analyze", 3),
        ("fail_diverge.json", "simulate", 4),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let (code, _) = run(&[cmd, config(name).to_str().unwrap()], dir.path());
        ok &= code == want;
        details.push(format!("{name} -> {code}"));
    }
    check(ok, details.join(", "))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("AC1", "symbolic partials match finite differences", ac1),
        (
            "AC2",
            "Euler-Lagrange equations of the reference systems",
            ac2,
        ),
        ("AC3", "Pais-Uhlenbeck slow mode reproduces cos t", ac3),
        ("AC4", "Ostrogradski energy drift over [0, 100]", ac4),
        ("AC5", "Taylor = Newton + hidden residual", ac5),
        ("AC6", "cubic truncation law", ac6),
        ("AC7", "action quadrature", ac7),
        ("AC8", "action gap scales linearly in eps", ac8),
        ("AC9", "uncertainty pair reporting", ac9),
        ("AC10", "RK4 error ratio under step halving", ac10),
        ("AC11", "CLI determinism and exit codes", ac11),
    ];
    let mut failed = 0;
    for (id, what, f) in criteria {
        match f() {
            Ok(detail) => println!("[PASS] {id} {what}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {what}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
