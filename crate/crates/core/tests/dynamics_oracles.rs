use std::collections::BTreeMap;
use std::f64::consts::PI;

use ostro_core::{
    euler_lagrange, integrate, model_from_state, ostrogradski_hamiltonian, solve_explicit,
    to_first_order, EquationOfMotion, IntegratorConfig, Lagrangian, OdeSystem, PhaseState,
    Trajectory,
};

const HARMONIC: &str = "0.5*x'^2 - 0.5*x^2";
const PAIS_UHLENBECK: &str = "0.5*x''^2 - 2.5*x'^2 + 2*x^2";

fn system(text: &str) -> (Lagrangian, EquationOfMotion, OdeSystem) {
    let l = Lagrangian::parse(text, BTreeMap::new()).unwrap();
    let eom = solve_explicit(&euler_lagrange(&l)).unwrap();
    let sys = to_first_order(&eom).unwrap();
    (l, eom, sys)
}

fn max_energy_drift(l: &Lagrangian, traj: &Trajectory) -> f64 {
    let h = ostrogradski_hamiltonian(l);
    let at = |s: &PhaseState| h.evaluate_at(s.t, &s.y, l.parameters()).unwrap();
    let h0 = at(traj.first().unwrap());
    traj.samples()
        .iter()
        .map(|s| (at(s) - h0).abs())
        .fold(0.0, f64::max)
        / h0.abs()
}

#[test]
fn pais_uhlenbeck_slow_mode_is_cosine() {
    let (_, _, sys) = system(PAIS_UHLENBECK);
    let init = PhaseState::new(0.0, vec![1.0, 0.0, -1.0, 0.0]);
    let traj = integrate(&sys, &init, 2.0 * PI, &IntegratorConfig::rk45(1e-9, 1e-12)).unwrap();
    let err = traj
        .samples()
        .iter()
        .map(|s| (s.y[0] - s.t.cos()).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn pais_uhlenbeck_mixed_modes() {
    // x = cos t + sin 2t
    let (_, _, sys) = system(PAIS_UHLENBECK);
    let init = PhaseState::new(0.0, vec![1.0, 2.0, -1.0, -8.0]);
    let traj = integrate(&sys, &init, 10.0, &IntegratorConfig::rk45(1e-11, 1e-13)).unwrap();
    for s in traj.samples() {
        assert!(
            (s.y[0] - (s.t.cos() + (2.0 * s.t).sin())).abs() < 1e-7,
            "{s:?}"
        );
    }
}

#[test]
fn hamiltonian_drift_is_small() {
    let cfg = IntegratorConfig::rk45(1e-10, 1e-12);
    for (text, y0) in [
        (HARMONIC, vec![1.0, 0.0]),
        (PAIS_UHLENBECK, vec![1.0, 0.0, -1.0, 0.0]),
        (PAIS_UHLENBECK, vec![1.0, 0.5, -0.3, 0.2]),
    ] {
        let (l, _, sys) = system(text);
        let traj = integrate(&sys, &PhaseState::new(0.0, y0), 100.0, &cfg).unwrap();
        let drift = max_energy_drift(&l, &traj);
        assert!(drift <= 1e-6, "{text}: {drift}");
    }
}

fn rk4_period_error(steps: usize) -> f64 {
    let (_, _, sys) = system(HARMONIC);
    let cfg = IntegratorConfig::rk4(2.0 * PI / steps as f64);
    let traj = integrate(&sys, &PhaseState::new(0.0, vec![1.0, 0.0]), 2.0 * PI, &cfg).unwrap();
    let end = traj.last().unwrap();
    assert_eq!(end.t, 2.0 * PI);
    ((end.y[0] - 1.0).powi(2) + end.y[1].powi(2)).sqrt()
}

#[test]
fn rk4_is_fourth_order() {
    for n in [32, 64, 128] {
        let ratio = rk4_period_error(n) / rk4_period_error(2 * n);
        assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "{n}: {ratio}");
    }
}

#[test]
fn truncation_law_on_pais_uhlenbeck() {
    let (_, eom, sys) = system(PAIS_UHLENBECK);
    let init = PhaseState::new(0.0, vec![0.0, 1.0, 0.0, -1.0]);
    let model = model_from_state(&eom, &init, 8).unwrap();
    let expected = model.coefficients()[3] / 6.0;
    assert_eq!(expected, -1.0 / 6.0);
    for delta in [1e-2, 1e-3] {
        let cfg = IntegratorConfig::rk4(delta / 16.0);
        let x = integrate(&sys, &init, delta, &cfg)
            .unwrap()
            .last()
            .unwrap()
            .y[0];
        let ratio = (x - model.newton_eval(delta)) / delta.powi(3);
        assert!(
            (ratio - expected).abs() <= 0.05 * expected.abs(),
            "{delta}: {ratio}"
        );
    }
}

#[test]
fn resampled_csv_round_trip_keeps_states() {
    let (_, _, sys) = system(HARMONIC);
    let traj = integrate(
        &sys,
        &PhaseState::new(0.0, vec![0.2, 1.0]),
        3.0,
        &IntegratorConfig::rk45(1e-10, 1e-12),
    )
    .unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let back = Trajectory::read_csv(&buf[..]).unwrap();
    let times: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    assert_eq!(
        traj.resample(&times, Some(&sys)).unwrap(),
        back.resample(&times, Some(&sys)).unwrap()
    );
}
