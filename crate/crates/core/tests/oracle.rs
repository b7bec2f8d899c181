mod common;

use backaction_sim::collective::static_displacement;
use backaction_sim::oracle::{
    kicked_oscillator_heating, meanfield_integrate, noise_autocorrelation, synthesize_photon_noise, DriveSchedule,
    MeanFieldConfig, MeanFieldState, TrajectoryConfig,
};
use backaction_sim::constants::HBAR;
use backaction_sim::spectra::{occupation_rate, steady_intracavity, two_time_correlation, Branch};
use backaction_sim::Error;
use common::*;

fn short(k: f64, seed: u64, n: usize) -> TrajectoryConfig {
    TrajectoryConfig {
        seed,
        n_trajectories: n,
        dt: 0.05 / k,
        duration: 300.0 / k,
    }
}

#[test]
fn same_seed_same_numbers() {
    let (p, mode) = defaults();
    let cfg = short(p.kappa, 42, 40);
    let a = kicked_oscillator_heating(&cfg, 1.9, p.omega_z, &mode, &p).unwrap();
    let b = kicked_oscillator_heating(&cfg, 1.9, p.omega_z, &mode, &p).unwrap();
    assert_eq!(a, b);
    let x = synthesize_photon_noise(&cfg, 3, 1.9, p.omega_z, p.kappa).unwrap();
    let y = synthesize_photon_noise(&cfg, 3, 1.9, p.omega_z, p.kappa).unwrap();
    assert_eq!(x, y);
}

#[test]
fn trajectories_and_seeds_are_independent() {
    let (p, _) = defaults();
    let k = p.kappa;
    let cfg = short(k, 1, 4);
    let a = synthesize_photon_noise(&cfg, 0, 1.9, p.omega_z, k).unwrap();
    let b = synthesize_photon_noise(&cfg, 1, 1.9, p.omega_z, k).unwrap();
    let c = synthesize_photon_noise(&cfg.with_seed(2), 0, 1.9, p.omega_z, k).unwrap();
    assert_ne!(a, b);
    assert_ne!(a, c);
    let corr = |u: &[f64], v: &[f64]| {
        let n = u.len() as f64;
        let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
        let nu: f64 = u.iter().map(|x| x * x).sum();
        let nv: f64 = v.iter().map(|x| x * x).sum();
        dot / (nu * nv).sqrt() * n.sqrt()
    };
    // about N(0, 1) for independent series, loosely bounded
    assert!(corr(&a, &b).abs() < 20.0);
    assert!(corr(&a, &c).abs() < 20.0);
}

#[test]
fn stderr_shrinks_as_inverse_sqrt_n() {
    let (p, mode) = defaults();
    let k = p.kappa;
    let small = kicked_oscillator_heating(&short(k, 7, 100), 1.9, p.omega_z, &mode, &p).unwrap();
    let large = kicked_oscillator_heating(&short(k, 7, 400), 1.9, p.omega_z, &mode, &p).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((ratio - 2.0).abs() < 0.5, "{ratio}");
}

#[test]
fn single_trajectory_has_infinite_stderr() {
    let (p, mode) = defaults();
    let est = kicked_oscillator_heating(&short(p.kappa, 0, 1), 1.9, p.omega_z, &mode, &p).unwrap();
    assert!(est.stderr.is_infinite());
}

#[test]
fn bad_timestep_is_rejected() {
    let (p, mode) = defaults();
    let cfg = TrajectoryConfig {
        dt: 1.0 / p.kappa,
        ..short(p.kappa, 0, 4)
    };
    let r = kicked_oscillator_heating(&cfg, 1.9, p.omega_z, &mode, &p);
    assert!(matches!(r, Err(Error::Config(_)) | Err(Error::Validation(_))), "{r:?}");
}

#[test]
fn autocorrelation_matches_closed_form() {
    let (p, _) = defaults();
    let k = p.kappa;
    let cfg = short(k, 3, 200);
    for lag in [0usize, 10, 25] {
        let (re, im) = noise_autocorrelation(&cfg, 1.9, p.omega_z, k, lag).unwrap();
        let expect = two_time_correlation(lag as f64 * cfg.dt, 1.9, p.omega_z, k);
        let scale = expect.norm();
        assert!((re.mean - expect.re).abs() < 5.0 * re.stderr + 0.02 * scale, "lag {lag}: {re:?} vs {expect}");
        assert!((im.mean - expect.im).abs() < 5.0 * im.stderr + 0.02 * scale, "lag {lag}: {im:?} vs {expect}");
    }
}

#[test]
fn damped_mode_settles_at_static_displacement() {
    let (p, mode) = defaults();
    let k = p.kappa;
    let n_ss = steady_intracavity(-3.0 * k, 2.0, &mode, &p, Branch::SweepUp).unwrap();
    let trace = meanfield_integrate(
        &MeanFieldConfig {
            duration: 4000.0 / p.omega_z,
            quality_factor: Some(10.0),
            max_records: 20,
            ..Default::default()
        },
        &DriveSchedule::constant(2.0, mode.delta_n - 3.0 * k),
        &mode,
        &p,
        MeanFieldState::default(),
    )
    .unwrap();
    let end = trace.states.last().unwrap();
    assert!(rel(end.z, static_displacement(n_ss, &p)) < 1e-3);
    assert!(rel(end.nbar(), n_ss) < 1e-3);
}

#[test]
fn undamped_energy_matches_work() {
    let (p, mode) = defaults();
    let k = p.kappa;
    let start = MeanFieldState::steady(mode.delta_n - 1.0 * k, 1.5, &mode, &p, Branch::SweepUp).unwrap();
    let trace = meanfield_integrate(
        &MeanFieldConfig {
            duration: 50.0 / p.omega_z,
            quality_factor: None,
            max_records: 50,
            ..Default::default()
        },
        &DriveSchedule::constant(1.5, mode.delta_n - 2.0 * k),
        &mode,
        &p,
        start,
    )
    .unwrap();
    let e0 = trace.states[0].energy(&mode, &p);
    for (s, w) in trace.states.iter().zip(&trace.work) {
        let de = s.energy(&mode, &p) - e0;
        assert!((de - w).abs() <= 1e-6 * e0.abs().max(w.abs()), "{de} vs {w}");
    }
}

#[test]
fn steady_start_stays_put() {
    let (p, mode) = defaults();
    let k = p.kappa;
    let delta_pc = mode.delta_n - 1.5 * k;
    let start = MeanFieldState::steady(delta_pc, 1.0, &mode, &p, Branch::SweepUp).unwrap();
    let trace = meanfield_integrate(
        &MeanFieldConfig {
            duration: 200.0 / p.omega_z,
            quality_factor: Some(40.0),
            max_records: 10,
            ..Default::default()
        },
        &DriveSchedule::constant(1.0, delta_pc),
        &mode,
        &p,
        start,
    )
    .unwrap();
    let end = trace.states.last().unwrap();
    assert!(rel(end.nbar(), start.nbar()) < 1e-6);
    assert!(rel(end.z, start.z) < 1e-6);
}

#[test]
fn trajectories_reproduce_occupation_rate_on_resonance() {
    // at Δ = 0 the spectrum is symmetric, so a classical force sees all of it
    let (p, mode) = defaults();
    let k = p.kappa;
    let cfg = TrajectoryConfig {
        duration: 2000.0 / k,
        ..short(k, 21, 600)
    };
    let est = kicked_oscillator_heating(&cfg, 1.9, 0.0, &mode, &p).unwrap();
    let expect = HBAR * p.omega_z * occupation_rate(0.0, 1.9, 0.0, &mode, &p);
    assert!((est.mean - expect).abs() < 4.0 * est.stderr, "{est:?} vs {expect:e}");
    assert!(rel(est.mean, expect) < 0.15);
}
