//! The cross-check suites run by the `oracle` command.

use super::{
    estimate_noise_spectrum, hysteresis_sweep, kicked_oscillator_run, meanfield_integrate, output_whiteness_kernel,
    spectrum_ft_check, DriveSchedule, EnsembleEstimate, MeanFieldConfig, MeanFieldState, NoiseKind, TrajectoryConfig,
};
use crate::collective::{static_displacement, AtomicEnsemble, CollectiveMode};
use crate::error::Result;
use crate::params::PhysicalParams;
use crate::spectra::{bistable_window, steady_intracavity, symmetrized_spectrum, Branch};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_trajectories: usize,
    pub n_atoms: u64,
    pub nbar: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_trajectories: 2000,
            n_atoms: 100_000,
            nbar: 1.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// The checked figure of merit.
    pub value: f64,
    /// Pass threshold for `value`.
    pub tolerance: f64,
    pub passed: bool,
    pub estimate: Option<EnsembleEstimate>,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> SuiteResult {
    SuiteResult {
        name,
        value,
        tolerance,
        passed: value <= tolerance,
        estimate: None,
    }
}

/// Runs every deterministic and Monte Carlo cross-check at `params`.
pub fn run_suites(params: &PhysicalParams, config: &SuiteConfig) -> Result<Vec<SuiteResult>> {
    let k = params.kappa;
    let w = params.omega_z;
    let mode = CollectiveMode::new(&AtomicEnsemble::uniform(config.n_atoms), params);
    let mut out = Vec::new();

    let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.1 * k).collect();
    out.push(check("spectrum_ft_max_rel_err", spectrum_ft_check(config.nbar, w, k, &grid)?, 1e-3));

    let wide: Vec<f64> = (0..10_000).map(|i| (-1.0 + 2.0 * i as f64 / 9_999.0) * 1e6 * k).collect();
    let kernel_err = output_whiteness_kernel(&wide, 0.0, k)
        .iter()
        .fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    out.push(check("whiteness_max_abs_err", kernel_err, 1e-9));

    let traj = TrajectoryConfig {
        seed: config.seed,
        n_trajectories: config.n_trajectories,
        dt: 0.05 / k,
        duration: 200.0 / k,
    };
    let s = estimate_noise_spectrum(&traj, config.nbar, w, k, 5.0 * k, NoiseKind::Real)?;
    let rms = (s
        .grid
        .iter()
        .zip(&s.values)
        .map(|(om, v)| (v / symmetrized_spectrum(*om, config.nbar, w, k) - 1.0).powi(2))
        .sum::<f64>()
        / s.grid.len() as f64)
        .sqrt();
    out.push(check("noise_spectrum_rms_rel_err", rms, 0.05));

    let kicked_cfg = TrajectoryConfig {
        duration: 2000.0 / k,
        ..traj
    };
    let run = kicked_oscillator_run(&kicked_cfg, config.nbar, w, &mode, params)?;
    let mut r = check("kicked_oscillator_rel_err", (run.rate.mean / run.prediction - 1.0).abs(), 0.1);
    r.estimate = Some(run.rate);
    out.push(r);

    // Z settles to the static displacement under constant drive
    let n_max = 1.0;
    // red of resonance, where the mechanical mode is optically damped
    let delta_pc = mode.delta_n - 2.0 * k;
    let n_ss = steady_intracavity(-2.0 * k, n_max, &mode, params, Branch::SweepUp)?;
    let settle = meanfield_integrate(
        &MeanFieldConfig {
            duration: 80.0 * 40.0 / w,
            quality_factor: Some(40.0),
            max_records: 10,
            ..Default::default()
        },
        &DriveSchedule::constant(n_max, delta_pc),
        &mode,
        params,
        MeanFieldState::default(),
    )?;
    let z_end = settle.states.last().expect("non-empty").z;
    out.push(check(
        "meanfield_static_displacement_rel_err",
        (z_end / static_displacement(n_ss, params) - 1.0).abs(),
        1e-3,
    ));

    // work-energy balance without damping
    let start = MeanFieldState::steady(delta_pc + 0.5 * k, n_max, &mode, params, Branch::SweepUp)?;
    // released from the steady state of a different detuning, so the mode rings
    let bal = meanfield_integrate(
        &MeanFieldConfig {
            duration: 20.0 * std::f64::consts::TAU / w,
            quality_factor: None,
            max_records: 100,
            ..Default::default()
        },
        &DriveSchedule::constant(n_max, delta_pc - 0.5 * k),
        &mode,
        params,
        start,
    )?;
    let e0 = bal.states[0].energy(&mode, params);
    let de = bal.states.last().expect("non-empty").energy(&mode, params) - e0;
    let work = *bal.work.last().expect("non-empty");
    let scale = de.abs().max(work.abs()).max(f64::MIN_POSITIVE);
    out.push(check("meanfield_energy_balance_rel_err", (de - work).abs() / scale, 1e-4));

    // hysteresis: ODE switch points against the static folds
    let nbar_max = 4.0;
    if let Some((left, right)) = bistable_window(nbar_max, &mode, params) {
        let step = 0.1 * k;
        let sweep = hysteresis_sweep(
            nbar_max,
            mode.delta_n + left - 3.0 * k,
            mode.delta_n + right + 3.0 * k,
            10e-3,
            step,
            Some(1.0),
            &mode,
            params,
        )?;
        let up_err = (sweep.up_switch - mode.delta_n - right).abs() / sweep.grid_step;
        let down_err = (sweep.down_switch - mode.delta_n - left).abs() / sweep.grid_step;
        out.push(check("hysteresis_switch_err_steps", up_err.max(down_err), 1.0));
    }
    Ok(out)
}
