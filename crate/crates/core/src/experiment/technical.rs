use rand::Rng;
use rand_distr::StandardNormal;

use super::uniform_mode;
use crate::collective::CollectiveMode;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::fit::weighted_least_squares;
use crate::oracle::{drive_ensemble, synthesize_photon_noise, trajectory_rng, symmetrized_diffusion_prediction, EnsembleEstimate, TrajectoryConfig};
use crate::params::PhysicalParams;
use crate::spectra::freespace_heating;

/// Offset separating the intensity-noise streams from the photon-noise ones.
const TECHNICAL_STREAM_SEED: u64 = 0x7EC4_0000_0000_0001;
/// Seed stride between scan points.
const POINT_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechnicalNoiseConfig {
    pub trajectories: TrajectoryConfig,
    pub n_atoms: f64,
    /// Probe detuning Δ from the shifted resonance (rad/s).
    pub delta: f64,
    /// Correlation rate of the classical intensity noise (rad/s).
    pub noise_bandwidth: f64,
    /// n̄ at which the quadratic fraction is reported.
    pub reference_nbar: f64,
}

impl TechnicalNoiseConfig {
    pub fn for_params(params: &PhysicalParams) -> Self {
        let k = params.kappa;
        Self {
            trajectories: TrajectoryConfig {
                seed: 0,
                n_trajectories: 1000,
                dt: 0.05 / k,
                duration: 1000.0 / k,
            },
            n_atoms: 1e5,
            delta: params.omega_z,
            noise_bandwidth: k,
            reference_nbar: 1.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechnicalNoiseScan {
    /// Per-atom heating estimate (W) at each n̄.
    pub points: Vec<(f64, EnsembleEstimate)>,
    /// Fitted A in R = A n̄ + B n̄², with its standard error.
    pub linear: (f64, f64),
    /// Fitted B with its standard error.
    pub quadratic: (f64, f64),
    /// Injected A and B from the closed forms.
    pub injected_linear: f64,
    pub injected_quadratic: f64,
    pub reference_nbar: f64,
}

impl TechnicalNoiseScan {
    /// B n̄²/(A n̄ + B n̄²) at the reference n̄ from the fit.
    pub fn quadratic_fraction(&self) -> f64 {
        fraction(self.linear.0, self.quadratic.0, self.reference_nbar)
    }

    pub fn injected_fraction(&self) -> f64 {
        fraction(self.injected_linear, self.injected_quadratic, self.reference_nbar)
    }
}

fn fraction(a: f64, b: f64, n: f64) -> f64 {
    b * n / (a + b * n)
}

/// Per-atom heating per photon (W) from quantum noise and free space.
fn linear_coefficient(mode: &CollectiveMode, params: &PhysicalParams, delta: f64) -> f64 {
    freespace_heating(1.0, params) + symmetrized_diffusion_prediction(1.0, delta, mode, params) / mode.n_atoms
}

/// Per-atom heating per (rin · n̄)² (W) from unit-variance intensity noise
/// with correlation rate γ_t: `ħ ω_z κ² ε² · 2γ_t/(γ_t² + ω_z²) / N`.
fn quadratic_coefficient_per_rin2(mode: &CollectiveMode, params: &PhysicalParams, gamma_t: f64) -> f64 {
    let k = params.kappa;
    let w = params.omega_z;
    let s = 2.0 * gamma_t / (gamma_t * gamma_t + w * w);
    HBAR * w * k * k * mode.epsilon * mode.epsilon * s / mode.n_atoms
}

/// Relative intensity noise that makes the quadratic part the given
/// `fraction` of the heating at `reference_nbar`.
pub fn rin_for_fraction(fraction: f64, params: &PhysicalParams, config: &TechnicalNoiseConfig) -> f64 {
    let mode = uniform_mode(config.n_atoms, params);
    let a = linear_coefficient(&mode, params, config.delta);
    let b = fraction * a / (config.reference_nbar * (1.0 - fraction));
    (b / quadratic_coefficient_per_rin2(&mode, params, config.noise_bandwidth)).sqrt()
}

/// Monte Carlo heating with photon shot noise plus classical intensity noise
/// `rin · n̄ · y(t)`, fitted with `R = A n̄ + B n̄²`.
pub fn technical_noise_scan(
    params: &PhysicalParams,
    nbar_list: &[f64],
    technical_rin: f64,
    config: &TechnicalNoiseConfig,
) -> Result<TechnicalNoiseScan> {
    if nbar_list.len() < 3 {
        return Err(Error::Config(format!(
            "technical-noise fit needs at least 3 photon numbers, got {}",
            nbar_list.len()
        )));
    }
    if !(technical_rin >= 0.0) {
        return Err(Error::Domain(format!("technical_rin must be non-negative, got {technical_rin}")));
    }
    let mode = uniform_mode(config.n_atoms, params);
    let k = params.kappa;
    let gamma_t = config.noise_bandwidth;
    config.trajectories.validate(&[k, params.omega_z, config.delta, gamma_t])?;

    let mut points = Vec::with_capacity(nbar_list.len());
    for (j, &nbar) in nbar_list.iter().enumerate() {
        let traj = config
            .trajectories
            .with_seed(config.trajectories.seed.wrapping_add((j as u64).wrapping_mul(POINT_SEED_STRIDE)));
        let amp = technical_rin * nbar;
        let decay = (-gamma_t * traj.dt).exp();
        let kick = (-(-2.0 * gamma_t * traj.dt).exp_m1()).sqrt();
        let (rate, _, _) = drive_ensemble(&traj, &mode, params, |i| {
            let mut x = synthesize_photon_noise(&traj, i, nbar, config.delta, k)?;
            if amp > 0.0 {
                let mut rng = trajectory_rng(traj.seed ^ TECHNICAL_STREAM_SEED, i);
                let mut y: f64 = rng.sample(StandardNormal);
                for xi in x.iter_mut() {
                    *xi += amp * y;
                    let xi_n: f64 = rng.sample(StandardNormal);
                    y = y * decay + kick * xi_n;
                }
            }
            Ok(x)
        })?;
        let per_atom = EnsembleEstimate {
            mean: freespace_heating(nbar, params) + rate.mean / mode.n_atoms,
            stderr: rate.stderr / mode.n_atoms,
            n_samples: rate.n_samples,
        };
        points.push((nbar, per_atom));
    }

    let design: Vec<Vec<f64>> = points.iter().map(|(n, _)| vec![*n, n * n]).collect();
    let y: Vec<f64> = points.iter().map(|(_, e)| e.mean).collect();
    let w: Vec<f64> = points.iter().map(|(_, e)| 1.0 / (e.stderr * e.stderr)).collect();
    let fit = weighted_least_squares(&design, &y, &w)?;
    Ok(TechnicalNoiseScan {
        linear: (fit.coefficients[0], fit.stderr(0)),
        quadratic: (fit.coefficients[1], fit.stderr(1)),
        injected_linear: linear_coefficient(&mode, params, config.delta),
        injected_quadratic: technical_rin * technical_rin * quadratic_coefficient_per_rin2(&mode, params, gamma_t),
        points,
        reference_nbar: config.reference_nbar,
    })
}
