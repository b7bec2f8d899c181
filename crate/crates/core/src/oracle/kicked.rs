//! Classical collective oscillator driven by synthesized photon-number noise.

use rayon::prelude::*;

use super::{synthesize_photon_noise, EnsembleEstimate, TrajectoryConfig};
use crate::collective::CollectiveMode;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::fit::centered_polyfit;
use crate::params::PhysicalParams;
use crate::spectra::symmetrized_spectrum;

/// Energy samples per trajectory used in the growth fits.
const N_RECORDS: usize = 400;
/// Transient skipped before fitting, in units of 1/κ.
const SETTLE_KAPPA_TIMES: f64 = 10.0;
/// A quadratic term this many standard errors from zero counts as significant.
const CURVATURE_SIGMA: f64 = 5.0;
/// ... and must also change the slope by this fraction across the window.
const CURVATURE_FRACTION: f64 = 0.05;

/// Classical diffusion prediction `ħ ω_z κ² ε² S̄(ω_z)` (W, whole mode).
pub fn symmetrized_diffusion_prediction(nbar: f64, delta: f64, mode: &CollectiveMode, params: &PhysicalParams) -> f64 {
    let k = params.kappa;
    HBAR * params.omega_z * k * k * mode.epsilon * mode.epsilon * symmetrized_spectrum(params.omega_z, nbar, delta, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedRun {
    /// Fitted dE/dt of the collective mode (W).
    pub rate: EnsembleEstimate,
    /// Quadratic coefficient of E(t) (W/s).
    pub curvature: EnsembleEstimate,
    pub prediction: f64,
    /// Start of the fit window (s).
    pub fit_start: f64,
}

/// Ensemble dE/dt of the mode, started at rest.
pub fn kicked_oscillator_heating(
    config: &TrajectoryConfig,
    nbar: f64,
    delta: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<EnsembleEstimate> {
    Ok(kicked_oscillator_run(config, nbar, delta, mode, params)?.rate)
}

/// As [`kicked_oscillator_heating`] but also returns the curvature check and
/// the closed-form prediction. Fails if E(t) is measurably non-linear.
pub fn kicked_oscillator_run(
    config: &TrajectoryConfig,
    nbar: f64,
    delta: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<KickedRun> {
    let k = params.kappa;
    config.validate(&[k, params.omega_z, delta])?;
    let (rate, curvature, fit_start) = drive_ensemble(config, mode, params, |i| {
        synthesize_photon_noise(config, i, nbar, delta, k)
    })?;
    Ok(KickedRun {
        rate,
        curvature,
        prediction: symmetrized_diffusion_prediction(nbar, delta, mode, params),
        fit_start,
    })
}

/// Drives the mode from rest with the photon-number fluctuation series
/// returned by `noise(i)` for trajectory `i` (samples spaced `config.dt`) and
/// fits the energy growth. Returns (dE/dt, curvature, fit start).
pub(crate) fn drive_ensemble<F>(
    config: &TrajectoryConfig,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    noise: F,
) -> Result<(EnsembleEstimate, EnsembleEstimate, f64)>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync,
{
    let k = params.kappa;
    let w = params.omega_z;
    let n_steps = config.n_steps();
    let fit_start = (SETTLE_KAPPA_TIMES / k).min(0.25 * config.duration);
    let stride = (n_steps / N_RECORDS).max(1);

    // Dimensionless quadratures u = Z/Z_ho, v = P/P_ho: u̇ = ω v, v̇ = −ω u + 2κε δn.
    let push = 2.0 * k * mode.epsilon / w;
    let (sin, cos) = (w * config.dt).sin_cos();
    let energy_unit = HBAR * w / 4.0;

    let fits: Vec<(f64, f64)> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let x = noise(i)?;
            if x.len() < n_steps + 1 {
                return Err(Error::Config("noise series shorter than the trajectory".into()));
            }
            let (mut u, mut v) = (0.0f64, 0.0f64);
            let mut ts = Vec::with_capacity(N_RECORDS + 1);
            let mut es = Vec::with_capacity(N_RECORDS + 1);
            for n in 0..n_steps {
                let ue = push * 0.5 * (x[n] + x[n + 1]);
                let du = u - ue;
                u = ue + du * cos + v * sin;
                v = -du * sin + v * cos;
                let t = (n + 1) as f64 * config.dt;
                if (n + 1) % stride == 0 && t >= fit_start {
                    ts.push(t);
                    es.push(energy_unit * (u * u + v * v));
                }
            }
            if ts.len() < 3 {
                return Err(Error::Config("trajectory too short for a growth fit".into()));
            }
            let (_, lin) = centered_polyfit(&ts, &es, 1)?;
            let (_, quad) = centered_polyfit(&ts, &es, 2)?;
            Ok((lin.coefficients[1], quad.coefficients[2]))
        })
        .collect::<Result<_>>()?;

    let slopes: Vec<f64> = fits.iter().map(|f| f.0).collect();
    let curv: Vec<f64> = fits.iter().map(|f| f.1).collect();
    let rate = EnsembleEstimate::from_samples(&slopes);
    let curvature = EnsembleEstimate::from_samples(&curv);
    let window = config.duration - fit_start;
    let significant = curvature.mean.abs() > CURVATURE_SIGMA * curvature.stderr
        && curvature.mean.abs() * window > CURVATURE_FRACTION * rate.mean.abs();
    if significant {
        return Err(Error::numeric(
            "energy growth is not linear over the fit window; shorten the duration",
            curvature.mean / curvature.stderr,
        ));
    }
    Ok((rate, curvature, fit_start))
}
