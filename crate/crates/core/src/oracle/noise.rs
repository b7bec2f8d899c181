//! Photon-number noise as a complex Ornstein-Uhlenbeck process.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{trajectory_rng, EnsembleEstimate, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::spectra::{NoiseSpectrum, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// The complex process `c(t)` with correlation `n̄ e^{(iΔ − κ)τ}`.
    Complex,
    /// `√2 Re c(t)`, whose spectrum is the symmetrized `S_nn`.
    Real,
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Stationary samples `c(0), c(dt), …` for trajectory `index`, using the exact
/// one-step update `c ← c e^{(iΔ−κ)dt} + √(n̄(1 − e^{−2κdt})) ξ`.
pub fn synthesize_complex_noise(
    config: &TrajectoryConfig,
    index: u64,
    nbar: f64,
    delta: f64,
    kappa: f64,
) -> Result<Vec<Complex64>> {
    config.validate(&[kappa])?;
    let mut rng = trajectory_rng(config.seed, index);
    let n = config.n_steps();
    let decay = Complex64::new(-kappa * config.dt, delta * config.dt).exp();
    let kick = (nbar * -(-2.0 * kappa * config.dt).exp_m1()).sqrt();
    let mut c = nbar.sqrt() * complex_normal(&mut rng);
    let mut out = Vec::with_capacity(n + 1);
    out.push(c);
    for _ in 0..n {
        c = c * decay + kick * complex_normal(&mut rng);
        out.push(c);
    }
    Ok(out)
}

/// Real fluctuation `δn(t) = √2 Re c(t)` used to drive the oscillator.
pub fn synthesize_photon_noise(
    config: &TrajectoryConfig,
    index: u64,
    nbar: f64,
    delta: f64,
    kappa: f64,
) -> Result<Vec<f64>> {
    Ok(synthesize_complex_noise(config, index, nbar, delta, kappa)?
        .into_iter()
        .map(|c| std::f64::consts::SQRT_2 * c.re)
        .collect())
}

/// `|dt Σ c_n e^{+iω_k n dt}|² / (N dt)`, returned as `(ω, P)` sorted by ω.
pub fn periodogram(series: &[Complex64], dt: f64) -> Vec<(f64, f64)> {
    let n = series.len();
    let mut buf = series.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let total = n as f64 * dt;
    let mut out: Vec<(f64, f64)> = buf
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            (2.0 * std::f64::consts::PI * k / total, x.norm_sqr() * dt * dt / total)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn trajectory(config: &TrajectoryConfig, index: u64, nbar: f64, delta: f64, kappa: f64, kind: NoiseKind) -> Result<Vec<Complex64>> {
    let c = synthesize_complex_noise(config, index, nbar, delta, kappa)?;
    Ok(match kind {
        NoiseKind::Complex => c,
        NoiseKind::Real => c
            .into_iter()
            .map(|z| Complex64::new(std::f64::consts::SQRT_2 * z.re, 0.0))
            .collect(),
    })
}

/// Ensemble-averaged periodogram restricted to `|ω| ≤ omega_max`.
pub fn estimate_noise_spectrum(
    config: &TrajectoryConfig,
    nbar: f64,
    delta: f64,
    kappa: f64,
    omega_max: f64,
    kind: NoiseKind,
) -> Result<NoiseSpectrum> {
    config.validate(&[kappa])?;
    let per_traj: Vec<Vec<(f64, f64)>> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let series = trajectory(config, i, nbar, delta, kappa, kind)?;
            Ok(periodogram(&series, config.dt)
                .into_iter()
                .filter(|(w, _)| w.abs() <= omega_max)
                .collect())
        })
        .collect::<Result<_>>()?;
    let grid: Vec<f64> = per_traj[0].iter().map(|(w, _)| *w).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let samples: Vec<f64> = per_traj.iter().map(|p| p[j].1).collect();
        let e = EnsembleEstimate::from_samples(&samples);
        values.push(e.mean);
        stderr.push(if e.stderr.is_finite() { e.stderr } else { 0.0 });
    }
    NoiseSpectrum::new(grid, values, Provenance::Oracle { stderr })
}

/// Time-averaged `c(t + lag·dt) c*(t)` per trajectory, then ensemble
/// statistics of the real and imaginary parts.
pub fn noise_autocorrelation(
    config: &TrajectoryConfig,
    nbar: f64,
    delta: f64,
    kappa: f64,
    lag: usize,
) -> Result<(EnsembleEstimate, EnsembleEstimate)> {
    let per_traj: Vec<Complex64> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let c = synthesize_complex_noise(config, i, nbar, delta, kappa)?;
            if lag >= c.len() {
                return Err(Error::Config(format!("lag {lag} exceeds trajectory length {}", c.len())));
            }
            let m = c.len() - lag;
            let acc: Complex64 = (0..m).map(|n| c[n + lag] * c[n].conj()).sum();
            Ok(acc / m as f64)
        })
        .collect::<Result<_>>()?;
    let re: Vec<f64> = per_traj.iter().map(|z| z.re).collect();
    let im: Vec<f64> = per_traj.iter().map(|z| z.im).collect();
    Ok((EnsembleEstimate::from_samples(&re), EnsembleEstimate::from_samples(&im)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodogram_of_tone_peaks_at_its_frequency() {
        let dt = 0.01;
        let n = 1000;
        let w0 = 2.0 * std::f64::consts::PI * 5.0 / (n as f64 * dt);
        let s: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(0.0, -w0 * k as f64 * dt).exp())
            .collect();
        let p = periodogram(&s, dt);
        let peak = p.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert!((peak.0 - w0).abs() < 1e-9);
        // Parseval: Σ P Δω/2π = mean |c|²
        let dw = 2.0 * std::f64::consts::PI / (n as f64 * dt);
        let total: f64 = p.iter().map(|x| x.1).sum::<f64>() * dw / (2.0 * std::f64::consts::PI);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let c = TrajectoryConfig {
            seed: 11,
            n_trajectories: 1,
            dt: 0.01,
            duration: 1.0,
        };
        let a = synthesize_photon_noise(&c, 2, 1.5, 0.3, 1.0).unwrap();
        let b = synthesize_photon_noise(&c, 2, 1.5, 0.3, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 101);
    }
}
