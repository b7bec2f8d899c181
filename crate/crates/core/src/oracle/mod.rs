//! Independent numerical checks of the closed forms in [`crate::spectra`].
//!
//! Stochastic ensembles are seeded per trajectory from a master seed (ChaCha8
//! with the trajectory index as stream id) and reduced with pairwise sums, so
//! results do not depend on the rayon thread count.

mod checks;
mod kicked;
mod meanfield;
mod noise;
mod suites;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collective::pairwise_sum;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_csv};

pub use checks::{correlation_fourier_transform, output_whiteness_kernel, spectrum_ft_check};
pub use kicked::{kicked_oscillator_heating, kicked_oscillator_run, symmetrized_diffusion_prediction, KickedRun};
pub(crate) use kicked::drive_ensemble;
pub use meanfield::{
    hysteresis_sweep, meanfield_integrate, DriveSchedule, HysteresisSweep, MeanFieldConfig, MeanFieldState,
    MeanFieldTrace,
};
pub use suites::{run_suites, SuiteConfig, SuiteResult};
pub use noise::{
    estimate_noise_spectrum, noise_autocorrelation, periodogram, synthesize_complex_noise, synthesize_photon_noise,
    NoiseKind,
};

/// Step resolution required per rate: `dt < RESOLUTION / rate`.
pub const RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub n_trajectories: usize,
    /// Integration step (s).
    pub dt: f64,
    /// Length of each trajectory (s).
    pub duration: f64,
}

impl TrajectoryConfig {
    /// Checks `dt` against every rate in `rates` (rad/s), skipping zeros.
    pub fn validate(&self, rates: &[f64]) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_trajectories < 1 {
            bad.push("n_trajectories must be at least 1".to_string());
        }
        if !(self.dt > 0.0) {
            bad.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration >= self.dt) {
            bad.push(format!("duration {} shorter than dt {}", self.duration, self.dt));
        }
        for &rate in rates.iter().filter(|r| **r != 0.0) {
            if !(self.dt < RESOLUTION / rate.abs()) {
                bad.push(format!("dt {} does not resolve rate {:e} rad/s", self.dt, rate));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Same settings with a different master seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Generator for trajectory `index` under master `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEstimate {
    pub mean: f64,
    /// Standard error of the mean; infinite for a single sample.
    pub stderr: f64,
    pub n_samples: usize,
}

impl EnsembleEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::INFINITY,
                n_samples: 0,
            };
        }
        let mean = pairwise_sum(samples, |x| x) / n as f64;
        let stderr = if n > 1 {
            let var = pairwise_sum(samples, |x| (x - mean) * (x - mean)) / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean,
            stderr,
            n_samples: n,
        }
    }

    /// `|self − value| ≤ k · stderr`.
    pub fn within_sigma(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Writes `quantity,mean,stderr,n_samples,seed` rows.
pub fn write_estimates_csv<W: Write>(
    out: W,
    provenance: &[(String, String)],
    rows: &[(String, EnsembleEstimate, u64)],
) -> Result<()> {
    let body = rows.iter().map(|(name, e, seed)| {
        vec![
            name.clone(),
            fmt_f64(e.mean),
            fmt_f64(e.stderr),
            e.n_samples.to_string(),
            seed.to_string(),
        ]
    });
    write_csv(out, provenance, &["quantity", "mean", "stderr", "n_samples", "seed"], body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn config_rejects_coarse_steps() {
        let c = TrajectoryConfig {
            seed: 1,
            n_trajectories: 1,
            dt: 0.05,
            duration: 1.0,
        };
        assert!(c.validate(&[1.0]).is_ok());
        assert!(c.validate(&[1.0, 3.0]).is_err());
        assert!(TrajectoryConfig { n_trajectories: 0, ..c }.validate(&[]).is_err());
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trajectory_rng(7, 3).random();
        let b: u64 = trajectory_rng(7, 3).random();
        let c: u64 = trajectory_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn estimate_of_constant_has_zero_error() {
        let e = EnsembleEstimate::from_samples(&[2.0; 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert!(EnsembleEstimate::from_samples(&[1.0]).stderr.is_infinite());
    }
}
