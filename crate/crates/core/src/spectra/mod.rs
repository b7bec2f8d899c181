//! Closed-form cavity response, photon-number noise spectra and heating rates.
//!
//! Conventions: `delta` (Δ) is the probe detuning ω_p − ω_c′ from the
//! atoms-shifted resonance, including the photon-induced pull. Spectral
//! densities are per unit angular frequency (units of s).

mod lineshape;

use std::io::Write;

use num_complex::Complex64;

use crate::collective::CollectiveMode;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_csv};
use crate::params::PhysicalParams;

pub use lineshape::{
    backaction_ratio_per_photon, bistable_window, convolved_heating_per_photon, convolved_heating_ratio,
    jitter_average, jittered_response, steady_intracavity, steady_solutions, voigt_transmission,
    voigt_transmission_with, Branch, JitteredResponse,
};

/// Occupation above which the small-⟨a†a⟩ rate equation is flagged.
pub const SMALL_OCCUPATION_WARN: f64 = 10.0;

/// Complex cavity response `L(ω) = (1 − i(ω − ω_c′)/κ)⁻¹`.
pub fn lorentzian_response(omega: f64, omega_c_prime: f64, kappa: f64) -> Complex64 {
    Complex64::new(1.0, -(omega - omega_c_prime) / kappa).inv()
}

/// `S_nn(ω) = 2 n̄ κ / (κ² + (Δ + ω)²)`.
pub fn photon_noise_spectrum(omega: f64, nbar: f64, delta: f64, kappa: f64) -> f64 {
    let d = delta + omega;
    2.0 * nbar * kappa / (kappa * kappa + d * d)
}

/// `[S_nn(ω) + S_nn(−ω)]/2`, the part of the spectrum a classical real-valued
/// force can carry.
pub fn symmetrized_spectrum(omega: f64, nbar: f64, delta: f64, kappa: f64) -> f64 {
    0.5 * (photon_noise_spectrum(omega, nbar, delta, kappa) + photon_noise_spectrum(-omega, nbar, delta, kappa))
}

/// Photon-number correlation `⟨n(τ)n(0)⟩ − n̄² = n̄ e^{(iΔ − κ)τ}` for τ ≥ 0,
/// continued to τ < 0 by `C(−τ) = C(τ)*`.
pub fn two_time_correlation(tau: f64, nbar: f64, delta: f64, kappa: f64) -> Complex64 {
    let t = tau.abs();
    let c = nbar * Complex64::new(-kappa * t, delta * t).exp();
    if tau < 0.0 {
        c.conj()
    } else {
        c
    }
}

/// Free-space standing-wave heating per atom, `(f0²/2m)(n̄/κ)(1/C)` (W).
pub fn freespace_heating(nbar: f64, params: &PhysicalParams) -> f64 {
    let f0 = params.f0();
    f0 * f0 / (2.0 * params.mass) * (nbar / params.kappa) / params.cooperativity()
}

/// Backaction heating per atom, `ħ ω_z κ² ε² S_nn(−ω_z)/N` (W).
pub fn backaction_heating(nbar: f64, delta: f64, mode: &CollectiveMode, params: &PhysicalParams) -> f64 {
    if mode.n_atoms <= 0.0 {
        return 0.0;
    }
    let k = params.kappa;
    let s_minus = photon_noise_spectrum(-params.omega_z, nbar, delta, k);
    HBAR * params.omega_z * k * k * mode.epsilon * mode.epsilon * s_minus / mode.n_atoms
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingRates {
    /// Backaction heating per atom (W).
    pub r_c: f64,
    /// Free-space heating per atom (W).
    pub r_fs: f64,
    /// R/R_fs = 1 + R_c/R_fs.
    pub ratio: f64,
}

pub fn heating_rates(nbar: f64, delta: f64, mode: &CollectiveMode, params: &PhysicalParams) -> HeatingRates {
    let r_c = backaction_heating(nbar, delta, mode, params);
    let r_fs = freespace_heating(nbar, params);
    let ratio = if r_fs > 0.0 {
        1.0 + r_c / r_fs
    } else {
        1.0 + backaction_ratio_per_photon(delta, mode, params)
    };
    HeatingRates { r_c, r_fs, ratio }
}

/// `d⟨a†a⟩/dt = κ²ε²[S⁻ + (S⁻ − S⁺)⟨a†a⟩]` with `S^± = S_nn(±ω_z)`.
/// Logs a warning when the occupation exceeds [`SMALL_OCCUPATION_WARN`].
pub fn occupation_rate(
    occupation: f64,
    nbar: f64,
    delta: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> f64 {
    occupation_rate_with_threshold(occupation, nbar, delta, mode, params, SMALL_OCCUPATION_WARN)
}

pub fn occupation_rate_with_threshold(
    occupation: f64,
    nbar: f64,
    delta: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    warn_above: f64,
) -> f64 {
    if occupation > warn_above {
        log::warn!("occupation {occupation} exceeds {warn_above}; the small-occupation rate equation may not hold");
    }
    let k = params.kappa;
    let s_minus = photon_noise_spectrum(-params.omega_z, nbar, delta, k);
    let s_plus = photon_noise_spectrum(params.omega_z, nbar, delta, k);
    k * k * mode.epsilon * mode.epsilon * (s_minus + (s_minus - s_plus) * occupation)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Analytic,
    /// Monte Carlo estimate with one standard error per grid point.
    Oracle { stderr: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum {
    /// Angular frequencies (rad/s), strictly increasing.
    pub grid: Vec<f64>,
    /// Spectral density (s), non-negative.
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

impl NoiseSpectrum {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let mut bad = Vec::new();
        if grid.len() != values.len() {
            bad.push(format!("grid has {} points but values has {}", grid.len(), values.len()));
        }
        if let Provenance::Oracle { stderr } = &provenance {
            if stderr.len() != grid.len() {
                bad.push("stderr length differs from grid".to_string());
            }
            if stderr.iter().any(|e| !(*e >= 0.0)) {
                bad.push("negative standard error".to_string());
            }
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            bad.push("grid must be strictly increasing".to_string());
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            bad.push("spectral density must be non-negative".to_string());
        }
        if bad.is_empty() {
            Ok(Self {
                grid,
                values,
                provenance,
            })
        } else {
            Err(Error::Validation(bad))
        }
    }

    pub fn analytic(grid: Vec<f64>, nbar: f64, delta: f64, kappa: f64) -> Result<Self> {
        let values = grid
            .iter()
            .map(|&w| photon_noise_spectrum(w, nbar, delta, kappa))
            .collect();
        Self::new(grid, values, Provenance::Analytic)
    }

    pub fn stderr(&self, i: usize) -> f64 {
        match &self.provenance {
            Provenance::Analytic => 0.0,
            Provenance::Oracle { stderr } => stderr[i],
        }
    }

    /// `omega_rad_s,value,stderr` rows after the provenance block.
    pub fn write_csv<W: Write>(&self, out: W, provenance: &[(String, String)]) -> Result<()> {
        let mut prov = provenance.to_vec();
        let source = match self.provenance {
            Provenance::Analytic => "analytic",
            Provenance::Oracle { .. } => "oracle",
        };
        prov.push(("spectrum_source".into(), source.into()));
        let rows = (0..self.grid.len()).map(|i| {
            vec![
                fmt_f64(self.grid[i]),
                fmt_f64(self.values[i]),
                fmt_f64(self.stderr(i)),
            ]
        });
        write_csv(out, &prov, &["omega_rad_s", "value", "stderr"], rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::AtomicEnsemble;
    use crate::quadrature::{integrate_real_line, QuadOptions};
    use proptest::prelude::*;

    fn setup() -> (PhysicalParams, CollectiveMode) {
        let p = PhysicalParams::default();
        let mode = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &p);
        (p, mode)
    }

    #[test]
    fn lorentzian_on_resonance_and_half_width() {
        let k = 3.0;
        assert_eq!(lorentzian_response(5.0, 5.0, k), Complex64::new(1.0, 0.0));
        assert!((lorentzian_response(5.0 + k, 5.0, k).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lorentzian_area_is_pi_kappa() {
        let k = 4.1e6;
        let r = integrate_real_line(|w| lorentzian_response(w, 1e6, k).norm_sqr(), k, QuadOptions::default()).unwrap();
        assert!((r.value / (std::f64::consts::PI * k) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noise_spectrum_peak_value() {
        let (p, _) = setup();
        let s = photon_noise_spectrum(-p.omega_z, 1.0, p.omega_z, p.kappa);
        assert!((s - 2.0 / p.kappa).abs() < 1e-20);
        assert!(photon_noise_spectrum(1e15, 1.0, 0.0, p.kappa) < 1e-20);
    }

    #[test]
    fn noise_spectrum_integrates_to_nbar() {
        let k = 4.1e6;
        let r = integrate_real_line(
            |w| photon_noise_spectrum(w, 1.9, 0.7 * k, k) / (2.0 * std::f64::consts::PI),
            k,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value / 1.9 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn correlation_limits() {
        let c = two_time_correlation(0.0, 1.9, 2.0, 3.0);
        assert_eq!(c, Complex64::new(1.9, 0.0));
        assert!(two_time_correlation(100.0, 1.9, 2.0, 3.0).norm() < 1e-100);
        let a = two_time_correlation(0.4, 1.9, 2.0, 3.0);
        let b = two_time_correlation(-0.4, 1.9, 2.0, 3.0);
        assert_eq!(a, b.conj());
    }

    #[test]
    fn freespace_heating_is_linear() {
        let (p, _) = setup();
        assert_eq!(freespace_heating(0.0, &p), 0.0);
        let a = freespace_heating(1.0, &p);
        assert!((freespace_heating(3.0, &p) / a - 3.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_backaction_matches_cooperativity_lorentzian() {
        let (p, mode) = setup();
        let c = p.cooperativity();
        let k = p.kappa;
        for (offset, expected) in [(0.0, c), (k, c / 2.0), (10.0 * k, c / 101.0)] {
            let rates = heating_rates(1.9, p.omega_z + offset, &mode, &p);
            assert!(((rates.r_c / rates.r_fs) / expected - 1.0).abs() < 1e-12, "{offset}");
        }
    }

    #[test]
    fn occupation_rate_at_zero_is_pure_diffusion() {
        let (p, mode) = setup();
        let delta = 0.3 * p.kappa;
        let r = occupation_rate(0.0, 1.0, delta, &mode, &p);
        let expect = p.kappa.powi(2) * mode.epsilon.powi(2) * photon_noise_spectrum(-p.omega_z, 1.0, delta, p.kappa);
        assert_eq!(r, expect);
        // consistency with the per-atom heating rate
        let rc = backaction_heating(1.0, delta, &mode, &p);
        assert!((r - mode.n_atoms * rc / (HBAR * p.omega_z)).abs() < 1e-12 * r);
    }

    #[test]
    fn blue_detuning_anti_cools_and_resonance_is_neutral() {
        let (p, mode) = setup();
        let base = occupation_rate(0.0, 1.0, p.kappa, &mode, &p);
        assert!(occupation_rate(1.0, 1.0, p.kappa, &mode, &p) > base);
        let red = occupation_rate(0.0, 1.0, -p.kappa, &mode, &p);
        assert!(occupation_rate(1.0, 1.0, -p.kappa, &mode, &p) < red);
        let at_zero = occupation_rate(0.0, 1.0, 0.0, &mode, &p);
        assert!((occupation_rate(3.0, 1.0, 0.0, &mode, &p) - at_zero).abs() < 1e-12 * at_zero);
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        assert!(NoiseSpectrum::new(vec![1.0, 1.0], vec![1.0, 1.0], Provenance::Analytic).is_err());
        assert!(NoiseSpectrum::new(vec![1.0, 2.0], vec![1.0, -1.0], Provenance::Analytic).is_err());
        assert!(NoiseSpectrum::analytic(vec![-1.0, 0.0, 1.0], 1.0, 0.2, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn spectrum_reflection_symmetry(w in -1e8f64..1e8, d in -1e8f64..1e8, n in 0.0f64..50.0) {
            let k = 4.1e6;
            let a = photon_noise_spectrum(w, n, d, k);
            let b = photon_noise_spectrum(-w, n, -d, k);
            prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1e-300));
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn uniform_ratio_independent_of_nbar(n1 in 0.01f64..20.0, n2 in 0.01f64..20.0, d in -5.0f64..5.0) {
            let (p, mode) = setup();
            let delta = d * p.kappa;
            let a = heating_rates(n1, delta, &mode, &p).ratio;
            let b = heating_rates(n2, delta, &mode, &p).ratio;
            prop_assert!((a - b).abs() < 1e-12 * a);
        }
    }
}
