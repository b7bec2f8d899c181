//! Deterministic quadrature cross-checks.

use num_complex::Complex64;

use crate::error::Result;
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::spectra::{lorentzian_response, photon_noise_spectrum, two_time_correlation};

/// Integration cutoff in units of 1/κ; e^{−60} is far below the tolerance.
const TAU_SPAN: f64 = 60.0;

/// `2κ²/(κ² + δ²) − (L + L*) + 1` with `δ = ω − ω_c′`; identically 1.
pub fn output_whiteness_kernel(omega_grid: &[f64], omega_c_prime: f64, kappa: f64) -> Vec<f64> {
    omega_grid
        .iter()
        .map(|&w| {
            let d = w - omega_c_prime;
            let l = lorentzian_response(w, omega_c_prime, kappa);
            2.0 * kappa * kappa / (kappa * kappa + d * d) - (l + l.conj()).re + 1.0
        })
        .collect()
}

/// `∫ e^{iωτ} C(τ) dτ` over ℝ, integrating both half-lines numerically.
pub fn correlation_fourier_transform(omega: f64, nbar: f64, delta: f64, kappa: f64) -> Result<Complex64> {
    let end = TAU_SPAN / kappa;
    // one break per oscillation keeps each panel smooth
    let freq = (omega + delta).abs().max(kappa);
    let n_breaks = ((freq * end / std::f64::consts::PI).ceil() as usize).min(4000);
    let breaks: Vec<f64> = (1..n_breaks).map(|i| end * i as f64 / n_breaks as f64).collect();
    let opts = QuadOptions {
        abs_tol: 1e-14 * nbar / kappa,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    };
    let part = |sign: f64, re: bool| {
        integrate_with_breaks(
            |t| {
                let tau = sign * t;
                let v = Complex64::new(0.0, omega * tau).exp() * two_time_correlation(tau, nbar, delta, kappa);
                if re {
                    v.re
                } else {
                    v.im
                }
            },
            0.0,
            end,
            &breaks,
            opts,
        )
        .map(|r| r.value)
    };
    let re = part(1.0, true)? + part(-1.0, true)?;
    let im = part(1.0, false)? + part(-1.0, false)?;
    Ok(Complex64::new(re, im))
}

/// Worst relative difference between the transformed correlation and the
/// closed-form `S_nn` over the grid.
pub fn spectrum_ft_check(nbar: f64, delta: f64, kappa: f64, omega_grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &w in omega_grid {
        let ft = correlation_fourier_transform(w, nbar, delta, kappa)?;
        let s = photon_noise_spectrum(w, nbar, delta, kappa);
        let err = (ft - s).norm() / s;
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whiteness_limits() {
        let k = 4.1e6;
        let v = output_whiteness_kernel(&[0.0, 1e6 * k, -1e6 * k, k], 0.0, k);
        for x in v {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_case_is_real() {
        let k = 2.0;
        let a = correlation_fourier_transform(0.7, 1.0, 0.0, k).unwrap();
        let b = correlation_fourier_transform(-0.7, 1.0, 0.0, k).unwrap();
        assert!(a.im.abs() < 1e-12);
        assert!((a.re - b.re).abs() < 1e-10 * a.re);
    }
}
