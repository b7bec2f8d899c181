//! Kerr-shifted steady states and Gaussian jitter averages.
//!
//! All detunings here are `δ = ω_p − (ω_c + Δ_N)`, measured from the
//! zero-photon resonance. The instantaneous detuning from the photon-pulled
//! resonance is `Δ = δ + s n̄` with `s = CollectiveMode::photon_shift`.

use crate::collective::CollectiveMode;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::quadrature::{integrate_with_breaks, QuadOptions};

use super::{backaction_heating, freespace_heating};

/// Kernel half-width in units of σ.
const KERNEL_SPAN: f64 = 10.0;
const MAX_ROOT_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Detuning increasing: stays on the low-photon branch until its fold.
    SweepUp,
    /// Detuning decreasing: stays on the high-photon branch.
    SweepDown,
}

/// Dimensionless cubic `b²y³ + 2xb y² + (1 + x²) y − 1` for `y = n̄/n̄_max`.
#[derive(Debug, Clone, Copy)]
struct Cubic {
    x: f64,
    b: f64,
}

impl Cubic {
    fn eval(&self, y: f64) -> (f64, f64) {
        let Cubic { x, b } = *self;
        let p = ((b * b * y + 2.0 * x * b) * y + 1.0 + x * x) * y - 1.0;
        let dp = (3.0 * b * b * y + 4.0 * x * b) * y + 1.0 + x * x;
        (p, dp)
    }

    fn roots(&self) -> Result<Vec<f64>> {
        if self.b == 0.0 {
            return Ok(vec![1.0 / (1.0 + self.x * self.x)]);
        }
        let mut knots = vec![0.0];
        let disc = self.x * self.x - 3.0;
        if disc > 0.0 {
            let r = disc.sqrt();
            for y in [(-2.0 * self.x - r) / (3.0 * self.b), (-2.0 * self.x + r) / (3.0 * self.b)] {
                if y > 0.0 && y < 1.0 {
                    knots.push(y);
                }
            }
        }
        knots.push(1.0);
        let mut out: Vec<f64> = Vec::with_capacity(3);
        for w in knots.windows(2) {
            let (pa, _) = self.eval(w[0]);
            let (pb, _) = self.eval(w[1]);
            if pa == 0.0 {
                push_distinct(&mut out, w[0]);
            }
            if pa * pb < 0.0 {
                push_distinct(&mut out, self.bracketed(w[0], w[1], pa)?);
            }
            if pb == 0.0 {
                push_distinct(&mut out, w[1]);
            }
        }
        if out.is_empty() {
            return Err(Error::numeric("no steady state found in (0, n_max]", self.eval(1.0).0));
        }
        Ok(out)
    }

    /// Safeguarded Newton on a sign-changing bracket.
    fn bracketed(&self, mut lo: f64, mut hi: f64, p_lo: f64) -> Result<f64> {
        let lo_negative = p_lo < 0.0;
        let mut y = 0.5 * (lo + hi);
        for _ in 0..MAX_ROOT_STEPS {
            let (p, dp) = self.eval(y);
            if p == 0.0 {
                return Ok(y);
            }
            if (p < 0.0) == lo_negative {
                lo = y;
            } else {
                hi = y;
            }
            let newton = y - p / dp;
            let next = if dp != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            y = next;
        }
        Err(Error::numeric("steady-state root did not converge", self.eval(y).0.abs()))
    }
}

fn push_distinct(out: &mut Vec<f64>, y: f64) {
    if out.last().is_none_or(|&last| (y - last).abs() > 1e-14 * y.abs().max(1e-300)) {
        out.push(y);
    }
}

fn cubic_for(delta_pc: f64, nbar_max: f64, mode: &CollectiveMode, params: &PhysicalParams) -> Cubic {
    Cubic {
        x: delta_pc / params.kappa,
        b: mode.photon_shift * nbar_max / params.kappa,
    }
}

fn check_nbar_max(nbar_max: f64) -> Result<()> {
    if nbar_max >= 0.0 && nbar_max.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("nbar_max must be finite and non-negative, got {nbar_max}")))
    }
}

/// All self-consistent photon numbers at `delta_pc`, ascending. One or three
/// entries (two exactly at a fold).
pub fn steady_solutions(
    delta_pc: f64,
    nbar_max: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<Vec<f64>> {
    check_nbar_max(nbar_max)?;
    if nbar_max == 0.0 {
        return Ok(vec![0.0]);
    }
    let roots = cubic_for(delta_pc, nbar_max, mode, params).roots()?;
    Ok(roots.into_iter().map(|y| y * nbar_max).collect())
}

/// Solves `n̄ = n̄_max |L(ω_p; ω_c′(n̄))|²`. Where three solutions coexist,
/// `SweepUp` returns the lowest and `SweepDown` the highest.
pub fn steady_intracavity(
    delta_pc: f64,
    nbar_max: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    branch: Branch,
) -> Result<f64> {
    let roots = steady_solutions(delta_pc, nbar_max, mode, params)?;
    Ok(match branch {
        Branch::SweepUp => roots[0],
        Branch::SweepDown => roots[roots.len() - 1],
    })
}

/// Detunings `(δ_L, δ_R)` bounding the bistable window, or `None` below the
/// threshold `s n̄_max = 8κ/(3√3)`. A sweep-down jumps at `δ_L`, a sweep-up at
/// `δ_R`.
pub fn bistable_window(nbar_max: f64, mode: &CollectiveMode, params: &PhysicalParams) -> Option<(f64, f64)> {
    let b = mode.photon_shift * nbar_max / params.kappa;
    if !(b > 0.0) || !b.is_finite() {
        return None;
    }
    // fold condition in u = −Δ/κ: (1 + u²)² = 2bu
    let q = |u: f64| (1.0 + u * u).powi(2) - 2.0 * b * u;
    let dq = |u: f64| 4.0 * u * (1.0 + u * u) - 2.0 * b;
    let u_star = bisect(dq, 0.0, b.max(1.0));
    if q(u_star) >= 0.0 {
        return None;
    }
    let u1 = bisect(q, 0.0, u_star);
    let u2 = bisect(|u| -q(u), u_star, (2.0 * b).cbrt() + 1.0);
    let delta_at = |u: f64| (-u - b / (1.0 + u * u)) * params.kappa;
    Some((delta_at(u1), delta_at(u2)))
}

/// Root of `f` in `[lo, hi]` given `f(lo) > 0 > f(hi)` or the reverse.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_positive = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn quad_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-9,
        max_intervals: 2000,
    }
}

/// `∫ G_σ(δ − v) f(v) dv` over `|δ − v| ≤ 10σ`, with `f` evaluated at the
/// instantaneous detuning `v`. `breaks` marks discontinuities or sharp
/// features of `f`. Returns `f(δ)` when σ = 0.
pub fn jitter_average<F: FnMut(f64) -> f64>(delta_pc: f64, sigma: f64, breaks: &[f64], mut f: F) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("jitter width must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(f(delta_pc));
    }
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let lo = delta_pc - KERNEL_SPAN * sigma;
    let hi = delta_pc + KERNEL_SPAN * sigma;
    let kernel = |v: f64| {
        let u = (delta_pc - v) / sigma;
        norm * (-0.5 * u * u).exp()
    };
    let mut pts = breaks.to_vec();
    pts.push(delta_pc);
    let r = integrate_with_breaks(|v| kernel(v) * f(v), lo, hi, &pts, quad_options())?;
    Ok(r.value)
}

fn fold_breaks(nbar_max: f64, mode: &CollectiveMode, params: &PhysicalParams, branch: Branch) -> Vec<f64> {
    let mut b = vec![0.0];
    if let Some((left, right)) = bistable_window(nbar_max, mode, params) {
        b.push(match branch {
            Branch::SweepUp => right,
            Branch::SweepDown => left,
        });
        b.push(left.min(right) - params.kappa);
    }
    b
}

/// Jitter-averaged steady photon number on the sweep-up branch, using
/// `params.sigma_jitter`.
pub fn voigt_transmission(
    delta_pc: f64,
    nbar_max: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<f64> {
    voigt_transmission_with(delta_pc, nbar_max, mode, params, params.sigma_jitter, Branch::SweepUp)
}

pub fn voigt_transmission_with(
    delta_pc: f64,
    nbar_max: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    sigma: f64,
    branch: Branch,
) -> Result<f64> {
    check_nbar_max(nbar_max)?;
    let breaks = fold_breaks(nbar_max, mode, params, branch);
    let mut err = None;
    let value = jitter_average(delta_pc, sigma, &breaks, |v| {
        steady_intracavity(v, nbar_max, mode, params, branch).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `R_c/R_fs` at detuning `Δ`, which does not depend on n̄.
pub fn backaction_ratio_per_photon(delta: f64, mode: &CollectiveMode, params: &PhysicalParams) -> f64 {
    backaction_heating(1.0, delta, mode, params) / freespace_heating(1.0, params)
}

/// Jitter averages of the self-consistent photon number and heating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitteredResponse {
    /// ⟨n̄⟩_G.
    pub nbar: f64,
    /// ⟨R_fs + R_c⟩_G per atom (W).
    pub r_total: f64,
    /// ⟨R_fs⟩_G per atom (W); R_fs is linear in n̄.
    pub r_fs: f64,
}

impl JitteredResponse {
    /// Observed R/R_fs: heating per convolved photon.
    pub fn ratio(&self) -> f64 {
        if self.r_fs > 0.0 {
            self.r_total / self.r_fs
        } else {
            1.0
        }
    }
}

pub fn jittered_response(
    delta_pc: f64,
    nbar_max: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    sigma: f64,
    branch: Branch,
) -> Result<JitteredResponse> {
    check_nbar_max(nbar_max)?;
    let breaks = fold_breaks(nbar_max, mode, params, branch);
    let mut err = None;
    let mut n_at = |v: f64| {
        steady_intracavity(v, nbar_max, mode, params, branch).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    };
    let nbar = jitter_average(delta_pc, sigma, &breaks, &mut n_at)?;
    let s = mode.photon_shift;
    let heated = jitter_average(delta_pc, sigma, &breaks, |v| {
        let n = n_at(v);
        n * (1.0 + backaction_ratio_per_photon(v + s * n, mode, params))
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let r_fs = freespace_heating(nbar, params);
    let per_photon = freespace_heating(1.0, params);
    Ok(JitteredResponse {
        nbar,
        r_total: heated * per_photon,
        r_fs,
    })
}

/// Jitter-convolved R/R_fs in the weak-probe limit,
/// `⟨n̄ (1 + R_c/R_fs)⟩_G / ⟨n̄⟩_G` with a Lorentzian n̄.
pub fn convolved_heating_ratio(
    delta_pc: f64,
    sigma: f64,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<f64> {
    let k = params.kappa;
    let lorentz = |v: f64| 1.0 / (1.0 + (v / k).powi(2));
    let breaks = [0.0, params.omega_z];
    let num = jitter_average(delta_pc, sigma, &breaks, |v| {
        lorentz(v) * (1.0 + backaction_ratio_per_photon(v, mode, params))
    })?;
    let den = jitter_average(delta_pc, sigma, &breaks, lorentz)?;
    Ok(num / den)
}

/// Convolved heating per photon relative to the unjittered value at the same
/// detuning, using `params.sigma_jitter`.
pub fn convolved_heating_per_photon(delta_pc: f64, mode: &CollectiveMode, params: &PhysicalParams) -> Result<f64> {
    let bare = 1.0 + backaction_ratio_per_photon(delta_pc, mode, params);
    Ok(convolved_heating_ratio(delta_pc, params.sigma_jitter, mode, params)? / bare)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::AtomicEnsemble;
    use crate::spectra::lorentzian_response;

    fn setup(n: u64) -> (PhysicalParams, CollectiveMode) {
        let p = PhysicalParams::default();
        let mode = CollectiveMode::new(&AtomicEnsemble::uniform(n), &p);
        (p, mode)
    }

    #[test]
    fn decoupled_mode_gives_bare_lorentzian() {
        let (p, _) = setup(0);
        let mode = CollectiveMode::from_totals(0.0, 0.0, 0.0, &p);
        for i in -20..=20 {
            let d = i as f64 * 0.37 * p.kappa;
            let n = voigt_transmission_with(d, 2.5, &mode, &p, 0.0, Branch::SweepUp).unwrap();
            let expect = 2.5 * lorentzian_response(d, 0.0, p.kappa).norm_sqr();
            assert!((n - expect).abs() <= 1e-12 * expect, "{d}");
        }
    }

    #[test]
    fn solution_is_self_consistent() {
        let (p, mode) = setup(100_000);
        for d in [-4.0, -2.0, 0.0, 1.0] {
            let delta = d * p.kappa;
            for n in steady_solutions(delta, 4.0, &mode, &p).unwrap() {
                let big_delta = delta + mode.photon_shift * n;
                let target = 4.0 / (1.0 + (big_delta / p.kappa).powi(2));
                assert!((n - target).abs() < 1e-10 * target);
            }
        }
    }

    #[test]
    fn exact_shifted_resonance_reaches_nbar_max() {
        let (p, mode) = setup(100_000);
        let delta = -mode.photon_shift * 3.0;
        let roots = steady_solutions(delta, 3.0, &mode, &p).unwrap();
        assert!(roots.iter().any(|n| (n - 3.0).abs() < 1e-9));
    }

    #[test]
    fn hysteresis_window_has_three_roots() {
        let (p, mode) = setup(100_000);
        let (left, right) = bistable_window(4.0, &mode, &p).expect("bistable");
        assert!(left < right && right < 0.0);
        let mid = 0.5 * (left + right);
        assert_eq!(steady_solutions(mid, 4.0, &mode, &p).unwrap().len(), 3);
        assert_eq!(steady_solutions(left - 0.1 * p.kappa, 4.0, &mode, &p).unwrap().len(), 1);
        assert_eq!(steady_solutions(right + 0.1 * p.kappa, 4.0, &mode, &p).unwrap().len(), 1);
        let up = steady_intracavity(mid, 4.0, &mode, &p, Branch::SweepUp).unwrap();
        let down = steady_intracavity(mid, 4.0, &mode, &p, Branch::SweepDown).unwrap();
        assert!(down > 3.0 * up);
    }

    #[test]
    fn threshold_is_eight_over_three_root_three() {
        let (p, mode) = setup(100_000);
        let critical = 8.0 / (3.0 * 3f64.sqrt()) * p.kappa / mode.photon_shift;
        assert!(bistable_window(0.99 * critical, &mode, &p).is_none());
        assert!(bistable_window(1.01 * critical, &mode, &p).is_some());
    }

    #[test]
    fn jitter_lowers_the_peak() {
        let (p, mode) = setup(100_000);
        let n = voigt_transmission(0.0, 1.0e-6, &mode, &p).unwrap();
        assert!(n < 1.0e-6);
    }

    #[test]
    fn zero_sigma_factor_is_one() {
        let (mut p, mode) = setup(100_000);
        p.sigma_jitter = 0.0;
        assert!((convolved_heating_per_photon(0.3 * p.kappa, &mode, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_response_matches_convolved_ratio() {
        let (p, mode) = setup(100_000);
        let r = jittered_response(0.2 * p.kappa, 1e-9, &mode, &p, p.sigma_jitter, Branch::SweepUp).unwrap();
        let c = convolved_heating_ratio(0.2 * p.kappa, p.sigma_jitter, &mode, &p).unwrap();
        assert!((r.ratio() / c - 1.0).abs() < 1e-6);
    }
}
