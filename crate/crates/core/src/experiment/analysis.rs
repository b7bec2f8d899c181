use std::io::Write;

use rayon::prelude::*;

use super::{uniform_mode, TransmissionTrace};
use crate::collective::atoms_from_shift;
use crate::error::{Error, Result};
use crate::fit::weighted_least_squares;
use crate::output::{fmt_f64, write_csv};
use crate::params::PhysicalParams;
use crate::spectra::{freespace_heating, voigt_transmission_with, Branch};

/// Scan used to locate the lineshape maximum, in units of κ.
const PEAK_SCAN: (f64, f64, f64) = (-30.0, 10.0, 0.05);
/// Bins averaged when locating the count maximum.
const PEAK_SMOOTHING: usize = 5;
const MIN_FIT_BINS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowStatus {
    Ok,
    /// No photons detected in the window.
    BelowDetection,
    /// Too few invertible bins for a slope.
    InsufficientData,
    /// The window straddles the transmission maximum, where the side of the
    /// lineshape is uncertain.
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingRecord {
    /// Window center (s).
    pub t: f64,
    /// Inferred atom-induced shift Δ_N (rad/s).
    pub delta_n: f64,
    pub n_atoms: f64,
    pub n_atoms_err: f64,
    pub dndt: f64,
    /// Inferred probe detuning from the photon-pulled resonance (rad/s).
    pub delta: f64,
    /// Per-atom heating (W).
    pub r: f64,
    pub ratio: f64,
    pub ratio_err: f64,
    pub status: WindowStatus,
}

impl HeatingRecord {
    fn flagged(t: f64, status: WindowStatus) -> Self {
        Self {
            t,
            delta_n: f64::NAN,
            n_atoms: f64::NAN,
            n_atoms_err: f64::NAN,
            dndt: f64::NAN,
            delta: f64::NAN,
            r: f64::NAN,
            ratio: f64::NAN,
            ratio_err: f64::NAN,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeatingAnalysis {
    pub records: Vec<HeatingRecord>,
}

impl HeatingAnalysis {
    /// Records with a usable ratio.
    pub fn valid(&self) -> impl Iterator<Item = &HeatingRecord> {
        self.records
            .iter()
            .filter(|r| matches!(r.status, WindowStatus::Ok | WindowStatus::Ambiguous) && r.ratio.is_finite())
    }

    /// Largest ratio among windows whose error bar is below `max_rel_err` of
    /// the value.
    pub fn peak_ratio(&self, max_rel_err: f64) -> Option<HeatingRecord> {
        self.valid()
            .filter(|r| r.status == WindowStatus::Ok && r.ratio_err < max_rel_err * r.ratio.abs())
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .copied()
    }

    /// `t_s,delta_rad_s,N,N_err,dNdt,R_W,ratio,ratio_err`; flagged windows carry NaN.
    pub fn write_csv<W: Write>(&self, out: W, provenance: &[(String, String)]) -> Result<()> {
        let rows = self.records.iter().map(|r| {
            vec![
                fmt_f64(r.t),
                fmt_f64(r.delta),
                fmt_f64(r.n_atoms),
                fmt_f64(r.n_atoms_err),
                fmt_f64(r.dndt),
                fmt_f64(r.r),
                fmt_f64(r.ratio),
                fmt_f64(r.ratio_err),
            ]
        });
        write_csv(
            out,
            provenance,
            &["t_s", "delta_rad_s", "N", "N_err", "dNdt", "R_W", "ratio", "ratio_err"],
            rows,
        )
    }
}

/// Expected n̄ as a function of δ = δ_pc − Δ_N, with the atom number implied
/// by δ setting the Kerr shift.
struct Lineshape<'a> {
    params: &'a PhysicalParams,
    delta_pc: f64,
    nbar_max: f64,
}

impl Lineshape<'_> {
    fn atoms(&self, delta: f64) -> Result<f64> {
        atoms_from_shift(self.delta_pc - delta, self.params)
    }

    fn nbar(&self, delta: f64) -> Result<f64> {
        let n = self.atoms(delta)?.max(0.0);
        let mode = uniform_mode(n, self.params);
        voigt_transmission_with(delta, self.nbar_max, &mode, self.params, self.params.sigma_jitter, Branch::SweepUp)
    }

    fn slope(&self, delta: f64) -> Result<f64> {
        let h = 1e-3 * self.params.kappa;
        Ok((self.nbar(delta + h)? - self.nbar(delta - h)?) / (2.0 * h))
    }

    /// δ of the lineshape maximum.
    fn peak(&self) -> Result<f64> {
        let k = self.params.kappa;
        let (lo, hi, step) = PEAK_SCAN;
        let n_steps = ((hi - lo) / step).round() as usize;
        let mut best = (lo * k, f64::NEG_INFINITY);
        for i in 0..=n_steps {
            let d = (lo + i as f64 * step) * k;
            let v = self.nbar(d)?;
            if v > best.1 {
                best = (d, v);
            }
        }
        // golden-section refinement inside ±1 scan step
        let (mut a, mut b) = (best.0 - step * k, best.0 + step * k);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..40 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.nbar(c)? > self.nbar(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// δ on one side of the peak where the lineshape equals `target`, and
    /// whether the target exceeded the model maximum.
    fn invert(&self, target: f64, peak: f64, approach: bool, far: f64) -> Result<(f64, bool)> {
        let peak_value = self.nbar(peak)?;
        if target >= peak_value {
            return Ok((peak, true));
        }
        let (mut lo, mut hi) = if approach { (far, peak) } else { (peak, far) };
        let f_far = self.nbar(far)?;
        if target <= f_far {
            return Ok((far, false));
        }
        let tol = 1e-7 * self.params.kappa;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let above = self.nbar(mid)? > target;
            // the model rises towards the peak on both sides
            if above == approach {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((0.5 * (lo + hi), false))
    }
}

struct BinEstimate {
    t: f64,
    nbar: f64,
    delta: f64,
    n_atoms: f64,
    n_err: f64,
}

/// Inverts counts to atom numbers bin by bin and fits dN/dt per window.
pub fn analyze_trace(trace: &TransmissionTrace, params: &PhysicalParams) -> Result<HeatingAnalysis> {
    let cfg = &trace.config;
    let per_window = cfg.bins_per_window();
    if trace.len() < per_window {
        return Err(Error::Config(format!(
            "trace has {} bins, fewer than one {}-bin window",
            trace.len(),
            per_window
        )));
    }
    let shape = Lineshape {
        params,
        delta_pc: cfg.delta_pc,
        nbar_max: cfg.nbar_max,
    };
    // which side of the lineshape each bin lies on, from the time ordering
    let counts: Vec<f64> = trace.detected_counts.iter().map(|&c| c as f64).collect();
    let smoothed: Vec<f64> = (0..counts.len())
        .map(|i| {
            let lo = i.saturating_sub(PEAK_SMOOTHING / 2);
            let hi = (i + PEAK_SMOOTHING / 2 + 1).min(counts.len());
            counts[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let peak_bin = (0..smoothed.len())
        .max_by(|&a, &b| smoothed[a].total_cmp(&smoothed[b]))
        .unwrap_or(0);
    let any_light = counts.iter().any(|&c| c > 0.0);
    let peak = if any_light && cfg.nbar_max > 0.0 { shape.peak()? } else { 0.0 };
    let far_approach = cfg.delta_pc - atoms_shift(2.0 * cfg.n_initial, params);
    let far_departure = cfg.delta_pc;

    let bins: Vec<Option<BinEstimate>> = (0..trace.len())
        .into_par_iter()
        .map(|i| {
            let (nbar, nbar_err) = trace.observed_nbar(i, params);
            if trace.detected_counts[i] == 0 {
                return Ok(None);
            }
            let approach = i <= peak_bin;
            let far = if approach { far_approach } else { far_departure };
            let (delta, saturated) = shape.invert(nbar, peak, approach, far)?;
            if saturated || delta == far {
                return Ok(None);
            }
            let n_atoms = shape.atoms(delta)?;
            let slope = shape.slope(delta)?;
            let dn_ddelta = -2.0 * params.delta_ca / (params.g0 * params.g0);
            let n_err = (dn_ddelta / slope).abs() * nbar_err;
            Ok(Some(BinEstimate {
                t: trace.times[i],
                nbar,
                delta,
                n_atoms,
                n_err,
            }))
        })
        .collect::<Result<_>>()?;

    let n_windows = trace.len() / per_window;
    let mut records = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let range = w * per_window..(w + 1) * per_window;
        let t_center = 0.5 * (trace.times[range.start] + trace.times[range.end - 1]);
        if trace.detected_counts[range.clone()].iter().all(|&c| c == 0) {
            records.push(HeatingRecord::flagged(t_center, WindowStatus::BelowDetection));
            continue;
        }
        let usable: Vec<&BinEstimate> = bins[range.clone()]
            .iter()
            .flatten()
            .filter(|b| b.n_err.is_finite() && b.n_err > 0.0)
            .collect();
        if usable.len() < MIN_FIT_BINS {
            records.push(HeatingRecord::flagged(t_center, WindowStatus::InsufficientData));
            continue;
        }
        let design: Vec<Vec<f64>> = usable.iter().map(|b| vec![1.0, b.t - t_center]).collect();
        let y: Vec<f64> = usable.iter().map(|b| b.n_atoms).collect();
        let wts: Vec<f64> = usable.iter().map(|b| 1.0 / (b.n_err * b.n_err)).collect();
        let fit = match weighted_least_squares(&design, &y, &wts) {
            Ok(f) => f,
            Err(Error::Numeric { .. }) => {
                records.push(HeatingRecord::flagged(t_center, WindowStatus::InsufficientData));
                continue;
            }
            Err(e) => return Err(e),
        };
        let n_c = fit.coefficients[0];
        let dndt = fit.coefficients[1];
        let dndt_err = fit.stderr(1);
        let nbar_mean = usable.iter().map(|b| b.nbar).sum::<f64>() / usable.len() as f64;
        let delta_mean = usable.iter().map(|b| b.delta).sum::<f64>() / usable.len() as f64;
        let mode = uniform_mode(n_c.max(0.0), params);
        let u = params.trap_depth;
        let r = -u * dndt / n_c - u * params.gamma_bg;
        let r_fs = freespace_heating(nbar_mean, params);
        let straddles = range.contains(&peak_bin);
        records.push(HeatingRecord {
            t: t_center,
            delta_n: mode.delta_n,
            n_atoms: n_c,
            n_atoms_err: fit.stderr(0),
            dndt,
            delta: delta_mean + mode.photon_shift * nbar_mean,
            r,
            ratio: r / r_fs,
            ratio_err: (u * dndt_err / n_c / r_fs).max(f64::MIN_POSITIVE),
            status: if straddles { WindowStatus::Ambiguous } else { WindowStatus::Ok },
        });
    }
    Ok(HeatingAnalysis { records })
}

fn atoms_shift(n_atoms: f64, params: &PhysicalParams) -> f64 {
    uniform_mode(n_atoms, params).delta_n
}
