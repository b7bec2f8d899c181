use std::io::Write;

use crate::collective::CollectiveMode;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_csv};
use crate::params::PhysicalParams;
use crate::spectra::{convolved_heating_ratio, freespace_heating};

/// Half-width of the admissible detuning range around ω_z, in units of κ.
const GRID_SPAN: f64 = 10.0;

/// Jitter-convolved R/R_fs, `⟨n̄ (1 + R_c/R_fs)⟩_G / ⟨n̄⟩_G`, in the
/// weak-probe limit, at each detuning Δ of `delta_grid`.
pub fn heating_curve(
    params: &PhysicalParams,
    mode: &CollectiveMode,
    sigma: f64,
    delta_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let limit = GRID_SPAN * params.kappa;
    if let Some(d) = delta_grid.iter().find(|d| !((*d - params.omega_z).abs() <= limit)) {
        return Err(Error::Domain(format!(
            "detuning {d:e} rad/s is more than {GRID_SPAN} linewidths from omega_z"
        )));
    }
    delta_grid
        .iter()
        .map(|&d| Ok((d, convolved_heating_ratio(d, sigma, mode, params)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingPoint {
    pub delta: f64,
    pub nbar: f64,
    pub r_c: f64,
    pub r_fs: f64,
    pub ratio: f64,
}

/// The heating curve expressed as per-atom rates at photon number `nbar`.
pub fn heating_curve_table(
    params: &PhysicalParams,
    mode: &CollectiveMode,
    sigma: f64,
    nbar: f64,
    delta_grid: &[f64],
) -> Result<Vec<HeatingPoint>> {
    let r_fs = freespace_heating(nbar, params);
    Ok(heating_curve(params, mode, sigma, delta_grid)?
        .into_iter()
        .map(|(delta, ratio)| HeatingPoint {
            delta,
            nbar,
            r_c: (ratio - 1.0) * r_fs,
            r_fs,
            ratio,
        })
        .collect())
}

impl HeatingPoint {
    /// `delta_rad_s,nbar,r_c,r_fs,ratio` rows.
    pub fn write_csv<W: Write>(points: &[HeatingPoint], out: W, provenance: &[(String, String)]) -> Result<()> {
        let rows = points.iter().map(|p| {
            vec![
                fmt_f64(p.delta),
                fmt_f64(p.nbar),
                fmt_f64(p.r_c),
                fmt_f64(p.r_fs),
                fmt_f64(p.ratio),
            ]
        });
        write_csv(out, provenance, &["delta_rad_s", "nbar", "r_c", "r_fs", "ratio"], rows)
    }
}
