use rand::Rng;
use rand_distr::Poisson;

use super::{uniform_mode, GroundTruth, ProbeSchedule, ProtocolConfig, TransmissionTrace};
use crate::collective::{AtomicEnsemble, CollectiveMode};
use crate::error::{Error, Result};
use crate::oracle::trajectory_rng;
use crate::params::PhysicalParams;
use crate::spectra::{convolved_heating_ratio, freespace_heating, jittered_response, Branch};

/// Integration steps per count bin.
const STEPS_PER_BIN: usize = 4;

struct Response {
    nbar: f64,
    /// Jitter-averaged per-atom heating R_fs + R_c (W).
    heating: f64,
    ratio: f64,
}

struct Model<'a> {
    config: &'a ProtocolConfig,
    params: &'a PhysicalParams,
    base: CollectiveMode,
}

impl Model<'_> {
    fn mode(&self, n_atoms: f64) -> CollectiveMode {
        self.base.rescaled(n_atoms, self.params)
    }

    fn response(&self, n_atoms: f64, t: f64) -> Result<Response> {
        let mode = self.mode(n_atoms);
        let p = self.params;
        let stamp = |e: Error| match e {
            Error::Numeric { message, achieved } => Error::numeric(format!("{message} at t = {t:.6} s"), achieved),
            other => other,
        };
        match self.config.probe {
            ProbeSchedule::Fixed => {
                let delta = self.config.delta_pc - mode.delta_n;
                let r = jittered_response(delta, self.config.nbar_max, &mode, p, p.sigma_jitter, Branch::SweepUp)
                    .map_err(stamp)?;
                Ok(Response {
                    nbar: r.nbar,
                    heating: r.r_total,
                    ratio: r.ratio(),
                })
            }
            ProbeSchedule::Locked { delta } => {
                let nbar = self.config.nbar_max;
                let ratio = convolved_heating_ratio(delta, p.sigma_jitter, &mode, p).map_err(stamp)?;
                Ok(Response {
                    nbar,
                    heating: ratio * freespace_heating(nbar, p),
                    ratio,
                })
            }
        }
    }

    fn loss_rate(&self, lagged_heating: f64) -> f64 {
        self.params.gamma_bg + lagged_heating / self.params.trap_depth + self.config.extra_loss
    }
}

/// Integrates atom loss `dN/dt = −N(γ_bg + R_eq/U + extra)` with
/// `dR_eq/dt = (R − R_eq)/τ`, where R is the jitter-averaged heating at the
/// current detuning, and draws Poisson counts with mean
/// `n_averaged · η · 2κ · n̄ · bin_time` per bin.
///
/// The ensemble fixes the spatial weights; its atom number is replaced by
/// `config.n_initial` and scaled down as atoms are lost.
pub fn forward_simulate(
    config: &ProtocolConfig,
    params: &PhysicalParams,
    ensemble: &AtomicEnsemble,
) -> Result<TransmissionTrace> {
    config.validate()?;
    // a switched-off detector is a legitimate simulation input
    if params.eta_det == 0.0 {
        PhysicalParams { eta_det: 1.0, ..params.clone() }.validate()?;
    } else {
        params.validate()?;
    }
    let base = if ensemble.n_atoms == 0 {
        uniform_mode(config.n_initial, params)
    } else {
        CollectiveMode::new(ensemble, params).rescaled(config.n_initial, params)
    };
    let model = Model { config, params, base };

    let n_bins = config.n_bins();
    let dt = config.bin_time / STEPS_PER_BIN as f64;
    let tau = config.equilibration_tau;
    let mut rng = trajectory_rng(config.seed, 0);

    let mut n = config.n_initial;
    let mut t = 0.0;
    let mut r_now = model.response(n, t)?;
    // start in equilibrium with the initial heating
    let mut r_eq = r_now.heating;

    let mut trace = TransmissionTrace {
        times: Vec::with_capacity(n_bins),
        detected_counts: Vec::with_capacity(n_bins),
        true_nbar: Vec::with_capacity(n_bins),
        true_n: Vec::with_capacity(n_bins),
        config: *config,
        truth: Some(GroundTruth::default()),
    };
    let truth = trace.truth.as_mut().expect("set above");

    for bin in 0..n_bins {
        let mut nbar_sum = 0.0;
        for step in 0..STEPS_PER_BIN {
            if step == STEPS_PER_BIN / 2 {
                trace.true_n.push(n);
                truth.loss_rate.push(model.loss_rate(r_eq));
                truth.ratio.push(r_now.ratio);
            }
            // Heun step on (N, R_eq)
            let dn1 = -n * model.loss_rate(r_eq);
            let dr1 = (r_now.heating - r_eq) / tau;
            let n_pred = (n + dt * dn1).max(0.0);
            let r_pred = r_eq + dt * dr1;
            let r_next = model.response(n_pred, t + dt)?;
            let dn2 = -n_pred * model.loss_rate(r_pred);
            let dr2 = (r_next.heating - r_pred) / tau;
            n = (n + 0.5 * dt * (dn1 + dn2)).max(0.0);
            r_eq += 0.5 * dt * (dr1 + dr2);
            t += dt;
            nbar_sum += 0.5 * (r_now.nbar + r_next.nbar);
            r_now = model.response(n, t)?;
        }
        let nbar = nbar_sum / STEPS_PER_BIN as f64;
        let mean = config.n_averaged as f64 * params.eta_det * 2.0 * params.kappa * nbar * config.bin_time;
        let counts = if mean > 0.0 {
            let dist = Poisson::new(mean).map_err(|e| Error::Domain(format!("count distribution: {e}")))?;
            rng.sample(dist) as u64
        } else {
            0
        };
        trace.times.push((bin as f64 + 0.5) * config.bin_time);
        trace.detected_counts.push(counts);
        trace.true_nbar.push(nbar);
    }
    Ok(trace)
}
