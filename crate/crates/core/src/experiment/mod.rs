//! The bolometric protocol: a forward model of atom loss and cavity
//! transmission during the resonance crossing, and the inverse analysis that
//! turns a transmission trace back into heating rates.

mod analysis;
mod control;
mod curve;
mod forward;
mod technical;

use std::io::{Read, Write};
use std::path::Path;

use crate::collective::CollectiveMode;
use crate::config::ConfigDoc;
use crate::constants::{angular, hertz};
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_csv, CsvTable};
use crate::params::PhysicalParams;

pub use analysis::{analyze_trace, HeatingAnalysis, HeatingRecord, WindowStatus};
pub use control::{extra_loss_for_ratio, offresonance_control, ControlEstimate, OffResonanceConfig};
pub use curve::{heating_curve, heating_curve_table, HeatingPoint};
pub use forward::forward_simulate;
pub use technical::{rin_for_fraction, technical_noise_scan, TechnicalNoiseConfig, TechnicalNoiseScan};

/// How the probe frequency is held during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeSchedule {
    /// Fixed `delta_pc` from the bare cavity; the atoms sweep the resonance.
    Fixed,
    /// Detuning Δ from the atoms-shifted resonance held fixed, with n̄ equal
    /// to `nbar_max`.
    Locked { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub n_initial: f64,
    /// Probe detuning from the bare cavity (rad/s).
    pub delta_pc: f64,
    /// Resonant intracavity photon number.
    pub nbar_max: f64,
    /// Photon-count bin width (s).
    pub bin_time: f64,
    /// Analysis window (s).
    pub window: f64,
    /// First-order lag between heating and evaporative loss (s).
    pub equilibration_tau: f64,
    pub duration: f64,
    pub seed: u64,
    /// Phenomenological extra per-atom loss (1/s).
    pub extra_loss: f64,
    /// Repetitions summed into each bin.
    pub n_averaged: u32,
    pub probe: ProbeSchedule,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n_initial: 1e5,
            delta_pc: angular(40e6),
            nbar_max: 4.0,
            bin_time: 1e-3,
            window: 12e-3,
            equilibration_tau: 3e-3,
            duration: 1.4,
            seed: 0,
            extra_loss: 0.0,
            n_averaged: 30,
            probe: ProbeSchedule::Fixed,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (name, v) in [
            ("bin_time", self.bin_time),
            ("window", self.window),
            ("equilibration_tau", self.equilibration_tau),
            ("duration", self.duration),
        ] {
            if !(v > 0.0) {
                bad.push(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.window >= self.bin_time) {
            bad.push("window must be at least one bin".into());
        }
        if !(self.duration >= self.window) {
            bad.push("duration must be at least one window".into());
        }
        if !(self.n_initial > 0.0) {
            bad.push(format!("n_initial must be positive, got {}", self.n_initial));
        }
        if !(self.nbar_max >= 0.0) {
            bad.push(format!("nbar_max must be non-negative, got {}", self.nbar_max));
        }
        if !(self.extra_loss >= 0.0) {
            bad.push(format!("extra_loss must be non-negative, got {}", self.extra_loss));
        }
        if self.n_averaged == 0 {
            bad.push("n_averaged must be at least 1".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    pub fn n_bins(&self) -> usize {
        (self.duration / self.bin_time).round() as usize
    }

    pub fn bins_per_window(&self) -> usize {
        ((self.window / self.bin_time).round() as usize).max(1)
    }

    /// Takes the protocol keys out of `doc`.
    pub fn from_doc(doc: &mut ConfigDoc) -> Result<Self> {
        let mut c = Self::default();
        if let Some(v) = doc.take_f64("n_initial")? {
            c.n_initial = v;
        }
        if let Some(v) = doc.take_f64("delta_pc_hz")? {
            c.delta_pc = angular(v);
        }
        for (key, slot) in [
            ("nbar_max", &mut c.nbar_max),
            ("bin_time_s", &mut c.bin_time),
            ("window_s", &mut c.window),
            ("equilibration_tau_s", &mut c.equilibration_tau),
            ("duration_s", &mut c.duration),
            ("extra_loss", &mut c.extra_loss),
        ] {
            if let Some(v) = doc.take_f64(key)? {
                *slot = v;
            }
        }
        if let Some(v) = doc.take_u64("seed")? {
            c.seed = v;
        }
        if let Some(v) = doc.take_u64("n_averaged")? {
            c.n_averaged = u32::try_from(v).map_err(|_| Error::Config(format!("n_averaged {v} too large")))?;
        }
        if let Some(v) = doc.take_f64("probe_lock_delta_hz")? {
            c.probe = ProbeSchedule::Locked { delta: angular(v) };
        }
        c.validate()?;
        Ok(c)
    }

    /// Config-file keys and values, as written to trace headers.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut e = vec![
            ("n_initial".to_string(), fmt_f64(self.n_initial)),
            ("delta_pc_hz".to_string(), fmt_f64(hertz(self.delta_pc))),
            ("nbar_max".to_string(), fmt_f64(self.nbar_max)),
            ("bin_time_s".to_string(), fmt_f64(self.bin_time)),
            ("window_s".to_string(), fmt_f64(self.window)),
            ("equilibration_tau_s".to_string(), fmt_f64(self.equilibration_tau)),
            ("duration_s".to_string(), fmt_f64(self.duration)),
            ("seed".to_string(), self.seed.to_string()),
            ("extra_loss".to_string(), fmt_f64(self.extra_loss)),
            ("n_averaged".to_string(), self.n_averaged.to_string()),
        ];
        if let ProbeSchedule::Locked { delta } = self.probe {
            e.push(("probe_lock_delta_hz".to_string(), fmt_f64(hertz(delta))));
        }
        e
    }
}

/// Quantities the forward model knows but a real measurement would not.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Instantaneous per-atom loss rate at bin centers (1/s).
    pub loss_rate: Vec<f64>,
    /// Jitter-averaged R/R_fs at bin centers, before the evaporation lag.
    pub ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionTrace {
    /// Bin centers (s).
    pub times: Vec<f64>,
    /// Detected photons per bin, summed over `n_averaged` repetitions.
    pub detected_counts: Vec<u64>,
    /// Bin-averaged intracavity photon number.
    pub true_nbar: Vec<f64>,
    /// Atom number at bin centers.
    pub true_n: Vec<f64>,
    pub config: ProtocolConfig,
    /// Present for simulated traces only; not serialized.
    pub truth: Option<GroundTruth>,
}

impl TransmissionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Photon number implied by the counts of bin `i` and its Poisson error.
    pub fn observed_nbar(&self, i: usize, params: &PhysicalParams) -> (f64, f64) {
        let per_photon = self.config.n_averaged as f64 * params.eta_det * 2.0 * params.kappa * self.config.bin_time;
        let c = self.detected_counts[i] as f64;
        (c / per_photon, c.sqrt() / per_photon)
    }

    /// `t_s,counts,true_nbar,true_N` after `# key=value` provenance lines.
    pub fn write_csv<W: Write>(&self, out: W, extra_provenance: &[(String, String)]) -> Result<()> {
        let mut prov = extra_provenance.to_vec();
        prov.extend(self.config.entries());
        let rows = (0..self.len()).map(|i| {
            vec![
                fmt_f64(self.times[i]),
                self.detected_counts[i].to_string(),
                fmt_f64(self.true_nbar[i]),
                fmt_f64(self.true_n[i]),
            ]
        });
        write_csv(out, &prov, &["t_s", "counts", "true_nbar", "true_N"], rows)
    }

    /// Reads a trace; protocol settings come from the provenance header.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let table = CsvTable::read(input)?;
        let mut text = String::new();
        let defaults = ProtocolConfig::default().entries();
        for (key, value) in &table.provenance {
            let known = defaults.iter().any(|(k, _)| k == key) || key == "probe_lock_delta_hz";
            if known {
                text.push_str(&format!("{key} = {value}\n"));
            }
        }
        let mut doc = ConfigDoc::parse(&text)?;
        let config = ProtocolConfig::from_doc(&mut doc)?;
        Ok(Self {
            times: table.column("t_s")?,
            detected_counts: table.column("counts")?,
            true_nbar: table.column("true_nbar")?,
            true_n: table.column("true_N")?,
            config,
            truth: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Collective mode of a uniform ensemble of `n_atoms` (possibly fractional).
pub fn uniform_mode(n_atoms: f64, params: &PhysicalParams) -> CollectiveMode {
    let shift_per_atom = params.g0 * params.g0 / (2.0 * params.delta_ca);
    CollectiveMode::from_totals(n_atoms, n_atoms / 2.0, n_atoms * shift_per_atom, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_validation_lists_problems() {
        let c = ProtocolConfig {
            window: 1e-4,
            duration: -1.0,
            ..Default::default()
        };
        match c.validate() {
            Err(Error::Validation(v)) => assert!(v.len() >= 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
        assert!(ProtocolConfig::default().validate().is_ok());
    }

    #[test]
    fn entries_round_trip_through_config() {
        let c = ProtocolConfig {
            seed: 99,
            probe: ProbeSchedule::Locked { delta: 1.234e8 },
            ..Default::default()
        };
        let text: String = c.entries().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let mut doc = ConfigDoc::parse(&text).unwrap();
        let back = ProtocolConfig::from_doc(&mut doc).unwrap();
        doc.ensure_consumed().unwrap();
        assert_eq!(back.seed, 99);
        assert_eq!(back.delta_pc, c.delta_pc);
        match back.probe {
            ProbeSchedule::Locked { delta } => assert!((delta / 1.234e8 - 1.0).abs() < 1e-15),
            _ => panic!(),
        }
    }

    #[test]
    fn uniform_mode_matches_ensemble() {
        let p = PhysicalParams::default();
        let a = uniform_mode(1e5, &p);
        let b = CollectiveMode::new(&crate::collective::AtomicEnsemble::uniform(100_000), &p);
        assert!((a.delta_n / b.delta_n - 1.0).abs() < 1e-15);
        assert_eq!(a.n_eff, b.n_eff);
    }
}
