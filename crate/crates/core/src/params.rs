//! Physical constants of the atoms-cavity system and derived quantities.

use crate::config::ConfigDoc;
use crate::constants::{angular, hertz, microkelvin_to_joule, C_LIGHT, HBAR, K_B, RB87_MASS, TWO_PI};
use crate::error::{Error, Result};

/// Far-detuning cut: configs must satisfy `|Δ_ca| > FAR_DETUNING_FACTOR · g0`.
pub const FAR_DETUNING_FACTOR: f64 = 100.0;

/// Measured and configured constants. Frequencies are angular (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Single-atom coupling g0.
    pub g0: f64,
    /// Cavity field half-linewidth κ.
    pub kappa: f64,
    /// Atomic half-linewidth Γ.
    pub gamma: f64,
    /// Axial trap frequency ω_z.
    pub omega_z: f64,
    /// Atom-cavity detuning Δ_ca = ω_c − ω_a (signed).
    pub delta_ca: f64,
    /// Probe wavelength (m).
    pub lambda_p: f64,
    /// Trap wavelength (m).
    pub lambda_t: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Trap depth U (J).
    pub trap_depth: f64,
    /// Ensemble temperature (K).
    pub temperature: f64,
    /// Quantum efficiency for detecting intracavity photons.
    pub eta_det: f64,
    /// RMS probe-detuning jitter σ (rad/s).
    pub sigma_jitter: f64,
    /// Background per-atom loss rate (1/s).
    pub gamma_bg: f64,
    pub mirror_loss_ppm: f64,
    pub mirror_trans_ppm: f64,
    /// Mirror separation (m).
    pub cavity_length: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            g0: angular(14.4e6),
            kappa: angular(0.66e6),
            gamma: angular(3.0e6),
            omega_z: angular(42e3),
            delta_ca: angular(100e9),
            lambda_p: 780e-9,
            lambda_t: 850e-9,
            mass: RB87_MASS,
            trap_depth: microkelvin_to_joule(6.6),
            temperature: 0.8e-6,
            eta_det: 0.040,
            sigma_jitter: angular(1.1e6),
            gamma_bg: 0.9,
            mirror_loss_ppm: 3.8,
            mirror_trans_ppm: 1.5,
            cavity_length: 194e-6,
        }
    }
}

/// Quantities computed from [`PhysicalParams`]; recomputed on demand, never cached.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    /// Single-atom cooperativity g0²/(2κΓ).
    pub cooperativity: f64,
    /// κ reconstructed from mirror losses and the free spectral range (rad/s).
    pub kappa_from_mirrors: f64,
    /// Free spectral range c/(2L) (Hz).
    pub free_spectral_range: f64,
    pub finesse: f64,
    /// Probe wavevector (1/m).
    pub k_p: f64,
    /// Trap wavevector (1/m).
    pub k_t: f64,
    /// Single-photon dipole force scale ħ k_p g0²/Δ_ca (N); carries the sign of Δ_ca.
    pub f0: f64,
}

impl PhysicalParams {
    /// Parses a `key = value` document; unspecified keys keep their defaults.
    pub fn load_config(text: &str) -> Result<Self> {
        let mut doc = ConfigDoc::parse(text)?;
        let params = Self::from_doc(&mut doc)?;
        doc.ensure_consumed()?;
        Ok(params)
    }

    /// Takes the parameter keys out of `doc`, leaving any others in place.
    pub fn from_doc(doc: &mut ConfigDoc) -> Result<Self> {
        let mut p = Self::default();
        let hz = |doc: &mut ConfigDoc, key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = doc.take_f64(key)? {
                *slot = angular(v);
            }
            Ok(())
        };
        let raw = |doc: &mut ConfigDoc, key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = doc.take_f64(key)? {
                *slot = v;
            }
            Ok(())
        };
        hz(doc, "g0_hz", &mut p.g0)?;
        hz(doc, "kappa_hz", &mut p.kappa)?;
        hz(doc, "gamma_hz", &mut p.gamma)?;
        hz(doc, "omega_z_hz", &mut p.omega_z)?;
        hz(doc, "delta_ca_hz", &mut p.delta_ca)?;
        hz(doc, "sigma_jitter_hz", &mut p.sigma_jitter)?;
        raw(doc, "lambda_p_m", &mut p.lambda_p)?;
        raw(doc, "lambda_t_m", &mut p.lambda_t)?;
        raw(doc, "mass_kg", &mut p.mass)?;
        raw(doc, "cavity_length_m", &mut p.cavity_length)?;
        raw(doc, "eta_det", &mut p.eta_det)?;
        raw(doc, "gamma_bg", &mut p.gamma_bg)?;
        raw(doc, "mirror_loss_ppm", &mut p.mirror_loss_ppm)?;
        raw(doc, "mirror_trans_ppm", &mut p.mirror_trans_ppm)?;
        if let Some(v) = doc.take_f64("trap_depth_uk")? {
            p.trap_depth = microkelvin_to_joule(v);
        }
        if let Some(v) = doc.take_f64("temperature_uk")? {
            p.temperature = v * 1e-6;
        }
        p.validate()?;
        Ok(p)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let positive = [
            ("g0", self.g0),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("omega_z", self.omega_z),
            ("lambda_p", self.lambda_p),
            ("lambda_t", self.lambda_t),
            ("mass", self.mass),
            ("trap_depth", self.trap_depth),
            ("temperature", self.temperature),
            ("cavity_length", self.cavity_length),
            ("mirror_loss_ppm", self.mirror_loss_ppm),
            ("mirror_trans_ppm", self.mirror_trans_ppm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bad.push(format!("{name} must be strictly positive (got {v})"));
            }
        }
        for (name, v) in [("sigma_jitter", self.sigma_jitter), ("gamma_bg", self.gamma_bg)] {
            if !(v >= 0.0 && v.is_finite()) {
                bad.push(format!("{name} must be non-negative (got {v})"));
            }
        }
        if !(self.eta_det > 0.0 && self.eta_det <= 1.0) {
            bad.push(format!("eta_det must lie in (0, 1] (got {})", self.eta_det));
        }
        if !(self.delta_ca.abs() > FAR_DETUNING_FACTOR * self.g0) {
            bad.push(format!(
                "|delta_ca| = 2pi x {:.4e} Hz violates the far-detuned cut {} x g0",
                hertz(self.delta_ca.abs()),
                FAR_DETUNING_FACTOR
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    pub fn cooperativity(&self) -> f64 {
        self.g0 * self.g0 / (2.0 * self.kappa * self.gamma)
    }

    pub fn k_p(&self) -> f64 {
        TWO_PI / self.lambda_p
    }

    pub fn k_t(&self) -> f64 {
        TWO_PI / self.lambda_t
    }

    /// Signed single-photon force ħ k_p g0²/Δ_ca.
    pub fn f0(&self) -> f64 {
        HBAR * self.k_p() * self.g0 * self.g0 / self.delta_ca
    }

    pub fn derive(&self) -> DerivedParams {
        let round_trip_loss = 2.0 * (self.mirror_loss_ppm + self.mirror_trans_ppm) * 1e-6;
        let finesse = TWO_PI / round_trip_loss;
        let fsr = C_LIGHT / (2.0 * self.cavity_length);
        DerivedParams {
            cooperativity: self.cooperativity(),
            kappa_from_mirrors: angular(fsr / (2.0 * finesse)),
            free_spectral_range: fsr,
            finesse,
            k_p: self.k_p(),
            k_t: self.k_t(),
            f0: self.f0(),
        }
    }

    /// Parameters in config units (Hz, m, μK), as `(key, value, unit)`, in a
    /// form [`PhysicalParams::load_config`] accepts back.
    pub fn config_entries(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("g0_hz", hertz(self.g0), "Hz"),
            ("kappa_hz", hertz(self.kappa), "Hz"),
            ("gamma_hz", hertz(self.gamma), "Hz"),
            ("omega_z_hz", hertz(self.omega_z), "Hz"),
            ("delta_ca_hz", hertz(self.delta_ca), "Hz"),
            ("sigma_jitter_hz", hertz(self.sigma_jitter), "Hz"),
            ("lambda_p_m", self.lambda_p, "m"),
            ("lambda_t_m", self.lambda_t, "m"),
            ("mass_kg", self.mass, "kg"),
            ("cavity_length_m", self.cavity_length, "m"),
            ("trap_depth_uk", self.trap_depth / K_B * 1e6, "uK"),
            ("temperature_uk", self.temperature * 1e6, "uK"),
            ("eta_det", self.eta_det, "1"),
            ("gamma_bg", self.gamma_bg, "1/s"),
            ("mirror_loss_ppm", self.mirror_loss_ppm, "ppm"),
            ("mirror_trans_ppm", self.mirror_trans_ppm, "ppm"),
        ]
    }

    /// Config entries followed by the derived quantities.
    pub fn dump_rows(&self) -> Vec<(String, f64, String)> {
        let d = self.derive();
        let mut rows: Vec<(String, f64, String)> = self
            .config_entries()
            .into_iter()
            .map(|(k, v, u)| (k.to_string(), v, u.to_string()))
            .collect();
        rows.extend([
            ("cooperativity_C".to_string(), d.cooperativity, "1".to_string()),
            ("kappa_from_mirrors_hz".into(), hertz(d.kappa_from_mirrors), "Hz".into()),
            ("free_spectral_range_hz".into(), d.free_spectral_range, "Hz".into()),
            ("finesse".into(), d.finesse, "1".into()),
            ("k_p".into(), d.k_p, "1/m".into()),
            ("k_t".into(), d.k_t, "1/m".into()),
            ("f0".into(), d.f0, "N".into()),
        ]);
        rows
    }
}

/// Free-function form of [`PhysicalParams::load_config`].
pub fn load_config(text: &str) -> Result<PhysicalParams> {
    PhysicalParams::load_config(text)
}
