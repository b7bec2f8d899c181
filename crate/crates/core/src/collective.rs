//! Reduction of an atomic ensemble to the single collective mode that the
//! cavity measures.
//!
//! With equilibrium positions z̄_i, the cavity couples to
//! `Z = N_eff⁻¹ Σ sin(2 k_p z̄_i) δz_i`, which behaves as the centre of mass of
//! `N_eff = Σ sin²(2 k_p z̄_i)` atoms placed at points of maximum position
//! sensitivity.

use std::io::{Read, Write};
use std::path::Path;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::output::fmt_f64;
use crate::params::PhysicalParams;

/// Granularity above which the coarse-grained (non-granular) results are not
/// considered validated.
pub const VALIDATED_EPSILON_MAX: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub enum Positions {
    /// Continuum limit: sin² and g² averages are both 1/2.
    Uniform,
    /// Equilibrium positions along the cavity axis (m), one per atom.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicEnsemble {
    pub n_atoms: u64,
    pub positions: Positions,
}

impl AtomicEnsemble {
    pub fn uniform(n_atoms: u64) -> Self {
        Self {
            n_atoms,
            positions: Positions::Uniform,
        }
    }

    pub fn explicit(positions: Vec<f64>) -> Self {
        Self {
            n_atoms: positions.len() as u64,
            positions: Positions::Explicit(positions),
        }
    }

    /// Equal atom counts on `n_sites` consecutive trap antinodes (spacing
    /// λ_t/2), centred on the cavity midpoint and shifted by `offset` relative
    /// to the probe standing wave. Leftover atoms go to the first sites.
    pub fn lattice(n_atoms: u64, n_sites: usize, offset: f64, params: &PhysicalParams) -> Self {
        assert!(n_sites > 0, "lattice needs at least one site");
        let spacing = params.lambda_t / 2.0;
        let centre = (n_sites as f64 - 1.0) / 2.0;
        let per_site = n_atoms / n_sites as u64;
        let extra = (n_atoms % n_sites as u64) as usize;
        let mut positions = Vec::with_capacity(n_atoms as usize);
        for site in 0..n_sites {
            let z = (site as f64 - centre) * spacing + offset;
            let count = per_site + u64::from(site < extra);
            positions.extend(std::iter::repeat_n(z, count as usize));
        }
        Self::explicit(positions)
    }

    /// `n` atoms on a regular grid of cell centres over `[z_min, z_max)`.
    pub fn grid(n: usize, z_min: f64, z_max: f64) -> Self {
        let step = (z_max - z_min) / n as f64;
        Self::explicit((0..n).map(|i| z_min + (i as f64 + 0.5) * step).collect())
    }

    pub fn validate(&self, params: &PhysicalParams) -> Result<()> {
        if let Positions::Explicit(z) = &self.positions {
            let mut bad = Vec::new();
            if z.len() as u64 != self.n_atoms {
                bad.push(format!(
                    "explicit positions list has {} entries for {} atoms",
                    z.len(),
                    self.n_atoms
                ));
            }
            let half = params.cavity_length / 2.0;
            if let Some(outside) = z.iter().find(|v| !(v.abs() < half)) {
                bad.push(format!("position {outside} m lies outside the cavity (|z| < {half} m)"));
            }
            if !bad.is_empty() {
                return Err(Error::Validation(bad));
            }
        }
        Ok(())
    }

    pub fn translated(&self, dz: f64) -> Self {
        match &self.positions {
            Positions::Uniform => self.clone(),
            Positions::Explicit(z) => Self::explicit(z.iter().map(|v| v + dz).collect()),
        }
    }

    /// Writes `index,z_m` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let Positions::Explicit(z) = &self.positions else {
            return Err(Error::Config("uniform ensembles have no explicit positions to export".into()));
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "z_m"])?;
        for (i, v) in z.iter().enumerate() {
            w.write_record([i.to_string(), fmt_f64(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut z = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let index: usize = parse_field(&rec, 0, "index", row)?;
            if index != row {
                return Err(Error::Parse {
                    key: "index".into(),
                    line: row + 2,
                    message: format!("expected index {row}, found {index}"),
                });
            }
            z.push(parse_field(&rec, 1, "z_m", row)?);
        }
        Ok(Self::explicit(z))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, key: &str, row: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(col).ok_or_else(|| Error::Parse {
        key: key.into(),
        line: row + 2,
        message: "missing column".into(),
    })?;
    raw.trim().parse().map_err(|e: T::Err| Error::Parse {
        key: key.into(),
        line: row + 2,
        message: format!("`{raw}`: {e}"),
    })
}

/// `N_eff = Σ sin²(2 k_p z̄_i)`; exactly N/2 for [`Positions::Uniform`].
pub fn effective_atom_number(ensemble: &AtomicEnsemble, params: &PhysicalParams) -> f64 {
    match &ensemble.positions {
        Positions::Uniform => ensemble.n_atoms as f64 / 2.0,
        Positions::Explicit(z) => {
            let two_k = 2.0 * params.k_p();
            pairwise_sum(z, |zi| (two_k * zi).sin().powi(2))
        }
    }
}

/// Cavity frequency shift `Δ_N = Σ g²(z̄_i)/Δ_ca` with `g(z) = g0 sin(k_p z)`.
pub fn cavity_shift(ensemble: &AtomicEnsemble, params: &PhysicalParams) -> f64 {
    let per_atom = params.g0 * params.g0 / params.delta_ca;
    match &ensemble.positions {
        Positions::Uniform => ensemble.n_atoms as f64 * per_atom / 2.0,
        Positions::Explicit(z) => {
            let k = params.k_p();
            per_atom * pairwise_sum(z, |zi| (k * zi).sin().powi(2))
        }
    }
}

/// Atom number implied by a measured shift, `N = 2 Δ_ca Δ_N / g0²`, assuming
/// a uniform distribution.
pub fn atoms_from_shift(delta_n: f64, params: &PhysicalParams) -> Result<f64> {
    if delta_n != 0.0 && delta_n.signum() != params.delta_ca.signum() {
        return Err(Error::Domain(format!(
            "cavity shift {delta_n:e} rad/s has the opposite sign to delta_ca"
        )));
    }
    Ok(2.0 * params.delta_ca * delta_n / (params.g0 * params.g0))
}

/// Granularity `ε = N_eff |f0| Z_ho/(ħκ)`; zero for a decoupled mode.
pub fn granularity(ensemble: &AtomicEnsemble, params: &PhysicalParams) -> f64 {
    CollectiveMode::new(ensemble, params).epsilon
}

/// Static collective displacement `ΔZ = ħ k g0² n̄/(m ω_z² Δ_ca)` (m), signed
/// like Δ_ca. The wavevector k is taken to be the probe wavevector k_p.
pub fn static_displacement(nbar: f64, params: &PhysicalParams) -> f64 {
    params.f0() * nbar / (params.mass * params.omega_z * params.omega_z)
}

/// `ω_c′ − ω_c = Δ_N − N_eff f0 ΔZ/ħ` at mean photon number `nbar`.
pub fn shifted_resonance(ensemble: &AtomicEnsemble, nbar: f64, params: &PhysicalParams) -> f64 {
    CollectiveMode::new(ensemble, params).resonance_shift(nbar)
}

/// Mode-level quantities for one ensemble at a fixed drive.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveMode {
    pub n_atoms: f64,
    pub n_eff: f64,
    /// Δ_N (rad/s).
    pub delta_n: f64,
    /// Z_ho = √(ħ/(2 m ω_z N_eff)) (m); infinite for a decoupled mode.
    pub z_ho: f64,
    /// P_ho = ħ/(2 Z_ho) (kg·m/s).
    pub p_ho: f64,
    pub epsilon: f64,
    /// Resonance pull per intracavity photon, N_eff f0²/(ħ m ω_z²) (rad/s). Always ≥ 0.
    pub photon_shift: f64,
    /// Mean photon number at which `omega_c_prime` is evaluated.
    pub nbar: f64,
    /// ω_c′ − ω_c at `nbar` (rad/s).
    pub omega_c_prime: f64,
}

impl CollectiveMode {
    pub fn new(ensemble: &AtomicEnsemble, params: &PhysicalParams) -> Self {
        Self::from_totals(
            ensemble.n_atoms as f64,
            effective_atom_number(ensemble, params),
            cavity_shift(ensemble, params),
            params,
        )
    }

    /// Builds the mode from aggregate sums, which is how time-dependent atom
    /// numbers are handled.
    pub fn from_totals(n_atoms: f64, n_eff: f64, delta_n: f64, params: &PhysicalParams) -> Self {
        let f0 = params.f0().abs();
        let (z_ho, p_ho, epsilon) = if n_eff > 0.0 {
            let z_ho = (HBAR / (2.0 * params.mass * params.omega_z * n_eff)).sqrt();
            (z_ho, HBAR / (2.0 * z_ho), n_eff * f0 * z_ho / (HBAR * params.kappa))
        } else {
            (f64::INFINITY, 0.0, 0.0)
        };
        let photon_shift = n_eff * f0 * f0 / (HBAR * params.mass * params.omega_z * params.omega_z);
        Self {
            n_atoms,
            n_eff,
            delta_n,
            z_ho,
            p_ho,
            epsilon,
            photon_shift,
            nbar: 0.0,
            omega_c_prime: delta_n,
        }
    }

    /// Same per-atom distribution rescaled to `n_atoms`.
    pub fn rescaled(&self, n_atoms: f64, params: &PhysicalParams) -> Self {
        let scale = if self.n_atoms > 0.0 { n_atoms / self.n_atoms } else { 0.0 };
        let mut mode = Self::from_totals(n_atoms, self.n_eff * scale, self.delta_n * scale, params);
        mode.nbar = self.nbar;
        mode.omega_c_prime = mode.resonance_shift(self.nbar);
        mode
    }

    /// The mode with `omega_c_prime` evaluated at `nbar`.
    pub fn at_photon_number(mut self, nbar: f64) -> Self {
        self.nbar = nbar;
        self.omega_c_prime = self.resonance_shift(nbar);
        self
    }

    /// ω_c′ − ω_c at mean photon number `nbar`.
    pub fn resonance_shift(&self, nbar: f64) -> f64 {
        self.delta_n - self.photon_shift * nbar
    }

    pub fn is_decoupled(&self) -> bool {
        self.n_eff == 0.0
    }

    pub fn is_non_granular(&self) -> bool {
        self.epsilon <= VALIDATED_EPSILON_MAX
    }
}

/// Order-independent pairwise summation of `f` over `xs`.
pub(crate) fn pairwise_sum<F: Fn(f64) -> f64 + Copy>(xs: &[f64], f: F) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().map(|&x| f(x)).sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a, f) + pairwise_sum(b, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> PhysicalParams {
        PhysicalParams::default()
    }

    #[test]
    fn uniform_neff_is_half() {
        assert_eq!(effective_atom_number(&AtomicEnsemble::uniform(100_000), &params()), 5e4);
    }

    #[test]
    fn maximal_and_null_sensitivity_positions() {
        let p = params();
        let k = p.k_p();
        // 2 k z = π/2 + m π
        let best: Vec<f64> = (0..10).map(|m| (PI / 2.0 + m as f64 * PI) / (2.0 * k)).collect();
        let worst: Vec<f64> = (0..10).map(|m| m as f64 * PI / (2.0 * k)).collect();
        let n_best = effective_atom_number(&AtomicEnsemble::explicit(best), &p);
        let n_worst = effective_atom_number(&AtomicEnsemble::explicit(worst), &p);
        assert!((n_best - 10.0).abs() < 1e-9);
        assert!(n_worst.abs() < 1e-9);
    }

    #[test]
    fn cavity_shift_examples() {
        let p = params();
        let shift = cavity_shift(&AtomicEnsemble::uniform(100_000), &p);
        assert!((shift / (2.0 * PI) - 103.68e6).abs() < 1e3);
        assert_eq!(cavity_shift(&AtomicEnsemble::uniform(0), &p), 0.0);
        let q = PhysicalParams {
            delta_ca: 2.0 * p.delta_ca,
            ..p.clone()
        };
        let half = cavity_shift(&AtomicEnsemble::uniform(100_000), &q);
        assert!((half / shift - 0.5).abs() < 1e-15);
    }

    #[test]
    fn atoms_from_shift_inverts_cavity_shift() {
        let p = params();
        let shift = cavity_shift(&AtomicEnsemble::uniform(123_456), &p);
        let n = atoms_from_shift(shift, &p).unwrap();
        assert!((n - 123_456.0).abs() < 1e-8);
        assert_eq!(atoms_from_shift(0.0, &p).unwrap(), 0.0);
        let n = atoms_from_shift(2.0 * PI * 104e6, &p).unwrap();
        assert!((n / 1e5 - 1.0).abs() < 0.01, "{n}");
    }

    #[test]
    fn atoms_from_shift_rejects_sign_mismatch() {
        assert!(matches!(atoms_from_shift(-1e6, &params()), Err(Error::Domain(_))));
    }

    #[test]
    fn decoupled_mode_has_zero_granularity() {
        let p = params();
        let k = p.k_p();
        let nodes = AtomicEnsemble::explicit(vec![0.0, PI / (2.0 * k) * 2.0]);
        let mode = CollectiveMode::new(&nodes, &p);
        assert!(mode.n_eff < 1e-20);
        let mode = CollectiveMode::from_totals(2.0, 0.0, 0.0, &p);
        assert!(mode.is_decoupled());
        assert_eq!(mode.epsilon, 0.0);
        assert_eq!(granularity(&AtomicEnsemble::uniform(0), &p), 0.0);
    }

    #[test]
    fn granularity_scales_as_sqrt_neff() {
        let p = params();
        let a = granularity(&AtomicEnsemble::uniform(10_000), &p);
        let b = granularity(&AtomicEnsemble::uniform(40_000), &p);
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn static_displacement_is_linear_and_signed() {
        let p = params();
        assert_eq!(static_displacement(0.0, &p), 0.0);
        let one = static_displacement(1.3, &p);
        assert!((static_displacement(2.6, &p) - 2.0 * one).abs() <= 1e-24);
        let q = PhysicalParams {
            delta_ca: -p.delta_ca,
            ..p.clone()
        };
        assert_eq!(static_displacement(1.3, &q), -one);
    }

    #[test]
    fn shifted_resonance_limits() {
        let p = params();
        let ens = AtomicEnsemble::uniform(100_000);
        assert_eq!(shifted_resonance(&ens, 0.0, &p), cavity_shift(&ens, &p));
        assert_eq!(shifted_resonance(&AtomicEnsemble::uniform(0), 1.9, &p), 0.0);
        let mode = CollectiveMode::new(&ens, &p);
        let expected = mode.delta_n - mode.n_eff * p.f0() * static_displacement(1.9, &p) / HBAR;
        assert!((shifted_resonance(&ens, 1.9, &p) - expected).abs() < 1e-6 * mode.delta_n.abs());
    }

    #[test]
    fn rescaling_matches_direct_construction() {
        let p = params();
        let big = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &p);
        let small = big.rescaled(25_000.0, &p);
        let direct = CollectiveMode::new(&AtomicEnsemble::uniform(25_000), &p);
        assert!((small.epsilon - direct.epsilon).abs() < 1e-14);
        assert!((small.delta_n - direct.delta_n).abs() < 1e-6);
    }

    #[test]
    fn lattice_places_equal_counts_inside_cavity() {
        let p = params();
        let ens = AtomicEnsemble::lattice(1003, 300, 0.0, &p);
        assert_eq!(ens.n_atoms, 1003);
        ens.validate(&p).unwrap();
        let n_eff = effective_atom_number(&ens, &p);
        assert!((n_eff / 1003.0 - 0.5).abs() < 0.05, "{n_eff}");
    }

    #[test]
    fn positions_outside_cavity_fail_validation() {
        let p = params();
        let ens = AtomicEnsemble::explicit(vec![0.0, p.cavity_length]);
        assert!(matches!(ens.validate(&p), Err(Error::Validation(_))));
        let bad_len = AtomicEnsemble {
            n_atoms: 3,
            positions: Positions::Explicit(vec![0.0]),
        };
        assert!(bad_len.validate(&p).is_err());
    }
}
