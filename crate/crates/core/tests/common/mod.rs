//! Reference values computed by hand from the default parameter set.

#![allow(dead_code)]

use backaction_sim::{AtomicEnsemble, CollectiveMode, PhysicalParams};

pub const COOPERATIVITY: f64 = 52.3636;
/// Mirror-limited half-linewidth, Hz.
pub const KAPPA_MIRRORS_HZ: f64 = 651_755.9;
/// Dipole-force amplitude per photon, N.
pub const F0: f64 = 1.106_792_68e-23;
/// Collective-mode oscillator length at N = 1e5, m.
pub const Z_HO: f64 = 1.664_05e-10;
pub const EPSILON: f64 = 0.210_572_9;
/// Static displacement at n̄ = 1.9, m.
pub const DELTA_Z_1_9: f64 = 2.0924e-9;
/// Free-space heating per atom per photon, W.
pub const R_FS_PER_PHOTON: f64 = 1.954_493_398_004_986_6e-30;
/// Peak S_nn/n̄ = 2/κ, s.
pub const TWO_OVER_KAPPA: f64 = 4.822_877_1e-7;
/// Unjittered heating ratio of the off-resonance control.
pub const CONTROL_THEORY: f64 = 1.014_282;

pub fn defaults() -> (PhysicalParams, CollectiveMode) {
    let p = PhysicalParams::default();
    let mode = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &p);
    (p, mode)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
