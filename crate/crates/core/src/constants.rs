//! Physical constants (SI).

use std::f64::consts::PI;

/// Reduced Planck constant ħ (J·s). CODATA 2018, exact via h.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K). CODATA 2018, exact.
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum (m/s). Exact.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Unified atomic mass unit (kg). CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Rb-87 atomic mass in u. AME2016.
pub const RB87_MASS_U: f64 = 86.909_180_531;

/// Rb-87 atomic mass (kg).
pub const RB87_MASS: f64 = RB87_MASS_U * ATOMIC_MASS_UNIT;

pub const TWO_PI: f64 = 2.0 * PI;

/// Hz → rad/s.
#[inline]
pub fn angular(hz: f64) -> f64 {
    TWO_PI * hz
}

/// rad/s → Hz.
#[inline]
pub fn hertz(rad_per_s: f64) -> f64 {
    rad_per_s / TWO_PI
}

/// μK → J.
#[inline]
pub fn microkelvin_to_joule(uk: f64) -> f64 {
    uk * 1e-6 * K_B
}
