//! Quantum-measurement backaction on a collective mode of a trapped atomic
//! ensemble inside a driven Fabry-Perot cavity.
//!
//! The crate is organized by layer:
//!
//! - [`params`]: physical constants of the atoms-cavity system, config parsing
//!   and derived cavity quantities.
//! - [`collective`]: reduction of an ensemble to the single collective mode
//!   that couples to the cavity (`N_eff`, `Δ_N`, granularity `ε`, `ΔZ`).
//! - [`spectra`]: closed-form photon-number noise spectra, heating rates,
//!   occupation dynamics, bistable steady states and jitter-convolved
//!   lineshapes.
//! - [`oracle`]: independent numerical checks (stochastic trajectory
//!   ensembles, quadrature Fourier transforms, mean-field ODE integration).
//! - [`experiment`]: forward simulation of the bolometric protocol and the
//!   inverse analysis that turns transmission traces into heating curves.
//! - [`cli`]: orchestration behind the `backaction-sim` binary.
//!
//! Every capability has a runnable program under `examples/`:
//!
//! ```bash
//! cargo run --release -p backaction-sim --example noise_spectrum
//! ```
//!
//! Internal units are SI with angular frequencies in rad/s; configuration
//! files use ordinary Hz.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod collective;
pub mod config;
pub mod constants;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod oracle;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod spectra;

pub use collective::{AtomicEnsemble, CollectiveMode, Positions};
pub use error::{Error, Result};
pub use params::{DerivedParams, PhysicalParams};
