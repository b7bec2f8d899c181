//! Noiseless c-number dynamics of the cavity field β and the collective
//! coordinate (Z, P), integrated with fixed-step RK4.

use std::io::Write;

use crate::collective::{static_displacement, CollectiveMode};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::output::{fmt_f64, write_csv};
use crate::params::PhysicalParams;
use crate::spectra::{steady_intracavity, Branch};

/// Default step is this fraction of the fastest rate in the problem.
const STEP_FRACTION: f64 = 0.05;
/// RK4 on an oscillation is unstable beyond ω dt ≈ 2.8.
const RK4_STABILITY: f64 = 2.8;

/// Probe detuning from the bare cavity, piecewise linear in time, at fixed
/// resonant photon number `nbar_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSchedule {
    pub nbar_max: f64,
    /// `(t, δ_pc)` knots, strictly increasing in t; held constant outside.
    pub knots: Vec<(f64, f64)>,
}

impl DriveSchedule {
    pub fn constant(nbar_max: f64, delta_pc: f64) -> Self {
        Self {
            nbar_max,
            knots: vec![(0.0, delta_pc)],
        }
    }

    pub fn piecewise(nbar_max: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() || knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Config("drive knots must be non-empty with increasing times".into()));
        }
        if !(nbar_max >= 0.0) {
            return Err(Error::Domain(format!("nbar_max must be non-negative, got {nbar_max}")));
        }
        Ok(Self { nbar_max, knots })
    }

    /// `from → to → from`, each leg lasting `leg_time`.
    pub fn triangle(nbar_max: f64, from: f64, to: f64, leg_time: f64) -> Result<Self> {
        Self::piecewise(nbar_max, vec![(0.0, from), (leg_time, to), (2.0 * leg_time, from)])
    }

    pub fn delta_at(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        let i = k.partition_point(|(tk, _)| *tk <= t);
        if i == k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, d0) = k[i - 1];
        let (t1, d1) = k[i];
        d0 + (d1 - d0) * (t - t0) / (t1 - t0)
    }

    /// Largest |δ_pc − offset| over the knots.
    fn max_abs_delta(&self, offset: f64) -> f64 {
        self.knots.iter().fold(0.0, |m, (_, d)| m.max((d - offset).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldConfig {
    pub duration: f64,
    /// Fixed step; `None` picks 0.05 over the fastest rate.
    pub dt: Option<f64>,
    /// Mechanical Q, damping γ_m = ω_z/Q; `None` is undamped.
    pub quality_factor: Option<f64>,
    /// Upper bound on stored samples.
    pub max_records: usize,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        Self {
            duration: 1e-3,
            dt: None,
            quality_factor: Some(40.0),
            max_records: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanFieldState {
    pub re_b: f64,
    pub im_b: f64,
    /// Collective displacement (m).
    pub z: f64,
    /// Collective momentum N_eff·m·Ż (kg·m/s).
    pub p: f64,
}

impl MeanFieldState {
    /// Stationary state at fixed `delta_pc` on the given branch.
    pub fn steady(
        delta_pc: f64,
        nbar_max: f64,
        mode: &CollectiveMode,
        params: &PhysicalParams,
        branch: Branch,
    ) -> Result<Self> {
        let delta = delta_pc - mode.delta_n;
        let n = steady_intracavity(delta, nbar_max, mode, params, branch)?;
        let big_delta = delta + mode.photon_shift * n;
        let k = params.kappa;
        let scale = nbar_max.sqrt() * k / (k * k + big_delta * big_delta);
        Ok(Self {
            re_b: scale * k,
            im_b: scale * big_delta,
            z: if mode.n_eff > 0.0 { static_displacement(n, params) } else { 0.0 },
            p: 0.0,
        })
    }

    pub fn nbar(&self) -> f64 {
        self.re_b * self.re_b + self.im_b * self.im_b
    }

    /// Mechanical energy of the collective mode (J).
    pub fn energy(&self, mode: &CollectiveMode, params: &PhysicalParams) -> f64 {
        let m = mode.n_eff * params.mass;
        if m == 0.0 {
            return 0.0;
        }
        self.p * self.p / (2.0 * m) + 0.5 * m * params.omega_z * params.omega_z * self.z * self.z
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanFieldTrace {
    pub t: Vec<f64>,
    pub delta_pc: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    /// Cumulative work done by the optical force on the mode (J).
    pub work: Vec<f64>,
}

impl MeanFieldTrace {
    fn push(&mut self, t: f64, delta_pc: f64, y: &[f64; 5]) {
        self.t.push(t);
        self.delta_pc.push(delta_pc);
        self.states.push(MeanFieldState {
            re_b: y[0],
            im_b: y[1],
            z: y[2],
            p: y[3],
        });
        self.work.push(y[4]);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn nbar(&self) -> Vec<f64> {
        self.states.iter().map(MeanFieldState::nbar).collect()
    }

    /// `t_s,re_b,im_b,z_m,p_si` rows.
    pub fn write_csv<W: Write>(&self, out: W, provenance: &[(String, String)]) -> Result<()> {
        let rows = self.t.iter().zip(&self.states).map(|(t, s)| {
            vec![fmt_f64(*t), fmt_f64(s.re_b), fmt_f64(s.im_b), fmt_f64(s.z), fmt_f64(s.p)]
        });
        write_csv(out, provenance, &["t_s", "re_b", "im_b", "z_m", "p_si"], rows)
    }
}

struct Rhs<'a> {
    drive: &'a DriveSchedule,
    kappa: f64,
    drive_amp: f64,
    delta_n: f64,
    coupling: f64,
    mass: f64,
    omega2: f64,
    gamma_m: f64,
    force_per_photon: f64,
    f0_over_m: f64,
}

impl Rhs<'_> {
    fn eval(&self, t: f64, y: &[f64; 5]) -> [f64; 5] {
        let [re, im, z, p, _] = *y;
        let delta = self.drive.delta_at(t) - self.delta_n + self.coupling * z;
        let n = re * re + im * im;
        let (dz, dp, dw) = if self.mass > 0.0 {
            (
                p / self.mass,
                -self.mass * self.omega2 * z - self.gamma_m * p + self.force_per_photon * n,
                self.f0_over_m * n * p,
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        [
            -delta * im - self.kappa * re + self.drive_amp,
            delta * re - self.kappa * im,
            dz,
            dp,
            dw,
        ]
    }
}

fn axpy(y: &[f64; 5], h: f64, k: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// Integrates
/// `β̇ = i(δ_pc − Δ_N + N_eff f0 Z/ħ)β − κβ + κ√n̄_max`,
/// `Ż = P/(N_eff m)`, `Ṗ = −N_eff m ω_z² Z − γ_m P + N_eff f0 |β|²`.
pub fn meanfield_integrate(
    config: &MeanFieldConfig,
    drive: &DriveSchedule,
    mode: &CollectiveMode,
    params: &PhysicalParams,
    initial: MeanFieldState,
) -> Result<MeanFieldTrace> {
    let k = params.kappa;
    let w = params.omega_z;
    let fastest = k
        .max(w)
        .max(drive.max_abs_delta(mode.delta_n) + mode.photon_shift * drive.nbar_max);
    let dt = config.dt.unwrap_or(STEP_FRACTION / fastest);
    if !(dt > 0.0) || !(config.duration > 0.0) {
        return Err(Error::Config("mean-field duration and dt must be positive".into()));
    }
    if dt * fastest > RK4_STABILITY {
        return Err(Error::numeric("mean-field step exceeds the RK4 stability limit", dt * fastest));
    }
    let gamma_m = match config.quality_factor {
        Some(q) if q > 0.0 => w / q,
        Some(q) => return Err(Error::Config(format!("quality factor must be positive, got {q}"))),
        None => 0.0,
    };
    let f0 = params.f0();
    let mass = mode.n_eff * params.mass;
    let rhs = Rhs {
        drive,
        kappa: k,
        drive_amp: k * drive.nbar_max.sqrt(),
        delta_n: mode.delta_n,
        coupling: mode.n_eff * f0 / HBAR,
        mass,
        omega2: w * w,
        gamma_m,
        force_per_photon: mode.n_eff * f0,
        f0_over_m: f0 / params.mass,
    };

    let n_steps = (config.duration / dt).ceil() as usize;
    let every = n_steps.div_ceil(config.max_records.max(1)).max(1);
    let mut y = [initial.re_b, initial.im_b, initial.z, initial.p, 0.0];
    let mut trace = MeanFieldTrace::default();
    trace.push(0.0, drive.delta_at(0.0), &y);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let k1 = rhs.eval(t, &y);
        let k2 = rhs.eval(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k1));
        let k3 = rhs.eval(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k2));
        let k4 = rhs.eval(t + dt, &axpy(&y, dt, &k3));
        y = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("mean-field integration diverged", t + dt));
        }
        if (step + 1) % every == 0 || step + 1 == n_steps {
            let tn = (step + 1) as f64 * dt;
            trace.push(tn, drive.delta_at(tn), &y);
        }
    }
    Ok(trace)
}

/// Result of a triangle sweep of δ_pc.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisSweep {
    /// δ_pc of the largest n̄ step on the upward leg.
    pub up_switch: f64,
    /// δ_pc of the largest n̄ step on the downward leg.
    pub down_switch: f64,
    /// Detuning change between successive samples.
    pub grid_step: f64,
    pub trace: MeanFieldTrace,
}

impl HysteresisSweep {
    /// Switch points separated by more than 1.5 grid steps.
    pub fn has_hysteresis(&self) -> bool {
        (self.up_switch - self.down_switch).abs() > 1.5 * self.grid_step
    }
}

/// Sweeps δ_pc from `from` up to `to` and back, starting in the steady state,
/// and locates the steepest change of n̄ on each leg on a grid of
/// `grid_step`.
#[allow(clippy::too_many_arguments)]
pub fn hysteresis_sweep(
    nbar_max: f64,
    from: f64,
    to: f64,
    leg_time: f64,
    grid_step: f64,
    quality_factor: Option<f64>,
    mode: &CollectiveMode,
    params: &PhysicalParams,
) -> Result<HysteresisSweep> {
    if !(to > from) || !(grid_step > 0.0) || !(leg_time > 0.0) {
        return Err(Error::Config("sweep needs to > from, positive grid step and leg time".into()));
    }
    let n_grid = ((to - from) / grid_step).round() as usize;
    let drive = DriveSchedule::triangle(nbar_max, from, to, leg_time)?;
    let config = MeanFieldConfig {
        duration: 2.0 * leg_time,
        dt: None,
        quality_factor,
        max_records: 2 * n_grid,
    };
    let start = MeanFieldState::steady(from, nbar_max, mode, params, Branch::SweepUp)?;
    let trace = meanfield_integrate(&config, &drive, mode, params, start)?;
    let n = trace.nbar();
    let half = trace.len() / 2;
    let steepest = |range: std::ops::Range<usize>| {
        let i = range
            .max_by(|&a, &b| (n[a + 1] - n[a]).abs().total_cmp(&(n[b + 1] - n[b]).abs()))
            .expect("non-empty leg");
        0.5 * (trace.delta_pc[i] + trace.delta_pc[i + 1])
    };
    let up_switch = steepest(0..half);
    let down_switch = steepest(half..trace.len() - 1);
    let actual_step = (trace.delta_pc[1] - trace.delta_pc[0]).abs();
    Ok(HysteresisSweep {
        up_switch,
        down_switch,
        grid_step: actual_step,
        trace,
    })
}
