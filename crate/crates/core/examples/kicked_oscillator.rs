//! Harmonic oscillator driven by simulated photon-number noise. The energy
//! growth rate is compared with the symmetrized-spectrum prediction.

use backaction_sim::oracle::{kicked_oscillator_run, TrajectoryConfig};
use backaction_sim::{AtomicEnsemble, CollectiveMode, PhysicalParams};

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let mode = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &params);
    let k = params.kappa;
    let config = TrajectoryConfig {
        seed: 1,
        n_trajectories: 1000,
        dt: 0.05 / k,
        duration: 2000.0 / k,
    };

    for offset in [-1.0, 0.0, 1.0] {
        let delta = params.omega_z + offset * k;
        let run = kicked_oscillator_run(&config, 1.9, delta, &mode, &params)?;
        println!(
            "Delta - wz = {offset:+.1} k   dE/dt = {:.4e} +- {:.1e} W   predicted {:.4e} W",
            run.rate.mean, run.rate.stderr, run.prediction
        );
    }
    Ok(())
}
