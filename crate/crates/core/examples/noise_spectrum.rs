//! Closed-form photon-number noise spectrum against a trajectory estimate.

use backaction_sim::oracle::{estimate_noise_spectrum, NoiseKind, TrajectoryConfig};
use backaction_sim::spectra::photon_noise_spectrum;
use backaction_sim::PhysicalParams;

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let k = params.kappa;
    let (nbar, delta) = (1.9, params.omega_z);

    let config = TrajectoryConfig {
        seed: 7,
        n_trajectories: 500,
        dt: 0.05 / k,
        duration: 400.0 / k,
    };
    let mc = estimate_noise_spectrum(&config, nbar, delta, k, 4.0 * k, NoiseKind::Complex)?;

    println!("{:>10} {:>14} {:>14} {:>10}", "omega/k", "analytic", "trajectories", "stderr");
    let stride = (mc.grid.len() / 24).max(1);
    for i in (0..mc.grid.len()).step_by(stride) {
        let w = mc.grid[i];
        println!(
            "{:>10.3} {:>14.6e} {:>14.6e} {:>10.2e}",
            w / k,
            photon_noise_spectrum(w, nbar, delta, k),
            mc.values[i],
            mc.stderr(i)
        );
    }
    Ok(())
}
