//! Separates shot-noise heating (linear in n̄) from classical intensity
//! noise (quadratic in n̄).

use backaction_sim::experiment::{rin_for_fraction, technical_noise_scan, TechnicalNoiseConfig};
use backaction_sim::PhysicalParams;

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let mut config = TechnicalNoiseConfig::for_params(&params);
    config.trajectories.n_trajectories = 1000;
    let nbar = [0.5, 1.0, 1.5, 2.0, 2.5];

    for fraction in [0.0, 0.1] {
        let rin = rin_for_fraction(fraction, &params, &config);
        let scan = technical_noise_scan(&params, &nbar, rin, &config)?;
        println!(
            "rin {rin:.4}: A = {:.3e} +- {:.1e} (injected {:.3e}), B = {:.3e} +- {:.1e} (injected {:.3e}), quadratic share {:.3}",
            scan.linear.0,
            scan.linear.1,
            scan.injected_linear,
            scan.quadratic.0,
            scan.quadratic.1,
            scan.injected_quadratic,
            scan.quadratic_fraction()
        );
    }
    Ok(())
}
