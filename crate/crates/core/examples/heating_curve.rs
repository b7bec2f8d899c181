//! Heating ratio R/R_fs across the mechanical sideband, with and without
//! probe frequency jitter.

use backaction_sim::experiment::heating_curve;
use backaction_sim::{AtomicEnsemble, CollectiveMode, PhysicalParams};

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let mode = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &params);
    let k = params.kappa;
    let grid: Vec<f64> = (-40..=40).map(|i| params.omega_z + 0.1 * k * f64::from(i)).collect();

    let sharp = heating_curve(&params, &mode, 0.0, &grid)?;
    let jittered = heating_curve(&params, &mode, params.sigma_jitter, &grid)?;

    println!("{:>12} {:>10} {:>10}", "(D-wz)/k", "sharp", "jittered");
    for ((d, a), (_, b)) in sharp.iter().zip(&jittered).step_by(4) {
        println!("{:>12.2} {:>10.3} {:>10.3}", (d - params.omega_z) / k, a, b);
    }
    let peak = jittered.iter().map(|p| p.1).fold(f64::MIN, f64::max);
    println!("jittered peak {peak:.2}, sharp peak {:.2}", 1.0 + params.cooperativity());
    Ok(())
}
