//! Prints the default parameter set and the quantities derived from it.

use backaction_sim::collective::{granularity, static_displacement};
use backaction_sim::{AtomicEnsemble, CollectiveMode, PhysicalParams};

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    params.validate()?;
    for (key, value, unit) in params.dump_rows() {
        println!("{key:<24} {value:>14.6e} {unit}");
    }

    let d = params.derive();
    println!();
    println!("cooperativity           {:.4}", d.cooperativity);
    println!("kappa from mirrors      {:.1} Hz", d.kappa_from_mirrors / std::f64::consts::TAU);
    println!("finesse                 {:.0}", d.finesse);

    let ensemble = AtomicEnsemble::uniform(100_000);
    let mode = CollectiveMode::new(&ensemble, &params);
    println!("N_eff / N               {:.4}", mode.n_eff / mode.n_atoms);
    println!("Delta_N                 {:.4} kappa", mode.delta_n / params.kappa);
    println!("granularity             {:.4}", granularity(&ensemble, &params));
    println!("shift at nbar = 1.9     {:.3e} m", static_displacement(1.9, &params));
    Ok(())
}
