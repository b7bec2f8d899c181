//! Mean-field sweep through the bistable window of the Kerr-like lineshape.

use backaction_sim::oracle::hysteresis_sweep;
use backaction_sim::spectra::bistable_window;
use backaction_sim::{AtomicEnsemble, CollectiveMode, PhysicalParams};

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let mode = CollectiveMode::new(&AtomicEnsemble::uniform(100_000), &params);
    let k = params.kappa;

    for nbar_max in [0.5, 4.0] {
        let window = bistable_window(nbar_max, &mode, &params);
        let sweep = hysteresis_sweep(
            nbar_max,
            mode.delta_n - 10.0 * k,
            mode.delta_n + 4.0 * k,
            10e-3,
            0.1 * k,
            Some(1.0),
            &mode,
            &params,
        )?;
        println!("nbar_max = {nbar_max}");
        match window {
            Some((lo, hi)) => println!("  steady-state window  [{:.2}, {:.2}] kappa", lo / k, hi / k),
            None => println!("  steady-state window  none"),
        }
        println!(
            "  switches  up {:.2}  down {:.2} kappa  hysteresis: {}",
            (sweep.up_switch - mode.delta_n) / k,
            (sweep.down_switch - mode.delta_n) / k,
            sweep.has_hysteresis()
        );
    }
    Ok(())
}
