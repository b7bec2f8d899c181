//! Simulates a full sweep of the bolometric protocol, then recovers the
//! heating ratio from the detected counts alone.

use backaction_sim::experiment::{analyze_trace, forward_simulate, ProtocolConfig};
use backaction_sim::{AtomicEnsemble, PhysicalParams};

fn main() -> backaction_sim::Result<()> {
    let params = PhysicalParams::default();
    let config = ProtocolConfig::default();
    let trace = forward_simulate(&config, &params, &AtomicEnsemble::uniform(0))?;
    let analysis = analyze_trace(&trace, &params)?;

    let truth = trace.truth.as_ref().expect("forward traces carry ground truth");
    let true_peak = truth.ratio.iter().copied().fold(f64::MIN, f64::max);
    println!("bins {}  atoms {:.0} -> {:.0}", trace.len(), trace.true_n[0], trace.true_n[trace.len() - 1]);
    println!("true peak ratio {true_peak:.2}");

    match analysis.peak_ratio(0.2) {
        Some(r) => println!(
            "recovered peak {:.2} +- {:.2} at t = {:.3} s, N = {:.0}",
            r.ratio, r.ratio_err, r.t, r.n_atoms
        ),
        None => println!("no window passed the error cut"),
    }
    Ok(())
}
