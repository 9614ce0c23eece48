//! Three phases where thresholding the ROF solution is not the best partition.
//!
//! Run with `cargo run --example three_phase_counterexample`.

use pcrseg::oracle::verify::{verify_counterexample_3phase, verify_counterexample_3phase_with, CounterexampleOptions};

fn main() -> pcrseg::Result<()> {
    let rep = verify_counterexample_3phase()?;
    println!("{}: {}", rep.name, if rep.passed { "passed" } else { "failed" });
    for c in &rep.checks {
        println!("  {:<28} expected {:<24} got {}", c.name, c.expected, c.actual);
    }
    let swapped = verify_counterexample_3phase_with(CounterexampleOptions { swap_weights: true })?;
    for n in &swapped.notes {
        println!("swapped weights: {n}");
    }
    Ok(())
}
