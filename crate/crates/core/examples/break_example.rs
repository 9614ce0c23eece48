//! The two-phase example where `mu = lambda / (c1 - c2)` does not make `A1` optimal.
//!
//! Run with `cargo run --example break_example`.

use pcrseg::algorithms::mu_for;
use pcrseg::energy::energy_acv;
use pcrseg::oracle::brute::{brute_force_binary, BinaryEnergy};
use pcrseg::oracle::verify::{example_break_instance, verify_example_break};

fn main() -> pcrseg::Result<()> {
    let rep = verify_example_break()?;
    for c in &rep.checks {
        println!("{:<5} {:<36} expected {} got {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.expected, c.actual);
    }
    let ex = example_break_instance(1)?;
    let (c1, c2) = (1.0, 1.0 / 48.0);
    for (label, mu) in [("lambda/(2 gap)", mu_for(c1, c2, 16.0)), ("lambda/gap", 768.0 / 47.0)] {
        let best = brute_force_binary(&ex.f, BinaryEnergy::Refit { mu })?;
        println!(
            "mu = {label:<15} ACV(A1) = {:.6}, exhaustive minimum {:.6} on a set of area {}",
            energy_acv(&ex.a1, c1, c2, mu, &ex.f)?,
            best.energy,
            best.set.area()
        );
    }
    Ok(())
}
