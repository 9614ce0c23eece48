//! Exhaustive search over cell subsets, used as the reference for the min-cut solver.
//!
//! Run with `cargo run --example brute_force_oracle`.

use pcrseg::energy::energy_acv;
use pcrseg::graphcut::{min_cut_binary, CutProblem};
use pcrseg::oracle::brute::{brute_force_binary, brute_force_chain, BinaryEnergy};
use pcrseg::oracle::random::random_pcr;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pcrseg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let f = random_pcr(&mut rng, 4, 4)?;
    let (c1, c2, mu) = (0.8, 0.2, 1.5);
    let best = brute_force_binary(&f, BinaryEnergy::FixedConstants { c1, c2, mu })?;
    let (cut, _) = min_cut_binary(&CutProblem::two_phase(&f, c1, c2, mu)?)?;
    println!(
        "exhaustive {:.9} ({} ties), min-cut set {:.9}, same set: {}",
        best.energy,
        best.tie_count,
        energy_acv(&cut, c1, c2, mu, &f)?,
        cut == best.set
    );

    let refit = brute_force_binary(&f, BinaryEnergy::Refit { mu: 20.0 })?;
    println!(
        "with refitted constants: {:.9}, set area {}, constants {:?}",
        refit.energy,
        refit.set.area(),
        refit.constants
    );

    let small = random_pcr(&mut rng, 3, 3)?;
    let chain = brute_force_chain(&small, 3, &pcrseg::PhaseConstants::new(vec![0.8, 0.5, 0.2]), mu)?;
    println!("three nested phases: {:.9} over {} labelings tied", chain.energy, chain.tie_count);
    Ok(())
}
