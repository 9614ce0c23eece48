//! Closed-form ROF solutions for well-separated squares, checked against the min-cut solver.
//!
//! Run with `cargo run --example calibrable_squares`.

use pcrseg::graphcut::solve_arof_exact;
use pcrseg::oracle::{calibrable_solution, CalibrableConfig, Square};

fn main() -> pcrseg::Result<()> {
    let mut cfg = CalibrableConfig {
        half_side: 24.0,
        components: vec![Square::new(-6.0, 0.0, 1.0), Square::new(6.0, 1.0, 0.5)],
        alphas: vec![1.0, 0.6],
        lambda: 1.0,
    };
    println!("distance margins {:?}", cfg.distance_margins());
    cfg.lambda = 1.5 * cfg.lambda_bound();
    cfg.validate()?;
    let expected = calibrable_solution(&cfg)?;
    let w = solve_arof_exact(&cfg.datum()?, cfg.lambda)?;
    let dev = w.values().iter().zip(expected.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("lambda {:.4}: closed form {:?}", cfg.lambda, cfg.closed_form_values());
    println!("max deviation of the min-cut solution: {dev:e}");

    cfg.lambda = 0.5 * cfg.lambda_bound();
    println!("below the bound: {}", cfg.validate().unwrap_err());
    Ok(())
}
