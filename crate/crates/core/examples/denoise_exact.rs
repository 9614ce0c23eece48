//! Exact anisotropic ROF on a small piecewise-constant image.
//!
//! Run with `cargo run --example denoise_exact`.

use pcrseg::energy::energy_arof;
use pcrseg::graphcut::solve_arof_exact;
use pcrseg::{PcrImage, Rect};

fn main() -> pcrseg::Result<()> {
    let domain = Rect::new(0.0, 4.0, 0.0, 3.0)?;
    let f = PcrImage::from_rects(
        domain,
        0.1,
        &[
            (Rect::new(0.5, 2.5, 0.5, 2.0)?, 0.9),
            (Rect::new(2.0, 3.5, 1.0, 2.5)?, 0.6),
        ],
    )?;
    for lambda in [4.0, 16.0, 64.0] {
        let w = solve_arof_exact(&f, lambda)?;
        println!(
            "lambda {lambda:>4}: energy {:.6} (input {:.6}), levels {:?}",
            energy_arof(&w, &f, lambda)?,
            energy_arof(&f, &f, lambda)?,
            w.distinct_values()
        );
    }
    println!("\n{}", solve_arof_exact(&f, 16.0)?.to_text());
    Ok(())
}
