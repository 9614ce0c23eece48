//! Iterative solver on a noisy raster, compared with the exact solution.
//!
//! Run with `cargo run --release --example raster_denoise`.

use pcrseg::graphcut::solve_arof_exact;
use pcrseg::pd::{solve_arof_raster, SolverConfig};
use pcrseg::{PcrImage, Raster, Rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pcrseg::Result<()> {
    let domain = Rect::new(0.0, 1.0, 0.0, 1.0)?;
    let clean = PcrImage::from_rects(domain, 0.2, &[(Rect::new(0.25, 0.75, 0.25, 0.625)?, 0.8)])?;
    let n = 64;
    let mut r = Raster::rasterize(&clean, n, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in r.pixels_mut() {
        *p += rng.gen_range(-0.15..0.15);
    }
    // Pixel pitch 1/64: lambda scales with the inverse pitch.
    let lambda = 40.0;
    let cfg = SolverConfig {
        tol: 1e-7,
        ..SolverConfig::new(lambda)
    };
    let out = solve_arof_raster(&r, &cfg)?;
    let exact = Raster::from_pcr(&solve_arof_exact(&r.to_pcr((0.0, 0.0))?, lambda)?)?;
    let diff: f64 = out.u.pixels().iter().zip(exact.pixels()).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = exact.pixels().iter().map(|a| a * a).sum();
    println!(
        "{} iterations, gap {:.2e}, converged {}, relative L2 to exact {:.2e}",
        out.iterations,
        out.gap,
        out.converged,
        (diff / norm).sqrt()
    );
    Ok(())
}
