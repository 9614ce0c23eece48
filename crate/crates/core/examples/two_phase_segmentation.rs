//! Two-phase Chan-Vese by thresholding ROF solutions, with the iteration trace.
//!
//! Run with `cargo run --example two_phase_segmentation`.

use pcrseg::algorithms::{acv_segment, fcm_init, AcvOptions, StoppingRule};
use pcrseg::{PcrImage, Rect};

fn main() -> pcrseg::Result<()> {
    let domain = Rect::new(0.0, 6.0, 0.0, 4.0)?;
    let f = PcrImage::from_rects(
        domain,
        0.15,
        &[
            (Rect::new(0.5, 3.0, 0.5, 3.5)?, 0.85),
            (Rect::new(3.0, 3.5, 1.5, 2.0)?, 0.8),
            (Rect::new(4.0, 5.5, 1.0, 2.5)?, 0.45),
        ],
    )?;
    let init = fcm_init(&f, 2)?;
    println!("fuzzy c-means start: {:?}", init.values);
    for mu in [4.0, 8.0, 32.0] {
        let out = acv_segment(&f, mu, &init, StoppingRule::default(), AcvOptions::default())?;
        println!(
            "mu {mu:>3}: area {:.3}, constants {:?}, energy {:.6}, {:?} after {} iterations",
            out.set.area(),
            out.constants.values,
            out.energy(mu, &f)?,
            out.stop,
            out.trace.iterations()
        );
    }
    Ok(())
}
