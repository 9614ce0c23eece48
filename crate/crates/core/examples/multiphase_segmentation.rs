//! Nested multiphase segmentation by level-by-level min-cuts.
//!
//! Run with `cargo run --example multiphase_segmentation`.

use pcrseg::algorithms::{fcm_init, gn_alternate, StoppingRule};
use pcrseg::{PcrImage, Rect};

fn main() -> pcrseg::Result<()> {
    let domain = Rect::new(0.0, 8.0, 0.0, 8.0)?;
    let f = PcrImage::from_rects(
        domain,
        0.05,
        &[
            (Rect::new(1.0, 7.0, 1.0, 7.0)?, 0.4),
            (Rect::new(2.0, 6.0, 2.0, 6.0)?, 0.7),
            (Rect::new(3.0, 5.0, 3.0, 5.0)?, 0.95),
            (Rect::new(6.5, 7.0, 0.0, 0.5)?, 0.95),
        ],
    )?;
    let init = fcm_init(&f, 4)?;
    for mu in [4.0, 20.0] {
        let out = gn_alternate(&f, mu, &init, StoppingRule::default())?;
        let areas: Vec<f64> = out.chain.bands().iter().map(|b| b.area()).collect();
        println!(
            "mu {mu:>4}: {} phases, constants {:?}, band areas {areas:?}, removed {:?}, {:?}",
            out.chain.phases(),
            out.constants.values,
            out.removed_phases,
            out.stop
        );
    }
    Ok(())
}
