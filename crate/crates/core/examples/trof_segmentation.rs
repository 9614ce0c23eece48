//! Multiphase segmentation by thresholding a single ROF solution.
//!
//! Run with `cargo run --example trof_segmentation`.

use pcrseg::algorithms::{fcm_init, trof_segment, StoppingRule, TauUpdate, TrofOptions};
use pcrseg::{PcrImage, Rect};

fn main() -> pcrseg::Result<()> {
    let domain = Rect::new(0.0, 8.0, 0.0, 8.0)?;
    let f = PcrImage::from_rects(
        domain,
        0.0,
        &[
            (Rect::new(1.0, 7.0, 1.0, 7.0)?, 0.5),
            (Rect::new(2.5, 5.5, 2.5, 5.5)?, 1.0),
        ],
    )?;
    let lambda = 8.0;
    let tau0 = fcm_init(&f, 3)?.midpoints();
    for update in [TauUpdate::Midpoint, TauUpdate::Literal] {
        let opts = TrofOptions {
            update,
            ..TrofOptions::default()
        };
        let out = trof_segment(&f, lambda, &tau0, StoppingRule::default(), opts)?;
        println!(
            "{update:?}: {} phases, thresholds {:?}, removed {:?}, {:?}",
            out.chain.phases(),
            out.tau,
            out.removed_phases,
            out.stop
        );
        for r in &out.trace.records {
            println!("    iter {} energy {:.6} -> {:.6}", r.iteration, r.energy_after_sets, r.energy_after_constants);
        }
    }
    Ok(())
}
