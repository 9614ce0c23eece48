//! Seeded random instances for the property suites.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::grid::{Grid, Rect};
use crate::pcr::{PcrImage, PhaseConstants};

use super::calibrable::{CalibrableConfig, Square};

/// `nx x ny` cells with widths drawn from `{1/4, 1/2, 3/4}` and values uniform in `[0, 1]`.
pub fn random_pcr<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Result<PcrImage> {
    let grid = random_grid(rng, nx, ny)?;
    let values = (0..nx * ny).map(|_| rng.gen::<f64>()).collect();
    PcrImage::new(grid, values)
}

fn random_grid<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Result<Arc<Grid>> {
    let mut xs = vec![0.0];
    for _ in 0..nx {
        xs.push(xs.last().unwrap() + rng.gen_range(1..=3) as f64 * 0.25);
    }
    let mut ys = vec![0.0];
    for _ in 0..ny {
        ys.push(ys.last().unwrap() + rng.gen_range(1..=3) as f64 * 0.25);
    }
    Ok(Arc::new(Grid::new(xs, ys)?))
}

/// Like [`random_pcr`] with values drawn from `levels` equally spaced values in `[0, 1]`,
/// which produces equal-valued neighbours and hence larger regions.
pub fn random_pcr_levels<R: Rng>(rng: &mut R, nx: usize, ny: usize, levels: usize) -> Result<PcrImage> {
    let grid = random_grid(rng, nx, ny)?;
    let k = levels.max(2) - 1;
    let values = (0..nx * ny).map(|_| rng.gen_range(0..=k) as f64 / k as f64).collect();
    PcrImage::new(grid, values)
}

/// Overlapping rectangles with corners on multiples of `1/16` in the unit square, so that
/// any raster of `16 m` pixels per side is cell-aligned.
pub fn random_dyadic_pcr<R: Rng>(rng: &mut R, rects: usize) -> Result<PcrImage> {
    let domain = Rect::new(0.0, 1.0, 0.0, 1.0)?;
    let mut list = Vec::with_capacity(rects);
    for _ in 0..rects {
        let (x0, x1) = sorted_pair(rng);
        let (y0, y1) = sorted_pair(rng);
        list.push((Rect::new(x0, x1, y0, y1)?, rng.gen::<f64>()));
    }
    PcrImage::from_rects(domain, rng.gen::<f64>(), &list)
}

fn sorted_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    let a = rng.gen_range(0..16u32);
    let b = rng.gen_range(a + 1..=16u32);
    (a as f64 / 16.0, b as f64 / 16.0)
}

/// `n` strictly decreasing constants in `[0, 1]`, at least `gap` apart.
pub fn random_constants<R: Rng>(rng: &mut R, n: usize, gap: f64) -> PhaseConstants {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        if v.windows(2).all(|w| w[0] - w[1] >= gap) {
            return PhaseConstants::new(v);
        }
    }
}

/// A valid [`CalibrableConfig`] with one to three squares.
pub fn random_calibrable<R: Rng>(rng: &mut R) -> CalibrableConfig {
    let m = rng.gen_range(1..=3);
    let halves = [0.25, 0.5, 1.0, 1.5, 2.0];
    let mut comps: Vec<Square> = Vec::with_capacity(m);
    let mut x = 0.0;
    for i in 0..m {
        let h = *halves.choose(rng).unwrap();
        if i > 0 {
            let prev = comps[i - 1];
            let gap = (8.0 * prev.half).max(8.0 * h) + rng.gen_range(1..=8) as f64 * 0.5;
            x = prev.cx + prev.half + gap + h;
        }
        let y = rng.gen_range(-4..=4) as f64 * 0.5;
        comps.push(Square::new(x, y, h));
    }
    let lo = comps.iter().map(|c| c.cx - c.half).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.cx + c.half).fold(f64::NEG_INFINITY, f64::max);
    let shift = 0.5 * (lo + hi);
    for c in comps.iter_mut() {
        c.cx -= shift;
    }
    let reach = comps
        .iter()
        .map(|c| c.cx.abs().max(c.cy.abs()) + c.half + c.perimeter())
        .fold(0.0, f64::max);
    let half_side = (reach + rng.gen_range(1..=6) as f64).ceil();
    let alphas = (0..m).map(|_| rng.gen_range(0.3..1.0)).collect();
    let mut cfg = CalibrableConfig {
        half_side,
        components: comps,
        alphas,
        lambda: 1.0,
    };
    cfg.lambda = cfg.lambda_bound() * rng.gen_range(1.01..3.0);
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_configs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            random_calibrable(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn dyadic_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_dyadic_pcr(&mut rng, 5).unwrap();
        for &x in f.grid().xlines().iter().chain(f.grid().ylines()) {
            assert_eq!((x * 16.0).fract(), 0.0);
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_pcr(&mut ChaCha8Rng::seed_from_u64(9), 3, 4).unwrap();
        let b = random_pcr(&mut ChaCha8Rng::seed_from_u64(9), 3, 4).unwrap();
        assert_eq!(a, b);
    }
}
