//! Output artifacts: label maps, their JSON sidecar, grid overlays and run reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use image::{Rgb, RgbImage};
use serde::Serialize;

use crate::algorithms::trace::{IterationTrace, StopReason};
use crate::cellset::NestedChain;
use crate::error::{Error, Result};
use crate::grid::{EdgeAxis, Grid, Rect};
use crate::pcr::PcrImage;
use crate::raster::Raster;

/// Gray level of each phase: phase 1 (largest constant) is white, the last is black.
pub fn phase_grays(n: usize) -> Vec<u8> {
    if n <= 1 {
        return vec![255];
    }
    (0..n)
        .map(|i| (255.0 * (n - 1 - i) as f64 / (n - 1) as f64).round() as u8)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEntry {
    /// 1-based phase index.
    pub phase: usize,
    pub constant: f64,
    pub gray: u8,
}

/// Sidecar mapping gray levels of a label map back to phases and constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelSidecar {
    pub phases: Vec<PhaseEntry>,
}

impl LabelSidecar {
    pub fn new(constants: &[f64]) -> Self {
        let grays = phase_grays(constants.len());
        LabelSidecar {
            phases: constants
                .iter()
                .zip(grays)
                .enumerate()
                .map(|(i, (&c, g))| PhaseEntry {
                    phase: i + 1,
                    constant: c,
                    gray: g,
                })
                .collect(),
        }
    }
}

/// Label map of a chain with values `gray / 255`.
pub fn label_image(chain: &NestedChain) -> Result<PcrImage> {
    let grays = phase_grays(chain.phases());
    let values = chain.labels().iter().map(|&l| grays[l] as f64 / 255.0).collect();
    PcrImage::new(chain.grid().clone(), values)
}

/// A raster stretched over `domain` as a PCR image (pixels need not be square).
pub fn raster_on_domain(r: &Raster, domain: Rect) -> Result<PcrImage> {
    let (w, h) = (r.width(), r.height());
    let xs = (0..=w).map(|i| domain.x0 + domain.width() * i as f64 / w as f64).collect();
    let ys = (0..=h).map(|j| domain.y0 + domain.height() * j as f64 / h as f64).collect();
    let grid = Arc::new(Grid::new(xs, ys)?);
    let mut values = Vec::with_capacity(w * h);
    for iy in 0..h {
        values.extend_from_slice(&r.pixels()[(h - 1 - iy) * w..(h - iy) * w]);
    }
    PcrImage::new(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridFit {
    pub boundary_length: f64,
    pub on_grid_length: f64,
    /// `on_grid_length / boundary_length`, or 1 when there is no boundary.
    pub fraction: f64,
}

/// How much of the boundary between labels lies on the lines of `grid`.
///
/// Interior lines of `grid` extend across the whole domain, so a boundary segment of
/// `labels` is on the grid exactly when its coordinate matches one of them.
pub fn boundary_on_grid(labels: &PcrImage, grid: &Grid) -> GridFit {
    let lg = labels.grid();
    let d = grid.domain();
    let tol = 1e-9 * d.width().max(d.height());
    let on = |lines: &[f64], x: f64| lines.iter().any(|&l| (l - x).abs() <= tol);
    let mut total = 0.0;
    let mut on_grid = 0.0;
    for e in lg.edges() {
        if labels.value(e.a) == labels.value(e.b) {
            continue;
        }
        total += e.length;
        let hit = match e.axis {
            EdgeAxis::X => on(grid.xlines(), lg.xlines()[e.line]),
            EdgeAxis::Y => on(grid.ylines(), lg.ylines()[e.line]),
        };
        if hit {
            on_grid += e.length;
        }
    }
    GridFit {
        boundary_length: total,
        on_grid_length: on_grid,
        fraction: if total > 0.0 { on_grid / total } else { 1.0 },
    }
}

/// RGB overlay of `f` in gray, the interior lines of `f`'s grid in blue and the label
/// boundaries in red, sampled on `width x height` pixels over the domain.
pub fn render_overlay(f: &PcrImage, labels: &PcrImage, width: usize, height: usize) -> RgbImage {
    let d = f.grid().domain();
    let (pw, ph) = (d.width() / width as f64, d.height() / height as f64);
    let x_at = |col: usize| d.x0 + (col as f64 + 0.5) * pw;
    let y_at = |row: usize| d.y1 - (row as f64 + 0.5) * ph;
    let (lo, hi) = (f.min(), f.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut lab = vec![0.0; width * height];
    let mut img = RgbImage::new(width as u32, height as u32);
    for row in 0..height {
        for col in 0..width {
            let (x, y) = (x_at(col), y_at(row));
            let v = f.value_at(x, y).unwrap_or(lo);
            let g = (((v - lo) / span) * 200.0 + 30.0).round() as u8;
            img.put_pixel(col as u32, row as u32, Rgb([g, g, g]));
            lab[row * width + col] = labels.value_at(x, y).unwrap_or(f64::NAN);
        }
    }
    let g = f.grid();
    let inner_x = &g.xlines()[1..g.xlines().len() - 1];
    let inner_y = &g.ylines()[1..g.ylines().len() - 1];
    for &x in inner_x {
        let col = (((x - d.x0) / pw) as usize).min(width - 1);
        for row in 0..height {
            img.put_pixel(col as u32, row as u32, Rgb([40, 90, 230]));
        }
    }
    for &y in inner_y {
        let row = (((d.y1 - y) / ph) as usize).min(height - 1);
        for col in 0..width {
            img.put_pixel(col as u32, row as u32, Rgb([40, 90, 230]));
        }
    }
    for row in 0..height {
        for col in 0..width {
            let here = lab[row * width + col];
            let right = (col + 1 < width).then(|| lab[row * width + col + 1]);
            let below = (row + 1 < height).then(|| lab[(row + 1) * width + col]);
            if right.is_some_and(|r| r != here) || below.is_some_and(|b| b != here) {
                img.put_pixel(col as u32, row as u32, Rgb([230, 30, 30]));
            }
        }
    }
    img
}

/// Overlay size with `long` pixels along the longer side of the domain.
pub fn overlay_size(domain: Rect, long: usize) -> (usize, usize) {
    let (w, h) = (domain.width(), domain.height());
    if w >= h {
        (long, ((long as f64 * h / w).round() as usize).max(1))
    } else {
        (((long as f64 * w / h).round() as usize).max(1), long)
    }
}

pub fn write_overlay(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Summary of a segmentation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentationReport {
    pub command: String,
    pub input: String,
    pub solver: String,
    pub threshold: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_update: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub seed: u64,
    pub phases_requested: usize,
    pub phases: usize,
    /// Band means of the input over the final phases.
    pub constants: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    pub phase_areas: Vec<f64>,
    pub removed_phases: Vec<usize>,
    pub stop: StopReason,
    pub iterations: usize,
    pub energy: f64,
    pub grid_fit: GridFit,
    pub outputs: BTreeMap<String, String>,
    pub trace: IterationTrace,
}

/// Summary of a denoising run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiseReport {
    pub command: String,
    pub input: String,
    pub solver: String,
    pub lambda: f64,
    pub energy: f64,
    /// Energy of the input itself, an upper bound for the minimum.
    pub input_energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Distinct output values, largest first (omitted beyond 64).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    pub outputs: BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellset::CellSet;

    #[test]
    fn grays_are_spread() {
        assert_eq!(phase_grays(2), vec![255, 0]);
        assert_eq!(phase_grays(3), vec![255, 128, 0]);
        assert_eq!(phase_grays(1), vec![255]);
    }

    #[test]
    fn on_grid_fraction() {
        let domain = Rect::new(0.0, 4.0, 0.0, 4.0).unwrap();
        let f = PcrImage::from_rects(domain, 0.0, &[(Rect::new(1.0, 3.0, 1.0, 3.0).unwrap(), 1.0)]).unwrap();
        let fine = Arc::new(Grid::uniform(8, 8, 0.5).unwrap());
        let exact = f.refine_to(&fine).unwrap();
        assert_eq!(boundary_on_grid(&exact, f.grid()).fraction, 1.0);
        // Shift the square by half a unit: the vertical sides leave the grid of f.
        let shifted = PcrImage::from_rects(domain, 0.0, &[(Rect::new(1.5, 3.5, 1.0, 3.0).unwrap(), 1.0)]).unwrap();
        let fit = boundary_on_grid(&shifted.refine_to(&fine).unwrap(), f.grid());
        assert!(fit.fraction < 1.0);
        assert_eq!(fit.boundary_length, 8.0);
        assert_eq!(fit.on_grid_length, 4.0);
    }

    #[test]
    fn labels_and_raster_round_trip() {
        let g = Arc::new(Grid::uniform(2, 2, 1.0).unwrap());
        let chain = NestedChain::two_phase(CellSet::from_cells(&g, &[3]).unwrap());
        let lab = label_image(&chain).unwrap();
        assert_eq!(lab.values(), &[0.0, 0.0, 0.0, 1.0]);
        let r = Raster::from_pcr(&lab).unwrap();
        let back = raster_on_domain(&r, g.domain()).unwrap();
        assert_eq!(back.values(), lab.values());
    }
}
