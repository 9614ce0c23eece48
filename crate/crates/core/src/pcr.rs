//! Piecewise-constant-on-rectangles images and their text format.
//!
//! ```text
//! PCR1
//! xlines: -1 -0.5 0.5 1
//! ylines: -1 -0.5 0.5 1
//! values:
//! 0 0 0
//! 0 1 0
//! 0 0 0
//! ```
//!
//! Value rows run from the top (largest y) down. Numbers are written with the shortest
//! representation that parses back to the same `f64`, so write/read is lossless.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::grid::{build_grid_from_polygons, EdgeAxis, Grid, Rect, RectilinearPolygon};

/// A grid plus one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PcrImage {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PcrImage {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                what: "cell values",
                expected: grid.cell_count(),
                actual: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell value {v} is not finite")));
        }
        Ok(PcrImage { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Result<Self> {
        let n = grid.cell_count();
        PcrImage::new(grid, vec![value; n])
    }

    /// `background` on `domain`, overwritten by each `(rect, value)` in order.
    pub fn from_rects(domain: Rect, background: f64, rects: &[(Rect, f64)]) -> Result<Self> {
        let polys: Vec<(RectilinearPolygon, f64)> =
            rects.iter().map(|(r, v)| (r.to_polygon(), *v)).collect();
        PcrImage::from_polygons(domain, background, &polys)
    }

    /// `background` on `domain`, overwritten by each `(polygon, value)` in order.
    pub fn from_polygons(
        domain: Rect,
        background: f64,
        polygons: &[(RectilinearPolygon, f64)],
    ) -> Result<Self> {
        let shapes: Vec<RectilinearPolygon> = polygons.iter().map(|(p, _)| p.clone()).collect();
        let grid = Arc::new(build_grid_from_polygons(domain, &shapes)?);
        let values = (0..grid.cell_count())
            .map(|c| {
                let (x, y) = grid.cell_center(c);
                polygons
                    .iter()
                    .rev()
                    .find(|(p, _)| p.contains(x, y))
                    .map_or(background, |(_, v)| *v)
            })
            .collect();
        PcrImage::new(grid, values)
    }

    /// Indicator of a cell set.
    pub fn indicator(set: &CellSet) -> Self {
        PcrImage {
            grid: set.grid().clone(),
            values: set.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        let ix = self.grid.locate_x(x)?;
        let iy = self.grid.locate_y(y)?;
        Some(self.values[self.grid.cell_index(ix, iy)])
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn in_unit_range(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Distinct values in decreasing order.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup();
        v
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.areas()).map(|(v, a)| v * a).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<PcrImage> {
        PcrImage::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Same function on a finer grid.
    pub fn refine_to(&self, finer: &Arc<Grid>) -> Result<PcrImage> {
        if Arc::ptr_eq(&self.grid, finer) || *self.grid == **finer {
            return Ok(PcrImage {
                grid: finer.clone(),
                values: self.values.clone(),
            });
        }
        let map = self.grid.refinement_map(finer)?;
        Ok(PcrImage {
            grid: finer.clone(),
            values: map.iter().map(|&c| self.values[c]).collect(),
        })
    }

    /// Lines of the grid that carry a jump of the function (always including the domain boundary).
    fn jump_lines(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let mut keep_x = vec![false; g.nx() + 1];
        let mut keep_y = vec![false; g.ny() + 1];
        keep_x[0] = true;
        keep_x[g.nx()] = true;
        keep_y[0] = true;
        keep_y[g.ny()] = true;
        for e in g.edges() {
            if self.values[e.a] != self.values[e.b] {
                match e.axis {
                    EdgeAxis::X => keep_x[e.line] = true,
                    EdgeAxis::Y => keep_y[e.line] = true,
                }
            }
        }
        let pick = |lines: &[f64], keep: &[bool]| {
            lines.iter().zip(keep).filter(|(_, &k)| k).map(|(&l, _)| l).collect()
        };
        (pick(g.xlines(), &keep_x), pick(g.ylines(), &keep_y))
    }

    /// The minimal grid containing every jump line of the function and the domain boundary.
    pub fn minimal_grid(&self) -> Grid {
        let (xs, ys) = self.jump_lines();
        Grid::new(xs, ys).expect("subset of valid lines including the boundary")
    }

    /// The same function represented on its minimal grid.
    pub fn simplify(&self) -> PcrImage {
        let coarse = Arc::new(self.minimal_grid());
        if *coarse == *self.grid {
            return self.clone();
        }
        let mut values = vec![0.0; coarse.cell_count()];
        let map = coarse.refinement_map(&self.grid).expect("minimal grid is coarser");
        for (fine, &c) in map.iter().enumerate() {
            values[c] = self.values[fine];
        }
        PcrImage {
            grid: coarse,
            values,
        }
    }

    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = String::from("PCR1\n");
        let _ = writeln!(s, "xlines: {}", join(g.xlines()));
        let _ = writeln!(s, "ylines: {}", join(g.ylines()));
        s.push_str("values:\n");
        for iy in (0..g.ny()).rev() {
            let row = &self.values[iy * g.nx()..(iy + 1) * g.nx()];
            let _ = writeln!(s, "{}", join(row));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<PcrImage> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let (n, header) = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        if header != "PCR1" {
            return Err(perr(n, format!("expected header PCR1, found {header:?}")));
        }
        let mut labelled = |label: &str| -> Result<(usize, Vec<f64>)> {
            let (n, l) = lines
                .next()
                .ok_or_else(|| perr(0, format!("missing {label} line")))?;
            let rest = l
                .strip_prefix(label)
                .ok_or_else(|| perr(n, format!("expected {label:?}")))?;
            Ok((n, parse_numbers(n, rest)?))
        };
        let (nx_line, xs) = labelled("xlines:")?;
        let (ny_line, ys) = labelled("ylines:")?;
        let (_, trailing) = labelled("values:")?;
        if !trailing.is_empty() {
            return Err(perr(ny_line + 1, "values must start on the next line".into()));
        }
        let grid = Grid::new(xs, ys).map_err(|e| perr(nx_line, e.to_string()))?;
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut rows = Vec::with_capacity(ny);
        for (n, l) in lines {
            let row = parse_numbers(n, l)?;
            if row.len() != nx {
                return Err(perr(n, format!("expected {nx} values, found {}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != ny {
            return Err(perr(0, format!("expected {ny} value rows, found {}", rows.len())));
        }
        let values = rows.into_iter().rev().flatten().collect();
        PcrImage::new(Arc::new(grid), values)
    }

    pub fn read(path: &Path) -> Result<PcrImage> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        PcrImage::parse_text(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn parse_numbers(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("bad number {tok:?}: {e}"),
            })
        })
        .collect()
}

/// Phase constants `c_1..c_n`, usually ordered decreasingly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConstants {
    pub values: Vec<f64>,
}

impl PhaseConstants {
    pub fn new(values: Vec<f64>) -> Self {
        PhaseConstants { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] > w[1])
    }

    pub fn require_ordered(&self) -> Result<()> {
        if self.is_ordered() {
            Ok(())
        } else {
            Err(Error::Unordered(format!("{:?}", self.values)))
        }
    }

    /// Midpoints `(c_i + c_{i+1}) / 2`.
    pub fn midpoints(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}
