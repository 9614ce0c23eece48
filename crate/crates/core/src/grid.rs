//! Rectangular grids, cells and the interior edges between them.
//!
//! A [`Grid`] is given by strictly increasing x-lines and y-lines. Cells are
//! indexed row-major from the bottom-left: `index = iy * nx + ix`, where `iy = 0`
//! is the row with the smallest y coordinate.

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::DegenerateRect(format!(
                "non-finite coordinates [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::DegenerateRect(format!(
                "zero or negative extent [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Rect { x0, x1, y0, y1 })
    }

    /// Square centred at `(cx, cy)` with half-side `r` (an l-infinity ball).
    pub fn square(cx: f64, cy: f64, r: f64) -> Result<Self> {
        Rect::new(cx - r, cx + r, cy - r, cy + r)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed containment.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn to_polygon(&self) -> RectilinearPolygon {
        RectilinearPolygon {
            vertices: vec![
                (self.x0, self.y0),
                (self.x1, self.y0),
                (self.x1, self.y1),
                (self.x0, self.y1),
            ],
        }
    }
}

/// A simple polygon whose sides are all horizontal or vertical.
#[derive(Debug, Clone, PartialEq)]
pub struct RectilinearPolygon {
    vertices: Vec<(f64, f64)>,
}

impl RectilinearPolygon {
    /// Vertices in order (either orientation); the closing side is implicit.
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::DegenerateRect(format!(
                "polygon needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, &(x, y)) in vertices.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::DegenerateRect(format!("vertex {i} is not finite")));
            }
            let (nx, ny) = vertices[(i + 1) % vertices.len()];
            let same_x = x == nx;
            let same_y = y == ny;
            if same_x && same_y {
                return Err(Error::DegenerateRect(format!("side {i} has zero length")));
            }
            if !same_x && !same_y {
                return Err(Error::NonAxisAligned(format!(
                    "side from ({x}, {y}) to ({nx}, {ny})"
                )));
            }
        }
        let poly = RectilinearPolygon { vertices };
        if poly.signed_area() == 0.0 {
            return Err(Error::DegenerateRect("polygon has zero area".into()));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (x0, y0) = self.vertices[i];
                let (x1, y1) = self.vertices[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Even-odd test; only meaningful for points off the boundary.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let (x0, y0) = self.vertices[i];
            let (x1, y1) = self.vertices[(i + 1) % n];
            // Horizontal ray to +x crosses vertical sides only.
            if x0 == x1 && x0 > x && ((y0 > y) != (y1 > y)) {
                inside = !inside;
            }
        }
        inside
    }

    pub fn bounding_box(&self) -> Rect {
        let mut r = Rect {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for &(x, y) in &self.vertices {
            r.x0 = r.x0.min(x);
            r.x1 = r.x1.max(x);
            r.y0 = r.y0.min(y);
            r.y1 = r.y1.max(y);
        }
        r
    }
}

/// Which family of grid lines an interior edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeAxis {
    /// Edge on a vertical x-line, separating horizontal neighbours.
    X,
    /// Edge on a horizontal y-line, separating vertical neighbours.
    Y,
}

/// Interior edge shared by two cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub axis: EdgeAxis,
    /// Index of the grid line the edge lies on.
    pub line: usize,
}

/// A grid on a rectangle: sorted x-lines and y-lines.
#[derive(Debug, Clone)]
pub struct Grid {
    xlines: Vec<f64>,
    ylines: Vec<f64>,
    widths: Vec<f64>,
    heights: Vec<f64>,
    areas: Vec<f64>,
    edges: Vec<Edge>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.xlines == other.xlines && self.ylines == other.ylines
    }
}

fn check_lines(name: &str, lines: &[f64]) -> Result<()> {
    if lines.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "{name} needs at least 2 coordinates, got {}",
            lines.len()
        )));
    }
    if let Some(v) = lines.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} contains non-finite value {v}")));
    }
    if let Some(w) = lines.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid(format!(
            "{name} not strictly increasing at {} >= {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl Grid {
    pub fn new(xlines: Vec<f64>, ylines: Vec<f64>) -> Result<Self> {
        check_lines("xlines", &xlines)?;
        check_lines("ylines", &ylines)?;
        let widths: Vec<f64> = xlines.windows(2).map(|w| w[1] - w[0]).collect();
        let heights: Vec<f64> = ylines.windows(2).map(|w| w[1] - w[0]).collect();
        if widths.iter().chain(&heights).any(|&d| d <= 0.0) {
            return Err(Error::InvalidGrid("cell with zero extent".into()));
        }
        let nx = widths.len();
        let ny = heights.len();
        let mut areas = Vec::with_capacity(nx * ny);
        for h in &heights {
            for w in &widths {
                areas.push(w * h);
            }
        }
        let mut edges = Vec::with_capacity((nx - 1) * ny + nx * (ny - 1));
        for (iy, &h) in heights.iter().enumerate() {
            for ix in 0..nx - 1 {
                edges.push(Edge {
                    a: iy * nx + ix,
                    b: iy * nx + ix + 1,
                    length: h,
                    axis: EdgeAxis::X,
                    line: ix + 1,
                });
            }
        }
        for iy in 0..ny - 1 {
            for (ix, &w) in widths.iter().enumerate() {
                edges.push(Edge {
                    a: iy * nx + ix,
                    b: (iy + 1) * nx + ix,
                    length: w,
                    axis: EdgeAxis::Y,
                    line: iy + 1,
                });
            }
        }
        Ok(Grid {
            xlines,
            ylines,
            widths,
            heights,
            areas,
            edges,
        })
    }

    /// Uniform grid of `nx` by `ny` square cells of side `pitch` with lower-left corner at the origin.
    pub fn uniform(nx: usize, ny: usize, pitch: f64) -> Result<Self> {
        let xs = (0..=nx).map(|i| i as f64 * pitch).collect();
        let ys = (0..=ny).map(|i| i as f64 * pitch).collect();
        Grid::new(xs, ys)
    }

    pub fn from_domain(domain: Rect) -> Self {
        Grid::new(vec![domain.x0, domain.x1], vec![domain.y0, domain.y1])
            .expect("a valid rectangle yields a valid grid")
    }

    pub fn xlines(&self) -> &[f64] {
        &self.xlines
    }

    pub fn ylines(&self) -> &[f64] {
        &self.ylines
    }

    pub fn nx(&self) -> usize {
        self.widths.len()
    }

    pub fn ny(&self) -> usize {
        self.heights.len()
    }

    pub fn cell_count(&self) -> usize {
        self.areas.len()
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx(), cell / self.nx())
    }

    pub fn width(&self, ix: usize) -> f64 {
        self.widths[ix]
    }

    pub fn height(&self, iy: usize) -> f64 {
        self.heights[iy]
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn domain(&self) -> Rect {
        Rect {
            x0: self.xlines[0],
            x1: *self.xlines.last().unwrap(),
            y0: self.ylines[0],
            y1: *self.ylines.last().unwrap(),
        }
    }

    pub fn domain_area(&self) -> f64 {
        self.domain().area()
    }

    pub fn cell_rect(&self, cell: usize) -> Rect {
        let (ix, iy) = self.cell_coords(cell);
        Rect {
            x0: self.xlines[ix],
            x1: self.xlines[ix + 1],
            y0: self.ylines[iy],
            y1: self.ylines[iy + 1],
        }
    }

    pub fn cell_center(&self, cell: usize) -> (f64, f64) {
        let r = self.cell_rect(cell);
        (0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1))
    }

    /// Column containing `x` (half-open cells, the last one closed).
    pub fn locate_x(&self, x: f64) -> Option<usize> {
        locate(&self.xlines, x)
    }

    pub fn locate_y(&self, y: f64) -> Option<usize> {
        locate(&self.ylines, y)
    }

    /// Every cell whose closed rectangle lies inside `rect` (edge-aligned rectangles map exactly).
    pub fn cells_in_rect(&self, rect: &Rect) -> Vec<usize> {
        (0..self.cell_count())
            .filter(|&c| rect.contains_rect(&self.cell_rect(c)))
            .collect()
    }

    /// True when every line of `self` is also a line of `finer` and both share the domain.
    pub fn is_refined_by(&self, finer: &Grid) -> bool {
        self.domain() == finer.domain()
            && self.xlines.iter().all(|x| finer.xlines.binary_search_by(|v| v.total_cmp(x)).is_ok())
            && self.ylines.iter().all(|y| finer.ylines.binary_search_by(|v| v.total_cmp(y)).is_ok())
    }

    /// Smallest grid containing the lines of both grids. Coordinates are merged by exact equality.
    pub fn common_refinement(&self, other: &Grid) -> Result<Grid> {
        if self.domain() != other.domain() {
            return Err(Error::GridMismatch(format!(
                "domains differ: {:?} vs {:?}",
                self.domain(),
                other.domain()
            )));
        }
        Grid::new(merge_lines(&self.xlines, &other.xlines), merge_lines(&self.ylines, &other.ylines))
    }

    /// For each cell of `finer`, the index of the cell of `self` containing it.
    pub fn refinement_map(&self, finer: &Grid) -> Result<Vec<usize>> {
        if !self.is_refined_by(finer) {
            return Err(Error::GridMismatch("target grid is not a refinement".into()));
        }
        let xmap: Vec<usize> = (0..finer.nx())
            .map(|i| self.locate_x(0.5 * (finer.xlines[i] + finer.xlines[i + 1])).unwrap())
            .collect();
        let ymap: Vec<usize> = (0..finer.ny())
            .map(|j| self.locate_y(0.5 * (finer.ylines[j] + finer.ylines[j + 1])).unwrap())
            .collect();
        Ok((0..finer.cell_count())
            .map(|c| {
                let (ix, iy) = finer.cell_coords(c);
                self.cell_index(xmap[ix], ymap[iy])
            })
            .collect())
    }

    /// Split every cell into `k` by `k` equal sub-cells.
    pub fn subdivide(&self, k: usize) -> Result<Grid> {
        if k == 0 {
            return Err(Error::InvalidParameter("subdivision factor must be positive".into()));
        }
        let split = |lines: &[f64]| {
            let mut out = Vec::with_capacity((lines.len() - 1) * k + 1);
            for w in lines.windows(2) {
                for s in 0..k {
                    out.push(w[0] + (w[1] - w[0]) * s as f64 / k as f64);
                }
            }
            out.push(*lines.last().unwrap());
            out
        };
        Grid::new(split(&self.xlines), split(&self.ylines))
    }

    /// Grid with every coordinate multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Grid> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {s}")));
        }
        Grid::new(
            self.xlines.iter().map(|x| x * s).collect(),
            self.ylines.iter().map(|y| y * s).collect(),
        )
    }

    /// True if every cell is a square of the same side.
    pub fn uniform_pitch(&self) -> Option<f64> {
        let p = self.widths[0];
        let same = |v: &f64| (v - p).abs() <= 1e-12 * p;
        (self.widths.iter().all(same) && self.heights.iter().all(same)).then_some(p)
    }
}

fn locate(lines: &[f64], v: f64) -> Option<usize> {
    let n = lines.len() - 1;
    if v < lines[0] || v > lines[n] {
        return None;
    }
    let idx = lines.partition_point(|&l| l <= v);
    Some(idx.saturating_sub(1).min(n - 1))
}

fn merge_lines(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().chain(b).copied().collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup();
    out
}

/// Minimal grid on `domain` that contains every side of every polygon.
///
/// Polygon vertices must lie in the closed domain.
pub fn build_grid_from_polygons(domain: Rect, polygons: &[RectilinearPolygon]) -> Result<Grid> {
    let mut xs = vec![domain.x0, domain.x1];
    let mut ys = vec![domain.y0, domain.y1];
    for (k, poly) in polygons.iter().enumerate() {
        for &(x, y) in poly.vertices() {
            if !domain.contains(x, y) {
                return Err(Error::InvalidGrid(format!(
                    "polygon {k} vertex ({x}, {y}) lies outside the domain"
                )));
            }
            xs.push(x);
            ys.push(y);
        }
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    ys.sort_by(|a, b| a.total_cmp(b));
    ys.dedup();
    Grid::new(xs, ys)
}

/// Minimal grid on `domain` containing the sides of the given rectangles.
pub fn build_grid_from_rects(domain: Rect, rects: &[Rect]) -> Result<Grid> {
    let polys: Vec<RectilinearPolygon> = rects.iter().map(Rect::to_polygon).collect();
    build_grid_from_polygons(domain, &polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lines() {
        assert!(Grid::new(vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(Grid::new(vec![0.0, f64::NAN], vec![0.0, 1.0]).is_err());
        assert!(Grid::new(vec![1.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn cell_areas_sum_to_domain() {
        let g = Grid::new(vec![-1.0, -0.5, 0.25, 0.5, 1.0], vec![-1.0, -0.5, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(g.cell_count(), 16);
        let total: f64 = g.areas().iter().sum();
        assert!((total - 4.0).abs() <= 1e-12 * 4.0);
        assert_eq!(g.edges().len(), 3 * 4 * 2);
    }

    #[test]
    fn polygon_rejects_diagonal_side() {
        let err = RectilinearPolygon::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 1.5)]);
        assert!(matches!(err, Err(Error::NonAxisAligned(_))));
    }

    #[test]
    fn degenerate_rect_rejected() {
        assert!(matches!(Rect::new(0.0, 0.0, 0.0, 1.0), Err(Error::DegenerateRect(_))));
    }

    #[test]
    fn l_shaped_polygon_contains() {
        let p = RectilinearPolygon::new(vec![
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
        ])
        .unwrap();
        assert!(p.contains(0.5, 1.5));
        assert!(p.contains(1.5, 0.5));
        assert!(!p.contains(1.5, 1.5));
        assert_eq!(p.area(), 3.0);
    }

    #[test]
    fn refinement_map_locates_parents() {
        let g = Grid::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0]).unwrap();
        let fine = g.subdivide(2).unwrap();
        let map = g.refinement_map(&fine).unwrap();
        assert_eq!(map.len(), 8);
        assert_eq!(map[0], 0);
        assert_eq!(map[3], 1);
        assert_eq!(map[7], 1);
        assert_eq!(map[4], 0);
    }

    #[test]
    fn common_refinement_merges_exactly() {
        let a = Grid::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        let b = Grid::new(vec![0.0, 0.25, 1.0], vec![0.0, 0.5, 1.0]).unwrap();
        let c = a.common_refinement(&b).unwrap();
        assert_eq!(c.xlines(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(c.ylines(), &[0.0, 0.5, 1.0]);
        assert!(a.is_refined_by(&c) && b.is_refined_by(&c));
    }
}
