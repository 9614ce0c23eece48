//! Binary perimeter-plus-linear problems on the cell graph, solved by minimum cut, and the
//! exact anisotropic ROF solver built on a parametric family of such cuts.

use std::sync::Arc;

use serde::Serialize;

use crate::cellset::CellSet;
use crate::energy::{on_grid, per1};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::grid::Grid;
use crate::pcr::PcrImage;

/// Which minimizer to return when several exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extremal {
    /// Intersection of all minimizers.
    #[default]
    Minimal,
    /// Union of all minimizers.
    Maximal,
}

/// Minimize `sum over E of unary + sum over cut edges of pairwise` with `forced_in <= E` and
/// `E` disjoint from `forced_out`.
#[derive(Debug, Clone)]
pub struct CutProblem {
    grid: Arc<Grid>,
    unary: Vec<f64>,
    pairwise: Vec<f64>,
    forced_in: CellSet,
    forced_out: CellSet,
}

#[derive(Serialize)]
struct CutDump<'a> {
    xlines: &'a [f64],
    ylines: &'a [f64],
    unary: &'a [f64],
    pairwise: &'a [f64],
    forced_in: Vec<usize>,
    forced_out: Vec<usize>,
}

impl CutProblem {
    pub fn new(grid: Arc<Grid>, unary: Vec<f64>, pairwise: Vec<f64>) -> Result<Self> {
        if unary.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                what: "unary weights",
                expected: grid.cell_count(),
                actual: unary.len(),
            });
        }
        if pairwise.len() != grid.edges().len() {
            return Err(Error::LengthMismatch {
                what: "pairwise weights",
                expected: grid.edges().len(),
                actual: pairwise.len(),
            });
        }
        if let Some(u) = unary.iter().find(|u| !u.is_finite()) {
            return Err(Error::InvalidParameter(format!("unary weight {u} is not finite")));
        }
        if let Some(w) = pairwise.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "pairwise weight {w} must be finite and nonnegative"
            )));
        }
        Ok(CutProblem {
            forced_in: CellSet::empty(&grid),
            forced_out: CellSet::empty(&grid),
            grid,
            unary,
            pairwise,
        })
    }

    /// Pairwise weights equal to the edge lengths, so the pairwise term is the perimeter.
    pub fn geometric(grid: Arc<Grid>, unary: Vec<f64>) -> Result<Self> {
        let pairwise = grid.edges().iter().map(|e| e.length).collect();
        CutProblem::new(grid, unary, pairwise)
    }

    /// `Per(E) + mu * (integral over E of (c1 - f)^2 - (c2 - f)^2)`: the two-phase energy
    /// minus the constant `mu * integral of (c2 - f)^2`.
    pub fn two_phase(f: &PcrImage, c1: f64, c2: f64, mu: f64) -> Result<Self> {
        let g = f.grid();
        let unary = (0..g.cell_count())
            .map(|k| mu * g.area(k) * (c1 - c2) * (c1 + c2 - 2.0 * f.value(k)))
            .collect();
        CutProblem::geometric(g.clone(), unary)
    }

    /// `Per(E) + lambda * integral over E of (tau - f)`.
    pub fn truncated_rof(f: &PcrImage, tau: f64, lambda: f64) -> Result<Self> {
        let g = f.grid();
        let unary = (0..g.cell_count())
            .map(|k| lambda * g.area(k) * (tau - f.value(k)))
            .collect();
        CutProblem::geometric(g.clone(), unary)
    }

    pub fn with_forced(mut self, forced_in: CellSet, forced_out: CellSet) -> Result<Self> {
        if !forced_in.same_grid(&forced_out) || !forced_in.same_grid(&self.forced_in) {
            return Err(Error::GridMismatch("forced sets live on another grid".into()));
        }
        if !forced_in.is_disjoint(&forced_out) {
            return Err(Error::Infeasible("a cell is both forced in and forced out".into()));
        }
        self.forced_in = forced_in;
        self.forced_out = forced_out;
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn unary(&self) -> &[f64] {
        &self.unary
    }

    pub fn pairwise(&self) -> &[f64] {
        &self.pairwise
    }

    pub fn forced_in(&self) -> &CellSet {
        &self.forced_in
    }

    pub fn forced_out(&self) -> &CellSet {
        &self.forced_out
    }

    /// Objective value of `set`, ignoring the constraints.
    pub fn energy(&self, set: &CellSet) -> f64 {
        let u: f64 = set.cells().map(|k| self.unary[k]).sum();
        let p: f64 = self
            .grid
            .edges()
            .iter()
            .zip(&self.pairwise)
            .filter(|(e, _)| set.contains(e.a) != set.contains(e.b))
            .map(|(_, w)| w)
            .sum();
        u + p
    }

    pub fn is_feasible(&self, set: &CellSet) -> bool {
        self.forced_in.is_subset(set) && set.is_disjoint(&self.forced_out)
    }

    /// Unary weights as a PCR image (weight per unit area), for diagnostic dumps.
    pub fn unary_density(&self) -> Result<PcrImage> {
        let vals = self
            .unary
            .iter()
            .enumerate()
            .map(|(k, u)| u / self.grid.area(k))
            .collect();
        PcrImage::new(self.grid.clone(), vals)
    }

    /// JSON sidecar with every weight and constraint.
    pub fn sidecar_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CutDump {
            xlines: self.grid.xlines(),
            ylines: self.grid.ylines(),
            unary: &self.unary,
            pairwise: &self.pairwise,
            forced_in: self.forced_in.cells().collect(),
            forced_out: self.forced_out.cells().collect(),
        })?)
    }
}

/// Global minimizer of `p` (the minimal one) and its energy.
pub fn min_cut_binary(p: &CutProblem) -> Result<(CellSet, f64)> {
    min_cut_binary_with(p, Extremal::Minimal)
}

/// Global minimizer of `p` and its energy, choosing the minimal or maximal minimizer.
///
/// Forced cells are contracted away: an edge from a free cell to a forced-in cell becomes a
/// unary reward for including the free cell, and one to a forced-out cell a unary penalty.
pub fn min_cut_binary_with(p: &CutProblem, which: Extremal) -> Result<(CellSet, f64)> {
    if !p.forced_in.is_disjoint(&p.forced_out) {
        return Err(Error::Infeasible("a cell is both forced in and forced out".into()));
    }
    let g = &p.grid;
    let cells = g.cell_count();
    let mut node = vec![usize::MAX; cells];
    let mut free = Vec::new();
    for (k, slot) in node.iter_mut().enumerate() {
        if !p.forced_in.contains(k) && !p.forced_out.contains(k) {
            *slot = free.len();
            free.push(k);
        }
    }
    let mut result = p.forced_in.clone();
    if free.is_empty() {
        return Ok((result.clone(), p.energy(&result)));
    }
    let mut unary: Vec<f64> = free.iter().map(|&k| p.unary[k]).collect();
    let (s, t) = (free.len(), free.len() + 1);
    let mut net = FlowNetwork::new(free.len() + 2, s, t);
    for (e, &w) in g.edges().iter().zip(&p.pairwise) {
        if w == 0.0 {
            continue;
        }
        match (node[e.a], node[e.b]) {
            (usize::MAX, usize::MAX) => {}
            (usize::MAX, j) => unary[j] += if p.forced_in.contains(e.a) { -w } else { w },
            (i, usize::MAX) => unary[i] += if p.forced_in.contains(e.b) { -w } else { w },
            (i, j) => net.add_edge(i, j, w, w),
        }
    }
    for (i, &u) in unary.iter().enumerate() {
        if u < 0.0 {
            net.add_arc(s, i, -u);
        } else if u > 0.0 {
            net.add_arc(i, t, u);
        }
    }
    net.max_flow();
    let side = match which {
        Extremal::Minimal => net.source_side(),
        Extremal::Maximal => net.maximal_source_side(),
    };
    for (i, &k) in free.iter().enumerate() {
        if side[i] {
            result.insert(k);
        }
    }
    let energy = p.energy(&result);
    Ok((result, energy))
}

/// Smallest minimizer of `Per(E) + lambda * integral over E of (tau - f)` on the grid of `f`.
///
/// When the minimizer is not unique the largest one is computed too and logged at debug
/// level; the smallest is returned.
pub fn parametric_cut(f: &PcrImage, tau: f64, lambda: f64) -> Result<CellSet> {
    let p = CutProblem::truncated_rof(f, tau, lambda)?;
    let (set, energy) = min_cut_binary(&p)?;
    if log::log_enabled!(log::Level::Debug) {
        let (largest, _) = min_cut_binary_with(&p, Extremal::Maximal)?;
        if largest != set {
            log::debug!(
                "tau {tau}: minimizers of area {} and {} tie at energy {energy}; keeping the smaller",
                set.area(),
                largest.area()
            );
        }
    }
    Ok(set)
}

/// Offset used to probe just above and below a candidate level value.
const PROBE: f64 = 1e-10;

/// Probe offset large enough that its effect on the cut survives flow round-off.
fn probe(g: &Grid, lambda: f64) -> f64 {
    let min_area = g.areas().iter().copied().fold(f64::INFINITY, f64::min);
    let scale = g.edges().iter().map(|e| e.length).fold(1.0, f64::max);
    PROBE.max(1e-12 * scale / (lambda * min_area))
}

/// Exact minimizer of `TV(u) + (lambda / 2) * integral of (u - f)^2`.
///
/// The solution is computed on the minimal grid of `f` and returned on the grid of `f`.
/// Cells are kept in groups ordered by decreasing value. For a group `G` with the higher
/// groups `A` above it, the only candidate value for a level set `A + G` is
/// `v = mean_G(f) - (Per(A + G) - Per(A)) / (lambda |G|)`; cutting just above and just below
/// `v` either confirms `G` as one level set or splits it.
pub fn solve_arof_exact(f: &PcrImage, lambda: f64) -> Result<PcrImage> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if f.distinct_values().len() == 1 {
        return Ok(f.clone());
    }
    let coarse = f.simplify();
    let w = solve_on_grid(&coarse, lambda)?;
    Ok(on_grid(&w, f.grid())?.into_owned())
}

fn solve_on_grid(f: &PcrImage, lambda: f64) -> Result<PcrImage> {
    let g = f.grid();
    let cells = g.cell_count();
    let delta = probe(g, lambda);
    let mut groups: Vec<(Vec<usize>, Option<f64>)> = vec![((0..cells).collect(), None)];
    let mut i = 0;
    while i < groups.len() {
        if groups[i].1.is_some() {
            i += 1;
            continue;
        }
        let above = CellSet::from_cells(g, &groups[..i].iter().flat_map(|(c, _)| c.clone()).collect::<Vec<_>>())?;
        let group = CellSet::from_cells(g, &groups[i].0)?;
        let upto = above.union(&group)?;
        let area = group.area();
        let integral: f64 = group.cells().map(|k| g.area(k) * f.value(k)).sum();
        let v = integral / area - (per1(&upto) - per1(&above)) / (lambda * area);

        let restricted = |tau: f64| -> Result<CellSet> {
            let p = CutProblem::truncated_rof(f, tau, lambda)?
                .with_forced(above.clone(), upto.complement())?;
            min_cut_binary(&p)?.0.difference(&above)
        };
        // A probe that keeps all or nothing of the group is not a split.
        let proper = |s: &CellSet| !s.is_empty() && s.count() < group.count();
        let hi = restricted(v + delta)?;
        let split = if proper(&hi) {
            Some(hi)
        } else {
            let lo = restricted(v - delta)?;
            proper(&lo).then_some(lo)
        };
        match split {
            Some(upper) => {
                let lower = group.difference(&upper)?;
                groups.splice(
                    i..=i,
                    [(upper.cells().collect(), None), (lower.cells().collect(), None)],
                );
            }
            None => {
                groups[i].1 = Some(v);
                i += 1;
            }
        }
    }
    let mut values = vec![0.0; cells];
    for (members, v) in &groups {
        for &k in members {
            values[k] = v.expect("every group is resolved");
        }
    }
    log::debug!("exact solver: {} level sets on {} cells", groups.len(), cells);
    PcrImage::new(g.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_acv, energy_arof, squared_deviation, threshold};
    use crate::grid::Rect;

    fn example() -> (PcrImage, CellSet, CellSet) {
        let domain = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        let a1 = Rect::new(-0.5, 0.5, -0.5, 0.5).unwrap();
        let a2 = Rect::new(0.25, 0.5, 0.5, 0.75).unwrap();
        let f = PcrImage::from_rects(domain, 0.0, &[(a1, 1.0), (a2, 1.0)]).unwrap();
        let g = f.grid();
        let s1 = CellSet::from_cells(g, &g.cells_in_rect(&a1)).unwrap();
        let s2 = CellSet::from_cells(g, &g.cells_in_rect(&a2)).unwrap();
        (f, s1, s2)
    }

    #[test]
    fn trivial_unaries() {
        let g = Arc::new(Grid::uniform(3, 2, 0.5).unwrap());
        let pos = CutProblem::geometric(g.clone(), g.areas().to_vec()).unwrap();
        let (e, v) = min_cut_binary(&pos).unwrap();
        assert!(e.is_empty());
        assert_eq!(v, 0.0);
        let neg = CutProblem::geometric(g.clone(), g.areas().iter().map(|a| -a).collect()).unwrap();
        let (e, v) = min_cut_binary(&neg).unwrap();
        assert!(e.is_full());
        assert!((v + g.domain_area()).abs() < 1e-12);
    }

    #[test]
    fn two_cells_isolate_negative() {
        let g = Arc::new(Grid::uniform(2, 1, 1.0).unwrap());
        let p = CutProblem::geometric(g, vec![-5.0, 5.0]).unwrap();
        let (e, v) = min_cut_binary(&p).unwrap();
        assert_eq!(e.cells().collect::<Vec<_>>(), vec![0]);
        assert_eq!(v, -4.0);
    }

    #[test]
    fn forced_constraints_respected() {
        let g = Arc::new(Grid::uniform(3, 1, 1.0).unwrap());
        let p = CutProblem::geometric(g.clone(), vec![10.0, -0.5, 10.0]).unwrap();
        let fin = CellSet::from_cells(&g, &[0]).unwrap();
        let fout = CellSet::from_cells(&g, &[2]).unwrap();
        let p = p.with_forced(fin.clone(), fout.clone()).unwrap();
        let (e, v) = min_cut_binary(&p).unwrap();
        assert!(p.is_feasible(&e));
        // {0}: 10 + 1 ; {0,1}: 9.5 + 1
        assert_eq!(e.cells().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(v, 10.5);
        assert!(CutProblem::geometric(g, vec![0.0; 3]).unwrap().with_forced(fin.clone(), fin).is_err());
    }

    #[test]
    fn tie_selects_minimal_or_maximal() {
        let g = Arc::new(Grid::uniform(1, 1, 1.0).unwrap());
        let p = CutProblem::geometric(g, vec![0.0]).unwrap();
        assert!(min_cut_binary_with(&p, Extremal::Minimal).unwrap().0.is_empty());
        assert!(min_cut_binary_with(&p, Extremal::Maximal).unwrap().0.is_full());
    }

    #[test]
    fn example_denoising_values() {
        let (f, a1, a2) = example();
        let w = solve_arof_exact(&f, 16.0).unwrap();
        for k in 0..f.grid().cell_count() {
            let expected = if a1.contains(k) {
                0.75
            } else if a2.contains(k) {
                0.5
            } else {
                9.0 / 94.0
            };
            assert!((w.value(k) - expected).abs() < 1e-9, "cell {k}: {}", w.value(k));
        }
        assert_eq!(threshold(&w, 49.0 / 96.0, true), a1);
    }

    #[test]
    fn example_cut_at_corrected_weight() {
        let (f, a1, _) = example();
        let (c1, c2, mu) = (1.0, 1.0 / 48.0, 384.0 / 47.0);
        let p = CutProblem::two_phase(&f, c1, c2, mu).unwrap();
        let (e, v) = min_cut_binary(&p).unwrap();
        assert_eq!(e, a1);
        let full = energy_acv(&a1, c1, c2, mu, &f).unwrap();
        let shift = mu * squared_deviation(&f, &CellSet::full(f.grid()), c2);
        assert!((v - (full - shift)).abs() < 1e-9);
    }

    #[test]
    fn constant_datum_is_fixed() {
        let g = Arc::new(Grid::uniform(4, 3, 0.25).unwrap());
        let f = PcrImage::constant(g, 0.37).unwrap();
        let w = solve_arof_exact(&f, 2.0).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.37));
    }

    #[test]
    fn small_lambda_gives_mean() {
        let (f, _, _) = example();
        let w = solve_arof_exact(&f, 1e-3).unwrap();
        let m = f.integral() / 4.0;
        assert!(w.values().iter().all(|v| (v - m).abs() < 1e-12));
        assert!(energy_arof(&w, &f, 1e-3).unwrap() <= energy_arof(&f, &f, 1e-3).unwrap());
    }

    #[test]
    fn sidecar_lists_constraints() {
        let (f, a1, _) = example();
        let p = CutProblem::two_phase(&f, 1.0, 0.0, 1.0)
            .unwrap()
            .with_forced(a1.clone(), CellSet::empty(f.grid()))
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.sidecar_json().unwrap()).unwrap();
        assert_eq!(v["forced_in"].as_array().unwrap().len(), a1.count());
        assert_eq!(p.unary_density().unwrap().grid().cell_count(), 16);
    }
}
