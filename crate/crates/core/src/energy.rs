//! Closed-form energies on cell-aligned sets and PCR functions.
//!
//! Perimeters are relative to the open domain: edges on the domain boundary never count.

use std::borrow::Cow;
use std::sync::Arc;

use crate::cellset::{CellSet, NestedChain};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pcr::{PcrImage, PhaseConstants};

/// Anisotropic perimeter of `e` inside the domain.
pub fn per1(e: &CellSet) -> f64 {
    e.grid()
        .edges()
        .iter()
        .filter(|ed| e.contains(ed.a) != e.contains(ed.b))
        .map(|ed| ed.length)
        .sum()
}

/// Length of the boundary between `inner` and `outer \ inner`.
pub fn rel_per1(inner: &CellSet, outer: &CellSet) -> Result<f64> {
    if !inner.is_subset(outer) {
        return Err(Error::Containment("inner set is not contained in outer set".into()));
    }
    Ok(inner
        .grid()
        .edges()
        .iter()
        .filter(|ed| {
            let (a, b) = (inner.contains(ed.a), inner.contains(ed.b));
            (a && !b && outer.contains(ed.b)) || (b && !a && outer.contains(ed.a))
        })
        .map(|ed| ed.length)
        .sum())
}

/// Anisotropic total variation: sum over interior edges of length times jump.
pub fn tv(u: &PcrImage) -> f64 {
    let v = u.values();
    u.grid()
        .edges()
        .iter()
        .map(|e| e.length * (v[e.a] - v[e.b]).abs())
        .sum()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `f` expressed on `grid`, which must refine the grid of `f`.
pub fn on_grid<'a>(f: &'a PcrImage, grid: &Arc<Grid>) -> Result<Cow<'a, PcrImage>> {
    if Arc::ptr_eq(f.grid(), grid) || **f.grid() == **grid {
        Ok(Cow::Borrowed(f))
    } else {
        Ok(Cow::Owned(f.refine_to(grid)?))
    }
}

/// `set` expressed on `finer`, which must refine the grid of the set.
pub fn refine_set(set: &CellSet, finer: &Arc<Grid>) -> Result<CellSet> {
    if Arc::ptr_eq(set.grid(), finer) || **set.grid() == **finer {
        return CellSet::from_bits(finer, set.bits().to_vec());
    }
    let map = set.grid().refinement_map(finer)?;
    CellSet::from_bits(finer, map.iter().map(|&c| set.contains(c)).collect())
}

/// Common grid of a set and a datum, with both expressed on it.
fn align<'a>(set: &CellSet, f: &'a PcrImage) -> Result<(CellSet, Cow<'a, PcrImage>)> {
    if set.grid() == f.grid() || **set.grid() == **f.grid() {
        return Ok((set.clone(), Cow::Borrowed(f)));
    }
    let g = Arc::new(set.grid().common_refinement(f.grid())?);
    Ok((refine_set(set, &g)?, Cow::Owned(f.refine_to(&g)?)))
}

/// `sum over cells in region of area * (c - f)^2`. `f` must live on the region's grid.
pub fn squared_deviation(f: &PcrImage, region: &CellSet, c: f64) -> f64 {
    region
        .cells()
        .map(|k| {
            let d = c - f.value(k);
            f.grid().area(k) * d * d
        })
        .sum()
}

/// `sum over cells in region of area * (t - f)`.
pub fn linear_deviation(f: &PcrImage, region: &CellSet, t: f64) -> f64 {
    region.cells().map(|k| f.grid().area(k) * (t - f.value(k))).sum()
}

/// Area-weighted mean of `f` over `region`.
pub fn mean(f: &PcrImage, region: &CellSet) -> Result<f64> {
    let (region, f) = align(region, f)?;
    let area = region.area();
    if area <= 0.0 {
        return Err(Error::EmptyPhase { index: 0 });
    }
    let s: f64 = region.cells().map(|k| f.grid().area(k) * f.value(k)).sum();
    Ok(s / area)
}

/// Cells with value above `tau` (`strict`) or at least `tau`.
pub fn threshold(u: &PcrImage, tau: f64, strict: bool) -> CellSet {
    CellSet::from_predicate(u.grid(), |c| {
        let v = u.value(c);
        if strict {
            v > tau
        } else {
            v >= tau
        }
    })
}

/// `TV(u) + (lambda / 2) * integral of (u - f)^2`, on the common refinement of both grids.
pub fn energy_arof(u: &PcrImage, f: &PcrImage, lambda: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    let (u, f): (Cow<PcrImage>, Cow<PcrImage>) = if **u.grid() == **f.grid() {
        (Cow::Borrowed(u), Cow::Borrowed(f))
    } else {
        let g = Arc::new(u.grid().common_refinement(f.grid())?);
        (Cow::Owned(u.refine_to(&g)?), Cow::Owned(f.refine_to(&g)?))
    };
    let fid: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .zip(u.grid().areas())
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum();
    Ok(tv(&u) + 0.5 * lambda * fid)
}

/// Two-phase anisotropic Chan-Vese energy.
pub fn energy_acv(e: &CellSet, c1: f64, c2: f64, mu: f64, f: &PcrImage) -> Result<f64> {
    positive("mu", mu)?;
    let (e, f) = align(e, f)?;
    Ok(per1(&e) + mu * (squared_deviation(&f, &e, c1) + squared_deviation(&f, &e.complement(), c2)))
}

/// Relaxed two-phase energy; `+inf` when `u` leaves `[0, 1]`.
pub fn energy_g2(u: &PcrImage, c1: f64, c2: f64, mu: f64, f: &PcrImage) -> Result<f64> {
    positive("mu", mu)?;
    if !u.in_unit_range() {
        return Ok(f64::INFINITY);
    }
    let (u, f): (Cow<PcrImage>, Cow<PcrImage>) = if **u.grid() == **f.grid() {
        (Cow::Borrowed(u), Cow::Borrowed(f))
    } else {
        let g = Arc::new(u.grid().common_refinement(f.grid())?);
        (Cow::Owned(u.refine_to(&g)?), Cow::Owned(f.refine_to(&g)?))
    };
    let fid: f64 = (0..u.grid().cell_count())
        .map(|k| {
            let (uk, fk) = (u.value(k), f.value(k));
            u.grid().area(k) * (uk * (c1 - fk).powi(2) + (1.0 - uk) * (c2 - fk).powi(2))
        })
        .sum();
    Ok(tv(&u) + mu * fid)
}

fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        })
    }
}

/// Multiphase nested energy: each shared boundary counted once.
pub fn energy_gn(chain: &NestedChain, c: &PhaseConstants, mu: f64, f: &PcrImage) -> Result<f64> {
    positive("mu", mu)?;
    check_len("phase constants", chain.phases(), c.len())?;
    let f = on_grid(f, chain.grid())?;
    let g = chain.grid();
    let labels = chain.labels();
    // An edge between labels a < b is counted by exactly one level, j = b + 1, so the
    // perimeter sum is the total length of label changes.
    let per: f64 = g
        .edges()
        .iter()
        .filter(|e| labels[e.a] != labels[e.b])
        .map(|e| e.length)
        .sum();
    let fid: f64 = (0..g.cell_count())
        .map(|k| {
            let d = c.values[labels[k]] - f.value(k);
            g.area(k) * d * d
        })
        .sum();
    Ok(per + mu * fid)
}

/// Partition energy with per-phase weights; perimeters of the cumulative unions.
pub fn energy_cvn(
    partition: &[CellSet],
    c: &PhaseConstants,
    mu: &[f64],
    f: &PcrImage,
) -> Result<f64> {
    let n = partition.len();
    check_len("phase constants", n, c.len())?;
    check_len("phase weights", n, mu.len())?;
    if n == 0 {
        return Err(Error::Partition("empty partition".into()));
    }
    for &m in mu {
        positive("mu", m)?;
    }
    let grid = partition[0].grid().clone();
    let mut cover = CellSet::empty(&grid);
    for (i, p) in partition.iter().enumerate() {
        if !p.same_grid(&cover) {
            return Err(Error::GridMismatch(format!("phase {} lives on another grid", i + 1)));
        }
        if !p.is_disjoint(&cover) {
            return Err(Error::Partition(format!("phase {} overlaps earlier phases", i + 1)));
        }
        cover = cover.union(p)?;
    }
    if !cover.is_full() {
        return Err(Error::Partition("phases do not cover the domain".into()));
    }
    let f = on_grid(f, &grid)?;
    let mut total = 0.0;
    let mut acc = CellSet::empty(&grid);
    for (i, p) in partition.iter().enumerate() {
        acc = acc.union(p)?;
        total += per1(&acc) + mu[i] * squared_deviation(&f, p, c.values[i]);
    }
    Ok(total)
}

/// Two-phase truncated ROF energy `Per(S) + lambda * integral over S of (tau - f)`.
pub fn energy_trof2(set: &CellSet, tau: f64, lambda: f64, f: &PcrImage) -> Result<f64> {
    positive("lambda", lambda)?;
    let (set, f) = align(set, f)?;
    Ok(per1(&set) + lambda * linear_deviation(&f, &set, tau))
}

/// Multiphase truncated ROF energy over levels `1..n-1` with thresholds `tau`.
pub fn energy_trofn(chain: &NestedChain, tau: &[f64], lambda: f64, f: &PcrImage) -> Result<f64> {
    positive("lambda", lambda)?;
    check_len("thresholds", chain.phases() - 1, tau.len())?;
    let f = on_grid(f, chain.grid())?;
    Ok(tau
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = chain.set(i + 1);
            per1(s) + lambda * linear_deviation(&f, s, t)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn perimeters_of_example_sets() {
        let (f, a1, a2) = example();
        let a = a1.union(&a2).unwrap();
        assert_eq!(per1(&a1), 4.0);
        assert_eq!(per1(&a), 4.5);
        assert_eq!(per1(&CellSet::full(f.grid())), 0.0);
        assert_eq!(rel_per1(&a1, &a).unwrap(), 0.25);
        assert_eq!(rel_per1(&a1, &CellSet::full(f.grid())).unwrap(), 4.0);
        assert!(rel_per1(&a, &a1).is_err());
    }

    #[test]
    fn means_of_example_regions() {
        let (f, a1, _) = example();
        assert_eq!(mean(&f, &a1.complement()).unwrap(), 1.0 / 48.0);
        assert_eq!(mean(&f, &a1).unwrap(), 1.0);
        assert!(matches!(mean(&f, &CellSet::empty(f.grid())), Err(Error::EmptyPhase { .. })));
    }

    #[test]
    fn acv_of_a1_at_half_the_weight() {
        let (f, a1, a2) = example();
        let mu = 384.0 / 47.0;
        let e = energy_acv(&a1, 1.0, 1.0 / 48.0, mu, &f).unwrap();
        assert!((e - 4.5).abs() < 1e-12);
        let e = energy_acv(&a1.union(&a2).unwrap(), 1.0, 0.0, mu, &f).unwrap();
        assert!((e - 4.5).abs() < 1e-12);
        let e = energy_acv(&a1, 1.0, 1.0 / 48.0, 768.0 / 47.0, &f).unwrap();
        assert!((e - 5.0).abs() < 1e-12);
    }

    #[test]
    fn acv_symmetry_and_relaxation() {
        let (f, a1, _) = example();
        let e1 = energy_acv(&a1, 0.9, 0.1, 3.0, &f).unwrap();
        let e2 = energy_acv(&a1.complement(), 0.1, 0.9, 3.0, &f).unwrap();
        assert!((e1 - e2).abs() < 1e-12);
        let u = PcrImage::indicator(&a1);
        assert!((energy_g2(&u, 0.9, 0.1, 3.0, &f).unwrap() - e1).abs() < 1e-12);
        let bad = u.map(|v| 1.5 * v).unwrap();
        assert_eq!(energy_g2(&bad, 0.9, 0.1, 3.0, &f).unwrap(), f64::INFINITY);
    }

    #[test]
    fn arof_rejects_bad_lambda_and_refines() {
        let (f, _, _) = example();
        assert!(energy_arof(&f, &f, 0.0).is_err());
        assert_eq!(energy_arof(&f, &f, 5.0).unwrap(), 4.5);
        let fine = Arc::new(f.grid().subdivide(2).unwrap());
        let u = f.refine_to(&fine).unwrap().map(|v| 0.5 * v).unwrap();
        let a = energy_arof(&u, &f, 3.0).unwrap();
        let b = energy_arof(&u.simplify(), &f, 3.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn gn_with_two_phases_is_acv() {
        let (f, a1, _) = example();
        let chain = NestedChain::two_phase(a1.clone());
        let c = PhaseConstants::new(vec![0.8, 0.2]);
        let a = energy_gn(&chain, &c, 2.0, &f).unwrap();
        let b = energy_acv(&a1, 0.8, 0.2, 2.0, &f).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn threshold_conventions() {
        let (f, _, _) = example();
        assert!(threshold(&f, 1.0, true).is_empty());
        assert_eq!(threshold(&f, 1.0, false).area(), 17.0 / 16.0);
        assert!(threshold(&f, -0.1, true).is_full());
    }
}
