//! Unions of grid cells and nested chains of them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A union of cells of a grid. Every such set is a rectilinear polygon with sides on the grid.
#[derive(Debug, Clone)]
pub struct CellSet {
    grid: Arc<Grid>,
    bits: Vec<bool>,
}

impl PartialEq for CellSet {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid) && self.bits == other.bits
    }
}

impl CellSet {
    pub fn empty(grid: &Arc<Grid>) -> Self {
        CellSet {
            grid: grid.clone(),
            bits: vec![false; grid.cell_count()],
        }
    }

    pub fn full(grid: &Arc<Grid>) -> Self {
        CellSet {
            grid: grid.clone(),
            bits: vec![true; grid.cell_count()],
        }
    }

    pub fn from_bits(grid: &Arc<Grid>, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                what: "cell membership",
                expected: grid.cell_count(),
                actual: bits.len(),
            });
        }
        Ok(CellSet {
            grid: grid.clone(),
            bits,
        })
    }

    pub fn from_cells(grid: &Arc<Grid>, cells: &[usize]) -> Result<Self> {
        let mut s = CellSet::empty(grid);
        for &c in cells {
            if c >= grid.cell_count() {
                return Err(Error::InvalidParameter(format!(
                    "cell {c} out of range for {} cells",
                    grid.cell_count()
                )));
            }
            s.bits[c] = true;
        }
        Ok(s)
    }

    /// Set whose `k`-th cell is present iff bit `k` of `mask` is set.
    pub fn from_mask(grid: &Arc<Grid>, mask: u64) -> Self {
        let bits = (0..grid.cell_count()).map(|k| k < 64 && mask >> k & 1 == 1).collect();
        CellSet {
            grid: grid.clone(),
            bits,
        }
    }

    pub fn from_predicate(grid: &Arc<Grid>, pred: impl Fn(usize) -> bool) -> Self {
        CellSet {
            grid: grid.clone(),
            bits: (0..grid.cell_count()).map(pred).collect(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.bits[cell]
    }

    pub fn insert(&mut self, cell: usize) {
        self.bits[cell] = true;
    }

    pub fn remove(&mut self, cell: usize) {
        self.bits[cell] = false;
    }

    pub fn toggle(&mut self, cell: usize) {
        self.bits[cell] = !self.bits[cell];
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn area(&self) -> f64 {
        self.cells().fold(0.0, |a, c| a + self.grid.area(c))
    }

    pub fn same_grid(&self, other: &CellSet) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    fn check_grid(&self, other: &CellSet) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch("cell sets live on different grids".into()))
        }
    }

    fn zip(&self, other: &CellSet, op: impl Fn(bool, bool) -> bool) -> Result<CellSet> {
        self.check_grid(other)?;
        Ok(CellSet {
            grid: self.grid.clone(),
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.zip(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &CellSet) -> Result<CellSet> {
        self.zip(other, |a, b| a != b)
    }

    pub fn complement(&self) -> CellSet {
        CellSet {
            grid: self.grid.clone(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.same_grid(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.same_grid(other) && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !(a && b))
    }

    /// Bitmask of membership for grids with at most 64 cells.
    pub fn mask(&self) -> Option<u64> {
        (self.bits.len() <= 64).then(|| {
            self.bits
                .iter()
                .enumerate()
                .fold(0u64, |m, (k, &b)| if b { m | 1 << k } else { m })
        })
    }
}

/// Result of [`NestedChain::remove_empty_bands`].
#[derive(Debug, Clone)]
pub struct BandRemoval {
    pub chain: NestedChain,
    /// 1-based indices (in the original chain) of the removed phases.
    pub removed_phases: Vec<usize>,
    /// Original indices of the sets that were kept, in order.
    pub kept_sets: Vec<usize>,
}

/// Nested chain `{} = S_0 <= S_1 <= ... <= S_n = domain`. Phase `i` is the band `S_i \ S_{i-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedChain {
    sets: Vec<CellSet>,
}

impl NestedChain {
    pub fn new(sets: Vec<CellSet>) -> Result<Self> {
        if sets.len() < 2 {
            return Err(Error::Containment(format!(
                "a chain needs at least 2 sets, got {}",
                sets.len()
            )));
        }
        if !sets[0].is_empty() {
            return Err(Error::Containment("first set of a chain must be empty".into()));
        }
        if !sets.last().unwrap().is_full() {
            return Err(Error::Containment("last set of a chain must be the whole domain".into()));
        }
        for (i, w) in sets.windows(2).enumerate() {
            if !w[0].same_grid(&w[1]) {
                return Err(Error::GridMismatch(format!("chain sets {i} and {} differ in grid", i + 1)));
            }
            if !w[0].is_subset(&w[1]) {
                return Err(Error::Containment(format!("set {i} is not contained in set {}", i + 1)));
            }
        }
        Ok(NestedChain { sets })
    }

    /// Two-phase chain `{}, inner, domain`.
    pub fn two_phase(inner: CellSet) -> Self {
        let grid = inner.grid().clone();
        NestedChain {
            sets: vec![CellSet::empty(&grid), inner, CellSet::full(&grid)],
        }
    }

    /// Chain from a labelling: cell with label `l` (0-based phase) belongs to `S_j` for `j > l`.
    pub fn from_labels(grid: &Arc<Grid>, labels: &[usize], n: usize) -> Result<Self> {
        if labels.len() != grid.cell_count() {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: grid.cell_count(),
                actual: labels.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= n) {
            return Err(Error::InvalidParameter(format!("label {l} out of range for {n} phases")));
        }
        let sets = (0..=n)
            .map(|j| CellSet::from_predicate(grid, |c| labels[c] < j))
            .collect();
        Ok(NestedChain { sets })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.sets[0].grid()
    }

    /// Number of phases `n`.
    pub fn phases(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn sets(&self) -> &[CellSet] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &CellSet {
        &self.sets[i]
    }

    /// Replace `S_i` (0 < i < n), keeping nestedness.
    pub fn replace(&mut self, i: usize, set: CellSet) -> Result<()> {
        if i == 0 || i >= self.phases() {
            return Err(Error::InvalidParameter(format!("level {i} is not an inner level")));
        }
        if !self.sets[i - 1].is_subset(&set) || !set.is_subset(&self.sets[i + 1]) {
            return Err(Error::Containment(format!("replacement breaks nesting at level {i}")));
        }
        self.sets[i] = set;
        Ok(())
    }

    /// Band of phase `i` (1-based): `S_i \ S_{i-1}`.
    pub fn band(&self, i: usize) -> CellSet {
        self.sets[i].difference(&self.sets[i - 1]).expect("chain sets share a grid")
    }

    pub fn bands(&self) -> Vec<CellSet> {
        (1..=self.phases()).map(|i| self.band(i)).collect()
    }

    /// 0-based phase label of each cell.
    pub fn labels(&self) -> Vec<usize> {
        let cells = self.grid().cell_count();
        (0..cells)
            .map(|c| (1..=self.phases()).find(|&j| self.sets[j].contains(c)).unwrap() - 1)
            .collect()
    }

    /// Drop zero-area bands.
    ///
    /// An empty band `j < n` is removed by deleting `S_j`; an empty last band deletes `S_{n-1}`.
    pub fn remove_empty_bands(&self) -> BandRemoval {
        let mut sets = self.sets.clone();
        let mut original: Vec<usize> = (0..sets.len()).collect();
        let mut removed_phases = Vec::new();
        let mut j = 1;
        while j < sets.len() && sets.len() > 2 {
            if sets[j].difference(&sets[j - 1]).unwrap().area() > 0.0 {
                j += 1;
                continue;
            }
            removed_phases.push(original[j]);
            let drop = if j < sets.len() - 1 { j } else { j - 1 };
            sets.remove(drop);
            original.remove(drop);
            if drop < j {
                j -= 1;
            }
        }
        BandRemoval {
            chain: NestedChain { sets },
            removed_phases,
            kept_sets: original,
        }
    }

    /// Sum over levels of the area of `S_i^a xor S_i^b`, squared per level.
    pub fn squared_change(&self, other: &NestedChain) -> Result<f64> {
        if self.phases() != other.phases() {
            return Err(Error::LengthMismatch {
                what: "chain levels",
                expected: self.phases(),
                actual: other.phases(),
            });
        }
        let mut total = 0.0;
        for (a, b) in self.sets.iter().zip(&other.sets) {
            let d = a.symmetric_difference(b)?.area();
            total += d * d;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid3() -> Arc<Grid> {
        Arc::new(Grid::uniform(3, 1, 1.0).unwrap())
    }

    #[test]
    fn set_algebra() {
        let g = grid3();
        let a = CellSet::from_cells(&g, &[0, 1]).unwrap();
        let b = CellSet::from_cells(&g, &[1, 2]).unwrap();
        assert_eq!(a.union(&b).unwrap().count(), 3);
        assert_eq!(a.intersection(&b).unwrap().count(), 1);
        assert_eq!(a.symmetric_difference(&b).unwrap().area(), 2.0);
        assert!(a.intersection(&b).unwrap().is_subset(&a));
        assert_eq!(a.complement().cells().collect::<Vec<_>>(), vec![2]);
        assert_eq!(a.mask(), Some(0b011));
        assert_eq!(CellSet::from_mask(&g, 0b011), a);
    }

    #[test]
    fn chain_validation() {
        let g = grid3();
        let e = CellSet::empty(&g);
        let f = CellSet::full(&g);
        let a = CellSet::from_cells(&g, &[0]).unwrap();
        let b = CellSet::from_cells(&g, &[1]).unwrap();
        assert!(NestedChain::new(vec![e.clone(), a.clone(), f.clone()]).is_ok());
        assert!(matches!(
            NestedChain::new(vec![e.clone(), a, b, f.clone()]),
            Err(Error::Containment(_))
        ));
        assert!(NestedChain::new(vec![f.clone(), f]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let g = grid3();
        let chain = NestedChain::from_labels(&g, &[2, 0, 1], 3).unwrap();
        assert_eq!(chain.labels(), vec![2, 0, 1]);
        assert_eq!(chain.band(1).cells().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn empty_band_removal() {
        let g = grid3();
        let chain = NestedChain::from_labels(&g, &[0, 0, 2], 3).unwrap();
        let r = chain.remove_empty_bands();
        assert_eq!(r.removed_phases, vec![2]);
        assert_eq!(r.kept_sets, vec![0, 1, 3]);
        assert_eq!(r.chain.phases(), 2);
        assert_eq!(r.chain.labels(), vec![0, 0, 1]);

        let chain = NestedChain::from_labels(&g, &[0, 1, 1], 3).unwrap();
        let r = chain.remove_empty_bands();
        assert_eq!(r.removed_phases, vec![3]);
        assert_eq!(r.kept_sets, vec![0, 1, 3]);
        assert_eq!(r.chain.labels(), vec![0, 1, 1]);
    }
}
