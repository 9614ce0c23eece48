//! Exhaustive minimization over cell sets and nested chains on tiny grids.

use std::thread;

use serde::Serialize;

use crate::cellset::{CellSet, NestedChain};
use crate::energy::on_grid;
use crate::error::{Error, Result};
use crate::pcr::{PcrImage, PhaseConstants};

/// Largest cell count accepted by [`brute_force_binary`].
pub const BINARY_CELL_CAP: usize = 24;
/// Largest `n^cells` accepted by [`brute_force_chain`].
pub const CHAIN_LABELING_CAP: u64 = 10_000_000;
/// Energies closer than this (relative) to the minimum count as ties.
pub const TIE_TOL: f64 = 1e-12;
const MAX_REPORTED_TIES: usize = 64;
const CANDIDATE_CAP: usize = 1 << 16;

/// Binary energies the exhaustive search can minimize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BinaryEnergy {
    /// `Per(E) + mu * (integral over E of (c1-f)^2 + integral outside E of (c2-f)^2)`.
    FixedConstants { c1: f64, c2: f64, mu: f64 },
    /// As above with `c1`, `c2` re-fitted to the means inside and outside `E`.
    Refit { mu: f64 },
    /// `Per(E) + lambda * integral over E of (tau - f)`.
    Truncated { tau: f64, lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct BinaryOptimum {
    pub set: CellSet,
    pub energy: f64,
    /// Re-fitted constants of the optimum (`Refit` only; a side with zero area gets the
    /// other side's mean).
    pub constants: Option<(f64, f64)>,
    /// Number of subsets within the tie tolerance of the minimum, the optimum included
    /// (saturates at 65536 per worker).
    pub tie_count: usize,
    /// The first tied subsets in mask order (capped).
    pub ties: Vec<CellSet>,
}

struct Tables {
    area: Vec<f64>,
    fa: Vec<f64>,
    ffa: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl Tables {
    fn energy(&self, mask: u64, kind: BinaryEnergy, totals: (f64, f64, f64)) -> f64 {
        let mut per = 0.0;
        for &(a, b, l) in &self.edges {
            if (mask >> a ^ mask >> b) & 1 == 1 {
                per += l;
            }
        }
        match kind {
            BinaryEnergy::FixedConstants { c1, c2, mu } => {
                let mut fid = 0.0;
                for k in 0..self.area.len() {
                    let c = if mask >> k & 1 == 1 { c1 } else { c2 };
                    fid += c * c * self.area[k] - 2.0 * c * self.fa[k] + self.ffa[k];
                }
                per + mu * fid
            }
            BinaryEnergy::Refit { mu } => {
                let (mut a, mut s, mut q) = (0.0, 0.0, 0.0);
                for k in 0..self.area.len() {
                    if mask >> k & 1 == 1 {
                        a += self.area[k];
                        s += self.fa[k];
                        q += self.ffa[k];
                    }
                }
                let (ta, ts, tq) = totals;
                let inside = if a > 0.0 { q - s * s / a } else { 0.0 };
                let oa = ta - a;
                let os = ts - s;
                let outside = if oa > 0.0 { (tq - q) - os * os / oa } else { 0.0 };
                per + mu * (inside.max(0.0) + outside.max(0.0))
            }
            BinaryEnergy::Truncated { tau, lambda } => {
                let mut lin = 0.0;
                for k in 0..self.area.len() {
                    if mask >> k & 1 == 1 {
                        lin += tau * self.area[k] - self.fa[k];
                    }
                }
                per + lambda * lin
            }
        }
    }
}

fn tables(f: &PcrImage) -> Tables {
    let g = f.grid();
    let area = g.areas().to_vec();
    let fa: Vec<f64> = (0..area.len()).map(|k| area[k] * f.value(k)).collect();
    let ffa = (0..area.len()).map(|k| fa[k] * f.value(k)).collect();
    let edges = g.edges().iter().map(|e| (e.a, e.b, e.length)).collect();
    Tables { area, fa, ffa, edges }
}

fn is_tie(e: f64, best: f64) -> bool {
    e <= best + TIE_TOL * best.abs().max(1.0)
}

#[derive(Clone)]
struct Chunk {
    best: f64,
    /// Masks with energy within tolerance of the chunk's own best, recomputed at merge.
    candidates: Vec<(u64, f64)>,
}

/// Exhaustive minimum over all `2^cells` subsets of the cells of `f`'s grid.
///
/// Ties are broken by the smallest mask, where cell `k` is bit `k`.
pub fn brute_force_binary(f: &PcrImage, energy: BinaryEnergy) -> Result<BinaryOptimum> {
    let cells = f.grid().cell_count();
    if cells > BINARY_CELL_CAP {
        return Err(Error::BruteForceCap(format!(
            "{cells} cells exceed the binary cap of {BINARY_CELL_CAP}"
        )));
    }
    match energy {
        BinaryEnergy::FixedConstants { mu, .. } | BinaryEnergy::Refit { mu } if !(mu > 0.0) => {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        BinaryEnergy::Truncated { lambda, .. } if !(lambda > 0.0) => {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        _ => {}
    }
    let t = tables(f);
    let totals = (t.area.iter().sum(), t.fa.iter().sum(), t.ffa.iter().sum());
    let total: u64 = 1 << cells;
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16) as u64;
    let workers = if total < 1 << 12 { 1 } else { workers };
    let span = total.div_ceil(workers);
    let chunks: Vec<Chunk> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let t = &t;
                s.spawn(move || {
                    let lo = w * span;
                    let hi = ((w + 1) * span).min(total);
                    let mut c = Chunk {
                        best: f64::INFINITY,
                        candidates: Vec::new(),
                    };
                    for mask in lo..hi {
                        let e = t.energy(mask, energy, totals);
                        if e < c.best {
                            c.best = e;
                            c.candidates.retain(|&(_, ce)| is_tie(ce, e));
                        }
                        if is_tie(e, c.best) && c.candidates.len() < CANDIDATE_CAP {
                            c.candidates.push((mask, e));
                        }
                    }
                    c
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let best = chunks.iter().map(|c| c.best).fold(f64::INFINITY, f64::min);
    let mut tied: Vec<u64> = chunks
        .iter()
        .flat_map(|c| c.candidates.iter())
        .filter(|&&(_, e)| is_tie(e, best))
        .map(|&(m, _)| m)
        .collect();
    tied.sort_unstable();
    tied.dedup();
    let best_mask = tied[0];
    let g = f.grid();
    let set = CellSet::from_mask(g, best_mask);
    let constants = match energy {
        BinaryEnergy::Refit { .. } => {
            let (mut a, mut s) = (0.0, 0.0);
            for k in set.cells() {
                a += t.area[k];
                s += t.fa[k];
            }
            let (ta, ts, _) = totals;
            let inside = if a > 0.0 { s / a } else { (ts - s) / (ta - a) };
            let outside = if ta - a > 0.0 { (ts - s) / (ta - a) } else { inside };
            Some((inside, outside))
        }
        _ => None,
    };
    Ok(BinaryOptimum {
        energy: t.energy(best_mask, energy, totals),
        set,
        constants,
        tie_count: tied.len(),
        ties: tied.iter().take(MAX_REPORTED_TIES).map(|&m| CellSet::from_mask(g, m)).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct ChainOptimum {
    pub chain: NestedChain,
    pub energy: f64,
    pub labels: Vec<usize>,
    pub tie_count: usize,
}

/// Exhaustive minimum of the nested multiphase energy over all labelings `cell -> phase`.
///
/// Every labeling is a nested chain, so this covers the whole chain space on the grid.
/// The first labeling in odometer order (cell 0 fastest) wins ties.
pub fn brute_force_chain(f: &PcrImage, n: usize, c: &PhaseConstants, mu: f64) -> Result<ChainOptimum> {
    if c.len() != n {
        return Err(Error::LengthMismatch {
            what: "phase constants",
            expected: n,
            actual: c.len(),
        });
    }
    if n == 0 || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1 and mu > 0, got n={n}, mu={mu}")));
    }
    let g = f.grid();
    let cells = g.cell_count();
    let count = (n as u64).checked_pow(cells as u32).filter(|&k| k <= CHAIN_LABELING_CAP);
    let Some(count) = count else {
        return Err(Error::BruteForceCap(format!(
            "{n}^{cells} labelings exceed the cap of {CHAIN_LABELING_CAP}"
        )));
    };
    let f = on_grid(f, g)?;
    // fid[k * n + l]: fidelity of cell k under phase l.
    let fid: Vec<f64> = (0..cells)
        .flat_map(|k| {
            let (a, v) = (g.area(k), f.value(k));
            c.values.iter().map(move |&cl| mu * a * (cl - v) * (cl - v))
        })
        .collect();
    let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.a, e.b, e.length)).collect();
    let mut labels = vec![0usize; cells];
    let mut best = f64::INFINITY;
    let mut best_labels = labels.clone();
    let mut ties = 0usize;
    for _ in 0..count {
        let mut e = 0.0;
        for (k, &l) in labels.iter().enumerate() {
            e += fid[k * n + l];
        }
        for &(a, b, len) in &edges {
            if labels[a] != labels[b] {
                e += len;
            }
        }
        if best.is_infinite() || e < best - TIE_TOL * best.abs().max(1.0) {
            best = e;
            best_labels.copy_from_slice(&labels);
            ties = 1;
        } else if is_tie(e, best) {
            ties += 1;
        }
        for l in labels.iter_mut() {
            *l += 1;
            if *l < n {
                break;
            }
            *l = 0;
        }
    }
    Ok(ChainOptimum {
        chain: NestedChain::from_labels(g, &best_labels, n)?,
        energy: best,
        labels: best_labels,
        tie_count: ties,
    })
}
