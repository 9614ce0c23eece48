//! Multiphase nested segmentation.
//!
//! With constants fixed, each inner level `S_i` is re-optimized with its neighbours
//! `S_{i-1}` and `S_{i+1}` held fixed. Only cells of the band `S_{i+1} \ S_{i-1}` are free,
//! and only edges inside that band change cost, so each step is one exact minimum cut.

use crate::cellset::{CellSet, NestedChain};
use crate::energy::{energy_gn, threshold};
use crate::error::{Error, Result};
use crate::graphcut::{min_cut_binary, CutProblem};
use crate::pcr::{PcrImage, PhaseConstants};

use super::trace::{IterationRecord, IterationTrace, StopReason, StoppingRule};
use super::two_phase::update_constants;

const MAX_SWEEPS: usize = 10_000;

/// Cold start: `S_i = {f > (c_i + c_{i+1}) / 2}`.
pub fn threshold_chain(f: &PcrImage, c: &PhaseConstants) -> Result<NestedChain> {
    c.require_ordered()?;
    let g = f.grid();
    let mut sets = vec![CellSet::empty(g)];
    for t in c.midpoints() {
        sets.push(threshold(f, t, true));
    }
    sets.push(CellSet::full(g));
    NestedChain::new(sets)
}

/// Exact minimizer of the level-`i` subproblem given the other levels.
fn level_step(chain: &NestedChain, i: usize, c: &PhaseConstants, mu: f64, f: &PcrImage) -> Result<(CellSet, f64, f64)> {
    let g = f.grid();
    let lower = chain.set(i - 1);
    let upper = chain.set(i + 1);
    let band = upper.difference(lower)?;
    let (ci, cj) = (c.values[i - 1], c.values[i]);
    let unary = (0..g.cell_count())
        .map(|k| mu * g.area(k) * (ci - cj) * (ci + cj - 2.0 * f.value(k)))
        .collect();
    let pairwise = g
        .edges()
        .iter()
        .map(|e| if band.contains(e.a) && band.contains(e.b) { e.length } else { 0.0 })
        .collect();
    let p = CutProblem::new(g.clone(), unary, pairwise)?.with_forced(lower.clone(), upper.complement())?;
    let (set, e_new) = min_cut_binary(&p)?;
    let e_old = p.energy(chain.set(i));
    Ok((set, e_new, e_old))
}

/// Coordinate descent over the inner levels until no level improves.
///
/// Starts from `init` when given (it must live on the grid of `f`), else from the threshold
/// chain of `f`. A level is replaced only when its energy drops by more than `1e-12`
/// relative, which rules out cycling between equal-energy sets.
pub fn gn_fixed_c_minimize(f: &PcrImage, c: &PhaseConstants, mu: f64, init: Option<&NestedChain>) -> Result<NestedChain> {
    c.require_ordered()?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    let mut chain = match init {
        Some(ch) => {
            if ch.phases() != c.len() {
                return Err(Error::LengthMismatch {
                    what: "chain phases",
                    expected: c.len(),
                    actual: ch.phases(),
                });
            }
            if **ch.grid() != **f.grid() {
                return Err(Error::GridMismatch("initial chain lives on another grid".into()));
            }
            ch.clone()
        }
        None => threshold_chain(f, c)?,
    };
    let n = c.len();
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for i in 1..n {
            let (set, e_new, e_old) = level_step(&chain, i, c, mu, f)?;
            if e_new < e_old - 1e-12 * e_old.abs().max(1.0) {
                chain.replace(i, set)?;
                changed = true;
            }
        }
        if !changed {
            return Ok(chain);
        }
    }
    log::warn!("coordinate descent hit the sweep cap");
    Ok(chain)
}

#[derive(Debug, Clone)]
pub struct GnOutcome {
    pub chain: NestedChain,
    pub constants: PhaseConstants,
    pub trace: IterationTrace,
    pub stop: StopReason,
    /// Phases removed because their band became empty, numbered as at removal time.
    pub removed_phases: Vec<usize>,
}

fn constant_outcome(f: &PcrImage, trace: IterationTrace, removed: Vec<usize>) -> Result<GnOutcome> {
    let g = f.grid();
    let chain = NestedChain::new(vec![CellSet::empty(g), CellSet::full(g)])?;
    let constants = update_constants(&chain, f)?;
    Ok(GnOutcome {
        chain,
        constants,
        trace,
        stop: StopReason::PhaseCollapsed,
        removed_phases: removed,
    })
}

/// Alternates the fixed-constant chain minimization and the mean update.
pub fn gn_alternate(f: &PcrImage, mu: f64, init: &PhaseConstants, stop: StoppingRule) -> Result<GnOutcome> {
    stop.validate()?;
    if init.is_empty() {
        return Err(Error::InvalidParameter("need at least one phase".into()));
    }
    if !init.is_strictly_decreasing() {
        return Err(Error::Unordered(format!("initial constants must strictly decrease: {:?}", init.values)));
    }
    let mut trace = IterationTrace::default();
    let mut removed_all = Vec::new();
    if init.len() == 1 {
        return constant_outcome(f, trace, removed_all);
    }
    let mut c = init.clone();
    let mut chain: Option<NestedChain> = None;
    let mut reason = StopReason::MaxIterations;
    for k in 0..stop.max_iters {
        let next = gn_fixed_c_minimize(f, &c, mu, chain.as_ref())?;
        let e_sets = energy_gn(&next, &c, mu, f)?;
        let change = match &chain {
            Some(p) if p.phases() == next.phases() => next.squared_change(p)?,
            _ => f64::INFINITY,
        };
        let before = c.values.clone();
        let removal = next.remove_empty_bands();
        let mut event = None;
        let next = if removal.removed_phases.is_empty() {
            next
        } else {
            let kept: Vec<f64> = (1..=c.len())
                .filter(|j| !removal.removed_phases.contains(j))
                .map(|j| c.values[j - 1])
                .collect();
            log::info!("removing empty phases {:?}", removal.removed_phases);
            event = Some(format!("removed empty phases {:?}", removal.removed_phases));
            removed_all.extend(removal.removed_phases.iter().copied());
            c = PhaseConstants::new(kept);
            removal.chain
        };
        if next.phases() == 1 {
            trace.records.push(IterationRecord {
                iteration: k + 1,
                constants_before: before,
                constants_after: c.values.clone(),
                areas: vec![],
                change,
                energy_after_sets: e_sets,
                energy_after_constants: e_sets,
                event,
            });
            return constant_outcome(f, trace, removed_all);
        }
        c = update_constants(&next, f)?;
        let e_consts = energy_gn(&next, &c, mu, f)?;
        let ordered = c.is_ordered();
        let event = match (event, ordered) {
            (e, true) => e,
            (Some(e), false) => Some(format!("{e}; ordering violated")),
            (None, false) => Some("ordering violated".into()),
        };
        trace.records.push(IterationRecord {
            iteration: k + 1,
            constants_before: before,
            constants_after: c.values.clone(),
            areas: next.sets()[1..next.phases()].iter().map(|s| s.area()).collect(),
            change,
            energy_after_sets: e_sets,
            energy_after_constants: e_consts,
            event,
        });
        chain = Some(next);
        if !ordered {
            reason = StopReason::OrderingViolated;
            break;
        }
        if change <= stop.eps_tol {
            reason = StopReason::Converged;
            break;
        }
    }
    Ok(GnOutcome {
        chain: chain.expect("at least one iteration runs"),
        constants: c,
        trace,
        stop: reason,
        removed_phases: removed_all,
    })
}
