//! Multiphase segmentation by thresholding one ROF solution at several levels.
//!
//! The ROF solution `w` is computed once. Each outer iteration thresholds `w` at the current
//! `tau` and then moves `tau` from the band means of `f`.

use serde::{Deserialize, Serialize};

use crate::cellset::{CellSet, NestedChain};
use crate::energy::{energy_trofn, threshold};
use crate::error::{Error, Result};
use crate::pcr::PcrImage;

use super::trace::{ArofEngine, IterationRecord, IterationTrace, StopReason, StoppingRule};
use super::two_phase::update_constants;

/// Nested upper level sets of `w`: `S_i = {w > tau_i}` (or `>=`), framed by the empty set
/// and the domain. `tau` must strictly decrease.
pub fn trof_levels(w: &PcrImage, tau: &[f64], strict: bool) -> Result<NestedChain> {
    check_tau(tau)?;
    let g = w.grid();
    let mut sets = vec![CellSet::empty(g)];
    sets.extend(tau.iter().map(|&t| threshold(w, t, strict)));
    sets.push(CellSet::full(g));
    NestedChain::new(sets)
}

fn check_tau(tau: &[f64]) -> Result<()> {
    if tau.iter().any(|t| !t.is_finite()) || tau.windows(2).any(|p| p[0] <= p[1]) {
        return Err(Error::Unordered(format!("thresholds must strictly decrease: {tau:?}")));
    }
    Ok(())
}

/// How thresholds follow the band means `m_1 > m_2 > ... > m_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauUpdate {
    /// `tau_i = m_{i+1}`.
    Literal,
    /// `tau_i = (m_i + m_{i+1}) / 2`.
    #[default]
    Midpoint,
}

impl TauUpdate {
    pub fn apply(&self, means: &[f64]) -> Vec<f64> {
        match self {
            TauUpdate::Literal => means[1..].to_vec(),
            TauUpdate::Midpoint => means.windows(2).map(|m| 0.5 * (m[0] + m[1])).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrofOptions {
    pub engine: ArofEngine,
    pub update: TauUpdate,
    /// Use `w >= tau` instead of `w > tau`.
    pub inclusive: bool,
}

#[derive(Debug, Clone)]
pub struct TrofOutcome {
    pub chain: NestedChain,
    pub tau: Vec<f64>,
    /// ROF solution that was thresholded.
    pub w: PcrImage,
    pub trace: IterationTrace,
    pub stop: StopReason,
    pub removed_phases: Vec<usize>,
}

pub fn trof_segment(
    f: &PcrImage,
    lambda: f64,
    init_tau: &[f64],
    stop: StoppingRule,
    opts: TrofOptions,
) -> Result<TrofOutcome> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let w = opts.engine.solve(f, lambda)?;
    trof_segment_with(f, w, lambda, init_tau, stop, opts)
}

/// [`trof_segment`] with the ROF solution `w` of `f` at `lambda` already computed.
pub fn trof_segment_with(
    f: &PcrImage,
    w: PcrImage,
    lambda: f64,
    init_tau: &[f64],
    stop: StoppingRule,
    opts: TrofOptions,
) -> Result<TrofOutcome> {
    stop.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if init_tau.is_empty() {
        return Err(Error::InvalidParameter("need at least one threshold".into()));
    }
    check_tau(init_tau)?;
    if **w.grid() != **f.grid() {
        return Err(Error::GridMismatch("ROF solution lives on another grid".into()));
    }
    let strict = !opts.inclusive;
    let mut tau = init_tau.to_vec();
    let mut trace = IterationTrace::default();
    let mut prev: Option<NestedChain> = None;
    let mut removed_all = Vec::new();
    let mut reason = StopReason::MaxIterations;
    for k in 0..stop.max_iters {
        let chain = trof_levels(&w, &tau, strict)?;
        let e_sets = energy_trofn(&chain, &tau, lambda, f)?;
        let change = match &prev {
            Some(p) if p.phases() == chain.phases() => chain.squared_change(p)?,
            _ => f64::INFINITY,
        };
        let before = tau.clone();
        let removal = chain.remove_empty_bands();
        let mut event = None;
        let chain = if removal.removed_phases.is_empty() {
            chain
        } else {
            let last = removal.chain.phases();
            tau = removal.kept_sets[1..last].iter().map(|&s| tau[s - 1]).collect();
            log::info!("removing empty phases {:?}", removal.removed_phases);
            event = Some(format!("removed empty phases {:?}", removal.removed_phases));
            removed_all.extend(removal.removed_phases.iter().copied());
            removal.chain
        };
        if chain.phases() == 1 {
            trace.records.push(IterationRecord {
                iteration: k + 1,
                constants_before: before,
                constants_after: vec![],
                areas: vec![],
                change,
                energy_after_sets: e_sets,
                energy_after_constants: e_sets,
                event,
            });
            return Ok(TrofOutcome {
                chain,
                tau: vec![],
                w,
                trace,
                stop: StopReason::PhaseCollapsed,
                removed_phases: removed_all,
            });
        }
        let means = update_constants(&chain, f)?;
        let next = opts.update.apply(&means.values);
        let ordered = check_tau(&next).is_ok();
        let e_tau = if ordered {
            energy_trofn(&chain, &next, lambda, f)?
        } else {
            e_sets
        };
        let event = match (event, ordered) {
            (e, true) => e,
            (Some(e), false) => Some(format!("{e}; ordering violated")),
            (None, false) => Some("ordering violated".into()),
        };
        trace.records.push(IterationRecord {
            iteration: k + 1,
            constants_before: before,
            constants_after: next.clone(),
            areas: chain.sets()[1..chain.phases()].iter().map(|s| s.area()).collect(),
            change,
            energy_after_sets: e_sets,
            energy_after_constants: e_tau,
            event,
        });
        prev = Some(chain);
        if !ordered {
            reason = StopReason::OrderingViolated;
            break;
        }
        tau = next;
        if change <= stop.eps_tol {
            reason = StopReason::Converged;
            break;
        }
    }
    Ok(TrofOutcome {
        chain: prev.expect("at least one iteration runs"),
        tau,
        w,
        trace,
        stop: reason,
        removed_phases: removed_all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;

    fn nested_rects() -> PcrImage {
        let domain = Rect::new(0.0, 4.0, 0.0, 4.0).unwrap();
        PcrImage::from_rects(
            domain,
            0.0,
            &[
                (Rect::new(1.0, 3.0, 1.0, 3.0).unwrap(), 0.5),
                (Rect::new(1.5, 2.5, 1.5, 2.5).unwrap(), 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn levels_nest() {
        let f = nested_rects();
        let ch = trof_levels(&f, &[0.75, 0.25], true).unwrap();
        assert_eq!(ch.phases(), 3);
        assert_eq!(ch.set(1).area(), 1.0);
        assert_eq!(ch.set(2).area(), 4.0);
        assert!(trof_levels(&f, &[0.25, 0.75], true).is_err());
    }

    #[test]
    fn nested_rectangles_recovered() {
        let f = nested_rects();
        let out = trof_segment(&f, 40.0, &[0.7, 0.2], StoppingRule::default(), TrofOptions::default()).unwrap();
        assert_eq!(out.stop, StopReason::Converged);
        assert_eq!(out.chain.set(1).area(), 1.0);
        assert_eq!(out.chain.set(2).area(), 4.0);
    }

    #[test]
    fn literal_update_drops_the_lowest_band() {
        // tau_2 lands on the background mean, which the ROF solution lifts above.
        let f = nested_rects();
        let opts = TrofOptions {
            update: TauUpdate::Literal,
            ..Default::default()
        };
        let out = trof_segment(&f, 40.0, &[0.7, 0.2], StoppingRule::default(), opts).unwrap();
        assert!(out.chain.phases() < 3);
        assert!(!out.removed_phases.is_empty());
    }

    #[test]
    fn midpoint_tau_lies_between_means() {
        let f = nested_rects();
        let opts = TrofOptions::default();
        let out = trof_segment(&f, 40.0, &[0.7, 0.2], StoppingRule::default(), opts).unwrap();
        let w = &out.w;
        assert!(out.tau[0] < w.max() && out.tau[1] > w.min());
        assert!(out.tau[0] > out.tau[1]);
    }

    #[test]
    fn empty_band_is_removed() {
        let domain = Rect::new(0.0, 2.0, 0.0, 2.0).unwrap();
        let f = PcrImage::from_rects(domain, 0.0, &[(Rect::new(0.5, 1.5, 0.5, 1.5).unwrap(), 1.0)]).unwrap();
        let out = trof_segment(&f, 50.0, &[0.9, 0.8], StoppingRule::default(), TrofOptions::default()).unwrap();
        assert_eq!(out.chain.phases(), 2);
        assert_eq!(out.removed_phases.len(), 1);
        assert_eq!(out.tau.len(), 1);
    }
}
