//! Two-phase segmentation by thresholding ROF solutions.
//!
//! For fixed `c1 > c2` the relaxed two-phase energy expands to
//! `Per(E) + 2 mu (c1 - c2) * integral over E of ((c1 + c2) / 2 - f)` plus a constant, so
//! its minimizer is the upper level set at `(c1 + c2) / 2` of the ROF solution with
//! `lambda = 2 mu (c1 - c2)`.

use crate::cellset::{CellSet, NestedChain};
use crate::energy::{energy_acv, mean, threshold};
use crate::error::{Error, Result};
use crate::pcr::{PcrImage, PhaseConstants};

use super::trace::{ArofEngine, IterationRecord, IterationTrace, StopReason, StoppingRule};

/// ROF weight whose level set at `(c1 + c2) / 2` minimizes the two-phase energy.
pub fn lambda_for(c1: f64, c2: f64, mu: f64) -> f64 {
    2.0 * mu * (c1 - c2)
}

/// Two-phase weight matching a ROF weight `lambda`; inverse of [`lambda_for`].
pub fn mu_for(c1: f64, c2: f64, lambda: f64) -> f64 {
    lambda / (2.0 * (c1 - c2))
}

/// Band means of `f` over the phases of `chain`.
pub fn update_constants(chain: &NestedChain, f: &PcrImage) -> Result<PhaseConstants> {
    let mut c = Vec::with_capacity(chain.phases());
    for (i, band) in chain.bands().iter().enumerate() {
        match mean(f, band) {
            Ok(m) => c.push(m),
            Err(Error::EmptyPhase { .. }) => return Err(Error::EmptyPhase { index: i + 1 }),
            Err(e) => return Err(e),
        }
    }
    Ok(PhaseConstants::new(c))
}

/// Threshold of a ROF solution `w` at `(c1 + c2) / 2`.
pub fn acv_from_arof(w: &PcrImage, c1: f64, c2: f64, strict: bool) -> Result<CellSet> {
    if !(c1 > c2) {
        return Err(Error::Unordered(format!("need c1 > c2, got {c1} <= {c2}")));
    }
    Ok(threshold(w, 0.5 * (c1 + c2), strict))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcvOptions {
    pub engine: ArofEngine,
    /// Use `w > tau` (true) or `w >= tau`.
    pub strict: bool,
}

impl Default for AcvOptions {
    fn default() -> Self {
        AcvOptions {
            engine: ArofEngine::Exact,
            strict: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcvOutcome {
    pub set: CellSet,
    pub constants: PhaseConstants,
    pub trace: IterationTrace,
    pub stop: StopReason,
}

impl AcvOutcome {
    pub fn energy(&self, mu: f64, f: &PcrImage) -> Result<f64> {
        energy_acv(&self.set, self.constants.values[0], self.constants.values[1], mu, f)
    }
}

/// Alternates the threshold step and the mean update until the set stops moving.
pub fn acv_segment(
    f: &PcrImage,
    mu: f64,
    init: &PhaseConstants,
    stop: StoppingRule,
    opts: AcvOptions,
) -> Result<AcvOutcome> {
    stop.validate()?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    if init.len() != 2 {
        return Err(Error::LengthMismatch {
            what: "two-phase constants",
            expected: 2,
            actual: init.len(),
        });
    }
    let (mut c1, mut c2) = (init.values[0], init.values[1]);
    if !(c1 > c2) {
        return Err(Error::Unordered(format!("initial constants need c1 > c2, got {c1}, {c2}")));
    }
    let mut trace = IterationTrace::default();
    let mut prev: Option<CellSet> = None;
    let mut reason = StopReason::MaxIterations;
    for k in 0..stop.max_iters {
        let w = opts.engine.solve(f, lambda_for(c1, c2, mu))?;
        let set = acv_from_arof(&w, c1, c2, opts.strict)?;
        let e_sets = energy_acv(&set, c1, c2, mu, f)?;
        let change = match &prev {
            Some(p) => set.symmetric_difference(p)?.area().powi(2),
            None => f64::INFINITY,
        };
        let before = vec![c1, c2];
        let (m1, m2) = match (mean(f, &set), mean(f, &set.complement())) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                trace.records.push(IterationRecord {
                    iteration: k + 1,
                    constants_before: before.clone(),
                    constants_after: before,
                    areas: vec![set.area()],
                    change,
                    energy_after_sets: e_sets,
                    energy_after_constants: e_sets,
                    event: Some("phase collapsed".into()),
                });
                prev = Some(set);
                reason = StopReason::PhaseCollapsed;
                break;
            }
        };
        c1 = m1;
        c2 = m2;
        let e_consts = energy_acv(&set, c1, c2, mu, f)?;
        let ordered = c1 > c2;
        trace.records.push(IterationRecord {
            iteration: k + 1,
            constants_before: before,
            constants_after: vec![c1, c2],
            areas: vec![set.area()],
            change,
            energy_after_sets: e_sets,
            energy_after_constants: e_consts,
            event: (!ordered).then(|| "ordering violated".to_string()),
        });
        prev = Some(set);
        if !ordered {
            reason = StopReason::OrderingViolated;
            break;
        }
        if change <= stop.eps_tol {
            reason = StopReason::Converged;
            break;
        }
    }
    Ok(AcvOutcome {
        set: prev.expect("at least one iteration runs"),
        constants: PhaseConstants::new(vec![c1, c2]),
        trace,
        stop: reason,
    })
}
