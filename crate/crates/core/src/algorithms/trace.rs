use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcut::solve_arof_exact;
use crate::pcr::PcrImage;
use crate::pd::{solve_arof_raster, SolverConfig};
use crate::raster::Raster;

/// Outer-loop stopping rule: continue while the squared set change exceeds `eps_tol` and
/// fewer than `max_iters` iterations have run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub eps_tol: f64,
    pub max_iters: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            eps_tol: 1e-3,
            max_iters: 200,
        }
    }
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter(format!(
                "stopping rule needs positive tolerance and iteration cap, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    PhaseCollapsed,
    OrderingViolated,
}

/// One outer iteration: the set update followed by the constant update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Constants (or thresholds) used for the set update.
    pub constants_before: Vec<f64>,
    /// Constants (or thresholds) after the update.
    pub constants_after: Vec<f64>,
    /// Areas of the inner sets of the chain.
    pub areas: Vec<f64>,
    /// Sum over levels of the squared area of the change; infinite on the first iteration.
    pub change: f64,
    pub energy_after_sets: f64,
    pub energy_after_constants: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Energy at the initial state, when one is defined.
    pub initial_energy: Option<f64>,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    /// Every half-step energy in order.
    pub fn energies(&self) -> Vec<f64> {
        self.initial_energy
            .into_iter()
            .chain(
                self.records
                    .iter()
                    .flat_map(|r| [r.energy_after_sets, r.energy_after_constants]),
            )
            .collect()
    }

    /// True if no half-step raises the energy by more than `tol` (relative to its size).
    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.energies()
            .windows(2)
            .all(|w| w[1] <= w[0] + tol * w[0].abs().max(1.0))
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

/// How the ROF subproblem is solved inside the alternating algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArofEngine {
    /// Parametric min-cut on the cell graph.
    #[default]
    Exact,
    /// First-order raster solver; needs a uniform square grid.
    Iterative { max_iters: usize, tol: f64 },
}

impl ArofEngine {
    pub fn iterative() -> Self {
        let d = SolverConfig::new(1.0);
        ArofEngine::Iterative {
            max_iters: d.max_iters,
            tol: d.tol,
        }
    }

    pub fn solve(&self, f: &PcrImage, lambda: f64) -> Result<PcrImage> {
        match *self {
            ArofEngine::Exact => solve_arof_exact(f, lambda),
            ArofEngine::Iterative { max_iters, tol } => {
                let r = Raster::from_pcr(f)?;
                let cfg = SolverConfig {
                    max_iters,
                    tol,
                    ..SolverConfig::new(lambda)
                };
                let out = solve_arof_raster(&r, &cfg)?;
                if !out.converged {
                    log::warn!("iterative solver stopped at gap {} after {} iterations", out.gap, out.iterations);
                }
                let d = f.grid().domain();
                let w = out.u.to_pcr((d.x0, d.y0))?;
                PcrImage::new(f.grid().clone(), w.values().to_vec())
            }
        }
    }
}
