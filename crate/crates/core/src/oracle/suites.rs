//! Randomized property suites shared by the verify command and the acceptance tests.
//!
//! Every suite is driven by a `ChaCha8Rng` seeded from `seed`, so a run is reproducible
//! from its `(trials, seed)` pair.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::fcm::fcm_init;
use crate::algorithms::multiphase::{gn_alternate, gn_fixed_c_minimize};
use crate::algorithms::trace::{StopReason, StoppingRule};
use crate::algorithms::trof::{trof_levels, trof_segment, TrofOptions};
use crate::algorithms::two_phase::{acv_segment, lambda_for, update_constants, AcvOptions};
use crate::energy::{energy_acv, energy_arof, energy_trof2, energy_trofn, threshold};
use crate::error::Result;
use crate::graphcut::{min_cut_binary, parametric_cut, solve_arof_exact, CutProblem};
use crate::pd::{energy_raster, solve_arof_raster, SolverConfig, TvMode};
use crate::raster::Raster;

use super::brute::{brute_force_binary, BinaryEnergy};
use super::calibrable::calibrable_solution;
use super::random::{random_calibrable, random_constants, random_dyadic_pcr, random_pcr, random_pcr_levels};

const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub seed: u64,
    pub failures: usize,
    /// Largest error seen, in the unit the suite compares.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Whether a failure here fails the overall verification.
    pub gating: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failure_details: Vec<String>,
    /// Wall time in seconds; excluded from serialization so reports stay byte-identical.
    #[serde(skip)]
    pub seconds: f64,
}

impl SuiteReport {
    fn new(name: &str, trials: usize, seed: u64, tolerance: f64) -> Self {
        SuiteReport {
            name: name.into(),
            trials,
            seed,
            failures: 0,
            max_error: 0.0,
            tolerance,
            passed: true,
            gating: true,
            stats: BTreeMap::new(),
            failure_details: Vec::new(),
            seconds: 0.0,
        }
    }

    fn error(&mut self, e: f64) {
        if e.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(e);
        }
    }

    fn fail(&mut self, detail: String) {
        self.failures += 1;
        self.passed = false;
        if self.failure_details.len() < MAX_LISTED_FAILURES {
            self.failure_details.push(detail);
        }
    }

    fn bump(&mut self, key: &str) {
        *self.stats.entry(key.into()).or_insert(0.0) += 1.0;
    }

    fn finish(mut self, start: Instant) -> Self {
        self.seconds = start.elapsed().as_secs_f64();
        self
    }

    /// One line: name, verdict, counts, error and time.
    pub fn summary(&self) -> String {
        format!(
            "{}{} {}: {} trials, {} failures, max error {:e} (tol {:e}), {:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            if self.gating { "" } else { " (informational)" },
            self.name,
            self.trials,
            self.failures,
            self.max_error,
            self.tolerance,
            self.seconds
        )
    }
}

/// Exact ROF vs. the closed form on random square configurations.
pub fn suite_calibrable(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("calibrable_closed_form", trials, seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let cfg = random_calibrable(&mut rng);
        let expected = calibrable_solution(&cfg)?;
        let w = solve_arof_exact(&cfg.datum()?, cfg.lambda)?;
        let dev = w
            .values()
            .iter()
            .zip(expected.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rep.error(dev);
        if !(dev <= rep.tolerance) {
            rep.fail(format!("trial {t}: deviation {dev:e} for {cfg:?}"));
        }
    }
    Ok(rep.finish(start))
}

/// Threshold of the ROF solution vs. the exhaustive fixed-constant two-phase minimum.
pub fn suite_threshold_minimizes(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("threshold_attains_exhaustive_minimum", trials, seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let (nx, ny) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let f = if rng.gen_bool(0.5) {
            random_pcr(&mut rng, nx, ny)?
        } else {
            random_pcr_levels(&mut rng, nx, ny, 4)?
        };
        let c = random_constants(&mut rng, 2, 1e-3);
        let (c1, c2) = (c.values[0], c.values[1]);
        let mu = rng.gen_range(0.1..60.0);
        let w = solve_arof_exact(&f, lambda_for(c1, c2, mu))?;
        let set = threshold(&w, 0.5 * (c1 + c2), true);
        let e = energy_acv(&set, c1, c2, mu, &f)?;
        // The `>=` level set is a minimizer too; it differs from `>` only on ties.
        let wide = threshold(&w, 0.5 * (c1 + c2), false);
        let e_wide = energy_acv(&wide, c1, c2, mu, &f)?;
        if wide != set {
            rep.bump("strict_and_inclusive_sets_differ");
        }
        let best = brute_force_binary(&f, BinaryEnergy::FixedConstants { c1, c2, mu })?;
        let err = (e - best.energy).abs().max((e_wide - best.energy).abs());
        rep.error(err);
        if !(err <= rep.tolerance) {
            rep.fail(format!("trial {t}: threshold energies {e}/{e_wide} vs minimum {} ({nx}x{ny}, c=({c1},{c2}), mu={mu})", best.energy));
        }
        if best.tie_count > 1 {
            rep.bump("instances_with_tied_minimizers");
        }
    }
    Ok(rep.finish(start))
}

/// Min-cut vs. exhaustive enumeration for both binary energies the cut solver handles.
pub fn suite_cut_agreement(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("min_cut_matches_enumeration", trials, seed, 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let n = rng.gen_range(2..=4);
        let f = random_pcr(&mut rng, n, n)?;
        let c = random_constants(&mut rng, 2, 1e-3);
        let mu = rng.gen_range(0.1..40.0);
        let p = CutProblem::two_phase(&f, c.values[0], c.values[1], mu)?;
        let (set, _) = min_cut_binary(&p)?;
        let e = energy_acv(&set, c.values[0], c.values[1], mu, &f)?;
        let b = brute_force_binary(&f, BinaryEnergy::FixedConstants { c1: c.values[0], c2: c.values[1], mu })?;
        let tau = rng.gen::<f64>();
        let cut = parametric_cut(&f, tau, mu)?;
        let et = energy_trof2(&cut, tau, mu, &f)?;
        let bt = brute_force_binary(&f, BinaryEnergy::Truncated { tau, lambda: mu })?;
        let err = (e - b.energy).abs().max((et - bt.energy).abs());
        rep.error(err);
        if !(err <= rep.tolerance) {
            rep.fail(format!("trial {t}: cut {e}/{et} vs enumeration {}/{}", b.energy, bt.energy));
        }
    }
    Ok(rep.finish(start))
}

/// Band means after the fixed-constant chain minimization stay strictly decreasing unless a
/// band is empty.
pub fn suite_ordering(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("band_means_ordered", trials, seed, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let (nx, ny) = (rng.gen_range(2..=8), rng.gen_range(2..=8));
        let f = random_pcr(&mut rng, nx, ny)?;
        let n = rng.gen_range(3..=4);
        let c = random_constants(&mut rng, n, 0.1);
        let mu = rng.gen_range(5.0..400.0);
        let chain = gn_fixed_c_minimize(&f, &c, mu, None)?;
        let removal = chain.remove_empty_bands();
        if !removal.removed_phases.is_empty() {
            rep.bump("phase_removal_events");
        }
        if removal.chain.phases() < 2 {
            continue;
        }
        let m = update_constants(&removal.chain, &f)?;
        if !m.is_strictly_decreasing() {
            let worst = m.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            rep.error(worst);
            rep.fail(format!("trial {t}: means {:?} from c={:?}, mu={mu}", m.values, c.values));
        }
    }
    Ok(rep.finish(start))
}

/// Per-level cuts vs. level sets of one ROF solution, and the additive split of the
/// truncated energy.
pub fn suite_trof_decoupling(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("truncated_levels_decouple", trials, seed, 1e-9);
    let mut sum_err = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let (nx, ny) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let f = if rng.gen_bool(0.5) {
            random_pcr(&mut rng, nx, ny)?
        } else {
            random_pcr_levels(&mut rng, nx, ny, 5)?
        };
        let lambda = rng.gen_range(0.5..60.0);
        let levels = rng.gen_range(1..=4);
        let tau = random_constants(&mut rng, levels, 1e-3).values;
        let w = solve_arof_exact(&f, lambda)?;
        for &ti in &tau {
            let cut = parametric_cut(&f, ti, lambda)?;
            let lv = threshold(&w, ti, true);
            let err = (energy_trof2(&cut, ti, lambda, &f)? - energy_trof2(&lv, ti, lambda, &f)?).abs();
            rep.error(err);
            if !(err <= rep.tolerance) {
                rep.fail(format!("trial {t}: level tau={ti} differs by {err:e}"));
            }
        }
        let chain = trof_levels(&w, &tau, true)?;
        let total = energy_trofn(&chain, &tau, lambda, &f)?;
        let parts: f64 = tau
            .iter()
            .enumerate()
            .map(|(i, &ti)| energy_trof2(chain.set(i + 1), ti, lambda, &f))
            .sum::<Result<f64>>()?;
        let err = (total - parts).abs();
        sum_err = sum_err.max(err);
        if !(err <= 1e-12) {
            rep.fail(format!("trial {t}: sum identity off by {err:e}"));
        }
    }
    rep.stats.insert("sum_identity_max_error".into(), sum_err);
    Ok(rep.finish(start))
}

/// Which alternating algorithms a monotonicity run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Algorithms {
    pub two_phase: bool,
    pub multiphase: bool,
    pub truncated: bool,
}

impl Algorithms {
    pub const ALL: Algorithms = Algorithms {
        two_phase: true,
        multiphase: true,
        truncated: true,
    };
}

/// Outer-loop energy traces of the three alternating algorithms.
pub fn suite_monotonicity(trials: usize, seed: u64) -> Result<SuiteReport> {
    suite_monotonicity_of(trials, seed, Algorithms::ALL)
}

/// Like [`suite_monotonicity`] restricted to some of the algorithms. Instances are drawn
/// identically whatever the selection.
pub fn suite_monotonicity_of(trials: usize, seed: u64, algs: Algorithms) -> Result<SuiteReport> {
    let start = Instant::now();
    let name = match (algs.two_phase || algs.multiphase, algs.truncated) {
        (true, true) => "alternating_energies_nonincreasing",
        (true, false) => "descent_energies_nonincreasing",
        _ => "truncated_energies_nonincreasing",
    };
    let mut rep = SuiteReport::new(name, trials, seed, 1e-12);
    let stop = StoppingRule::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let (nx, ny) = (rng.gen_range(3..=10), rng.gen_range(3..=10));
        let f = random_pcr(&mut rng, nx, ny)?;
        let mu = rng.gen_range(1.0..60.0);
        let lambda = rng.gen_range(1.0..60.0);
        let c2 = fcm_init(&f, 2)?;
        let c3 = fcm_init(&f, 3)?;
        if algs.two_phase {
            let a = acv_segment(&f, mu, &c2, stop, AcvOptions::default())?;
            check_run(&mut rep, t, "two-phase", a.trace.energies(), a.stop, a.trace.iterations());
        }
        if algs.multiphase {
            let a = gn_alternate(&f, mu, &c3, stop)?;
            check_run(&mut rep, t, "multiphase", a.trace.energies(), a.stop, a.trace.iterations());
        }
        if algs.truncated {
            let a = trof_segment(&f, lambda, &c3.midpoints(), stop, TrofOptions::default())?;
            check_run(&mut rep, t, "truncated", a.trace.energies(), a.stop, a.trace.iterations());
        }
    }
    Ok(rep.finish(start))
}

fn check_run(rep: &mut SuiteReport, t: usize, alg: &str, energies: Vec<f64>, stop: StopReason, iters: usize) {
    rep.bump(&format!("{alg}_runs"));
    rep.bump(&format!("{alg}_stop_{}", serde_json::to_value(stop).unwrap().as_str().unwrap()));
    let rise = energies
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].abs().max(1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    if rise.is_finite() {
        rep.error(rise.max(0.0));
    }
    if rise > rep.tolerance {
        rep.bump(&format!("{alg}_energy_increases"));
        rep.fail(format!("trial {t} {alg}: relative energy rise {rise:e} in {energies:?}"));
    }
    if stop == StopReason::MaxIterations || iters > 200 {
        rep.fail(format!("trial {t} {alg}: no termination after {iters} iterations"));
    }
}

/// Iterative raster solver vs. the exact solver on cell-aligned rasterizations.
pub fn suite_cross_solver(trials: usize, seed: u64, resolution: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = SuiteReport::new("iterative_matches_exact", trials, seed, 1e-3);
    let mut energy_err = 0.0f64;
    let mut iters = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let rects = rng.gen_range(2..=8);
        let f = random_dyadic_pcr(&mut rng, rects)?;
        let lambda = rng.gen_range(4.0..40.0);
        let w = solve_arof_exact(&f, lambda)?;
        let fr = Raster::rasterize(&f, resolution, resolution)?;
        let wr = Raster::rasterize(&w, resolution, resolution)?;
        let out = solve_arof_raster(&fr, &SolverConfig::new(lambda))?;
        iters += out.iterations;
        let num: f64 = out.u.pixels().iter().zip(wr.pixels()).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = wr.pixels().iter().map(|b| b * b).sum();
        let rel = (num / den).sqrt();
        let e_exact = energy_arof(&w, &f, lambda)?;
        let e_iter = energy_raster(&out.u, &fr, lambda, TvMode::Anisotropic)?;
        let rel_e = (e_iter - e_exact).abs() / e_exact.abs();
        rep.error(rel);
        energy_err = energy_err.max(rel_e);
        if !(rel <= 1e-3 && rel_e <= 1e-4) {
            rep.fail(format!(
                "trial {t}: relative L2 {rel:e}, relative energy {rel_e:e} (lambda {lambda}, {} iterations, gap {:e})",
                out.iterations, out.gap
            ));
        }
    }
    rep.stats.insert("max_relative_energy_error".into(), energy_err);
    rep.stats.insert("mean_iterations".into(), iters as f64 / trials.max(1) as f64);
    Ok(rep.finish(start))
}

/// The suites run by the verify command (the raster cross-check is too slow to include).
///
/// The truncated algorithm's energy trace is reported but does not gate: its threshold
/// update changes the functional being evaluated, so a rise there is expected behaviour.
pub fn standard_suites(trials: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut truncated = suite_monotonicity_of(
        trials,
        seed.wrapping_add(5),
        Algorithms {
            two_phase: false,
            multiphase: false,
            truncated: true,
        },
    )?;
    truncated.gating = false;
    Ok(vec![
        suite_cut_agreement(trials, seed)?,
        suite_threshold_minimizes(trials, seed.wrapping_add(1))?,
        suite_calibrable(trials, seed.wrapping_add(2))?,
        suite_ordering(trials, seed.wrapping_add(3))?,
        suite_trof_decoupling(trials, seed.wrapping_add(4))?,
        suite_monotonicity_of(
            trials,
            seed.wrapping_add(5),
            Algorithms {
                two_phase: true,
                multiphase: true,
                truncated: false,
            },
        )?,
        truncated,
    ])
}
