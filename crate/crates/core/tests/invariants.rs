//! Property tests over small random piecewise-constant images.

use std::sync::Arc;

use pcrseg::algorithms::{acv_segment, fcm_init, gn_alternate, AcvOptions, StoppingRule};
use pcrseg::energy::{energy_acv, threshold};
use pcrseg::graphcut::{min_cut_binary, parametric_cut, solve_arof_exact, CutProblem};
use pcrseg::oracle::brute::{brute_force_binary, BinaryEnergy};
use pcrseg::oracle::calibrable_solution;
use pcrseg::oracle::random::random_calibrable;
use pcrseg::{Grid, PcrImage, PhaseConstants};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Images of up to `max x max` cells, widths in quarters, values in `[0, 1]`.
fn pcr(max: usize) -> impl Strategy<Value = PcrImage> {
    (1..=max, 1..=max).prop_flat_map(|(nx, ny)| {
        (
            prop::collection::vec(1..=3u8, nx),
            prop::collection::vec(1..=3u8, ny),
            prop::collection::vec(0.0..=1.0f64, nx * ny),
        )
            .prop_map(|(wx, wy, values)| {
                let lines = |w: Vec<u8>| {
                    let mut v = vec![0.0];
                    for q in w {
                        v.push(v.last().unwrap() + q as f64 * 0.25);
                    }
                    v
                };
                let g = Arc::new(Grid::new(lines(wx), lines(wy)).unwrap());
                PcrImage::new(g, values).unwrap()
            })
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_cut_matches_exhaustive_search(f in pcr(4), c2 in 0.0..0.5f64, gap in 0.05..0.5f64, mu in 0.1..40.0f64) {
        let c1 = c2 + gap;
        let (cut, _) = min_cut_binary(&CutProblem::two_phase(&f, c1, c2, mu).unwrap()).unwrap();
        let best = brute_force_binary(&f, BinaryEnergy::FixedConstants { c1, c2, mu }).unwrap();
        let e = energy_acv(&cut, c1, c2, mu, &f).unwrap();
        prop_assert!(close(e, best.energy, 1e-9), "cut {e} vs exhaustive {}", best.energy);
    }

    #[test]
    fn rof_thresholds_are_truncated_minimizers(f in pcr(4), lambda in 0.5..60.0f64, tau in 0.0..1.0f64) {
        let w = solve_arof_exact(&f, lambda).unwrap();
        let set = threshold(&w, tau, true);
        let best = brute_force_binary(&f, BinaryEnergy::Truncated { tau, lambda }).unwrap();
        let p = CutProblem::truncated_rof(&f, tau, lambda).unwrap();
        prop_assert!(close(p.energy(&set), best.energy, 1e-9));
    }

    #[test]
    fn parametric_cuts_are_nested(f in pcr(6), lambda in 0.5..60.0f64, t1 in 0.0..1.0f64, t2 in 0.0..1.0f64) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let upper = parametric_cut(&f, hi, lambda).unwrap();
        let lower = parametric_cut(&f, lo, lambda).unwrap();
        prop_assert!(upper.is_subset(&lower));
    }

    #[test]
    fn rof_solution_stays_in_data_range(f in pcr(6), lambda in 0.1..100.0f64) {
        let w = solve_arof_exact(&f, lambda).unwrap();
        prop_assert!(w.min() >= f.min() - 1e-12 && w.max() <= f.max() + 1e-12);
        // The mean is preserved.
        prop_assert!(close(w.integral(), f.integral(), 1e-10));
    }

    #[test]
    fn two_phase_energy_never_rises(f in pcr(6), mu in 0.5..60.0f64) {
        let Ok(init) = fcm_init(&f, 2) else { return Ok(()) };
        let out = acv_segment(&f, mu, &init, StoppingRule::default(), AcvOptions::default()).unwrap();
        prop_assert!(out.trace.is_nonincreasing(1e-12), "{:?}", out.trace.energies());
    }

    #[test]
    fn multiphase_energy_never_rises(f in pcr(5), mu in 1.0..200.0f64) {
        let Ok(init) = fcm_init(&f, 3) else { return Ok(()) };
        let out = gn_alternate(&f, mu, &init, StoppingRule::default()).unwrap();
        prop_assert!(out.trace.is_nonincreasing(1e-12), "{:?}", out.trace.energies());
        let c = PhaseConstants::new(out.constants.values.clone());
        prop_assert!(c.is_ordered());
    }

    #[test]
    fn calibrable_closed_form_is_the_solution(seed in any::<u64>()) {
        let cfg = random_calibrable(&mut ChaCha8Rng::seed_from_u64(seed));
        let expected = calibrable_solution(&cfg).unwrap();
        let w = solve_arof_exact(&cfg.datum().unwrap(), cfg.lambda).unwrap();
        let dev = w.values().iter().zip(expected.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9, "deviation {dev}");
    }

    #[test]
    fn text_format_round_trips(f in pcr(6)) {
        prop_assert_eq!(PcrImage::parse_text(&f.to_text()).unwrap(), f);
    }
}
