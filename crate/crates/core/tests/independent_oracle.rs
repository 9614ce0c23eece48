//! Reference values recomputed without the crate's solvers.
//!
//! `dual_rof` solves the ROF problem on the cell adjacency graph by accelerated projected
//! gradient on the edge dual; it shares nothing with the min-cut solver except the grid.

use pcrseg::algorithms::mu_for;
use pcrseg::energy::energy_acv;
use pcrseg::graphcut::solve_arof_exact;
use pcrseg::oracle::random::random_pcr;
use pcrseg::oracle::verify::{counterexample_instance, example_break_instance};
use pcrseg::PcrImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dual_rof(f: &PcrImage, lambda: f64, iters: usize) -> Vec<f64> {
    let g = f.grid();
    let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.a, e.b, e.length)).collect();
    let area: Vec<f64> = (0..f.values().len()).map(|k| g.area(k)).collect();
    let min_area = area.iter().copied().fold(f64::INFINITY, f64::min);
    let step = lambda * min_area / 8.0;
    let primal = |p: &[f64]| {
        let mut u = f.values().to_vec();
        for (i, &(a, b, _)) in edges.iter().enumerate() {
            u[a] -= p[i] / (lambda * area[a]);
            u[b] += p[i] / (lambda * area[b]);
        }
        u
    };
    let mut p = vec![0.0; edges.len()];
    let mut y = p.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let u = primal(&y);
        let next: Vec<f64> = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b, l))| (y[i] + step * (u[a] - u[b])).clamp(-l, l))
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        for i in 0..p.len() {
            y[i] = next[i] + (t - 1.0) / t_next * (next[i] - p[i]);
        }
        p = next;
        t = t_next;
    }
    primal(&p)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn two_phase_example_rof_values() {
    let ex = example_break_instance(1).unwrap();
    let u = dual_rof(&ex.f, 16.0, 200_000);
    let rest = ex.a1.union(&ex.a2).unwrap().complement();
    for (set, v) in [(&ex.a1, 0.75), (&ex.a2, 0.5), (&rest, 9.0 / 94.0)] {
        for k in set.cells() {
            assert!((u[k] - v).abs() < 1e-6, "cell {k}: {} vs {v}", u[k]);
        }
    }
}

#[test]
fn dual_solver_agrees_with_min_cut_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let f = random_pcr(&mut rng, 3, 3).unwrap();
        let lambda = 8.0;
        let exact = solve_arof_exact(&f, lambda).unwrap();
        let dev = max_dev(&dual_rof(&f, lambda, 100_000), exact.values());
        assert!(dev < 1e-5, "deviation {dev}");
    }
}

#[test]
fn two_phase_example_energies_by_hand() {
    // f is the indicator of A1 + A2 on [-1, 1]^2, |A1| = 1, |A2| = 1/16, c = (1, 1/48).
    // Fidelity of A1: (47/48)^2 / 16 on A2 plus (1/48)^2 (4 - 17/16) outside, which is 47/768.
    let fid_a1 = (47.0f64 / 48.0).powi(2) / 16.0 + (1.0f64 / 48.0).powi(2) * (4.0 - 17.0 / 16.0);
    assert!((fid_a1 - 47.0 / 768.0).abs() < 1e-15);
    let ex = example_break_instance(1).unwrap();
    let (c1, c2) = (1.0, 1.0 / 48.0);
    let mu = mu_for(c1, c2, 16.0);
    assert!((mu - 384.0 / 47.0).abs() < 1e-12);
    // Per(A1) = 4 since A1 does not touch the boundary.
    let e = energy_acv(&ex.a1, c1, c2, mu, &ex.f).unwrap();
    assert!((e - (4.0 + mu * fid_a1)).abs() < 1e-12 && (e - 4.5).abs() < 1e-12);
    let e_double = energy_acv(&ex.a1, c1, c2, 2.0 * mu, &ex.f).unwrap();
    assert!((e_double - 5.0).abs() < 1e-12);
    // A1 + A2 with its own means (1, 0) has zero fidelity and perimeter 4 + 1/2.
    let both = ex.a1.union(&ex.a2).unwrap();
    assert!((energy_acv(&both, 1.0, 0.0, 2.0 * mu, &ex.f).unwrap() - 4.5).abs() < 1e-12);
}

#[test]
fn counterexample_rof_values_in_squares() {
    // Each calibrable square keeps alpha - Per / (lambda |C|) = alpha - 4 / (lambda side).
    let ce = counterexample_instance().unwrap();
    let cfg = &ce.config;
    let u = solve_arof_exact(&ce.f, cfg.lambda).unwrap();
    for (sq, &alpha) in cfg.components.iter().zip(&cfg.alphas) {
        let expected = alpha - 2.0 / (cfg.lambda * sq.half);
        let (x, y) = (sq.cx, sq.cy);
        assert!((u.value_at(x, y).unwrap() - expected).abs() < 1e-12);
    }
}
