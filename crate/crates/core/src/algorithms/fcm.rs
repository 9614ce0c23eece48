//! Fuzzy c-means (fuzzifier 2) on weighted scalar samples, used to seed phase constants.

use crate::error::{Error, Result};
use crate::pcr::{PcrImage, PhaseConstants};
use crate::raster::Raster;

const MAX_ITERS: usize = 1000;
const TIE_GAP: f64 = 1e-9;

/// `n` cluster centres of the weighted samples, strictly decreasing.
///
/// Equal sample values are merged first. Centres start evenly spread over the value range,
/// so the result is deterministic.
pub fn fcm_centers(values: &[f64], weights: &[f64], n: usize) -> Result<PhaseConstants> {
    if values.len() != weights.len() {
        return Err(Error::LengthMismatch {
            what: "sample weights",
            expected: values.len(),
            actual: weights.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| (v, w))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (v, w) in pts {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => merged.push((v, w)),
        }
    }
    let distinct = merged.len();
    if n == 1 {
        let total: f64 = merged.iter().map(|p| p.1).sum();
        return Ok(PhaseConstants::new(vec![merged.iter().map(|p| p.0 * p.1).sum::<f64>() / total]));
    }
    if distinct <= 1 {
        return Err(Error::ConstantImage { n });
    }
    if n > distinct {
        return Err(Error::TooFewDistinctValues {
            requested: n,
            distinct,
        });
    }
    let (lo, hi) = (merged[0].0, merged[distinct - 1].0);
    let mut c: Vec<f64> = (0..n)
        .map(|j| lo + (hi - lo) * (j as f64 + 0.5) / n as f64)
        .collect();
    let mut u = vec![0.0; n];
    for _ in 0..MAX_ITERS {
        let mut num = vec![0.0; n];
        let mut den = vec![0.0; n];
        for &(x, w) in &merged {
            memberships(x, &c, &mut u);
            for j in 0..n {
                let m = w * u[j] * u[j];
                num[j] += m * x;
                den[j] += m;
            }
        }
        let mut shift = 0.0f64;
        for j in 0..n {
            if den[j] > 0.0 {
                let next = num[j] / den[j];
                shift = shift.max((next - c[j]).abs());
                c[j] = next;
            }
        }
        if shift <= 1e-15 * (hi - lo) {
            break;
        }
    }
    c.sort_by(|a, b| b.total_cmp(a));
    for j in 1..n {
        if c[j] >= c[j - 1] {
            let nudged = c[j - 1] - TIE_GAP;
            log::warn!("fcm: centres {} and {} coincide at {}; moved to {nudged}", j, j + 1, c[j]);
            c[j] = nudged;
        }
    }
    Ok(PhaseConstants::new(c))
}

/// Memberships with fuzzifier 2: `u_j = 1 / sum_k (d_j / d_k)^2`.
fn memberships(x: f64, c: &[f64], u: &mut [f64]) {
    if let Some(j) = c.iter().position(|&cj| cj == x) {
        u.fill(0.0);
        u[j] = 1.0;
        return;
    }
    let inv: Vec<f64> = c.iter().map(|&cj| 1.0 / ((x - cj) * (x - cj))).collect();
    let total: f64 = inv.iter().sum();
    for (uj, i) in u.iter_mut().zip(&inv) {
        *uj = i / total;
    }
}

/// Cluster centres of a PCR image, weighting each cell by its area.
pub fn fcm_init(f: &PcrImage, n: usize) -> Result<PhaseConstants> {
    fcm_centers(f.values(), f.grid().areas(), n)
}

/// Cluster centres of a raster, every pixel weighted equally.
pub fn fcm_init_raster(f: &Raster, n: usize) -> Result<PhaseConstants> {
    fcm_centers(f.pixels(), &vec![1.0; f.pixels().len()], n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_data_gives_pure_centres() {
        let c = fcm_centers(&[0.0, 1.0, 1.0, 0.0], &[1.0; 4], 2).unwrap();
        assert!((c.values[0] - 1.0).abs() < 1e-9 && c.values[1].abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(matches!(fcm_centers(&[0.5, 0.5], &[1.0, 2.0], 2), Err(Error::ConstantImage { .. })));
        assert!(matches!(
            fcm_centers(&[0.1, 0.5], &[1.0, 2.0], 3),
            Err(Error::TooFewDistinctValues { requested: 3, distinct: 2 })
        ));
    }

    #[test]
    fn three_clusters_ordered() {
        let v = [0.0, 0.05, 0.5, 0.55, 0.9, 1.0];
        let c = fcm_centers(&v, &[1.0; 6], 3).unwrap();
        assert!(c.is_strictly_decreasing());
        assert!((c.values[0] - 0.95).abs() < 0.05);
        assert!((c.values[1] - 0.525).abs() < 0.05);
        assert!((c.values[2] - 0.025).abs() < 0.05);
        let t = c.midpoints();
        assert_eq!(t.len(), 2);
    }
}
