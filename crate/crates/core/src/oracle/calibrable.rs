//! Closed-form ROF solutions for data made of well-separated squares.
//!
//! For `f = sum alpha_i chi_{C_i}` on a square domain, with squares far enough apart and
//! `lambda` large enough, the anisotropic ROF solution shrinks each square's value by
//! `Per(C_i) / (lambda |C_i|)` and lifts the background to `Per(A) / (lambda |Omega \ A|)`,
//! where `A` is the union of the squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Rect;
use crate::pcr::PcrImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub cx: f64,
    pub cy: f64,
    pub half: f64,
}

impl Square {
    pub fn new(cx: f64, cy: f64, half: f64) -> Self {
        Square { cx, cy, half }
    }

    pub fn perimeter(&self) -> f64 {
        8.0 * self.half
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half * self.half
    }

    pub fn rect(&self) -> Result<Rect> {
        Rect::square(self.cx, self.cy, self.half)
    }

    /// ℓ1 distance between the two closed squares.
    pub fn dist1(&self, other: &Square) -> f64 {
        let gx = ((self.cx - other.cx).abs() - self.half - other.half).max(0.0);
        let gy = ((self.cy - other.cy).abs() - self.half - other.half).max(0.0);
        gx + gy
    }
}

/// Squares `C_i` with values `alpha_i` inside the domain `[-R, R]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrableConfig {
    /// Half-side `R` of the domain.
    pub half_side: f64,
    pub components: Vec<Square>,
    pub alphas: Vec<f64>,
    pub lambda: f64,
}

impl CalibrableConfig {
    pub fn domain(&self) -> Result<Rect> {
        Rect::square(0.0, 0.0, self.half_side)
    }

    /// `Per(A)` of the union; the squares are disjoint so perimeters add.
    pub fn union_perimeter(&self) -> f64 {
        self.components.iter().map(Square::perimeter).sum()
    }

    /// `|Omega \ A|`.
    pub fn outside_area(&self) -> f64 {
        4.0 * self.half_side * self.half_side - self.components.iter().map(Square::area).sum::<f64>()
    }

    /// Slack of the distance condition for each component: distance to the other squares
    /// and to the domain boundary, minus the component's perimeter. Must be positive.
    pub fn distance_margins(&self) -> Vec<f64> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let to_boundary = self.half_side - c.half - c.cx.abs().max(c.cy.abs());
                let d = self
                    .components
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| c.dist1(o))
                    .fold(to_boundary, f64::min);
                d - c.perimeter()
            })
            .collect()
    }

    /// Smallest `lambda` the closed form allows.
    pub fn lambda_bound(&self) -> f64 {
        let out = self.union_perimeter() / self.outside_area();
        self.components
            .iter()
            .zip(&self.alphas)
            .map(|(c, a)| (out + c.perimeter() / c.area()) / a)
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("need at least one component".into()));
        }
        if self.alphas.len() != self.components.len() {
            return Err(Error::LengthMismatch {
                what: "component values",
                expected: self.components.len(),
                actual: self.alphas.len(),
            });
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0)) {
            return Err(Error::InvalidParameter(format!("component values must be positive, got {a}")));
        }
        if self.components.iter().any(|c| !(c.half > 0.0)) || !(self.half_side > 0.0) {
            return Err(Error::InvalidParameter("half-sides must be positive".into()));
        }
        let dom = self.domain()?;
        for (i, c) in self.components.iter().enumerate() {
            let r = c.rect()?;
            if !dom.contains_rect(&r) || r.x0 <= dom.x0 || r.x1 >= dom.x1 || r.y0 <= dom.y0 || r.y1 >= dom.y1 {
                return Err(Error::Containment(format!("component {} is not strictly inside the domain", i + 1)));
            }
        }
        for (i, m) in self.distance_margins().into_iter().enumerate() {
            if !(m > 0.0) {
                return Err(Error::DistanceCondition {
                    component: i + 1,
                    margin: m,
                });
            }
        }
        let required = self.lambda_bound();
        if !(self.lambda >= required) {
            return Err(Error::LambdaCondition {
                lambda: self.lambda,
                required,
            });
        }
        Ok(())
    }

    /// Value inside each component followed by the background value.
    pub fn closed_form_values(&self) -> (Vec<f64>, f64) {
        let inside = self
            .components
            .iter()
            .zip(&self.alphas)
            .map(|(c, a)| a - c.perimeter() / (self.lambda * c.area()))
            .collect();
        (inside, self.union_perimeter() / (self.lambda * self.outside_area()))
    }

    /// The datum `f` on the grid generated by the domain and the squares.
    pub fn datum(&self) -> Result<PcrImage> {
        let rects = self
            .components
            .iter()
            .zip(&self.alphas)
            .map(|(c, &a)| Ok((c.rect()?, a)))
            .collect::<Result<Vec<_>>>()?;
        PcrImage::from_rects(self.domain()?, 0.0, &rects)
    }
}

/// Closed-form ROF solution, on the same grid as [`CalibrableConfig::datum`].
pub fn calibrable_solution(cfg: &CalibrableConfig) -> Result<PcrImage> {
    cfg.validate()?;
    let (inside, outside) = cfg.closed_form_values();
    let rects = cfg
        .components
        .iter()
        .zip(inside)
        .map(|(c, v)| Ok((c.rect()?, v)))
        .collect::<Result<Vec<_>>>()?;
    PcrImage::from_rects(cfg.domain()?, outside, &rects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcut::solve_arof_exact;

    fn single(lambda: f64) -> CalibrableConfig {
        CalibrableConfig {
            half_side: 10.0,
            components: vec![Square::new(0.0, 0.0, 0.5)],
            alphas: vec![1.0],
            lambda,
        }
    }

    #[test]
    fn single_square_values() {
        let cfg = single(8.0);
        let u = calibrable_solution(&cfg).unwrap();
        assert_eq!(u.value_at(0.0, 0.0), Some(0.5));
        let out = 4.0 / (8.0 * 399.0);
        assert!((u.value_at(5.0, 5.0).unwrap() - out).abs() < 1e-15);
        let w = solve_arof_exact(&cfg.datum().unwrap(), 8.0).unwrap();
        for (a, b) in w.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_condition_is_named() {
        match calibrable_solution(&single(3.0)) {
            Err(Error::LambdaCondition { lambda, required }) => {
                assert_eq!(lambda, 3.0);
                assert!(required > 4.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn distance_condition_is_named() {
        let cfg = CalibrableConfig {
            half_side: 20.0,
            components: vec![Square::new(0.0, 0.0, 1.0), Square::new(5.0, 0.0, 1.0)],
            alphas: vec![1.0, 1.0],
            lambda: 100.0,
        };
        match cfg.validate() {
            Err(Error::DistanceCondition { component, margin }) => {
                assert_eq!(component, 1);
                assert_eq!(margin, 3.0 - 8.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
