//! Points on the two-good level set `‖(x₁, x₂)‖ = 1`.
//!
//! `x₁` runs over a log-spaced grid inside `[1e-3, 1e3]`, restricted to the
//! range where a positive `x₂` exists, and `x₂` is solved in closed form:
//!
//! | exponent        | `x₁` range         | `x₂`                    |
//! |-----------------|--------------------|-------------------------|
//! | finite `r > 0`  | `(0, 1)`           | `(1 - x₁^r)^{1/r}`      |
//! | finite `r < 0`  | `(1, ∞)`           | `(1 - x₁^r)^{1/r}`      |
//! | Cobb-Douglas    | all                | `x₁^{-θ₁/θ₂}`           |
//! | `-∞`            | `[1, ∞)`           | `1`                     |
//! | `+∞`            | `(0, 1]`           | `1`                     |
//!
//! Open endpoints, where `x₂` would be `0` or infinite, are never emitted.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lr::{Exponent, WeightVector};

pub const GRID_MIN: f64 = 1e-3;
pub const GRID_MAX: f64 = 1e3;

/// Level-set norm: an exponent plus weights for Cobb-Douglas.
#[derive(Debug, Clone, PartialEq)]
pub struct BallNorm {
    pub exponent: Exponent,
    pub weights: Option<WeightVector>,
}

impl BallNorm {
    pub fn new(exponent: Exponent, weights: Option<WeightVector>) -> Result<Self> {
        match (&exponent, &weights) {
            (Exponent::CobbDouglas, None) => {
                return Err(Error::domain("Cobb-Douglas level sets need two weights"))
            }
            (Exponent::Finite(r), _) if !r.is_finite() || *r == 0.0 => {
                return Err(Error::domain(format!("invalid exponent {r}")))
            }
            _ => {}
        }
        if let Some(w) = &weights {
            Error::check_len(2, w.len())?;
        }
        Ok(BallNorm { exponent, weights })
    }

    pub fn finite(r: f64) -> Result<Self> {
        Self::new(Exponent::finite(r)?, None)
    }

    pub fn cobb_douglas(theta: [f64; 2]) -> Result<Self> {
        Self::new(
            Exponent::CobbDouglas,
            Some(WeightVector::new(theta.to_vec())?),
        )
    }

    /// Value written to the `r` column.
    pub fn r_label(&self) -> String {
        match self.exponent {
            Exponent::Finite(r) => format!("{r}"),
            Exponent::CobbDouglas => "0".into(),
            Exponent::NegInfinity => "-inf".into(),
            Exponent::PosInfinity => "inf".into(),
        }
    }

    /// `‖(x₁, x₂)‖` for this norm.
    pub fn norm(&self, x1: f64, x2: f64) -> Result<f64> {
        let v = [x1, x2];
        match &self.weights {
            Some(w) => crate::lr::weighted_norm_of(&v, w.as_slice(), self.exponent),
            None => crate::lr::norm_of(&v, self.exponent),
        }
    }

    /// Feasible `x₁` interval inside the grid, with openness of each end.
    fn x1_range(&self) -> (f64, bool, f64, bool) {
        match self.exponent {
            Exponent::Finite(r) if r > 0.0 => (GRID_MIN, false, 1.0, true),
            Exponent::Finite(_) => (1.0, true, GRID_MAX, false),
            Exponent::CobbDouglas => (GRID_MIN, false, GRID_MAX, false),
            Exponent::NegInfinity => (1.0, false, GRID_MAX, false),
            Exponent::PosInfinity => (GRID_MIN, false, 1.0, false),
        }
    }
}

/// Positive `x₂` with `‖(x₁, x₂)‖ = 1`, if one exists.
pub fn solve_x2(norm: &BallNorm, x1: f64) -> Option<f64> {
    if !(x1 > 0.0 && x1.is_finite()) {
        return None;
    }
    let x2 = match norm.exponent {
        Exponent::Finite(r) => {
            let rest = 1.0 - x1.powf(r);
            if rest <= 0.0 {
                return None;
            }
            rest.powf(1.0 / r)
        }
        Exponent::CobbDouglas => {
            let t = norm.weights.as_ref()?.as_slice();
            x1.powf(-t[0] / t[1])
        }
        Exponent::NegInfinity => (x1 >= 1.0).then_some(1.0)?,
        Exponent::PosInfinity => (x1 <= 1.0).then_some(1.0)?,
    };
    (x2.is_finite() && x2 > 0.0).then_some(x2)
}

/// `n` level-set points ordered by `x₁`.
pub fn ball_points(norm: &BallNorm, n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 points, got {n}")));
    }
    let (lo, lo_open, hi, hi_open) = norm.x1_range();
    let (llo, lhi) = (lo.ln(), hi.ln());
    // spread n points over the closed range, shifting inward off open ends
    let slots = n - 1 + usize::from(lo_open) + usize::from(hi_open);
    let offset = usize::from(lo_open);
    let points: Vec<(f64, f64)> = (0..n)
        .filter_map(|k| {
            let t = (k + offset) as f64 / slots as f64;
            let x1 = (llo + t * (lhi - llo)).exp();
            solve_x2(norm, x1).map(|x2| (x1, x2))
        })
        .collect();
    if points.is_empty() {
        return Err(Error::domain(
            "no positive solution of ‖x‖ = 1 in the grid range",
        ));
    }
    Ok(points)
}

/// CSV with header `x1,x2,r`.
pub fn to_csv(norm: &BallNorm, points: &[(f64, f64)]) -> String {
    let label = norm.r_label();
    let mut out = String::from("x1,x2,r\n");
    for (x1, x2) in points {
        let _ = writeln!(out, "{x1},{x2},{label}");
    }
    out
}
