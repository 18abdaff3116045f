//! `L^r` quasinorms on strictly positive vectors, their duals, and the
//! Young / reverse Hölder inequality kernel.
//!
//! For `r < 1`, `r != 0` the dual exponent `s` solves `1/r + 1/s = 1`, and for
//! positive `x`, `y`
//!
//! ```text
//! x·y >= ‖x‖_r ‖y‖_s
//! ```
//!
//! which is the engine behind every expenditure bound in [`crate::demand`].
//! The gap functions here report how far a concrete instance sits above its
//! bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|r ln x_i|` above which a finite norm is evaluated in scaled form.
const DIRECT_EVAL_LIMIT: f64 = 600.0;

/// Absolute tolerance on `Σθ = 1` when constructing weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Aggregator exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "r", rename_all = "snake_case")]
pub enum Exponent {
    /// `(Σ x_i^r)^{1/r}` with `r != 0`.
    Finite(f64),
    /// The weighted `r -> 0` limit `Π x_i^{θ_i}`.
    CobbDouglas,
    /// Leontief, `min_i x_i`.
    NegInfinity,
    /// `max_i x_i`.
    PosInfinity,
}

impl Exponent {
    pub fn finite(r: f64) -> Result<Self> {
        if r.is_nan() || r.is_infinite() {
            return Err(Error::domain(format!("finite exponent required, got {r}")));
        }
        if r == 0.0 {
            return Err(Error::domain(
                "r = 0 is the Cobb-Douglas limit; use Exponent::CobbDouglas",
            ));
        }
        Ok(Exponent::Finite(r))
    }

    /// Maps a real `r` to its exponent, sending `0` to Cobb-Douglas and the
    /// infinities to their limits.
    pub fn from_r(r: f64) -> Result<Self> {
        if r.is_nan() {
            Err(Error::domain("exponent is NaN"))
        } else if r == 0.0 {
            Ok(Exponent::CobbDouglas)
        } else if r == f64::NEG_INFINITY {
            Ok(Exponent::NegInfinity)
        } else if r == f64::INFINITY {
            Ok(Exponent::PosInfinity)
        } else {
            Ok(Exponent::Finite(r))
        }
    }

    /// The real parameter, with Cobb-Douglas reported as `0`.
    pub fn r(self) -> f64 {
        match self {
            Exponent::Finite(r) => r,
            Exponent::CobbDouglas => 0.0,
            Exponent::NegInfinity => f64::NEG_INFINITY,
            Exponent::PosInfinity => f64::INFINITY,
        }
    }

    /// Exponent of the price-side norm. Cobb-Douglas is self-dual; the
    /// closed forms need `r < 1` everywhere else.
    pub fn dual(self) -> Result<Exponent> {
        match self {
            Exponent::Finite(r) => dual_exponent(r).map(Exponent::Finite),
            Exponent::CobbDouglas => Ok(Exponent::CobbDouglas),
            other => Err(Error::domain(format!(
                "no dual for {other:?}: closed forms need r < 1, r != 0 or Cobb-Douglas"
            ))),
        }
    }

    /// Elasticity of substitution `σ = 1/(1 - r)`; `1` for Cobb-Douglas.
    pub fn sigma(self) -> Result<f64> {
        match self {
            Exponent::Finite(r) => elasticity(r),
            Exponent::CobbDouglas => Ok(1.0),
            other => Err(Error::domain(format!("no elasticity for {other:?}"))),
        }
    }

    /// `true` when the closed-form demand system applies.
    pub fn admits_demand(self) -> bool {
        match self {
            Exponent::Finite(r) => r < 1.0,
            Exponent::CobbDouglas => true,
            _ => false,
        }
    }
}

/// `s = r / (r - 1)`, the solution of `1/r + 1/s = 1`.
pub fn dual_exponent(r: f64) -> Result<f64> {
    if !r.is_finite() || r == 0.0 || r >= 1.0 {
        return Err(Error::domain(format!(
            "dual exponent needs finite r < 1, r != 0; got {r}"
        )));
    }
    Ok(r / (r - 1.0))
}

/// `σ = 1 / (1 - r)`.
pub fn elasticity(r: f64) -> Result<f64> {
    if !r.is_finite() || r >= 1.0 {
        return Err(Error::domain(format!(
            "elasticity needs finite r < 1; got {r}"
        )));
    }
    Ok(1.0 / (1.0 - r))
}

/// What a [`PositiveVector`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Quantity,
    Price,
}

/// Nonempty vector of strictly positive, finite reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveVector {
    values: Vec<f64>,
    role: Role,
}

impl PositiveVector {
    pub fn new(values: Vec<f64>, role: Role) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidVector("vector is empty".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidVector(format!(
                "entry {i} is {v}; entries must be finite and > 0"
            )));
        }
        Ok(PositiveVector { values, role })
    }

    pub fn quantities(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Role::Quantity)
    }

    pub fn prices(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Role::Price)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `α·self`; fails if the result leaves the positive reals.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| alpha * v).collect(), self.role)
    }

    pub fn dot(&self, other: &PositiveVector) -> Result<f64> {
        Error::check_len(self.len(), other.len())?;
        Ok(dot(&self.values, &other.values))
    }
}

impl std::ops::Index<usize> for PositiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Positive weights on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    theta: Vec<f64>,
}

impl WeightVector {
    /// Validates positivity and `|Σθ - 1| <= 1e-9`, then renormalizes.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        if let Some((i, t)) = theta
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {t}; weights must be > 0"
            )));
        }
        let total: f64 = theta.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let theta = theta.into_iter().map(|t| t / total).collect();
        Ok(WeightVector { theta })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        Ok(WeightVector {
            theta: vec![1.0 / n as f64; n],
        })
    }

    /// Normalizes arbitrary positive masses onto the simplex.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidWeights(format!("masses sum to {total}")));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Outcome of checking `lhs >= rhs` on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityGapReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

impl InequalityGapReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let gap = lhs - rhs;
        let relative_gap = if gap.is_infinite() {
            // rhs ran off to -inf (or lhs to +inf); the bound holds trivially
            gap.signum()
        } else {
            gap / lhs.abs().max(rhs.abs()).max(1.0)
        };
        InequalityGapReport {
            lhs,
            rhs,
            gap,
            relative_gap,
        }
    }

    /// `true` unless the relative gap falls below `-tolerance`.
    pub fn holds(&self, tolerance: f64) -> bool {
        self.relative_gap >= -tolerance
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn representable(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(format!(
            "{what} is not representable in f64 (got {value})"
        )))
    }
}

/// `ln Σ_i exp(terms_i)`, shifted by the maximum term.
pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Unweighted norm on a slice that is already known to be positive.
pub(crate) fn norm_of(values: &[f64], e: Exponent) -> Result<f64> {
    match e {
        Exponent::Finite(r) => {
            let extreme = values
                .iter()
                .map(|x| (r * x.ln()).abs())
                .fold(0.0, f64::max);
            let value = if extreme <= DIRECT_EVAL_LIMIT {
                values.iter().map(|x| x.powf(r)).sum::<f64>().powf(1.0 / r)
            } else {
                let m = if r > 0.0 {
                    max_of(values)
                } else {
                    min_of(values)
                };
                m * values
                    .iter()
                    .map(|x| (x / m).powf(r))
                    .sum::<f64>()
                    .powf(1.0 / r)
            };
            representable(value, "norm")
        }
        Exponent::NegInfinity => Ok(min_of(values)),
        Exponent::PosInfinity => Ok(max_of(values)),
        Exponent::CobbDouglas => Err(Error::domain(
            "Cobb-Douglas needs a weight vector; use weighted_norm",
        )),
    }
}

/// `ln` of the (optionally weighted) norm, given `ln x_i` rather than `x_i`.
///
/// Weighted finite `r` computes `(1/r) ln Σ θ_i x_i^r` without forming
/// `θ^{1/r} x`, which underflows long before the norm does as `r -> 0`.
pub(crate) fn log_norm_from_logs(logs: &[f64], theta: Option<&[f64]>, e: Exponent) -> Result<f64> {
    if let Some(t) = theta {
        Error::check_len(logs.len(), t.len())?;
    }
    match (e, theta) {
        (Exponent::Finite(r), None) => Ok(log_sum_exp(logs.iter().map(move |l| r * l)) / r),
        (Exponent::Finite(r), Some(t)) => {
            let extreme = logs.iter().map(|l| (r * l).abs()).fold(0.0, f64::max);
            if extreme < 1.0 {
                // Σθ x^r = 1 + small near the Cobb-Douglas limit; keep the small part exact
                let excess: f64 = t.iter().zip(logs).map(|(t, l)| t * (r * l).exp_m1()).sum();
                Ok(excess.ln_1p() / r)
            } else {
                Ok(log_sum_exp(t.iter().zip(logs).map(move |(t, l)| t.ln() + r * l)) / r)
            }
        }
        (Exponent::CobbDouglas, Some(t)) => Ok(t.iter().zip(logs).map(|(t, l)| t * l).sum()),
        (Exponent::CobbDouglas, None) => Err(Error::domain(
            "Cobb-Douglas needs a weight vector; use weighted_norm",
        )),
        (Exponent::NegInfinity, _) => Ok(min_of(logs)),
        (Exponent::PosInfinity, _) => Ok(max_of(logs)),
    }
}

fn logs_of(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.ln()).collect()
}

pub(crate) fn log_norm_of(values: &[f64], e: Exponent) -> Result<f64> {
    log_norm_from_logs(&logs_of(values), None, e)
}

pub(crate) fn log_weighted_norm_of(values: &[f64], theta: &[f64], e: Exponent) -> Result<f64> {
    log_norm_from_logs(&logs_of(values), Some(theta), e)
}

pub(crate) fn weighted_norm_of(values: &[f64], theta: &[f64], e: Exponent) -> Result<f64> {
    match e {
        Exponent::NegInfinity => Ok(min_of(values)),
        Exponent::PosInfinity => Ok(max_of(values)),
        _ => representable(
            log_weighted_norm_of(values, theta, e)?.exp(),
            "weighted norm",
        ),
    }
}

/// `‖x‖_r`. Finite `r` is summed directly unless some `|r ln x_i|` exceeds
/// 600, in which case the sum is scaled by the max (`r > 0`) or min (`r < 0`)
/// entry. Cobb-Douglas needs weights and is rejected here.
pub fn lr_norm(x: &PositiveVector, e: Exponent) -> Result<f64> {
    norm_of(x.as_slice(), e)
}

/// `ln ‖x‖_r`; finite wherever the inputs are, even when the norm itself
/// would overflow.
pub fn log_lr_norm(x: &PositiveVector, e: Exponent) -> Result<f64> {
    log_norm_of(x.as_slice(), e)
}

/// Weighted norm `‖θ^{1/r} x‖_r`, or `Π x_i^{θ_i}` for Cobb-Douglas. The
/// infinite exponents ignore the weights (`θ^{1/r} -> 1`).
pub fn weighted_norm(x: &PositiveVector, theta: &WeightVector, e: Exponent) -> Result<f64> {
    Error::check_len(x.len(), theta.len())?;
    weighted_norm_of(x.as_slice(), theta.as_slice(), e)
}

pub fn log_weighted_norm(x: &PositiveVector, theta: &WeightVector, e: Exponent) -> Result<f64> {
    Error::check_len(x.len(), theta.len())?;
    log_weighted_norm_of(x.as_slice(), theta.as_slice(), e)
}

/// Extended Young inequality `ab >= a^r/r + b^s/s`.
pub fn young_gap(a: f64, b: f64, r: f64) -> Result<InequalityGapReport> {
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!(
            "young_gap needs positive a, b; got a={a}, b={b}"
        )));
    }
    let s = dual_exponent(r)?;
    Ok(InequalityGapReport::new(
        a * b,
        a.powf(r) / r + b.powf(s) / s,
    ))
}

/// Reverse Hölder `x·y >= ‖x‖_r ‖y‖_s`. The right side is assembled from
/// log-norms so it stays finite when one factor overflows and the other
/// underflows.
pub fn reverse_holder_gap(
    x: &PositiveVector,
    y: &PositiveVector,
    r: f64,
) -> Result<InequalityGapReport> {
    Error::check_len(x.len(), y.len())?;
    let s = dual_exponent(r)?;
    let log_rhs = log_norm_of(x.as_slice(), Exponent::Finite(r))?
        + log_norm_of(y.as_slice(), Exponent::Finite(s))?;
    Ok(InequalityGapReport::new(x.dot(y)?, log_rhs.exp()))
}

/// Cobb-Douglas Hölder `x·y >= ‖x‖_{0,θ} ‖θ^{-1} y‖_{0,θ}`.
pub fn l0_holder_gap(
    x: &PositiveVector,
    y: &PositiveVector,
    theta: &WeightVector,
) -> Result<InequalityGapReport> {
    Error::check_len(x.len(), y.len())?;
    Error::check_len(x.len(), theta.len())?;
    let t = theta.as_slice();
    let scaled_y: Vec<f64> = y.as_slice().iter().zip(t).map(|(y, t)| y / t).collect();
    let log_rhs = log_weighted_norm_of(x.as_slice(), t, Exponent::CobbDouglas)?
        + log_weighted_norm_of(&scaled_y, t, Exponent::CobbDouglas)?;
    Ok(InequalityGapReport::new(x.dot(y)?, log_rhs.exp()))
}
