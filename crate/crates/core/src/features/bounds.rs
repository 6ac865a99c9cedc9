//! Width bounds from matrix concentration.
//!
//! All logarithms are natural.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthBoundQuery {
    pub n: usize,
    pub c: f64,
    pub delta: f64,
    pub lambda_min_h: f64,
    pub kappa_h: Option<f64>,
    pub sigma1_x: Option<f64>,
    /// Unknown absolute constant of the sub-Gaussian bound.
    pub abs_const: f64,
}

impl WidthBoundQuery {
    pub fn new(n: usize, c: f64, delta: f64, lambda_min_h: f64) -> Self {
        WidthBoundQuery {
            n,
            c,
            delta,
            lambda_min_h,
            kappa_h: None,
            sigma1_x: None,
            abs_const: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Domain(format!("C must be positive, got {}", self.c)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.lambda_min_h > 0.0 && self.lambda_min_h.is_finite()) {
            return Err(Error::Domain(format!(
                "lambda_min(H) = {} is not positive; the bound is vacuous",
                self.lambda_min_h
            )));
        }
        Ok(())
    }

    fn ln_term(&self) -> f64 {
        (2.0 * self.n as f64 / self.delta).ln()
    }
}

fn to_width(v: f64) -> Result<u64> {
    if !v.is_finite() || v < 0.0 || v >= u64::MAX as f64 {
        return Err(Error::NonFinite(format!("width bound {v}")));
    }
    Ok(v.ceil() as u64)
}

/// `10 n C² ln(2n/δ) / λ_min(H)` before rounding up.
pub fn chernoff_value(q: &WidthBoundQuery) -> Result<f64> {
    q.validate()?;
    Ok(10.0 * q.n as f64 * q.c * q.c * q.ln_term() / q.lambda_min_h)
}

pub fn width_bound_chernoff(q: &WidthBoundQuery) -> Result<u64> {
    to_width(chernoff_value(q)?)
}

/// `2 n C² (κ + 2/3) ln(2n/δ) / λ_min(H)` before rounding up.
pub fn bernstein_value(q: &WidthBoundQuery) -> Result<f64> {
    q.validate()?;
    let kappa = q
        .kappa_h
        .ok_or_else(|| Error::Config("Bernstein bound needs kappa(H)".into()))?;
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa(H) must be >= 1, got {kappa}")));
    }
    Ok(2.0 * q.n as f64 * q.c * q.c * (kappa + 2.0 / 3.0) * q.ln_term() / q.lambda_min_h)
}

pub fn width_bound_bernstein(q: &WidthBoundQuery) -> Result<u64> {
    to_width(bernstein_value(q)?)
}

/// `c₀ (2n + ln(2/δ)) C² σ₁(X)² / λ_min(H)²` before rounding up; valid only
/// up to the unknown absolute constant `c₀`.
pub fn gaussian_value(q: &WidthBoundQuery) -> Result<f64> {
    q.validate()?;
    let s1 = q
        .sigma1_x
        .ok_or_else(|| Error::Config("Gaussian bound needs sigma1(X)".into()))?;
    if !(s1 > 0.0 && s1.is_finite()) {
        return Err(Error::Domain(format!("sigma1(X) must be positive, got {s1}")));
    }
    if !(q.abs_const > 0.0 && q.abs_const.is_finite()) {
        return Err(Error::Domain(format!("absolute constant must be positive, got {}", q.abs_const)));
    }
    let n = q.n as f64;
    Ok(q.abs_const * (2.0 * n + (2.0 / q.delta).ln()) * q.c * q.c * s1 * s1 / (q.lambda_min_h * q.lambda_min_h))
}

pub fn width_bound_gaussian(q: &WidthBoundQuery) -> Result<u64> {
    to_width(gaussian_value(q)?)
}
