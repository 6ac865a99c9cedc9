//! Parity census of expansion coefficients.
//!
//! A zonal kernel is strictly positive definite on every sphere when its
//! activation has infinitely many nonzero odd and even coefficients. With a
//! finite truncation this is replaced by a count: both parity classes need at
//! least `threshold` coefficients above the tolerance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::expansion::UltrasphericalExpansion;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_THRESHOLD: usize = 5;
pub const MIN_CERTIFY_K: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PdStatus {
    EmpiricallyStrictPd,
    EvenPartPolynomial,
    OddPartPolynomial,
    BothPartsPolynomial,
}

impl std::fmt::Display for PdStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PdStatus::EmpiricallyStrictPd => "EMPIRICALLY_STRICT_PD",
            PdStatus::EvenPartPolynomial => "EVEN_PART_POLYNOMIAL",
            PdStatus::OddPartPolynomial => "ODD_PART_POLYNOMIAL",
            PdStatus::BothPartsPolynomial => "BOTH_PARTS_POLYNOMIAL",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdCertificate {
    pub status: PdStatus,
    pub odd_count: usize,
    pub even_count: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub tail_estimate: f64,
    pub tol: f64,
    pub threshold: usize,
}

/// Census with the default threshold.
pub fn certify(exp: &UltrasphericalExpansion, tol: f64) -> Result<PdCertificate> {
    certify_with_threshold(exp, tol, DEFAULT_THRESHOLD)
}

/// Counts coefficients whose orthonormal magnitude exceeds `tol` relative to
/// the coefficient 2-norm. The relative scale makes the census independent of
/// the polynomial normalization and of the activation's amplitude.
pub fn certify_with_threshold(exp: &UltrasphericalExpansion, tol: f64, threshold: usize) -> Result<PdCertificate> {
    let k = exp.truncation_k();
    if k < MIN_CERTIFY_K {
        return Err(Error::Config(format!("certify needs K >= {MIN_CERTIFY_K}, got {k}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("certificate tolerance must be positive, got {tol}")));
    }
    let a = exp.ortho_coeffs();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut odd, mut even) = (0, 0);
    if norm > 0.0 {
        for (j, v) in a.iter().enumerate() {
            if v.abs() / norm > tol {
                if j % 2 == 1 {
                    odd += 1;
                } else {
                    even += 1;
                }
            }
        }
    }
    let status = match (odd >= threshold, even >= threshold) {
        (true, true) => PdStatus::EmpiricallyStrictPd,
        (true, false) => PdStatus::EvenPartPolynomial,
        (false, true) => PdStatus::OddPartPolynomial,
        (false, false) => PdStatus::BothPartsPolynomial,
    };
    Ok(PdCertificate {
        status,
        odd_count: odd,
        even_count: even,
        k,
        tail_estimate: exp.tail_estimate(),
        tol,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::Activation;
    use crate::harmonics::expansion::{expand, expand_fn};

    #[test]
    fn statuses_of_table_activations() {
        let zeta = std::f64::consts::SQRT_2;
        for d in [3, 10] {
            let cases = [
                (Activation::relu(), PdStatus::OddPartPolynomial),
                (Activation::swish(), PdStatus::OddPartPolynomial),
                (Activation::wendland0(d, zeta).unwrap(), PdStatus::EmpiricallyStrictPd),
                (Activation::wendland2(d, zeta).unwrap(), PdStatus::EmpiricallyStrictPd),
            ];
            for (act, want) in cases {
                let cert = certify(&expand(&act, d, 500).unwrap(), DEFAULT_TOL).unwrap();
                assert_eq!(cert.status, want, "{:?} d={d}: {cert:?}", act.kind());
            }
        }
    }

    #[test]
    fn polynomial_parts_are_detected() {
        let even = expand_fn(|t| t * t + 0.2 * t.powi(4) + t * t.abs(), 5, 80, 256).unwrap();
        assert_eq!(certify(&even, 1e-8).unwrap().status, PdStatus::EvenPartPolynomial);
        let both = expand_fn(|t| 1.0 + t - t.powi(3), 5, 80, 256).unwrap();
        let cert = certify(&both, 1e-8).unwrap();
        assert_eq!(cert.status, PdStatus::BothPartsPolynomial);
        assert_eq!((cert.odd_count, cert.even_count), (2, 1));
        assert!(certify(&expand_fn(|t| t, 5, 32, 64).unwrap(), 1e-8).is_err());
    }

    #[test]
    fn status_display_is_upper_case() {
        assert_eq!(PdStatus::EmpiricallyStrictPd.to_string(), "EMPIRICALLY_STRICT_PD");
        assert_eq!(PdStatus::OddPartPolynomial.to_string(), "ODD_PART_POLYNOMIAL");
    }
}
