//! Closed forms for zero-initialized gradient descent on `½‖Zα - y‖²`.
//!
//! With `Z = U Σ Vᵀ`, the `k`-th iterate is `V f_k(Σ) Σ⁻¹ Uᵀ y` where
//! `f_k(σ) = 1 - (1 - ησ²)^k`, and the residual is
//! `(Σ_j (u_jᵀy)² (1 - ησ_j²)^{2k})^{1/2}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::ReducedSvd;

/// `f_k(σ) = 1 - (1 - ησ²)^k`, accurate when `ησ²` is tiny.
pub fn filter_value(eta: f64, sigma: f64, k: u64) -> f64 {
    let x = eta * sigma * sigma;
    if k == 0 {
        return 0.0;
    }
    if x < 1.0 {
        -((k as f64) * (-x).ln_1p()).exp_m1()
    } else {
        1.0 - pow_u64(1.0 - x, k)
    }
}

fn pow_u64(base: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        base.powi(k as i32)
    } else {
        base.powf(k as f64)
    }
}

/// Per-mode residual factor `(1 - ησ²)^k`.
fn decay(eta: f64, sigma: f64, k: u64) -> f64 {
    pow_u64(1.0 - eta * sigma * sigma, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDecomposition {
    pub residual: f64,
    /// `(u_jᵀy)² (1 - ησ_j²)^{2k}` for each singular triple.
    pub terms: Vec<f64>,
}

/// SVD of a full-row-rank `Z` with the closed-form iterates built on it.
#[derive(Debug, Clone)]
pub struct Landweber {
    svd: ReducedSvd,
    rows: usize,
}

impl Landweber {
    /// Exact SVD; rejects rank-deficient `Z`.
    pub fn new(z: &DMatrix<f64>) -> Result<Self> {
        Self::from_svd(ReducedSvd::new(z)?, z.nrows())
    }

    pub fn from_svd(svd: ReducedSvd, rows: usize) -> Result<Self> {
        svd.require_full_row_rank(rows)?;
        Ok(Landweber { svd, rows })
    }

    pub fn svd(&self) -> &ReducedSvd {
        &self.svd
    }

    pub fn sigma(&self) -> &[f64] {
        self.svd.sigma.as_slice()
    }

    fn check_y(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.rows {
            return Err(Error::Config(format!("y has length {}, expected {}", y.len(), self.rows)));
        }
        Ok(())
    }

    /// `α_ln = V Σ⁻¹ Uᵀ y`.
    pub fn least_norm(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_y(y)?;
        let mut c = self.svd.u.tr_mul(y);
        c.component_div_assign(&self.svd.sigma);
        Ok(&self.svd.v * c)
    }

    /// `α^{(k)} = V f_k(Σ) Σ⁻¹ Uᵀ y`.
    pub fn iterate(&self, y: &DVector<f64>, eta: f64, k: u64) -> Result<DVector<f64>> {
        self.check_y(y)?;
        let mut c = self.svd.u.tr_mul(y);
        for (cj, &s) in c.iter_mut().zip(self.svd.sigma.iter()) {
            *cj *= filter_value(eta, s, k) / s;
        }
        Ok(&self.svd.v * c)
    }

    pub fn residual_decomposition(&self, y: &DVector<f64>, eta: f64, k: u64) -> Result<ResidualDecomposition> {
        self.check_y(y)?;
        let c = self.svd.u.tr_mul(y);
        let terms: Vec<f64> = c
            .iter()
            .zip(self.svd.sigma.iter())
            .map(|(cj, &s)| {
                let f = decay(eta, s, k);
                cj * cj * f * f
            })
            .collect();
        let residual = terms.iter().sum::<f64>().sqrt();
        Ok(ResidualDecomposition { residual, terms })
    }

    /// `f_k(σ_j)` for every singular value.
    pub fn filter_values(&self, eta: f64, k: u64) -> Vec<f64> {
        self.svd.sigma.iter().map(|&s| filter_value(eta, s, k)).collect()
    }
}

/// Minimum-norm solution of `Zα = y` for full-row-rank `Z`.
pub fn least_norm_solution(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    Landweber::new(z)?.least_norm(y)
}

pub fn landweber_oracle(z: &DMatrix<f64>, y: &DVector<f64>, eta: f64, k: u64) -> Result<DVector<f64>> {
    Landweber::new(z)?.iterate(y, eta, k)
}

pub fn residual_decomposition(z: &DMatrix<f64>, y: &DVector<f64>, eta: f64, k: u64) -> Result<ResidualDecomposition> {
    Landweber::new(z)?.residual_decomposition(y, eta, k)
}
