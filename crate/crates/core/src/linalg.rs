//! Spectral reports and reduced SVDs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative rank tolerance: `λ_min <= RANK_TOL · λ_max` counts as singular.
pub const RANK_TOL: f64 = 1e-12;

/// Eigenvalues of a symmetric matrix, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_max/λ_min`; infinite when singular.
    pub kappa: f64,
    pub singular: bool,
}

impl SpectralReport {
    /// Full eigendecomposition of a symmetric matrix.
    pub fn of_symmetric(m: &DMatrix<f64>) -> Result<Self> {
        let (vals, _) = sorted_eigen(m, false)?;
        Ok(Self::from_eigenvalues(vals))
    }

    /// Squared singular values of `z` (i.e. the spectrum of `Z Zᵀ` for a wide `z`).
    pub fn of_features(z: &DMatrix<f64>) -> Result<Self> {
        let svd = ReducedSvd::new(z)?;
        let mut vals: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
        vals.resize(z.nrows(), 0.0);
        Ok(Self::from_eigenvalues(vals))
    }

    /// Builds the report from eigenvalues in any order.
    pub fn from_eigenvalues(mut vals: Vec<f64>) -> Self {
        vals.sort_by(|a, b| b.total_cmp(a));
        let lambda_max = vals.first().copied().unwrap_or(0.0);
        let lambda_min = vals.last().copied().unwrap_or(0.0);
        let singular = !(lambda_min > RANK_TOL * lambda_max) || lambda_max <= 0.0;
        let kappa = if singular { f64::INFINITY } else { lambda_max / lambda_min };
        SpectralReport {
            eigenvalues: vals,
            lambda_min,
            lambda_max,
            kappa,
            singular,
        }
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and
/// eigenvectors permuted to match (when requested).
pub fn sorted_eigen(m: &DMatrix<f64>, vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    if !m.is_square() {
        return Err(Error::Config(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix for eigendecomposition".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| DMatrix::zeros(0, 0))));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = vectors.then(|| DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok((vals, vecs))
}

/// Column/row ratio above which [`ReducedSvd::auto`] goes through `Z Zᵀ`.
pub const WIDE_ASPECT: usize = 20;

/// `Z = U Σ Vᵀ` with `U: n×r`, `Σ = diag(σ_1 >= … >= σ_r)`, `V: m×r`, `r = min(n, m)`.
#[derive(Debug, Clone)]
pub struct ReducedSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl ReducedSvd {
    pub fn new(z: &DMatrix<f64>) -> Result<Self> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix for SVD".into()));
        }
        if z.is_empty() {
            return Err(Error::Config("SVD of an empty matrix".into()));
        }
        let svd = z.clone().svd(true, true);
        let u = svd.u.ok_or_else(|| Error::Config("SVD did not return U".into()))?;
        let vt = svd.v_t.ok_or_else(|| Error::Config("SVD did not return V".into()))?;
        let r = svd.singular_values.len();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        Ok(ReducedSvd {
            u: DMatrix::from_fn(u.nrows(), r, |i, c| u[(i, order[c])]),
            sigma: DVector::from_fn(r, |c, _| svd.singular_values[order[c]]),
            v: DMatrix::from_fn(vt.ncols(), r, |i, c| vt[(order[c], i)]),
        })
    }

    /// Reduced SVD of a wide matrix through the eigendecomposition of `Z Zᵀ`.
    /// Cheaper than [`ReducedSvd::new`] when `m >> n`, at the price of
    /// relative accuracy in the smallest singular values.
    pub fn via_gram(z: &DMatrix<f64>) -> Result<Self> {
        let gram = z * z.transpose();
        let (vals, vecs) = sorted_eigen(&gram, true)?;
        let u = vecs.unwrap_or_else(|| DMatrix::zeros(0, 0));
        let sigma = DVector::from_iterator(vals.len(), vals.iter().map(|l| l.max(0.0).sqrt()));
        let mut v = z.transpose() * &u;
        for (c, s) in sigma.iter().enumerate() {
            if *s > 0.0 {
                v.column_mut(c).unscale_mut(*s);
            }
        }
        Ok(ReducedSvd { u, sigma, v })
    }

    /// [`ReducedSvd::via_gram`] when `Z` has more than `WIDE_ASPECT` times
    /// as many columns as rows, [`ReducedSvd::new`] otherwise.
    pub fn auto(z: &DMatrix<f64>) -> Result<Self> {
        if z.ncols() > WIDE_ASPECT * z.nrows() {
            Self::via_gram(z)
        } else {
            Self::new(z)
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().copied().fold(0.0, f64::max)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fails unless `σ_min² > RANK_TOL · σ_max²` and the factorization has
    /// one singular value per row of `Z`.
    pub fn require_full_row_rank(&self, rows: usize) -> Result<()> {
        let lmin = if self.sigma.len() < rows { 0.0 } else { self.sigma_min().powi(2) };
        let tol = RANK_TOL * self.sigma_max().powi(2);
        if !(lmin > tol) {
            return Err(Error::RankDeficient {
                lambda_min: lmin,
                tolerance: tol,
                hint: String::new(),
            });
        }
        Ok(())
    }
}

/// Spectral norm of a symmetric matrix.
pub fn symmetric_norm2(m: &DMatrix<f64>) -> Result<f64> {
    let (vals, _) = sorted_eigen(m, false)?;
    Ok(vals.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// `p`-quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}
