use nalgebra::DMatrix;

use crate::activations::Activation;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::features::weights::{ColumnSampler, WeightDistribution, WeightMatrix};

/// Columns per block in streamed accumulation.
pub const DEFAULT_CHUNK: usize = 2048;

/// `Z = γ(XᵀW)/√m` and `Ĥ = Z Zᵀ`.
#[derive(Debug, Clone)]
pub struct GramEstimate {
    pub z: DMatrix<f64>,
    pub h_hat: DMatrix<f64>,
    pub distribution: WeightDistribution,
    pub seed: u64,
}

fn check_dims(x: &Dataset, w_dim: usize) -> Result<()> {
    if x.dim() != w_dim {
        return Err(Error::Config(format!(
            "data dimension {} does not match weight dimension {}",
            x.dim(),
            w_dim
        )));
    }
    Ok(())
}

fn check_activation(x: &Dataset, act: &Activation) -> Result<()> {
    match act.dim() {
        Some(d) if d != x.dim() => Err(Error::Config(format!(
            "activation configured for d={d}, data has d={}",
            x.dim()
        ))),
        _ => Ok(()),
    }
}

/// Unscaled features `γ(x_iᵀw_k)` for a block of weights.
fn activate_block(x: &DMatrix<f64>, w: &DMatrix<f64>, act: &Activation, dist: WeightDistribution) -> DMatrix<f64> {
    let mut p = x * w;
    match dist {
        WeightDistribution::UniformSphere => p.apply(|v| *v = act.eval_unchecked(v.clamp(-1.0, 1.0))),
        WeightDistribution::Gaussian => p.apply(|v| *v = act.eval_unchecked(*v)),
    }
    p
}

fn symmetrize(h: &mut DMatrix<f64>) {
    let n = h.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
}

pub fn feature_matrix(x: &Dataset, w: &WeightMatrix, act: &Activation) -> Result<GramEstimate> {
    check_dims(x, w.dim())?;
    check_activation(x, act)?;
    let m = w.width();
    let mut z = activate_block(x.points(), &w.w, act, w.distribution);
    z.unscale_mut((m as f64).sqrt());
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature matrix".into()));
    }
    let mut h_hat = &z * z.transpose();
    symmetrize(&mut h_hat);
    Ok(GramEstimate {
        z,
        h_hat,
        distribution: w.distribution,
        seed: w.seed,
    })
}

/// `Ĥ` for `m` weights drawn from `seed` without materializing `Z`. Uses
/// the same weight stream as [`crate::features::sample_weights`].
pub fn streamed_gram(
    x: &Dataset,
    act: &Activation,
    m: u64,
    dist: WeightDistribution,
    seed: u64,
    chunk: usize,
) -> Result<DMatrix<f64>> {
    check_activation(x, act)?;
    if m == 0 || chunk == 0 {
        return Err(Error::Config("width and chunk size must be positive".into()));
    }
    let n = x.n();
    let mut sampler = ColumnSampler::new(x.dim(), dist, seed);
    let mut h = DMatrix::zeros(n, n);
    let mut done = 0u64;
    while done < m {
        let k = chunk.min((m - done) as usize);
        let w = sampler.next_block(k);
        let g = activate_block(x.points(), &w, act, dist);
        let gt = g.transpose();
        h.gemm(1.0, &g, &gt, 1.0);
        done += k as u64;
    }
    h.unscale_mut(m as f64);
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Gram estimate".into()));
    }
    symmetrize(&mut h);
    Ok(h)
}

/// `E_ik = 1[x_iᵀw_k > 0]` as an `n×m` matrix of zeros and ones.
pub fn relu_indicator_matrix(x: &Dataset, w: &WeightMatrix) -> Result<DMatrix<f64>> {
    check_dims(x, w.dim())?;
    let mut e = x.points() * &w.w;
    e.apply(|v| *v = if *v > 0.0 { 1.0 } else { 0.0 });
    Ok(e)
}

/// `Ĝ_jk = (1/m) Σ_i x_jᵀx_k 1[x_jᵀw_i > 0] 1[x_kᵀw_i > 0]`.
pub fn ntk_estimate(x: &Dataset, w: &WeightMatrix) -> Result<DMatrix<f64>> {
    let e = relu_indicator_matrix(x, w)?;
    let counts = &e * e.transpose();
    let mut g = x.inner_products().component_mul(&counts);
    g.unscale_mut(w.width() as f64);
    symmetrize(&mut g);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::Table;
    use crate::data::{bad_point_set, uniform_sphere, BAD_SET_NULL_V, BAD_SET_NULL_V_TILDE};
    use crate::features::weights::sample_weights;
    use crate::linalg::SpectralReport;
    use nalgebra::DVector;
    use proptest::prelude::*;

    #[test]
    fn relu_gram_on_bad_set_inherits_null_vector() {
        let x = bad_point_set(3).unwrap();
        let v = DVector::from_row_slice(&BAD_SET_NULL_V);
        for seed in 0..20 {
            let w = sample_weights(3, 64, WeightDistribution::UniformSphere, seed).unwrap();
            let est = feature_matrix(&x, &w, &Activation::relu()).unwrap();
            let rep = SpectralReport::of_symmetric(&est.h_hat).unwrap();
            assert!((&est.h_hat * &v).amax() <= 1e-12 * rep.lambda_max);
            assert!(rep.singular);
        }
    }

    #[test]
    fn constant_activation_gives_all_ones() {
        let act = Activation::tabulated(Table::from_fn(256, |_| 1.0).unwrap());
        let x = uniform_sphere(6, 4, 2).unwrap();
        let w = sample_weights(4, 33, WeightDistribution::UniformSphere, 3).unwrap();
        let est = feature_matrix(&x, &w, &act).unwrap();
        for v in est.h_hat.iter() {
            assert!((v - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn scaling_by_two_is_exact() {
        let x = uniform_sphere(10, 5, 8).unwrap();
        let w = sample_weights(5, 70, WeightDistribution::UniformSphere, 1).unwrap();
        let act = Activation::wendland0(5, std::f64::consts::SQRT_2).unwrap();
        let base = feature_matrix(&x, &w, &act).unwrap().h_hat;
        let scaled = feature_matrix(&x, &w, &act.scale(2.0).unwrap()).unwrap().h_hat;
        assert_eq!(scaled, base * 4.0);
        let three = feature_matrix(&x, &w, &act.scale(3.0).unwrap()).unwrap().h_hat;
        assert!((three - feature_matrix(&x, &w, &act).unwrap().h_hat * 9.0).amax() <= 1e-14);
    }

    #[test]
    fn streamed_matches_materialized() {
        let x = uniform_sphere(12, 4, 5).unwrap();
        let act = Activation::swish();
        let w = sample_weights(4, 1000, WeightDistribution::Gaussian, 6).unwrap();
        let full = feature_matrix(&x, &w, &act).unwrap().h_hat;
        let streamed = streamed_gram(&x, &act, 1000, WeightDistribution::Gaussian, 6, 128).unwrap();
        assert!((full - streamed).amax() <= 1e-13);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = uniform_sphere(3, 4, 0).unwrap();
        let w = sample_weights(5, 8, WeightDistribution::UniformSphere, 0).unwrap();
        assert!(matches!(feature_matrix(&x, &w, &Activation::relu()), Err(Error::Config(_))));
        assert!(ntk_estimate(&x, &w).is_err());
    }

    #[test]
    fn indicator_annihilates_v_tilde_and_ntk_annihilates_v() {
        let x = bad_point_set(4).unwrap();
        let vt = DVector::from_row_slice(&BAD_SET_NULL_V_TILDE);
        let v = DVector::from_row_slice(&BAD_SET_NULL_V);
        for seed in 0..50 {
            let w = sample_weights(4, 100, WeightDistribution::UniformSphere, seed).unwrap();
            let e = relu_indicator_matrix(&x, &w).unwrap();
            assert_eq!((e.transpose() * &vt).amax(), 0.0);
            let g = ntk_estimate(&x, &w).unwrap();
            let lmax = SpectralReport::of_symmetric(&g).unwrap().lambda_max;
            assert!((&g * &v).amax() <= 1e-12 * lmax);
        }
    }

    #[test]
    fn ntk_single_point_is_active_fraction() {
        let x = uniform_sphere(1, 3, 1).unwrap();
        let w = sample_weights(3, 200, WeightDistribution::UniformSphere, 2).unwrap();
        let g = ntk_estimate(&x, &w).unwrap();
        let active = (x.points() * &w.w).iter().filter(|&&v| v > 0.0).count();
        assert!((g[(0, 0)] - active as f64 / 200.0).abs() <= 1e-15);
        assert!((0.0..=1.0).contains(&g[(0, 0)]));
    }

    #[test]
    fn ntk_of_orthogonal_points_is_zero_off_diagonal() {
        let pts = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let x = Dataset::new(pts, DVector::zeros(2), "orth").unwrap();
        let w = sample_weights(3, 5000, WeightDistribution::UniformSphere, 3).unwrap();
        assert_eq!(ntk_estimate(&x, &w).unwrap()[(0, 1)], 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gram_is_psd_and_equals_zzt(n in 1usize..15, m in 1usize..80, d in 3usize..7, seed in any::<u64>(), gaussian in any::<bool>()) {
            let x = uniform_sphere(n, d, seed).unwrap();
            let dist = if gaussian { WeightDistribution::Gaussian } else { WeightDistribution::UniformSphere };
            let w = sample_weights(d, m, dist, seed ^ 1).unwrap();
            let act = Activation::wendland2(d, 1.5).unwrap();
            let est = feature_matrix(&x, &w, &act).unwrap();
            prop_assert_eq!(&est.h_hat, &est.h_hat.transpose());
            let zz = &est.z * est.z.transpose();
            let scale = est.z.norm_squared().max(1e-300);
            prop_assert!((&zz - &est.h_hat).amax() <= 1e-12 * scale);
            let rep = SpectralReport::of_symmetric(&est.h_hat).unwrap();
            prop_assert!(rep.lambda_min >= -1e-10 * rep.lambda_max.max(0.0));
        }
    }
}
