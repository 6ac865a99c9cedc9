//! Gradient descent on the last layer: `α ← α - η Zᵀ(Zα - y)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::activations::{Activation, ActivationKind};
use crate::data::{bad_point_set, Dataset, DISTINCT_TOL};
use crate::error::{Error, Result};
use crate::features::{feature_matrix, WeightMatrix};
use crate::linalg::{ReducedSvd, SpectralReport};
use crate::training::landweber::{filter_value, Landweber};

/// Residual growth factor that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "eta")]
pub enum StepRule {
    Fixed(f64),
    /// `η = 2/(σ²_min + σ²_max)`.
    LemmaOptimal,
    /// Any `η < 2/λ_max(Ĥ)`; `None` picks `1/λ_max`.
    SpectralCap(Option<f64>),
}

impl StepRule {
    /// Step size for a matrix with the given extreme squared singular values.
    pub fn resolve(self, lambda_min: f64, lambda_max: f64) -> Result<f64> {
        let eta = match self {
            StepRule::Fixed(e) => e,
            StepRule::LemmaOptimal => 2.0 / (lambda_min + lambda_max),
            StepRule::SpectralCap(None) => 1.0 / lambda_max,
            StepRule::SpectralCap(Some(e)) => {
                if e >= 2.0 / lambda_max {
                    return Err(Error::Config(format!(
                        "step size {e} is not below 2/lambda_max = {}",
                        2.0 / lambda_max
                    )));
                }
                e
            }
        };
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!("step size must be positive and finite, got {eta}")));
        }
        Ok(eta)
    }

    fn needs_spectrum(self) -> bool {
        !matches!(self, StepRule::Fixed(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub step_rule: StepRule,
    pub max_iters: u64,
    /// Stop once `‖Zα - y‖ <= residual_tol`.
    pub residual_tol: f64,
    /// Every iterate with `k <= dense_until` is recorded; later ones only at
    /// powers of two and at the end.
    pub dense_until: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            step_rule: StepRule::LemmaOptimal,
            max_iters: 100_000,
            residual_tol: 1e-8,
            dense_until: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordedIterate {
    pub k: u64,
    pub alpha: DVector<f64>,
    pub least_norm_gap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub eta: f64,
    /// `‖Zα^{(k)} - y‖` for `k = 0..=iterations`.
    pub residuals: Vec<f64>,
    pub recorded: Vec<RecordedIterate>,
    pub iterations: u64,
    pub converged: bool,
    /// Singular values of `Z`, when known.
    pub sigma: Option<Vec<f64>>,
}

impl TrainTrace {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_alpha(&self) -> &DVector<f64> {
        &self.recorded.last().expect("trace always records the final iterate").alpha
    }

    /// `f_k(σ_j)` for every known singular value.
    pub fn filter_values(&self, k: u64) -> Option<Vec<f64>> {
        self.sigma
            .as_ref()
            .map(|s| s.iter().map(|&v| filter_value(self.eta, v, k)).collect())
    }

    /// `κ(Ĥ) = σ_max²/σ_min²`, when known.
    pub fn kappa(&self) -> Option<f64> {
        let s = self.sigma.as_ref()?;
        let max = s.iter().copied().fold(0.0, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        Some((max / min).powi(2))
    }
}

fn is_recorded(k: u64, dense_until: u64) -> bool {
    k <= dense_until || k.is_power_of_two()
}

/// Runs gradient descent from `alpha0`. Spectral step rules compute the
/// extreme eigenvalues of `Z Zᵀ`; `reference` (typically `α_ln`) enables the
/// least-norm gap on recorded iterates.
pub fn gradient_descent(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &TrainConfig,
    alpha0: &DVector<f64>,
    reference: Option<&DVector<f64>>,
) -> Result<TrainTrace> {
    let (n, m) = z.shape();
    if y.len() != n || alpha0.len() != m {
        return Err(Error::Config(format!(
            "Z is {n}x{m} but y has length {} and alpha0 has length {}",
            y.len(),
            alpha0.len()
        )));
    }
    if z.iter().chain(y.iter()).chain(alpha0.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training inputs".into()));
    }
    let eta = if cfg.step_rule.needs_spectrum() {
        let rep = SpectralReport::of_symmetric(&(z * z.transpose()))?;
        cfg.step_rule.resolve(rep.lambda_min.max(0.0), rep.lambda_max)?
    } else {
        cfg.step_rule.resolve(0.0, f64::INFINITY)?
    };
    run(z, y, eta, cfg, alpha0, reference, None)
}

fn run(
    z: &DMatrix<f64>,
    y: &DVector<f64>,
    eta: f64,
    cfg: &TrainConfig,
    alpha0: &DVector<f64>,
    reference: Option<&DVector<f64>>,
    sigma: Option<Vec<f64>>,
) -> Result<TrainTrace> {
    let (n, m) = z.shape();
    let mut alpha = alpha0.clone();
    let mut r = DVector::zeros(n);
    let mut g = DVector::zeros(m);
    let gap = |a: &DVector<f64>| reference.map(|rf| (a - rf).norm());
    let mut residuals = Vec::new();
    let mut recorded = Vec::new();
    let mut k = 0u64;
    let mut r0 = f64::NAN;
    let converged = loop {
        r.copy_from(y);
        r.gemv(1.0, z, &alpha, -1.0);
        let res = r.norm();
        if !res.is_finite() {
            return Err(Error::NonFinite(format!("residual at iteration {k}")));
        }
        residuals.push(res);
        if k == 0 {
            r0 = res;
        } else if r0 > 0.0 && res > DIVERGENCE_FACTOR * r0 {
            let lmax = SpectralReport::of_symmetric(&(z * z.transpose()))?.lambda_max;
            return Err(Error::Divergence {
                iteration: k as usize,
                residual: res,
                threshold: DIVERGENCE_FACTOR * r0,
                eta,
                admissible: 2.0 / lmax,
            });
        }
        let done = res <= cfg.residual_tol;
        if done || k >= cfg.max_iters {
            recorded.push(RecordedIterate {
                k,
                least_norm_gap: gap(&alpha),
                alpha: alpha.clone(),
            });
            break done;
        }
        if is_recorded(k, cfg.dense_until) {
            recorded.push(RecordedIterate {
                k,
                least_norm_gap: gap(&alpha),
                alpha: alpha.clone(),
            });
        }
        g.gemv_tr(1.0, z, &r, 0.0);
        alpha.axpy(-eta, &g, 1.0);
        k += 1;
    };
    Ok(TrainTrace {
        eta,
        residuals,
        recorded,
        iterations: k,
        converged,
        sigma,
    })
}

fn contains_bad_set(x: &Dataset) -> bool {
    let Ok(bad) = bad_point_set(x.dim()) else { return false };
    bad.points().row_iter().all(|b| {
        x.points()
            .row_iter()
            .any(|p| (p - b).norm() <= DISTINCT_TOL)
    })
}

/// Builds `Z = γ(XᵀW)/√m` and runs gradient descent from zero, tracking the
/// distance to the least-norm solution.
pub fn train_last_layer(
    x: &Dataset,
    act: &Activation,
    w: &WeightMatrix,
    y: &DVector<f64>,
    cfg: &TrainConfig,
) -> Result<TrainTrace> {
    let est = feature_matrix(x, w, act)?;
    let (n, m) = est.z.shape();
    let svd = ReducedSvd::auto(&est.z)?;
    let lw = match Landweber::from_svd(svd, n) {
        Ok(lw) => lw,
        Err(Error::RankDeficient {
            lambda_min,
            tolerance,
            ..
        }) => {
            let hint = if act.kind() == ActivationKind::Relu && contains_bad_set(x) {
                "; the data contains the eight-point set (±s,±s,±s,0,…) on which every ReLU feature matrix has rank at most 7".to_string()
            } else if m < n {
                format!("; width {m} is below the number of points {n}")
            } else {
                String::new()
            };
            return Err(Error::RankDeficient {
                lambda_min,
                tolerance,
                hint,
            });
        }
        Err(e) => return Err(e),
    };
    let sigma: Vec<f64> = lw.sigma().to_vec();
    let smax = sigma[0];
    let smin = sigma[sigma.len() - 1];
    let eta = cfg.step_rule.resolve(smin * smin, smax * smax)?;
    let alpha_ln = lw.least_norm(y)?;
    run(&est.z, y, eta, cfg, &DVector::zeros(m), Some(&alpha_ln), Some(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic2, uniform_sphere};
    use crate::features::{sample_weights, WeightDistribution};
    use crate::rng;
    use crate::training::landweber::Landweber;
    use proptest::prelude::*;

    fn random_system(n: usize, m: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut s = rng::stream(seed);
        let z = DMatrix::from_fn(n, m, |_, _| rng::normal(&mut s));
        let y = DVector::from_fn(n, |_, _| rng::normal(&mut s));
        (z, y)
    }

    #[test]
    fn one_step_solve() {
        let z = DMatrix::from_element(1, 1, 1.0);
        let y = DVector::from_element(1, 2.0);
        let cfg = TrainConfig {
            residual_tol: 0.0,
            max_iters: 1,
            ..TrainConfig::default()
        };
        let t = gradient_descent(&z, &y, &cfg, &DVector::zeros(1), None).unwrap();
        assert_eq!(t.eta, 1.0);
        assert_eq!(t.final_alpha()[0], 2.0);
        assert_eq!(t.residuals, vec![2.0, 0.0]);
    }

    #[test]
    fn divergence_is_diagnosed() {
        let (z, y) = random_system(4, 10, 1);
        let cfg = TrainConfig {
            step_rule: StepRule::Fixed(10.0),
            ..TrainConfig::default()
        };
        match gradient_descent(&z, &y, &cfg, &DVector::zeros(10), None) {
            Err(Error::Divergence { eta, admissible, .. }) => assert!(eta > admissible),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectral_cap_rejects_large_steps() {
        assert!(StepRule::SpectralCap(Some(2.0)).resolve(0.1, 1.0).is_err());
        assert_eq!(StepRule::SpectralCap(None).resolve(0.1, 4.0).unwrap(), 0.25);
        assert!(StepRule::Fixed(0.0).resolve(0.1, 1.0).is_err());
    }

    #[test]
    fn recorded_set_is_dense_then_powers_of_two() {
        let (z, y) = random_system(3, 8, 2);
        let cfg = TrainConfig {
            max_iters: 100,
            residual_tol: 0.0,
            step_rule: StepRule::Fixed(1e-3),
            dense_until: 20,
        };
        let t = gradient_descent(&z, &y, &cfg, &DVector::zeros(8), None).unwrap();
        let ks: Vec<u64> = t.recorded.iter().map(|r| r.k).collect();
        let mut want: Vec<u64> = (0..=20).collect();
        want.extend([32, 64, 100]);
        assert_eq!(ks, want);
        assert_eq!(t.residuals.len(), 101);
    }

    #[test]
    fn wendland_training_converges() {
        let x = uniform_sphere(20, 5, 3).unwrap();
        let act = Activation::wendland0(5, std::f64::consts::SQRT_2).unwrap();
        let w = sample_weights(5, 1000, WeightDistribution::UniformSphere, 4).unwrap();
        let y = DVector::from_fn(20, |i, _| (i as f64).sin());
        let t = train_last_layer(&x, &act, &w, &y, &TrainConfig::default()).unwrap();
        assert!(t.converged, "final residual {}", t.final_residual());
        assert!(t.final_residual() <= 1e-8);
        assert!(t.kappa().unwrap() >= 1.0);
    }

    #[test]
    fn relu_with_bad_set_is_rank_deficient_for_every_seed() {
        let x = synthetic2(0).unwrap();
        let y = x.labels().clone();
        for seed in 0..5 {
            let w = sample_weights(3, 2000, WeightDistribution::UniformSphere, seed).unwrap();
            match train_last_layer(&x, &Activation::relu(), &w, &y, &TrainConfig::default()) {
                Err(Error::RankDeficient { hint, .. }) => assert!(hint.contains("eight-point")),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn iterates_follow_the_oracle_and_contract(n in 1usize..=12, extra in 0usize..=40, seed in any::<u64>()) {
            let (z, y) = random_system(n, n + extra, seed);
            let lw = Landweber::new(&z).unwrap();
            let cfg = TrainConfig { max_iters: 60, residual_tol: 0.0, dense_until: 60, step_rule: StepRule::LemmaOptimal };
            let t = gradient_descent(&z, &y, &cfg, &DVector::zeros(n + extra), None).unwrap();
            for rec in &t.recorded {
                let oracle = lw.iterate(&y, t.eta, rec.k).unwrap();
                prop_assert!((&rec.alpha - oracle).norm() <= 1e-8 * y.norm());
            }
            let kz = lw.sigma()[0] / lw.sigma()[n - 1];
            let rate = 1.0 - 2.0 / (1.0 + kz * kz);
            for (k, r) in t.residuals.iter().enumerate() {
                prop_assert!(*r <= rate.powi(k as i32) * t.residuals[0] * (1.0 + 1e-12) + 1e-13 * y.norm());
            }
            prop_assert!(t.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-13 * y.norm()));
        }
    }
}
