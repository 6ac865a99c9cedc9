//! Ultraspherical expansions of activations and the induced zonal kernels.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::activations::Activation;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::harmonics::closed_form::{ntk_phi, relu_phi};
use crate::harmonics::gegenbauer::{ln_harmonic_dimension, Gegenbauer};
use crate::harmonics::quadrature::GaussGegenbauer;

/// Smallest admissible truncation degree.
pub const MIN_TRUNCATION: usize = 16;

/// Default truncation degree.
pub const DEFAULT_TRUNCATION: usize = 500;

/// Points in the reconstruction check grid.
pub const RECONSTRUCTION_GRID: usize = 1024;

/// Reconstruction residual above which a warning is logged.
pub const RECONSTRUCTION_WARN: f64 = 1e-4;

/// Default node count: `max(2K, 1024)`.
pub fn default_nodes(k: usize) -> usize {
    (2 * k).max(1024)
}

/// `γ(t) = Σ_{k≤K} a_k C_k^{(τ)}(t)`.
///
/// Coefficients are kept both in the classical normalization (`a_k`) and in
/// the orthonormal one (`â_k = a_k sqrt(h_k)`), which is what every numerical
/// routine uses.
#[derive(Debug, Clone)]
pub struct UltrasphericalExpansion {
    family: Gegenbauer,
    betas: Vec<f64>,
    ortho: Vec<f64>,
    coeffs_a: Vec<f64>,
    tail_estimate: f64,
    reconstruction_error: f64,
}

impl UltrasphericalExpansion {
    pub fn dim(&self) -> usize {
        self.family.dim()
    }
    pub fn truncation_k(&self) -> usize {
        self.ortho.len() - 1
    }
    /// Classical coefficients `a_0..a_K`.
    pub fn coeffs_a(&self) -> &[f64] {
        &self.coeffs_a
    }
    /// Orthonormal coefficients `â_0..â_K`.
    pub fn ortho_coeffs(&self) -> &[f64] {
        &self.ortho
    }
    /// Energy of the last 10% of coefficients relative to the total.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }
    /// Max deviation from the source function on a uniform grid.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }
    pub fn family(&self) -> &Gegenbauer {
        &self.family
    }

    /// Truncated series at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.family.orthonormal_sum(t, &self.betas, &self.ortho)
    }
}

/// Expands an activation with the default node count.
pub fn expand(act: &Activation, d: usize, k: usize) -> Result<UltrasphericalExpansion> {
    expand_with_nodes(act, d, k, default_nodes(k))
}

pub fn expand_with_nodes(act: &Activation, d: usize, k: usize, nodes: usize) -> Result<UltrasphericalExpansion> {
    if let Some(ad) = act.dim() {
        if ad != d {
            return Err(Error::Config(format!("activation built for d={ad}, expansion requested for d={d}")));
        }
    }
    expand_fn(|t| act.eval_unchecked(t), d, k, nodes)
}

/// Expands an arbitrary function on `[-1, 1]`.
pub fn expand_fn(f: impl Fn(f64) -> f64, d: usize, k: usize, nodes: usize) -> Result<UltrasphericalExpansion> {
    if d < 3 {
        return Err(Error::Domain(format!("expansion needs d >= 3, got {d}")));
    }
    if k < MIN_TRUNCATION {
        return Err(Error::Config(format!("truncation K must be >= {MIN_TRUNCATION}, got {k}")));
    }
    if nodes < 2 * k {
        return Err(Error::Config(format!(
            "{nodes} quadrature nodes cannot resolve K={k}; need at least {}",
            2 * k
        )));
    }
    let family = Gegenbauer::for_dimension(d);
    let rule = GaussGegenbauer::new(&family, nodes)?;
    let betas = family.betas(nodes.max(k + 1));
    let mut ortho = vec![0.0; k + 1];
    let mut p = vec![0.0; k + 1];
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fw = w * f(t);
        if fw == 0.0 {
            continue;
        }
        family.orthonormal_into(t, &betas, &mut p);
        for (a, pk) in ortho.iter_mut().zip(&p) {
            *a += fw * pk;
        }
    }
    if ortho.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("expansion coefficients".into()));
    }
    let coeffs_a = ortho
        .iter()
        .enumerate()
        .map(|(j, a)| a * (-0.5 * family.ln_norm_sq(j)).exp())
        .collect();
    let total: f64 = ortho.iter().map(|a| a * a).sum();
    let tail_start = k + 1 - (k + 1) / 10;
    let tail: f64 = ortho[tail_start..].iter().map(|a| a * a).sum();
    let tail_estimate = if total > 0.0 { tail / total } else { 0.0 };
    let mut exp = UltrasphericalExpansion {
        family,
        betas,
        ortho,
        coeffs_a,
        tail_estimate,
        reconstruction_error: 0.0,
    };
    exp.reconstruction_error = (0..RECONSTRUCTION_GRID)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (RECONSTRUCTION_GRID - 1) as f64;
            (exp.eval(t) - f(t)).abs()
        })
        .fold(0.0, f64::max);
    if exp.reconstruction_error > RECONSTRUCTION_WARN {
        log::warn!(
            "expansion reconstruction residual {:e} exceeds {:e} at K={k}",
            exp.reconstruction_error,
            RECONSTRUCTION_WARN
        );
    }
    Ok(exp)
}

/// Where a kernel expansion came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    Quadrature,
    ClosedFormRelu,
    ClosedFormNtk,
}

/// `φ(t) = Σ c_k C_k^{(τ)}(t)`.
#[derive(Debug, Clone)]
pub struct KernelExpansion {
    family: Gegenbauer,
    betas: Vec<f64>,
    ortho: Vec<f64>,
    coeffs_c: Vec<f64>,
    source: KernelSource,
}

impl KernelExpansion {
    pub fn dim(&self) -> usize {
        self.family.dim()
    }
    pub fn coeffs_c(&self) -> &[f64] {
        &self.coeffs_c
    }
    pub fn ortho_coeffs(&self) -> &[f64] {
        &self.ortho
    }
    pub fn source(&self) -> KernelSource {
        self.source
    }
    pub fn eval(&self, t: f64) -> f64 {
        self.family.orthonormal_sum(t.clamp(-1.0, 1.0), &self.betas, &self.ortho)
    }

    /// Expansion of one of the closed-form kernels, for comparison with the
    /// Funk–Hecke image.
    pub fn from_closed_form(kind: ClosedForm, d: usize, k: usize) -> Result<Self> {
        let e = expand_fn(|t| kind.eval(t, d), d, k, default_nodes(k))?;
        Ok(KernelExpansion {
            family: e.family,
            betas: e.betas,
            ortho: e.ortho,
            coeffs_c: e.coeffs_a,
            source: match kind {
                ClosedForm::Relu => KernelSource::ClosedFormRelu,
                ClosedForm::Ntk => KernelSource::ClosedFormNtk,
            },
        })
    }
}

/// `c_k = a_k² C_k(1) / b_{k,d}`, evaluated in log space.
pub fn funk_hecke(exp: &UltrasphericalExpansion) -> Result<KernelExpansion> {
    let fam = exp.family;
    let d = fam.dim();
    let mut ortho = Vec::with_capacity(exp.ortho.len());
    let mut coeffs_c = Vec::with_capacity(exp.ortho.len());
    for (k, &a) in exp.ortho.iter().enumerate() {
        if a == 0.0 {
            ortho.push(0.0);
            coeffs_c.push(0.0);
            continue;
        }
        let ln_h = fam.ln_norm_sq(k);
        let ln_ratio = fam.ln_value_at_one(k) - ln_harmonic_dimension(k, d);
        let ln_abs_a = a.abs().ln();
        let c = (2.0 * ln_abs_a - ln_h + ln_ratio).exp();
        let c_hat = (2.0 * ln_abs_a - 0.5 * ln_h + ln_ratio).exp();
        if !c.is_finite() || !c_hat.is_finite() {
            return Err(Error::NonFinite(format!("kernel coefficient c_{k}")));
        }
        coeffs_c.push(c);
        ortho.push(c_hat);
    }
    Ok(KernelExpansion {
        family: fam,
        betas: exp.betas.clone(),
        ortho,
        coeffs_c,
        source: KernelSource::Quadrature,
    })
}

/// The two kernels with known closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    Relu,
    Ntk,
}

impl ClosedForm {
    pub fn eval(self, t: f64, d: usize) -> f64 {
        match self {
            ClosedForm::Relu => relu_phi(t, d),
            ClosedForm::Ntk => ntk_phi(t, d),
        }
    }
}

/// A zonal kernel `φ` on `S^{d-1}`.
#[derive(Debug, Clone)]
pub enum Kernel {
    Expansion(KernelExpansion),
    Closed { form: ClosedForm, d: usize },
}

impl Kernel {
    pub fn dim(&self) -> usize {
        match self {
            Kernel::Expansion(e) => e.dim(),
            Kernel::Closed { d, .. } => *d,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Kernel::Expansion(e) => e.eval(t),
            Kernel::Closed { form, d } => form.eval(t, *d),
        }
    }

    /// `φ(1) - 3φ(1/3) + 3φ(-1/3) - φ(-1)`, which vanishes exactly when the
    /// kernel matrix on the eight-point set has the signed null vector.
    pub fn bad_set_combination(&self) -> f64 {
        let third = 1.0 / 3.0;
        self.eval(1.0) - 3.0 * self.eval(third) + 3.0 * self.eval(-third) - self.eval(-1.0)
    }
}

/// `H_ij = φ(x_iᵀx_j)`.
pub fn population_kernel_matrix(x: &Dataset, kernel: &Kernel) -> Result<DMatrix<f64>> {
    if kernel.dim() != x.dim() {
        return Err(Error::Config(format!(
            "kernel dimension {} does not match data dimension {}",
            kernel.dim(),
            x.dim()
        )));
    }
    let g = x.inner_products();
    let n = x.n();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let t = g[(i, j)];
            if t.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("inner product {t} outside [-1, 1]")));
            }
            let v = kernel.eval(t.clamp(-1.0, 1.0));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{bad_point_set, uniform_sphere, BAD_SET_NULL_V};
    use approx::assert_relative_eq;
    use nalgebra::{DVector, SymmetricEigen};
    use proptest::prelude::*;

    #[test]
    fn identity_function_in_d4() {
        let e = expand_fn(|t| t, 4, 16, 64).unwrap();
        assert_relative_eq!(e.coeffs_a()[1], 0.5, epsilon = 1e-13);
        for (k, a) in e.coeffs_a().iter().enumerate() {
            if k != 1 {
                assert!(a.abs() < 1e-13, "a_{k} = {a}");
            }
        }
        assert!(e.reconstruction_error() < 1e-13);
    }

    #[test]
    fn basis_element_in_d5() {
        let g = Gegenbauer::for_dimension(5);
        let e = expand_fn(|t| g.classical(t, 3)[3], 5, 16, 64).unwrap();
        assert_relative_eq!(e.coeffs_a()[3], 1.0, epsilon = 1e-12);
        for (k, a) in e.coeffs_a().iter().enumerate() {
            if k != 3 {
                assert!(a.abs() <= 1e-10, "a_{k} = {a}");
            }
        }
    }

    #[test]
    fn relu_odd_coefficients_vanish_beyond_one() {
        let e = expand(&Activation::relu(), 3, 500).unwrap();
        for k in (3..=500).step_by(2) {
            assert!(e.coeffs_a()[k].abs() < 1e-8, "a_{k} = {:e}", e.coeffs_a()[k]);
        }
        assert!(e.coeffs_a()[1].abs() > 0.1);
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(expand_with_nodes(&Activation::relu(), 3, 100, 150), Err(Error::Config(_))));
        assert!(matches!(expand(&Activation::relu(), 3, 8), Err(Error::Config(_))));
        let w = Activation::wendland0(5, std::f64::consts::SQRT_2).unwrap();
        assert!(matches!(expand(&w, 4, 32), Err(Error::Config(_))));
    }

    #[test]
    fn funk_hecke_hand_values() {
        let e = expand_fn(|_| 1.0, 7, 16, 64).unwrap();
        let k = funk_hecke(&e).unwrap();
        assert_relative_eq!(k.coeffs_c()[0], 1.0, epsilon = 1e-13);
        let e = expand_fn(|t| 2.0 * t, 4, 16, 64).unwrap();
        assert_relative_eq!(e.coeffs_a()[1], 1.0, epsilon = 1e-13);
        let k = funk_hecke(&e).unwrap();
        assert_relative_eq!(k.coeffs_c()[1], 0.5, epsilon = 1e-13);
    }

    #[test]
    fn relu_kernel_matches_closed_form() {
        for d in [3, 10] {
            let kern = funk_hecke(&expand(&Activation::relu(), d, 500).unwrap()).unwrap();
            assert!(kern.coeffs_c().iter().all(|&c| c >= -1e-12));
            let err = (0..201)
                .map(|i| {
                    let t = -1.0 + i as f64 / 100.0;
                    (kern.eval(t) - relu_phi(t, d)).abs()
                })
                .fold(0.0, f64::max);
            assert!(err <= 1e-6, "d={d}: {err:e}");
        }
    }

    #[test]
    fn closed_form_expansion_reproduces_itself() {
        let k = KernelExpansion::from_closed_form(ClosedForm::Ntk, 5, 64).unwrap();
        assert_eq!(k.source(), KernelSource::ClosedFormNtk);
        assert!((k.eval(0.3) - ntk_phi(0.3, 5)).abs() < 1e-4);
    }

    #[test]
    fn swish_kernel_is_singular_on_bad_set() {
        for d in [3, 10] {
            let kern = Kernel::Expansion(funk_hecke(&expand(&Activation::swish(), d, 500).unwrap()).unwrap());
            assert!(kern.bad_set_combination().abs() <= 1e-6);
        }
    }

    #[test]
    fn closed_form_matrices_annihilate_v() {
        let x = bad_point_set(3).unwrap();
        let v = DVector::from_row_slice(&BAD_SET_NULL_V);
        for form in [ClosedForm::Relu, ClosedForm::Ntk] {
            let h = population_kernel_matrix(&x, &Kernel::Closed { form, d: 3 }).unwrap();
            let lmax = SymmetricEigen::new(h.clone()).eigenvalues.max();
            assert!((&h * &v).amax() <= 1e-14 * lmax);
        }
    }

    #[test]
    fn single_point_matrix() {
        let x = uniform_sphere(1, 4, 1).unwrap();
        let h = population_kernel_matrix(&x, &Kernel::Closed { form: ClosedForm::Relu, d: 4 }).unwrap();
        assert_eq!(h.shape(), (1, 1));
        assert_relative_eq!(h[(0, 0)], relu_phi(1.0, 4), epsilon = 1e-15);
        assert!(population_kernel_matrix(&x, &Kernel::Closed { form: ClosedForm::Relu, d: 3 }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn wendland_population_matrices_are_nonsingular(d in 3usize..=10, n in 2usize..=50, seed in any::<u64>(), second in any::<bool>()) {
            let zeta = std::f64::consts::SQRT_2;
            let act = if second { Activation::wendland2(d, zeta) } else { Activation::wendland0(d, zeta) }.unwrap();
            let kern = Kernel::Expansion(funk_hecke(&expand(&act, d, 128).unwrap()).unwrap());
            let x = uniform_sphere(n, d, seed).unwrap();
            let h = population_kernel_matrix(&x, &kern).unwrap();
            let ev = SymmetricEigen::new(h).eigenvalues;
            prop_assert!(ev.min() > 1e-12 * ev.max(), "{} vs {}", ev.min(), ev.max());
        }

        #[test]
        fn expansion_kernels_are_psd(d in 3usize..=8, n in 1usize..=30, seed in any::<u64>(), which in 0usize..4) {
            let act = match which {
                0 => Activation::relu(),
                1 => Activation::swish(),
                2 => Activation::wendland0(d, 1.2).unwrap(),
                _ => Activation::wendland2(d, 1.7).unwrap(),
            };
            let kern = funk_hecke(&expand(&act, d, 64).unwrap()).unwrap();
            prop_assert!(kern.coeffs_c().iter().all(|&c| c >= -1e-12));
            let x = uniform_sphere(n, d, seed).unwrap();
            let h = population_kernel_matrix(&x, &Kernel::Expansion(kern)).unwrap();
            prop_assert_eq!(&h, &h.transpose());
            let ev = SymmetricEigen::new(h).eigenvalues;
            prop_assert!(ev.min() >= -1e-10 * ev.max());
        }
    }
}
