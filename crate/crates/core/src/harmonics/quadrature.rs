//! Gauss–Gegenbauer quadrature.
//!
//! Nodes are eigenvalues of the symmetric Jacobi matrix (Golub–Welsch),
//! polished by Newton steps on `p_N`; weights are Christoffel numbers
//! `1 / Σ_{k<N} p_k(t)²`. The rule is symmetrized so odd integrands cancel
//! pairwise.

use crate::error::{Error, Result};
use crate::harmonics::gegenbauer::Gegenbauer;

/// `N`-point rule for the weight `(1 - t²)^{τ - 1/2}`; exact for polynomials
/// of degree `2N - 1`.
#[derive(Debug, Clone)]
pub struct GaussGegenbauer {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussGegenbauer {
    pub fn new(family: &Gegenbauer, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("quadrature needs at least 2 nodes, got {n}")));
        }
        let betas = family.betas(n);
        let mut diag = vec![0.0; n];
        let mut off = betas[..n - 1].to_vec();
        symmetric_tridiagonal_eigenvalues(&mut diag, &mut off)?;
        let mut nodes = diag;
        nodes.sort_by(f64::total_cmp);

        let mut p = vec![0.0; n + 1];
        for t in nodes.iter_mut() {
            for _ in 0..3 {
                let (val, der) = orthonormal_with_derivative(family, &betas, *t, n);
                if der == 0.0 || !der.is_finite() {
                    break;
                }
                let step = val / der;
                if !step.is_finite() || step.abs() > 1e-6 {
                    break;
                }
                *t -= step;
                if step.abs() < 1e-17 {
                    break;
                }
            }
        }
        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&t| {
                family.orthonormal_into(t, &betas, &mut p[..n]);
                1.0 / p[..n].iter().map(|v| v * v).sum::<f64>()
            })
            .collect();

        for i in 0..n / 2 {
            let j = n - 1 - i;
            let t = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -t;
            nodes[j] = t;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussGegenbauer { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ (1-t²)^{τ-1/2} f(t) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// `(p_n(t), p_n'(t))` for the orthonormal family.
fn orthonormal_with_derivative(family: &Gegenbauer, betas: &[f64], t: f64, n: usize) -> (f64, f64) {
    let p0 = (-0.5 * family.ln_mass()).exp();
    let (mut pm, mut p) = (0.0, p0);
    let (mut dm, mut dp) = (0.0, 0.0);
    for k in 0..n {
        let bk = if k == 0 { 0.0 } else { betas[k - 1] };
        let next = (t * p - bk * pm) / betas[k];
        let dnext = (p + t * dp - bk * dm) / betas[k];
        pm = p;
        p = next;
        dm = dp;
        dp = dnext;
    }
    (p, dp)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (implicit QL with Wilkinson shifts). Results overwrite
/// `diag`, unsorted.
pub fn symmetric_tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let d = diag;
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Config("tridiagonal QL failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    off.copy_from_slice(&e[..n - 1]);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_five_point_rule() {
        // d = 3 gives the Legendre weight.
        let q = GaussGegenbauer::new(&Gegenbauer::for_dimension(3), 5).unwrap();
        let expect = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0];
        for (t, e) in q.nodes().iter().zip(expect) {
            assert_relative_eq!(*t, e, epsilon = 1e-14);
        }
        assert_relative_eq!(q.weights()[2], 128.0 / 225.0, epsilon = 1e-14);
        assert_relative_eq!(q.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // d = 4 (τ = 1): weight sqrt(1 - t²); ∫ t⁴ sqrt(1-t²) = π/16.
        let q = GaussGegenbauer::new(&Gegenbauer::for_dimension(4), 8).unwrap();
        assert_relative_eq!(q.integrate(|t| t.powi(4)), std::f64::consts::PI / 16.0, epsilon = 1e-14);
        assert_relative_eq!(q.integrate(|_| 1.0), std::f64::consts::PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn large_rules_are_symmetric_and_normalized() {
        for d in [3, 10] {
            let g = Gegenbauer::for_dimension(d);
            let q = GaussGegenbauer::new(&g, 1024).unwrap();
            let n = q.len();
            for i in 0..n {
                assert_eq!(q.nodes()[i], -q.nodes()[n - 1 - i]);
            }
            assert!(q.nodes().windows(2).all(|w| w[0] < w[1]));
            assert_relative_eq!(q.weights().iter().sum::<f64>(), g.ln_mass().exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn tridiagonal_eigenvalues_of_known_matrix() {
        // Path-graph Laplacian-like matrix: 2 on diag, -1 off: λ_k = 2 - 2 cos(kπ/(n+1)).
        let n = 12;
        let mut diag = vec![2.0; n];
        let mut off = vec![-1.0; n - 1];
        symmetric_tridiagonal_eigenvalues(&mut diag, &mut off).unwrap();
        diag.sort_by(f64::total_cmp);
        for (k, v) in diag.iter().enumerate() {
            let e = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_relative_eq!(*v, e, epsilon = 1e-13);
        }
    }
}
