//! Ultraspherical polynomials `C_k^{(τ)}` on `[-1, 1]` with weight
//! `(1 - t²)^{τ - 1/2}`.
//!
//! Internally everything runs on the orthonormal family `p_k = C_k / sqrt(h_k)`
//! whose three-term recurrence stays bounded for large `k` and `τ`; the
//! classical normalization is recovered through the log-norms below.

use libm::lgamma;

/// `lnΓ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// Gegenbauer family for sphere dimension `d` (`τ = (d - 2)/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gegenbauer {
    d: usize,
    tau: f64,
}

impl Gegenbauer {
    /// Requires `d >= 3` so that `τ > 0`.
    pub fn for_dimension(d: usize) -> Self {
        assert!(d >= 3, "Gegenbauer family needs d >= 3");
        Gegenbauer {
            d,
            tau: (d as f64 - 2.0) / 2.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `ln ∫ (1-t²)^{τ-1/2} dt = ln(√π Γ(τ+1/2)/Γ(τ+1))`.
    pub fn ln_mass(&self) -> f64 {
        0.5 * std::f64::consts::PI.ln() + ln_gamma(self.tau + 0.5) - ln_gamma(self.tau + 1.0)
    }

    /// `ln h_k`, `h_k = ∫ w C_k² = π 2^{1-2τ} Γ(k+2τ) / (k! (k+τ) Γ(τ)²)`.
    pub fn ln_norm_sq(&self, k: usize) -> f64 {
        let (k, t) = (k as f64, self.tau);
        std::f64::consts::PI.ln() + (1.0 - 2.0 * t) * std::f64::consts::LN_2 + ln_gamma(k + 2.0 * t)
            - ln_gamma(k + 1.0)
            - (k + t).ln()
            - 2.0 * ln_gamma(t)
    }

    /// `ln C_k(1) = ln Γ(k+d-2) - ln Γ(d-2) - ln k!`.
    pub fn ln_value_at_one(&self, k: usize) -> f64 {
        let (k, t2) = (k as f64, 2.0 * self.tau);
        ln_gamma(k + t2) - ln_gamma(t2) - ln_gamma(k + 1.0)
    }

    /// Off-diagonal of the Jacobi matrix: `t p_k = β_{k+1} p_{k+1} + β_k p_{k-1}`.
    #[inline]
    pub fn beta(&self, k: usize) -> f64 {
        let (k, t) = (k as f64, self.tau);
        (k * (k + 2.0 * t - 1.0) / (4.0 * (k + t) * (k + t - 1.0))).sqrt()
    }

    /// Recurrence coefficients `β_1..β_n`.
    pub fn betas(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.beta(k)).collect()
    }

    /// Fills `out[k] = p_k(t)` for `k < out.len()` using precomputed `betas`
    /// (`betas[k-1] = β_k`).
    pub fn orthonormal_into(&self, t: f64, betas: &[f64], out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = (-0.5 * self.ln_mass()).exp();
        if out.len() == 1 {
            return;
        }
        out[1] = t * out[0] / betas[0];
        for k in 1..out.len() - 1 {
            out[k + 1] = (t * out[k] - betas[k - 1] * out[k - 1]) / betas[k];
        }
    }

    /// `Σ_k coeffs[k] p_k(t)`.
    pub fn orthonormal_sum(&self, t: f64, betas: &[f64], coeffs: &[f64]) -> f64 {
        let Some(&c0) = coeffs.first() else { return 0.0 };
        let mut prev = (-0.5 * self.ln_mass()).exp();
        let mut acc = c0 * prev;
        if coeffs.len() == 1 {
            return acc;
        }
        let mut cur = t * prev / betas[0];
        acc += coeffs[1] * cur;
        for k in 1..coeffs.len() - 1 {
            let next = (t * cur - betas[k - 1] * prev) / betas[k];
            acc += coeffs[k + 1] * next;
            prev = cur;
            cur = next;
        }
        acc
    }

    /// Classical `C_k^{(τ)}(t)` for `k = 0..=n` via
    /// `k C_k = 2(k+τ-1) t C_{k-1} - (k+2τ-2) C_{k-2}`.
    pub fn classical(&self, t: f64, n: usize) -> Vec<f64> {
        let tau = self.tau;
        let mut c = Vec::with_capacity(n + 1);
        c.push(1.0);
        if n >= 1 {
            c.push(2.0 * tau * t);
        }
        for k in 2..=n {
            let kf = k as f64;
            let v = (2.0 * (kf + tau - 1.0) * t * c[k - 1] - (kf + 2.0 * tau - 2.0) * c[k - 2]) / kf;
            c.push(v);
        }
        c
    }
}

/// Dimension `b_{k,d}` of degree-`k` spherical harmonics on `S^{d-1}`,
/// in log form: `(2k+d-2) Γ(k+d-2) / (k! Γ(d-1))`.
pub fn ln_harmonic_dimension(k: usize, d: usize) -> f64 {
    match k {
        0 => 0.0,
        1 => (d as f64).ln(),
        _ => {
            let (k, d) = (k as f64, d as f64);
            (2.0 * k + d - 2.0).ln() + ln_gamma(k + d - 2.0) - ln_gamma(k + 1.0) - ln_gamma(d - 1.0)
        }
    }
}

/// `b_{k,d} = binom(d+k-1, k) - binom(d+k-3, k-2)` evaluated exactly in
/// integers, for small arguments.
pub fn harmonic_dimension_exact(k: usize, d: usize) -> Option<u128> {
    fn binom(n: usize, r: usize) -> Option<u128> {
        if r > n {
            return Some(0);
        }
        let r = r.min(n - r);
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
        }
        Some(acc)
    }
    match k {
        0 => Some(1),
        1 => Some(d as u128),
        _ => Some(binom(d + k - 1, k)? - binom(d + k - 3, k - 2)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn orthonormal_matches_classical_scaled() {
        for d in [3, 4, 5, 10] {
            let g = Gegenbauer::for_dimension(d);
            let betas = g.betas(40);
            let mut p = vec![0.0; 30];
            for &t in &[-0.93, -0.2, 0.0, 0.41, 0.999] {
                g.orthonormal_into(t, &betas, &mut p);
                let c = g.classical(t, 29);
                for k in 0..30 {
                    let scaled = p[k] * (0.5 * g.ln_norm_sq(k)).exp();
                    assert_relative_eq!(scaled, c[k], epsilon = 1e-10, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn value_at_one_matches_recurrence() {
        let g = Gegenbauer::for_dimension(7);
        let c = g.classical(1.0, 20);
        for (k, ck) in c.iter().enumerate() {
            assert_relative_eq!(g.ln_value_at_one(k).exp(), *ck, max_relative = 1e-12);
        }
    }

    #[test]
    fn first_classical_polynomial_is_two_tau_t() {
        let g = Gegenbauer::for_dimension(4);
        assert_eq!(g.classical(0.3, 1)[1], 2.0 * 1.0 * 0.3);
    }

    #[test]
    fn harmonic_dimension_log_form_matches_binomials() {
        for d in 3..12 {
            for k in 0..30 {
                let exact = harmonic_dimension_exact(k, d).unwrap() as f64;
                assert_relative_eq!(ln_harmonic_dimension(k, d).exp(), exact, max_relative = 1e-12);
            }
        }
        assert_eq!(harmonic_dimension_exact(1, 9), Some(9));
        // d = 3: 2k + 1.
        assert_eq!(harmonic_dimension_exact(5, 3), Some(11));
    }
}
