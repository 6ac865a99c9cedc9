//! Closed-form population kernels for ReLU features with uniform weights on
//! `S^{d-1}`.

use std::f64::consts::PI;

/// `φ(t) = [sin(arccos t) + (π/2 - arccos t) t] / (2dπ) + t/(4d)`.
pub fn relu_phi(t: f64, d: usize) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    let theta = t.acos();
    let d = d as f64;
    (theta.sin() + (PI / 2.0 - theta) * t) / (2.0 * d * PI) + t / (4.0 * d)
}

/// NTK kernel `φ̃(t) = t (π - arccos t) / (2dπ)`.
pub fn ntk_phi(t: f64, d: usize) -> f64 {
    let t = t.clamp(-1.0, 1.0);
    t * (PI - t.acos()) / (2.0 * d as f64 * PI)
}
