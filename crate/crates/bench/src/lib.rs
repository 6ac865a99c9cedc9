//! Fixtures shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use zeroloss_core::data::uniform_sphere;
use zeroloss_core::rng;
use zeroloss_core::Dataset;

/// Uniform points on the sphere with labels `sum(x)`.
pub fn labelled_points(n: usize, d: usize, seed: u64) -> Dataset {
    let ds = uniform_sphere(n, d, seed).expect("valid size");
    let y = DVector::from_iterator(n, ds.points().row_iter().map(|r| r.sum()));
    ds.with_labels(y).expect("matching length")
}

/// Gaussian `n×m` system and right-hand side.
pub fn random_system(n: usize, m: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
    let mut s = rng::stream(seed);
    let z = DMatrix::from_fn(n, m, |_, _| rng::normal(&mut s));
    let y = DVector::from_fn(n, |_, _| rng::normal(&mut s));
    (z, y)
}
