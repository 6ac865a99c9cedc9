use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDistribution {
    /// Columns uniform on `S^{d-1}`.
    UniformSphere,
    /// i.i.d. `N(0, 1)` entries.
    Gaussian,
}

impl std::str::FromStr for WeightDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-sphere" | "sphere" => Ok(WeightDistribution::UniformSphere),
            "gaussian" | "normal" => Ok(WeightDistribution::Gaussian),
            _ => Err(Error::Config(format!("unknown weight distribution {s:?}"))),
        }
    }
}

impl std::fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightDistribution::UniformSphere => "uniform-sphere",
            WeightDistribution::Gaussian => "gaussian",
        })
    }
}

/// Hidden-layer weights `W ∈ R^{d×m}`, one neuron per column.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub w: DMatrix<f64>,
    pub distribution: WeightDistribution,
    pub seed: u64,
}

impl WeightMatrix {
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }
    pub fn width(&self) -> usize {
        self.w.ncols()
    }
}

/// Column generator shared by [`sample_weights`] and the streamed Gram
/// accumulation, so both see the same weights for the same seed.
pub struct ColumnSampler {
    rng: Stream,
    d: usize,
    distribution: WeightDistribution,
}

impl ColumnSampler {
    pub fn new(d: usize, distribution: WeightDistribution, seed: u64) -> Self {
        ColumnSampler {
            rng: rng::stream(seed),
            d,
            distribution,
        }
    }

    /// Writes the next column into `out` (length `d`).
    pub fn next_into(&mut self, out: &mut [f64]) {
        loop {
            for v in out.iter_mut() {
                *v = rng::normal(&mut self.rng);
            }
            if self.distribution == WeightDistribution::Gaussian {
                return;
            }
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                out.iter_mut().for_each(|v| *v /= norm);
                return;
            }
        }
    }

    /// Next `k` columns as a `d×k` matrix.
    pub fn next_block(&mut self, k: usize) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.d, k);
        for mut col in w.column_iter_mut() {
            self.next_into(col.as_mut_slice());
        }
        w
    }
}

pub fn sample_weights(d: usize, m: usize, distribution: WeightDistribution, seed: u64) -> Result<WeightMatrix> {
    if d < 2 || m == 0 {
        return Err(Error::Domain(format!("weights need d >= 2 and m >= 1, got d={d}, m={m}")));
    }
    let w = ColumnSampler::new(d, distribution, seed).next_block(m);
    Ok(WeightMatrix { w, distribution, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_columns_are_unit() {
        let w = sample_weights(7, 300, WeightDistribution::UniformSphere, 4).unwrap();
        for c in w.w.column_iter() {
            assert!((c.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaussian_moments() {
        let w = sample_weights(1000, 1000, WeightDistribution::Gaussian, 77).unwrap();
        let n = w.w.len() as f64;
        let mean = w.w.sum() / n;
        let var = w.w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn deterministic_per_seed_and_prefix_stable() {
        let a = sample_weights(5, 40, WeightDistribution::UniformSphere, 9).unwrap();
        let b = sample_weights(5, 40, WeightDistribution::UniformSphere, 9).unwrap();
        assert_eq!(a, b);
        let mut s = ColumnSampler::new(5, WeightDistribution::UniformSphere, 9);
        let head = s.next_block(15);
        let tail = s.next_block(25);
        assert_eq!(head, a.w.columns(0, 15));
        assert_eq!(tail, a.w.columns(15, 25));
        assert!(sample_weights(1, 4, WeightDistribution::Gaussian, 0).is_err());
    }
}
