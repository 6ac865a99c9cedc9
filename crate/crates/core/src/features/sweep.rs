//! Conditioning of `Ĥ` as a function of width, over seeded trials.

use rayon::prelude::*;
use serde::Serialize;

use crate::activations::Activation;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::features::gram::{streamed_gram, DEFAULT_CHUNK};
use crate::features::weights::WeightDistribution;
use crate::linalg::{quantile, SpectralReport};
use crate::rng::mix_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub width: usize,
    pub trial: usize,
    pub seed: u64,
    pub kappa: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub width: usize,
    /// Quantiles over the non-singular trials only (NaN if there are none).
    pub median_kappa: f64,
    pub q10: f64,
    pub q90: f64,
    pub singular_fraction: f64,
    pub singular_count: usize,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Per-width statistics in the order widths first appear.
    pub fn summary(&self) -> Vec<SweepSummary> {
        let mut widths: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !widths.contains(&r.width) {
                widths.push(r.width);
            }
        }
        widths
            .into_iter()
            .map(|width| {
                let cell: Vec<&SweepRow> = self.rows.iter().filter(|r| r.width == width).collect();
                let singular_count = cell.iter().filter(|r| r.singular).count();
                let mut kappas: Vec<f64> = cell.iter().filter(|r| !r.singular).map(|r| r.kappa).collect();
                kappas.sort_by(f64::total_cmp);
                SweepSummary {
                    width,
                    median_kappa: quantile(&kappas, 0.5),
                    q10: quantile(&kappas, 0.1),
                    q90: quantile(&kappas, 0.9),
                    singular_fraction: singular_count as f64 / cell.len() as f64,
                    singular_count,
                    trials: cell.len(),
                }
            })
            .collect()
    }
}

/// Runs every `(width, trial)` cell; cell seeds are `mix_seed(base_seed, width, trial)`.
/// Cells run in parallel on the current rayon pool and are returned in
/// `(width, trial)` order, so the table does not depend on the thread count.
pub fn width_sweep(
    x: &Dataset,
    act: &Activation,
    widths: &[usize],
    trials: usize,
    distribution: WeightDistribution,
    base_seed: u64,
) -> Result<SweepTable> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    if widths.is_empty() || widths.contains(&0) {
        return Err(Error::Config("widths must be a nonempty list of positive integers".into()));
    }
    let cells: Vec<(usize, usize)> = widths
        .iter()
        .flat_map(|&w| (0..trials).map(move |t| (w, t)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(width, trial)| {
            let seed = mix_seed(base_seed, width as u64, trial as u64);
            let h = streamed_gram(x, act, width as u64, distribution, seed, DEFAULT_CHUNK)?;
            let rep = SpectralReport::of_symmetric(&h)?;
            Ok(SweepRow {
                width,
                trial,
                seed,
                kappa: rep.kappa,
                lambda_min: rep.lambda_min,
                lambda_max: rep.lambda_max,
                singular: rep.singular,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}
