//! Random hidden-layer weights, feature matrices, Gram and NTK estimates,
//! width bounds and conditioning sweeps.

pub mod bounds;
pub mod gram;
pub mod sweep;
pub mod weights;

pub use bounds::{
    bernstein_value, chernoff_value, gaussian_value, width_bound_bernstein, width_bound_chernoff,
    width_bound_gaussian, WidthBoundQuery,
};
pub use gram::{feature_matrix, ntk_estimate, relu_indicator_matrix, streamed_gram, GramEstimate};
pub use sweep::{width_sweep, SweepRow, SweepSummary, SweepTable};
pub use weights::{sample_weights, ColumnSampler, WeightDistribution, WeightMatrix};
