//! Random-features analysis of bias-free single-hidden-layer networks on the
//! sphere.
//!
//! The crate covers the full pipeline: activations and their constants,
//! ultraspherical expansions and induced population kernels, datasets on the
//! sphere, finite-width feature matrices with spectral reports and width
//! bounds, and last-layer gradient descent with its closed-form Landweber
//! oracle.

pub mod activations;
pub mod data;
pub mod error;
pub mod features;
pub mod harmonics;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod training;

pub use activations::{Activation, ActivationKind, ActivationSpec, Table};
pub use data::{Dataset, IngestOptions};
pub use error::{Error, Result};
pub use features::{GramEstimate, SweepTable, WeightDistribution, WeightMatrix, WidthBoundQuery};
pub use harmonics::{Kernel, KernelExpansion, PdCertificate, PdStatus, UltrasphericalExpansion};
pub use linalg::SpectralReport;
pub use training::{JointHyper, Precision, StepRule, TrainConfig, TrainTrace};
