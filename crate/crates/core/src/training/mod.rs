//! Last-layer training, its closed-form Landweber oracle, and joint training.

pub mod gd;
pub mod joint;
pub mod landweber;

pub use gd::{gradient_descent, train_last_layer, RecordedIterate, StepRule, TrainConfig, TrainTrace};
pub use joint::{joint_train, EpochRecord, JointHyper, JointTrace, Precision};
pub use landweber::{
    filter_value, landweber_oracle, least_norm_solution, residual_decomposition, Landweber, ResidualDecomposition,
};
