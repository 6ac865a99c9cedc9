//! Sphere harmonics: Gegenbauer polynomials, quadrature, activation
//! expansions, the induced zonal kernels and their positivity census.

pub mod certificate;
pub mod closed_form;
pub mod expansion;
pub mod gegenbauer;
pub mod quadrature;

pub use certificate::{certify, certify_with_threshold, PdCertificate, PdStatus};
pub use closed_form::{ntk_phi, relu_phi};
pub use expansion::{
    expand, expand_fn, expand_with_nodes, funk_hecke, population_kernel_matrix, ClosedForm, Kernel,
    KernelExpansion, KernelSource, UltrasphericalExpansion,
};
pub use gegenbauer::Gegenbauer;
pub use quadrature::GaussGegenbauer;
