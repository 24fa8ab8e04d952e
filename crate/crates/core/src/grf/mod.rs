//! Graph random features: modulation functions, the walk sampler, sparse
//! feature matrices and their theoretical bounds.

mod bounds;
mod features;
mod modulation;
pub mod sparse;
mod walks;

pub use bounds::{
    bound_constant_c, concentration_bound, concentration_probability, max_step_multiplier,
    sparsity_bound, GrfBoundConstants,
};
pub use features::{FeatureMatrix, DEFAULT_DENSE_CAP, ENTRY_BYTES};
pub use modulation::Modulation;
pub use sparse::CsrMatrix;
pub use walks::{sample_features, sample_features_adhoc, LoadRule, WalkCache, WalkConfig};
