//! Gaussian-process regression with GRF kernels: marginal-likelihood
//! training, posterior moments, pathwise sampling and predictive metrics.

mod data;
pub mod exact;
mod lml;
mod metrics;
mod model;
mod posterior;
mod snapshot;
mod train;

pub use data::{train_test_split, Dataset, Standardizer};
pub use exact::{ExactDiffusionGp, LaplacianEigen};
pub use lml::{lml_gradient, log_marginal_likelihood, LmlGradient, TraceMode};
pub use metrics::{metrics, Metrics};
pub use model::{GpModel, SolverKind};
pub use posterior::{sample_prior, Posterior};
pub use snapshot::ModelSnapshot;
pub use train::{train, Adam, TrainSettings, TrainStep};
