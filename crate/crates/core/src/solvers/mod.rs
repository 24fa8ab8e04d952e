//! Linear algebra against `K̂ + σ² I`: conjugate gradients, stochastic trace
//! probes, the projected Woodbury solve, and dense reference oracles.

mod cg;
pub mod dense;
mod hutchinson;
mod operator;
mod woodbury;

pub use cg::{cg_solve, cg_solve_batch, CgResult, CgSettings};
pub use dense::{condition_number_report, exact_kernel, ConditionReport, ExactKernel};
pub use hutchinson::{estimate_trace_term, hutchinson_probes, ProbeKind, TraceEstimate};
pub use operator::{DenseOperator, KernelOperator, LinearOperator, ScaledIdentity};
pub use woodbury::{gaussian_matrix, jlt_projection, woodbury_apply, woodbury_jlt_solve, JltSettings};
