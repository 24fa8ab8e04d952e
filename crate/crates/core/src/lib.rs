//! Graph random features (GRFs) for scalable Gaussian processes on graphs.
//!
//! A GRF is a sparse random vector `φ(i)` per node, built from
//! importance-weighted random walks, whose dot products are unbiased
//! estimates of a power-series graph node kernel. The sparse Gram estimate
//! `K̂ = ΦΦᵀ` is never materialised: every solve goes through conjugate
//! gradients on `Φ(Φᵀv) + σ²v`.
//!
//! Module map:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | CSR graphs, Laplacians, generators, edge-list IO |
//! | [`grf`] | modulation functions, the walk sampler, feature matrices, bounds |
//! | [`solvers`] | CG, Hutchinson probes, Woodbury/JLT, dense oracles |
//! | [`gp`] | marginal likelihood, training, posterior inference, metrics |
//! | [`bo`] | Thompson sampling and search baselines on graph nodes |
//! | [`bench`] | scaling runs, power-law fits, the ad-hoc ablation |
//! | [`regression`] | end-to-end train/predict workflow shared by the CLI and benches |
//!
//! With the default `parallel` feature the per-node loops run on rayon.
//! All parallel work is gather-style with per-node random streams, so the
//! output is bit-identical to the sequential build for any thread count.

pub mod bench;
pub mod bo;
mod error;
pub mod exec;
pub mod gp;
pub mod graph;
pub mod grf;
pub mod regression;
pub mod seed;
pub mod solvers;

pub use error::{Error, Result};
