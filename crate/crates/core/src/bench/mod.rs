//! Experiment runners: scaling measurements with power-law fits, and the
//! importance-weighting ablation on a synthetic diffusion task.

mod ablation;
mod powerlaw;
mod scaling;

pub use ablation::{
    ablation_summary, diffusion_task, run_ablation, write_ablation_csv, AblationConfig, AblationRow,
    AblationSummary, DiffusionTask,
};
pub use powerlaw::{fit_power_law, PowerLawFit};
pub use scaling::{
    fit_scaling, medians, run_scaling, write_fit_report, write_records_csv, Implementation, Metric,
    ScalingConfig, ScalingFit, ScalingRecord,
};
