//! MMD training of the bare model on lifted data.
//!
//! For a stationary kernel `k(x,y) = κ(x ⊕ y)` on bitstrings,
//! `MMD²(p,q) = E_{α∼G} (⟨Π_α⟩_p − ⟨Π_α⟩_q)²` where `G` is the Walsh
//! transform of `κ`. The model side `⟨Π_α⟩_q` is a permanent, estimated with
//! Rys samples, so both the loss and its gradient have unbiased estimators.

mod kernel;
mod mmd;
mod optimizer;
mod train;

pub use kernel::{
    median_heuristic_sigma, spectral_sample, KernelKind, KernelSpec, MAX_TABULATED_BITS,
};
pub use mmd::{
    data_parity, full_state_parity_table, mmd2_estimate, mmd2_exact, mmd2_gradient,
    mmd2_value_and_gradient, AlphaSampling, EmpiricalDistribution, MmdConfig, MmdEstimate,
    MAX_EXACT_BITS,
};
pub use optimizer::{Optimizer, OptimizerConfig, OptimizerKind};
pub use train::{
    default_kernel, final_lift, final_loss, train, write_trace_csv, TraceRow, TrainConfig,
    TrainResult,
};
