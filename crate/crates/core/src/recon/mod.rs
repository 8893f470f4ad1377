//! Three-stage reconstruction: local least squares for the core operator,
//! Tikhonov deconvolution of its trace, and slice-wise filtered back projection.

mod fbp;
mod pipeline;
mod stage1;
mod stage2;

pub use fbp::{ramp_filter, ramp_window, stage3_fbp, ProjectionStack, WindowKind};
pub use pipeline::{reconstruct, run_stage1, run_stage2, AngleStats, CgSummary, ReconConfig, Reconstruction};
pub use stage1::{
    first_component_ratio, stage1_bin, stage1_solve, stage1_trace, transform_record, CellBins, CoreField, PlaneSample,
    TraceFill,
};
pub use stage2::{stage2_deconvolve, Deconvolver, NormalOperator};
