//! Output correlations `G²` and `G⁴`: exact propagation, closed forms,
//! Monte Carlo trajectories and the sliding-window estimators.
//!
//! Two sequences are used. Pattern `xy` repeats a single x-prepared,
//! y-read shot (`Δt = τ`). Pattern `xy_xz` repeats cycles of an xy shot
//! followed by an xz shot (`Δt = 2τ`); `G⁴` correlates the xy shots of
//! cycles `n < … < j` with the xz shots of cycles `m < k` in between.

mod closed_form;
mod estimate;
mod exact;
mod montecarlo;

pub use closed_form::{closedform_g2, closedform_g2_series, closedform_g4, closedform_g4_grid};
pub use estimate::{estimate_g2, estimate_g4, Corr4Grid, LagSeries, LagZero};
pub use exact::{
    exact_g2, exact_g2_series, exact_g2_series_with, exact_g4, exact_g4_grid, exact_g4_grid_with,
    exact_g4_with, PhaseSource,
};
pub use montecarlo::{
    mc_run, mc_run_with, McConfig, Pattern, SegmentRecord, ShotRecord, DEFAULT_SEGMENT_CYCLES,
};
