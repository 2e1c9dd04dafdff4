//! Declarative experiments: spec files and presets, metric extraction,
//! parameter sweeps and CSV/JSON output.

mod metrics;
mod output;
mod run;
mod spec;
pub mod validation;

pub use metrics::{
    controller_metrics, gap_series, recovery_gap, tail_start, ChannelStats, ControllerMetrics,
    Metrics, RecoveryGap, ReducedDeviation,
};
pub use output::{
    csv_header, format_sig9, report_json, sweep_csv, trajectory_csv, write_outputs, write_sweep,
};
pub use run::{
    compare_controllers, estimate_bounds, gain_sweep, reduced_trajectory, run_experiment,
    Monotonicity, RunResult, SweepRow, SweepTable,
};
pub use spec::{
    BoxSpec, ControllerSelection, ExperimentSpec, PlantKind, SweepAxis, SweepSpec, PRESETS,
};
