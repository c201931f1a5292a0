//! Scenario orchestration, beacon deployment and accuracy metrics.

mod deployment;
mod metrics;
mod scenario;

pub use deployment::{
    plan_square_grid_deployment, verify_three_coverage, CoverageReport, DeploymentPlan, Rect,
    MAX_BEACONS,
};
pub use metrics::{
    compute_metrics, compute_metrics_window, step_error, Flavor, Metrics, PipelineMetrics,
};
pub use scenario::{
    compare_pipelines, run_scenario, AnchorReading, InterferenceEvent, RunResult, Scenario,
    StepRecord,
};
