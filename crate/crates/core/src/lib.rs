//! RSSI-based localization for 802.15.4 networks sharing the 2.4 GHz band
//! with WiFi.
//!
//! The pipeline picks the quietest channel from an energy scan, averages
//! beacon RSSI over a window, converts it to range with the log-distance
//! path-loss model, trilaterates by linear least squares and smooths the fix
//! with a Kalman filter on the range measurements. [`sim`] drives the whole
//! chain over a scenario with seeded randomness.

// `!(x > 0.0)` style checks are kept so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod geometry;
pub mod localization;
pub mod radio;
pub mod sim;
pub mod spectrum;
pub mod tracking;

pub use channel::{
    scan_all_channels, select_channel, ChannelController, ChannelMonitor, ChannelRecord,
    MonitorConfig, ScanConfig, ScanReport,
};
pub use error::{Error, Result};
pub use geometry::{
    dbm_to_milliwatts, euclidean_distance, milliwatts_to_dbm, AnchorNode, Dbm, NodeId, Point2D,
};
pub use localization::{
    aggregate_rssi, least_squares_multilaterate, select_anchors, trilaterate, PositionEstimate,
    RangeObservation, RssiObservation, TrilaterationProblem,
};
pub use radio::{
    distance_from_rssi, rssi_at_distance, sample_measured_rssi, PathLossParams, RadioSpec,
    ShadowingModel,
};
pub use sim::{
    compare_pipelines, compute_metrics, plan_square_grid_deployment, run_scenario,
    verify_three_coverage, DeploymentPlan, Flavor, Metrics, PipelineMetrics, Rect, RunResult,
    Scenario, StepRecord,
};
pub use spectrum::{
    channel_energy_sample, channels_overlap, packet_success, ChannelEnvironment, InterfererProfile,
    WifiChannel, ZigbeeChannel,
};
pub use tracking::{
    filter_step, gain, observation_jacobian, predict, update, KalmanConfig, KalmanState,
    RangeMeasurement,
};

pub use nalgebra;
