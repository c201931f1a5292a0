//! JSON scenario documents. Field names carry their units; unknown fields
//! are rejected and everything but `seed` and `trajectory` has a default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use zigloc_core::channel::{MonitorConfig, ScanConfig};
use zigloc_core::nalgebra::{Matrix2, Vector2};
use zigloc_core::sim::{plan_square_grid_deployment, InterferenceEvent, Rect, Scenario};
use zigloc_core::{
    AnchorNode, ChannelEnvironment, Dbm, InterfererProfile, KalmanConfig, PathLossParams, Point2D,
    RadioSpec, ShadowingModel, WifiChannel,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roi: Option<RoiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beacons: Option<Vec<BeaconSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployment: Option<DeploymentSpec>,
    pub trajectory: Vec<WaypointSpec>,
    #[serde(default)]
    pub path_loss: PathLossSpec,
    #[serde(default)]
    pub radio: RadioSpecFile,
    #[serde(default)]
    pub shadowing: ShadowingSpec,
    #[serde(default)]
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub monitor: MonitorSpec,
    #[serde(default)]
    pub kalman: KalmanSpec,
    #[serde(default = "default_window")]
    pub aggregation_window: usize,
}

fn default_window() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiSpec {
    #[serde(default)]
    pub min_x_m: f64,
    #[serde(default)]
    pub min_y_m: f64,
    pub max_x_m: f64,
    pub max_y_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeaconSpec {
    pub id: u32,
    pub x_m: f64,
    pub y_m: f64,
}

/// Beacons planned on a square grid over the ROI instead of listed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeploymentSpec {
    pub range_m: f64,
    #[serde(default = "default_safety")]
    pub safety: f64,
}

fn default_safety() -> f64 {
    0.9
}

/// A true position held for `hold_steps` consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointSpec {
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default = "one")]
    pub hold_steps: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathLossSpec {
    pub rssi_at_ref_dbm: f64,
    pub ref_distance_m: f64,
    pub exponent: f64,
}

impl Default for PathLossSpec {
    fn default() -> Self {
        let p = PathLossParams::default();
        Self {
            rssi_at_ref_dbm: p.rssi_at_ref.0,
            ref_distance_m: p.ref_distance,
            exponent: p.exponent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSpecFile {
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub max_range_m: f64,
}

impl Default for RadioSpecFile {
    fn default() -> Self {
        let r = RadioSpec::default();
        Self {
            tx_power_dbm: r.tx_power.0,
            sensitivity_dbm: r.sensitivity.0,
            max_range_m: r.max_range,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowingSpec {
    pub sigma_db: f64,
}

impl Default for ShadowingSpec {
    fn default() -> Self {
        Self {
            sigma_db: ShadowingModel::default().sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub noise_floor_dbm: f64,
    #[serde(default)]
    pub interferers: Vec<InterfererSpec>,
}

impl Default for EnvironmentSpec {
    fn default() -> Self {
        Self {
            noise_floor_dbm: ChannelEnvironment::default().noise_floor.0,
            interferers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererSpec {
    pub wifi_channel: u8,
    pub rx_power_dbm: f64,
    pub duty_cycle: f64,
    /// Step at which the interferer switches on; 0 means present from the start.
    #[serde(default)]
    pub start_step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    pub samples_per_channel: u32,
    pub sample_interval_ms: u32,
}

impl Default for ScanSpec {
    fn default() -> Self {
        let s = ScanConfig::default();
        Self {
            samples_per_channel: s.samples_per_channel,
            sample_interval_ms: s.sample_interval_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorSpec {
    pub window_packets: usize,
    pub failure_threshold: f64,
}

impl Default for MonitorSpec {
    fn default() -> Self {
        let m = MonitorConfig::default();
        Self {
            window_packets: m.window,
            failure_threshold: m.failure_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanSpec {
    pub process_noise_m2: f64,
    pub measurement_sigma_m: f64,
    #[serde(default = "identity2")]
    pub state_transition: [[f64; 2]; 2],
    #[serde(default)]
    pub control_m: [f64; 2],
}

fn identity2() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

impl Default for KalmanSpec {
    fn default() -> Self {
        Self {
            process_noise_m2: 0.01,
            measurement_sigma_m: 1.0,
            state_transition: identity2(),
            control_m: [0.0, 0.0],
        }
    }
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))
    }

    fn trajectory_points(&self) -> Vec<Point2D> {
        self.trajectory
            .iter()
            .flat_map(|w| std::iter::repeat_n(Point2D::new(w.x_m, w.y_m), w.hold_steps))
            .collect()
    }

    /// Builds the simulation scenario. Semantic problems are input errors.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let input = |e: zigloc_core::Error| CliError::Input(e.to_string());
        let trajectory = self.trajectory_points();
        if trajectory.is_empty() {
            return Err(CliError::Input("trajectory: no steps".into()));
        }

        let roi = match self.roi {
            Some(r) => Some(Rect::new(r.min_x_m, r.min_y_m, r.max_x_m, r.max_y_m).map_err(input)?),
            None => None,
        };

        let beacons = match (&self.beacons, &self.deployment) {
            (Some(list), None) => list
                .iter()
                .map(|b| AnchorNode::new(b.id, b.x_m, b.y_m))
                .collect(),
            (None, Some(plan)) => {
                let roi = roi.ok_or_else(|| {
                    CliError::Input("deployment: requires an explicit `roi`".into())
                })?;
                plan_square_grid_deployment(&roi, plan.range_m, plan.safety)
                    .map_err(input)?
                    .beacons
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Input(
                    "give either `beacons` or `deployment`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Input(
                    "missing field `beacons` (or `deployment`)".into(),
                ))
            }
        };

        let mut scenario = Scenario::new(beacons, trajectory, self.seed).map_err(input)?;
        if let Some(roi) = roi {
            scenario.roi = roi;
        }
        scenario.path_loss = PathLossParams::new(
            Dbm(self.path_loss.rssi_at_ref_dbm),
            self.path_loss.ref_distance_m,
            self.path_loss.exponent,
        )
        .map_err(input)?;
        scenario.radio = RadioSpec {
            tx_power: Dbm(self.radio.tx_power_dbm),
            sensitivity: Dbm(self.radio.sensitivity_dbm),
            max_range: self.radio.max_range_m,
        };
        scenario.shadowing = ShadowingModel::new(self.shadowing.sigma_db).map_err(input)?;

        let mut environment = ChannelEnvironment::quiet(Dbm(self.environment.noise_floor_dbm));
        for spec in &self.environment.interferers {
            let wifi = WifiChannel::new(spec.wifi_channel).map_err(input)?;
            let interferer = InterfererProfile::new(wifi, Dbm(spec.rx_power_dbm), spec.duty_cycle)
                .map_err(input)?;
            if spec.start_step == 0 {
                environment.interferers.push(interferer);
            } else {
                scenario.interference_events.push(InterferenceEvent {
                    at_step: spec.start_step,
                    interferer,
                });
            }
        }
        scenario.environment = environment;
        scenario.scan = ScanConfig {
            samples_per_channel: self.scan.samples_per_channel,
            sample_interval_ms: self.scan.sample_interval_ms,
        };
        scenario.monitor = MonitorConfig {
            window: self.monitor.window_packets,
            failure_threshold: self.monitor.failure_threshold,
        };
        let k = &self.kalman;
        let mut kalman = KalmanConfig::with_noise(k.process_noise_m2, k.measurement_sigma_m);
        kalman.state_transition = Matrix2::new(
            k.state_transition[0][0],
            k.state_transition[0][1],
            k.state_transition[1][0],
            k.state_transition[1][1],
        );
        kalman.control = Vector2::new(k.control_m[0], k.control_m[1]);
        scenario.kalman = kalman;
        scenario.aggregation_window = self.aggregation_window;

        scenario.validate().map_err(input)?;
        Ok(scenario)
    }
}
