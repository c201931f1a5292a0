//! End-to-end runs: channel selection, RSSI sampling, aggregation, ranging,
//! trilateration and Kalman smoothing over a trajectory.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::deployment::{verify_three_coverage, CoverageReport, Rect};
use super::metrics::PipelineMetrics;
use crate::channel::{ChannelController, MonitorConfig, ScanConfig};
use crate::error::{invalid, Result};
use crate::geometry::{AnchorNode, Dbm, NodeId, Point2D};
use crate::localization::{least_squares_multilaterate, mean_dbm, select_anchors};
use crate::radio::{
    distance_from_rssi, sample_measured_rssi, PathLossParams, RadioSpec, ShadowingModel,
};
use crate::spectrum::{ChannelEnvironment, InterfererProfile, ZigbeeChannel};
use crate::tracking::{KalmanConfig, RangeMeasurement, Tracker};

/// Closest approach used for a target standing on top of a beacon.
const MIN_LINK_DISTANCE: f64 = 1e-3;

/// An interferer that starts transmitting at the beginning of `at_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceEvent {
    pub at_step: usize,
    pub interferer: InterfererProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub roi: Rect,
    pub beacons: Vec<AnchorNode>,
    /// True target position at each step.
    pub trajectory: Vec<Point2D>,
    pub path_loss: PathLossParams,
    pub radio: RadioSpec,
    pub shadowing: ShadowingModel,
    pub environment: ChannelEnvironment,
    pub interference_events: Vec<InterferenceEvent>,
    pub scan: ScanConfig,
    pub monitor: MonitorConfig,
    pub kalman: KalmanConfig,
    /// RSSI readings per beacon per step.
    pub aggregation_window: usize,
    pub seed: u64,
}

impl Scenario {
    /// Default radio, channel and filter settings; the ROI is the bounding box
    /// of beacons and trajectory.
    pub fn new(beacons: Vec<AnchorNode>, trajectory: Vec<Point2D>, seed: u64) -> Result<Self> {
        let roi = Rect::bounding(
            beacons
                .iter()
                .map(|b| b.position)
                .chain(trajectory.iter().copied()),
        )
        .ok_or_else(|| invalid("roi", "beacons and trajectory span no area"))?;
        Ok(Self {
            roi,
            beacons,
            trajectory,
            path_loss: PathLossParams::default(),
            radio: RadioSpec::default(),
            shadowing: ShadowingModel::default(),
            environment: ChannelEnvironment::default(),
            interference_events: Vec::new(),
            scan: ScanConfig::default(),
            monitor: MonitorConfig::default(),
            kalman: KalmanConfig::default(),
            aggregation_window: 10,
            seed,
        })
    }

    /// A target parked at `target` for `steps` steps.
    pub fn static_target(
        beacons: Vec<AnchorNode>,
        target: Point2D,
        steps: usize,
        seed: u64,
    ) -> Result<Self> {
        Self::new(beacons, vec![target; steps], seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.roi.validate()?;
        self.path_loss.validate()?;
        self.radio.validate()?;
        self.environment.validate()?;
        self.scan.validate()?;
        self.monitor.validate()?;
        self.kalman.validate()?;
        ShadowingModel::new(self.shadowing.sigma)?;
        if self.aggregation_window == 0 {
            return Err(invalid("aggregation_window", "must be at least 1"));
        }
        if self.trajectory.is_empty() {
            return Err(invalid("trajectory", "must contain at least one point"));
        }
        if let Some(p) = self
            .trajectory
            .iter()
            .find(|p| !p.is_finite() || !self.roi.contains(**p))
        {
            return Err(invalid(
                "trajectory",
                format!("point {p} lies outside the region of interest"),
            ));
        }
        let mut ids = BTreeSet::new();
        for b in &self.beacons {
            if !b.position.is_finite() {
                return Err(invalid(
                    "beacons",
                    format!("beacon {} has a non-finite position", b.id),
                ));
            }
            if !ids.insert(b.id) {
                return Err(invalid("beacons", format!("duplicate beacon id {}", b.id)));
            }
        }
        for e in &self.interference_events {
            e.interferer.validate()?;
        }
        Ok(())
    }

    /// Trajectory points that fewer than three beacons can reach.
    pub fn uncovered_trajectory_points(&self) -> Vec<Point2D> {
        let mut seen = BTreeSet::new();
        self.trajectory
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                self.beacons
                    .iter()
                    .filter(|b| b.position.distance_to(p) <= self.radio.max_range)
                    .count()
                    < 3
            })
            .filter(|(_, p)| seen.insert((p.x.to_bits(), p.y.to_bits())))
            .map(|(_, p)| *p)
            .collect()
    }

    /// Three-coverage of the whole ROI at the radio's nominal range.
    pub fn roi_coverage(&self, grid_step: f64) -> Result<CoverageReport> {
        let positions: Vec<Point2D> = self.beacons.iter().map(|b| b.position).collect();
        verify_three_coverage(&positions, &self.roi, self.radio.max_range, grid_step)
    }
}

/// Aggregated reading of one beacon at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorReading {
    pub id: NodeId,
    pub rssi: Dbm,
    pub samples: usize,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Virtual time at the end of the step.
    pub time_ms: u64,
    pub truth: Point2D,
    pub raw: Option<Point2D>,
    pub averaged: Option<Point2D>,
    pub kalman: Option<Point2D>,
    /// Active channel at the end of the step.
    pub channel: ZigbeeChannel,
    pub resolved: bool,
    pub readings: Vec<AnchorReading>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    /// Channel scans performed, the initial one included.
    pub scans: usize,
    /// `None` when no step was resolved.
    pub summary: Option<PipelineMetrics>,
}

impl RunResult {
    pub fn resolved_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.resolved).count()
    }
}

struct Window {
    anchor: AnchorNode,
    samples: Vec<Dbm>,
}

/// Runs the full pipeline over the scenario's trajectory.
pub fn run_scenario(s: &Scenario) -> Result<RunResult> {
    s.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut env = s.environment.clone();
    let mut controller = ChannelController::start(&env, s.scan, s.monitor, &mut rng)?;
    let mut tracker = Tracker::new(s.kalman);
    let step_ms = s.aggregation_window as u64 * u64::from(s.scan.sample_interval_ms);
    let mut steps = Vec::with_capacity(s.trajectory.len());

    for (step, &truth) in s.trajectory.iter().enumerate() {
        env.interferers.extend(
            s.interference_events
                .iter()
                .filter(|e| e.at_step == step)
                .map(|e| e.interferer),
        );

        let mut windows = Vec::new();
        for beacon in &s.beacons {
            let d = beacon.position.distance_to(&truth);
            if d > s.radio.max_range {
                continue;
            }
            let mut samples = Vec::with_capacity(s.aggregation_window);
            for _ in 0..s.aggregation_window {
                if !controller.transmit(&env, &mut rng) {
                    continue;
                }
                let reading = sample_measured_rssi(
                    &s.path_loss,
                    &s.radio,
                    d.max(MIN_LINK_DISTANCE),
                    &s.shadowing,
                    &mut rng,
                )?;
                samples.extend(reading);
            }
            if !samples.is_empty() {
                windows.push(Window {
                    anchor: *beacon,
                    samples,
                });
            }
        }

        let record = localize_step(s, step, truth, &windows, &mut tracker);
        steps.push(StepRecord {
            time_ms: (step as u64 + 1) * step_ms,
            channel: controller.active_channel(),
            ..record
        });
    }

    let mut result = RunResult {
        seed: s.seed,
        steps,
        scans: controller.scans(),
        summary: None,
    };
    result.summary = PipelineMetrics::from_run(&result).ok();
    Ok(result)
}

fn localize_step(
    s: &Scenario,
    step: usize,
    truth: Point2D,
    windows: &[Window],
    tracker: &mut Tracker,
) -> StepRecord {
    let aggregated: Vec<(AnchorNode, Dbm)> = windows
        .iter()
        .map(|w| {
            (
                w.anchor,
                mean_dbm(&w.samples).expect("windows are non-empty"),
            )
        })
        .collect();
    let chosen = select_anchors(&aggregated, 3).ok();

    let readings = windows
        .iter()
        .zip(&aggregated)
        .map(|(w, (anchor, rssi))| AnchorReading {
            id: anchor.id,
            rssi: *rssi,
            samples: w.samples.len(),
            selected: chosen
                .as_ref()
                .is_some_and(|c| c.iter().any(|(a, _)| a.id == anchor.id)),
        })
        .collect();

    let mut record = StepRecord {
        step,
        time_ms: 0,
        truth,
        raw: None,
        averaged: None,
        kalman: None,
        channel: ZigbeeChannel::new(ZigbeeChannel::FIRST).expect("valid channel"),
        resolved: false,
        readings,
    };
    let Some(chosen) = chosen else {
        return record;
    };

    let anchors = [chosen[0].0, chosen[1].0, chosen[2].0];
    let averaged_ranges: [f64; 3] =
        std::array::from_fn(|i| distance_from_rssi(&s.path_loss, chosen[i].1));
    let raw_ranges: [f64; 3] = std::array::from_fn(|i| {
        let first = windows
            .iter()
            .find(|w| w.anchor.id == anchors[i].id)
            .map(|w| w.samples[0])
            .expect("selected anchors have windows");
        distance_from_rssi(&s.path_loss, first)
    });

    record.raw = least_squares_multilaterate(&anchors, &raw_ranges)
        .ok()
        .map(|e| e.position);
    record.averaged = least_squares_multilaterate(&anchors, &averaged_ranges)
        .ok()
        .map(|e| e.position);

    if let Some(fix) = record.averaged {
        record.resolved = true;
        record.kalman = RangeMeasurement::new(anchors, averaged_ranges)
            .and_then(|m| tracker.step(fix, &m))
            .ok();
    }
    record
}

/// Runs the scenario and scores the three pipelines on the same draws.
pub fn compare_pipelines(s: &Scenario) -> Result<PipelineMetrics> {
    let result = run_scenario(s)?;
    PipelineMetrics::from_run(&result)
}
