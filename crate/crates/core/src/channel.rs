//! Channel selection: energy scan over all 16 channels, pick the quietest,
//! watch the packet failure ratio on the active channel and rescan when it
//! crosses the threshold.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Dbm;
use crate::spectrum::{channel_energy_sample, packet_success, ChannelEnvironment, ZigbeeChannel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub samples_per_channel: u32,
    /// Spacing of energy samples. Only recorded; simulated time is virtual.
    pub sample_interval_ms: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            samples_per_channel: 10,
            sample_interval_ms: 100,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_channel == 0 {
            return Err(invalid("samples_per_channel", "must be at least 1"));
        }
        Ok(())
    }

    /// Virtual time one full scan takes.
    pub fn scan_duration_ms(&self) -> u64 {
        u64::from(self.samples_per_channel)
            * u64::from(self.sample_interval_ms)
            * ZigbeeChannel::COUNT as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub channel: ZigbeeChannel,
    pub center_mhz: f64,
    pub mean_energy: Dbm,
    /// Population variance of the dBm samples.
    pub variance_db2: f64,
}

/// Per-channel energy statistics, one record per channel in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub records: Vec<ChannelRecord>,
}

impl ScanReport {
    pub fn get(&self, channel: ZigbeeChannel) -> Option<&ChannelRecord> {
        self.records.iter().find(|r| r.channel == channel)
    }
}

pub fn scan_all_channels<R: Rng + ?Sized>(
    env: &ChannelEnvironment,
    cfg: &ScanConfig,
    rng: &mut R,
) -> ScanReport {
    let n = cfg.samples_per_channel.max(1) as usize;
    let records = ZigbeeChannel::all()
        .map(|channel| {
            let samples: Vec<f64> = (0..n)
                .map(|_| channel_energy_sample(env, channel, rng).0)
                .collect();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
            ChannelRecord {
                channel,
                center_mhz: channel.center_mhz(),
                mean_energy: Dbm(mean),
                variance_db2: variance,
            }
        })
        .collect();
    ScanReport { records }
}

/// Channel with the lowest mean energy; ties go to the lowest index.
///
/// # Panics
/// On an empty report.
pub fn select_channel(report: &ScanReport) -> ZigbeeChannel {
    report
        .records
        .iter()
        .min_by(|a, b| {
            a.mean_energy
                .0
                .total_cmp(&b.mean_energy.0)
                .then(a.channel.cmp(&b.channel))
        })
        .expect("scan report has no records")
        .channel
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// Number of recent packets considered.
    pub window: usize,
    /// Rescan once the failure ratio strictly exceeds this.
    pub failure_threshold: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            window: 20,
            failure_threshold: 0.2,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        if !(self.failure_threshold > 0.0 && self.failure_threshold <= 1.0) {
            return Err(invalid("failure_threshold", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Sliding window of packet outcomes on the active channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMonitor {
    active_channel: ZigbeeChannel,
    config: MonitorConfig,
    outcomes: VecDeque<bool>,
    failures: usize,
}

impl ChannelMonitor {
    pub fn new(active_channel: ZigbeeChannel, config: MonitorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            active_channel,
            config,
            outcomes: VecDeque::with_capacity(config.window),
            failures: 0,
        })
    }

    pub fn active_channel(&self) -> ZigbeeChannel {
        self.active_channel
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.outcomes.len() == self.config.window
    }

    pub fn outcomes(&self) -> impl Iterator<Item = bool> + '_ {
        self.outcomes.iter().copied()
    }

    pub fn record_packet_outcome(&mut self, success: bool) {
        if self.outcomes.len() == self.config.window {
            if let Some(false) = self.outcomes.pop_front() {
                self.failures -= 1;
            }
        }
        self.outcomes.push_back(success);
        if !success {
            self.failures += 1;
        }
    }

    /// Failed fraction of the packets currently in the window, 0 when empty.
    pub fn failure_ratio(&self) -> f64 {
        if self.outcomes.is_empty() {
            0.0
        } else {
            self.failures as f64 / self.outcomes.len() as f64
        }
    }

    /// Only a full window can trigger a rescan.
    pub fn should_rescan(&self) -> bool {
        self.is_full() && self.failure_ratio() > self.config.failure_threshold
    }

    /// Switches to `channel` with an empty window.
    pub fn reset(&mut self, channel: ZigbeeChannel) {
        self.active_channel = channel;
        self.outcomes.clear();
        self.failures = 0;
    }
}

/// Scan, select, monitor, rescan.
#[derive(Debug, Clone)]
pub struct ChannelController {
    scan: ScanConfig,
    monitor: ChannelMonitor,
    scans: usize,
    last_report: ScanReport,
}

impl ChannelController {
    /// Runs the initial scan and activates the quietest channel.
    pub fn start<R: Rng + ?Sized>(
        env: &ChannelEnvironment,
        scan: ScanConfig,
        monitor: MonitorConfig,
        rng: &mut R,
    ) -> Result<Self> {
        scan.validate()?;
        let report = scan_all_channels(env, &scan, rng);
        let channel = select_channel(&report);
        Ok(Self {
            scan,
            monitor: ChannelMonitor::new(channel, monitor)?,
            scans: 1,
            last_report: report,
        })
    }

    pub fn active_channel(&self) -> ZigbeeChannel {
        self.monitor.active_channel()
    }

    pub fn monitor(&self) -> &ChannelMonitor {
        &self.monitor
    }

    /// Scans performed so far, including the initial one.
    pub fn scans(&self) -> usize {
        self.scans
    }

    pub fn last_report(&self) -> &ScanReport {
        &self.last_report
    }

    /// Records one outcome; rescans and switches channel when the failure
    /// threshold is crossed. Returns the new report if a rescan happened.
    pub fn record<R: Rng + ?Sized>(
        &mut self,
        success: bool,
        env: &ChannelEnvironment,
        rng: &mut R,
    ) -> Option<&ScanReport> {
        self.monitor.record_packet_outcome(success);
        if !self.monitor.should_rescan() {
            return None;
        }
        self.last_report = scan_all_channels(env, &self.scan, rng);
        self.scans += 1;
        self.monitor.reset(select_channel(&self.last_report));
        Some(&self.last_report)
    }

    /// Sends one packet on the active channel and feeds its outcome back.
    pub fn transmit<R: Rng + ?Sized>(&mut self, env: &ChannelEnvironment, rng: &mut R) -> bool {
        let ok = packet_success(env, self.active_channel(), rng);
        self.record(ok, env, rng);
        ok
    }
}
