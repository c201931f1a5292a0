//! CSV and JSON renderings of run artifacts.
//!
//! Floats use Rust's shortest round-trip formatting so that identical runs
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use zigloc_core::sim::{step_error, Flavor, PipelineMetrics, RunResult};
use zigloc_core::{DeploymentPlan, Point2D, ScanReport};

use crate::error::CliError;
use crate::scenario_file::ScenarioFile;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn xy(p: Option<Point2D>) -> (String, String) {
    (opt(p.map(|p| p.x)), opt(p.map(|p| p.y)))
}

pub fn steps_csv(result: &RunResult) -> String {
    let mut out =
        String::from("step,true_x,true_y,raw_x,raw_y,avg_x,avg_y,kf_x,kf_y,channel,resolved\n");
    for s in &result.steps {
        let (rx, ry) = xy(s.raw);
        let (ax, ay) = xy(s.averaged);
        let (kx, ky) = xy(s.kalman);
        writeln!(
            out,
            "{},{},{},{rx},{ry},{ax},{ay},{kx},{ky},{},{}",
            s.step, s.truth.x, s.truth.y, s.channel, s.resolved
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn compare_csv(result: &RunResult) -> String {
    let mut out = String::from("step,error_raw_m,error_avg_m,error_kf_m\n");
    for s in &result.steps {
        writeln!(
            out,
            "{},{},{},{}",
            s.step,
            opt(step_error(s, Flavor::Raw)),
            opt(step_error(s, Flavor::Averaged)),
            opt(step_error(s, Flavor::Kalman))
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn scan_csv(report: &ScanReport) -> String {
    let mut out = String::from("channel,center_mhz,mean_dbm,variance_db2\n");
    for r in &report.records {
        writeln!(
            out,
            "{},{},{},{}",
            r.channel, r.center_mhz, r.mean_energy.0, r.variance_db2
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn beacons_csv(plan: &DeploymentPlan) -> String {
    let mut out = String::from("id,x,y\n");
    for b in &plan.beacons {
        writeln!(out, "{},{},{}", b.id.0, b.position.x, b.position.y)
            .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub seed: u64,
    pub steps: usize,
    pub resolved_steps: usize,
    pub scans: usize,
    pub metrics: Option<&'a PipelineMetrics>,
    pub config: &'a ScenarioFile,
}

impl<'a> RunSummary<'a> {
    pub fn new(result: &'a RunResult, config: &'a ScenarioFile) -> Self {
        Self {
            seed: result.seed,
            steps: result.steps.len(),
            resolved_steps: result.resolved_steps(),
            scans: result.scans,
            metrics: result.summary.as_ref(),
            config,
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}
