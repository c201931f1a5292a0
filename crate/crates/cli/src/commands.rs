use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use zigloc_core::sim::{
    compute_metrics_window, plan_square_grid_deployment, run_scenario, verify_three_coverage,
    Flavor, PipelineMetrics, Rect, RunResult, Scenario,
};
use zigloc_core::{scan_all_channels, select_channel, Metrics, Point2D, ScanReport, ZigbeeChannel};

use crate::error::CliError;
use crate::output::{self, RunSummary};
use crate::scenario_file::ScenarioFile;

/// Uncovered points listed in a coverage diagnostic before truncation.
const LISTED_POINTS: usize = 20;

/// Steps scored by the tail metrics in `compare.json`.
pub const TAIL_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    /// Number of consecutive seeds to sweep, starting at the scenario seed.
    pub seeds: Option<u64>,
    pub format: OutputFormat,
}

fn list_points(points: &[Point2D]) -> String {
    let mut s: Vec<String> = points
        .iter()
        .take(LISTED_POINTS)
        .map(|p| p.to_string())
        .collect();
    if points.len() > LISTED_POINTS {
        s.push(format!("... {} more", points.len() - LISTED_POINTS));
    }
    s.join(" ")
}

fn load(path: &Path, seed: Option<u64>) -> Result<(ScenarioFile, Scenario), CliError> {
    let mut file = ScenarioFile::load(path)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    let scenario = file.to_scenario()?;
    let uncovered = scenario.uncovered_trajectory_points();
    if !uncovered.is_empty() {
        return Err(CliError::Coverage(format!(
            "{} trajectory point(s) reach fewer than 3 beacons: {}",
            uncovered.len(),
            list_points(&uncovered)
        )));
    }
    Ok((file, scenario))
}

fn with_seed(file: &ScenarioFile, scenario: &Scenario, seed: u64) -> (ScenarioFile, Scenario) {
    let mut f = file.clone();
    f.seed = seed;
    let mut s = scenario.clone();
    s.seed = seed;
    (f, s)
}

/// Runs the seed list in parallel; results come back in seed order.
fn sweep(
    file: &ScenarioFile,
    scenario: &Scenario,
    seeds: u64,
) -> Result<Vec<(ScenarioFile, RunResult)>, CliError> {
    let base = file.seed;
    (0..seeds)
        .into_par_iter()
        .map(|i| {
            let (f, s) = with_seed(file, scenario, base.wrapping_add(i));
            Ok((f, run_scenario(&s)?))
        })
        .collect()
}

fn write_simulation(
    dir: &Path,
    file: &ScenarioFile,
    result: &RunResult,
    format: OutputFormat,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => output::write(dir, "steps.csv", &output::steps_csv(result))?,
        OutputFormat::Json => output::write(dir, "steps.json", &output::to_json(&result.steps)?)?,
    }
    output::write(
        dir,
        "summary.json",
        &output::to_json(&RunSummary::new(result, file))?,
    )
}

fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}"))
}

fn sweep_csv(runs: &[(ScenarioFile, RunResult)]) -> String {
    let mut s = String::from("seed,rmse_raw_m,rmse_avg_m,rmse_kf_m\n");
    for (_, r) in runs {
        let cell = |f: fn(&PipelineMetrics) -> &Metrics| {
            r.summary
                .as_ref()
                .map(|m| f(m).rmse.to_string())
                .unwrap_or_default()
        };
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.seed,
            cell(|m| &m.raw),
            cell(|m| &m.averaged),
            cell(|m| &m.kalman)
        ));
    }
    s
}

/// `simulate`: steps.csv (or steps.json) plus summary.json.
pub fn simulate(args: &RunArgs) -> Result<Vec<RunResult>, CliError> {
    let (file, scenario) = load(&args.scenario, args.seed)?;
    match args.seeds {
        None => {
            let result = run_scenario(&scenario)?;
            write_simulation(&args.out, &file, &result, args.format)?;
            Ok(vec![result])
        }
        Some(0) => Err(CliError::Input("--seeds must be at least 1".into())),
        Some(n) => {
            let runs = sweep(&file, &scenario, n)?;
            for (f, r) in &runs {
                write_simulation(&seed_dir(&args.out, r.seed), f, r, args.format)?;
            }
            output::write(&args.out, "sweep.csv", &sweep_csv(&runs))?;
            Ok(runs.into_iter().map(|(_, r)| r).collect())
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub seed: u64,
    pub metrics: PipelineMetrics,
    /// Metrics over the last `tail_steps` steps.
    pub tail_steps: usize,
    pub tail: PipelineMetrics,
}

impl Comparison {
    pub fn from_run(result: &RunResult) -> Result<Self, CliError> {
        let n = result.steps.len();
        let tail_steps = TAIL_STEPS.min(n);
        let window = n - tail_steps..n;
        let tail = PipelineMetrics {
            raw: compute_metrics_window(result, Flavor::Raw, window.clone())?,
            averaged: compute_metrics_window(result, Flavor::Averaged, window.clone())?,
            kalman: compute_metrics_window(result, Flavor::Kalman, window)?,
        };
        Ok(Self {
            seed: result.seed,
            metrics: PipelineMetrics::from_run(result)?,
            tail_steps,
            tail,
        })
    }
}

fn write_comparison(
    dir: &Path,
    result: &RunResult,
    format: OutputFormat,
) -> Result<Comparison, CliError> {
    let cmp = Comparison::from_run(result)?;
    match format {
        OutputFormat::Csv => output::write(dir, "compare.csv", &output::compare_csv(result))?,
        OutputFormat::Json => {
            output::write(dir, "compare_steps.json", &output::to_json(&result.steps)?)?
        }
    }
    output::write(dir, "compare.json", &output::to_json(&cmp)?)?;
    Ok(cmp)
}

/// `compare`: per-step errors of the three pipelines plus their metrics.
pub fn compare(args: &RunArgs) -> Result<Vec<Comparison>, CliError> {
    let (file, scenario) = load(&args.scenario, args.seed)?;
    match args.seeds {
        None => {
            let result = run_scenario(&scenario)?;
            Ok(vec![write_comparison(&args.out, &result, args.format)?])
        }
        Some(0) => Err(CliError::Input("--seeds must be at least 1".into())),
        Some(n) => {
            let runs = sweep(&file, &scenario, n)?;
            let out = runs
                .iter()
                .map(|(_, r)| write_comparison(&seed_dir(&args.out, r.seed), r, args.format))
                .collect::<Result<Vec<_>, _>>()?;
            output::write(&args.out, "sweep.csv", &sweep_csv(&runs))?;
            Ok(out)
        }
    }
}

/// `scan`: one energy scan of the scenario's environment.
pub fn scan(
    scenario: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<(ScanReport, ZigbeeChannel), CliError> {
    let mut file = ScenarioFile::load(scenario)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    let s = file.to_scenario()?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let report = scan_all_channels(&s.environment, &s.scan, &mut rng);
    let channel = select_channel(&report);
    output::write(out, "scan.csv", &output::scan_csv(&report))?;
    Ok((report, channel))
}

#[derive(Debug, Clone)]
pub struct DeployArgs {
    pub min_x_m: f64,
    pub min_y_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub range_m: f64,
    pub safety: f64,
    pub grid_step_m: f64,
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct DeployReport {
    pub beacons: usize,
    pub spacing_x_m: f64,
    pub spacing_y_m: f64,
    pub covered: bool,
    pub samples: usize,
    pub uncovered: usize,
}

/// `deploy`: plan a grid, verify it and write beacons.csv and coverage.json.
/// A failed verification is reported as a coverage error after the files are
/// written.
pub fn deploy(args: &DeployArgs) -> Result<DeployReport, CliError> {
    let input = |e: zigloc_core::Error| CliError::Input(e.to_string());
    let roi = Rect::new(
        args.min_x_m,
        args.min_y_m,
        args.min_x_m + args.width_m,
        args.min_y_m + args.height_m,
    )
    .map_err(input)?;
    let plan =
        plan_square_grid_deployment(&roi, args.range_m, args.safety).map_err(|e| match e {
            zigloc_core::Error::InvalidParameter { .. } => input(e),
            other => CliError::Domain(other),
        })?;
    let positions: Vec<Point2D> = plan.positions().collect();
    let coverage =
        verify_three_coverage(&positions, &roi, args.range_m, args.grid_step_m).map_err(input)?;
    let report = DeployReport {
        beacons: plan.beacons.len(),
        spacing_x_m: plan.spacing_x,
        spacing_y_m: plan.spacing_y,
        covered: coverage.covered,
        samples: coverage.samples,
        uncovered: coverage.uncovered.len(),
    };
    output::write(&args.out, "beacons.csv", &output::beacons_csv(&plan))?;
    output::write(&args.out, "coverage.json", &output::to_json(&report)?)?;
    if !coverage.covered {
        return Err(CliError::Coverage(format!(
            "{} of {} sample points see fewer than 3 beacons: {}",
            coverage.uncovered.len(),
            coverage.samples,
            list_points(&coverage.uncovered)
        )));
    }
    Ok(report)
}
