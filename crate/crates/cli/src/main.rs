use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zigloc_cli::commands::{self, DeployArgs, OutputFormat, RunArgs};
use zigloc_cli::CliError;

#[derive(Parser)]
#[command(
    name = "zigloc",
    version,
    about = "RSSI localization simulator for 802.15.4 beacon networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep this many consecutive seeds, one subdirectory each.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

impl From<RunOpts> for RunArgs {
    fn from(o: RunOpts) -> Self {
        RunArgs {
            scenario: o.scenario,
            out: o.out,
            seed: o.seed,
            seeds: o.seeds,
            format: o.format,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write per-step estimates.
    Simulate(RunOpts),
    /// Run a scenario and write the per-step error of each pipeline.
    Compare(RunOpts),
    /// Energy-scan the scenario's environment and report the chosen channel.
    Scan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plan a square beacon grid for a rectangle and verify 3-coverage.
    Deploy {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        min_x_m: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        min_y_m: f64,
        #[arg(long)]
        width_m: f64,
        #[arg(long)]
        height_m: f64,
        #[arg(long)]
        range_m: f64,
        #[arg(long, default_value_t = 0.9)]
        safety: f64,
        #[arg(long, default_value_t = 0.25)]
        grid_step_m: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(opts) => {
            for r in commands::simulate(&opts.into())? {
                let rmse = r.summary.as_ref().map(|m| m.kalman.rmse);
                println!(
                    "seed {}: {} steps, {} resolved, kalman rmse {}",
                    r.seed,
                    r.steps.len(),
                    r.resolved_steps(),
                    rmse.map_or("n/a".into(), |v| format!("{v:.3} m"))
                );
            }
        }
        Command::Compare(opts) => {
            for c in commands::compare(&opts.into())? {
                println!(
                    "seed {}: rmse raw {:.3} m, averaged {:.3} m, kalman {:.3} m",
                    c.seed, c.metrics.raw.rmse, c.metrics.averaged.rmse, c.metrics.kalman.rmse
                );
            }
        }
        Command::Scan {
            scenario,
            out,
            seed,
        } => {
            let (report, channel) = commands::scan(&scenario, &out, seed)?;
            let energy = report.get(channel).map(|r| r.mean_energy.0);
            println!(
                "selected channel {channel} ({:.2} dBm)",
                energy.unwrap_or(f64::NAN)
            );
        }
        Command::Deploy {
            min_x_m,
            min_y_m,
            width_m,
            height_m,
            range_m,
            safety,
            grid_step_m,
            out,
        } => {
            let r = commands::deploy(&DeployArgs {
                min_x_m,
                min_y_m,
                width_m,
                height_m,
                range_m,
                safety,
                grid_step_m,
                out,
            })?;
            println!(
                "{} beacons, spacing {:.3} x {:.3} m, 3-coverage ok over {} points",
                r.beacons, r.spacing_x_m, r.spacing_y_m, r.samples
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zigloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
