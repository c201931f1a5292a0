//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p zigloc-cli --test acceptance`. The process exits
//! non-zero when a criterion fails, unless it is listed in `KNOWN_SHORTFALLS`
//! (still reported as FAIL).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use zigloc_cli::commands::{self, OutputFormat, RunArgs};
use zigloc_core::nalgebra::{Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector2};
use zigloc_core::sim::compute_metrics_window;
use zigloc_core::*;

/// Criteria that fail under the specified configuration; see README.
const KNOWN_SHORTFALLS: &[u32] = &[3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.2?}]", o.detail, elapsed);
    if let Some(limit) = budget {
        if elapsed >= limit {
            o.pass = false;
            o.detail = format!("{} exceeds {:?}", o.detail, limit);
        }
    }
    o
}

fn reference_triple() -> Vec<AnchorNode> {
    vec![
        AnchorNode::new(1, 0.0, 0.0),
        AnchorNode::new(2, 30.0, 0.0),
        AnchorNode::new(3, 15.0, 30.0),
    ]
}

fn trilateration_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 1000 {
        let pts: Vec<Point2D> = (0..3)
            .map(|_| Point2D::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
            .collect();
        let (u, v) = (
            (pts[1].x - pts[0].x, pts[1].y - pts[0].y),
            (pts[2].x - pts[0].x, pts[2].y - pts[0].y),
        );
        let cross = (u.0 * v.1 - u.1 * v.0).abs();
        let longest = [
            pts[0].distance_to(&pts[1]),
            pts[1].distance_to(&pts[2]),
            pts[0].distance_to(&pts[2]),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if cross <= 0.1 * longest * longest {
            continue;
        }
        // uniform barycentric interior point
        let (mut a, mut b): (f64, f64) = (rng.random(), rng.random());
        if a + b > 1.0 {
            (a, b) = (1.0 - a, 1.0 - b);
        }
        let target = Point2D::new(pts[0].x + a * u.0 + b * v.0, pts[0].y + a * u.1 + b * v.1);
        let anchors: Vec<AnchorNode> = pts
            .iter()
            .enumerate()
            .map(|(i, p)| AnchorNode::new(i as u32, p.x, p.y))
            .collect();
        let ranges: Vec<f64> = pts.iter().map(|p| p.distance_to(&target)).collect();
        let est = match least_squares_multilaterate(&anchors, &ranges) {
            Ok(e) => e.position,
            Err(e) => return outcome(false, format!("case {cases}: {e}")),
        };
        worst = worst.max(est.distance_to(&target));
        cases += 1;
    }
    outcome(
        worst < 1e-9,
        format!("1000 triples, worst error {worst:.3e} m"),
    )
}

fn equal_rssi_snapshot() -> Outcome {
    let params = PathLossParams::default();
    let readings: Vec<(AnchorNode, Dbm)> = reference_triple()
        .into_iter()
        .map(|a| (a, Dbm(-60.0)))
        .collect();
    let chosen = match select_anchors(&readings, 3) {
        Ok(c) => c,
        Err(e) => return outcome(false, e.to_string()),
    };
    let anchors: Vec<AnchorNode> = chosen.iter().map(|(a, _)| *a).collect();
    let ranges: Vec<f64> = chosen
        .iter()
        .map(|(_, r)| distance_from_rssi(&params, *r))
        .collect();
    match least_squares_multilaterate(&anchors, &ranges) {
        Ok(e) => {
            let p = e.position;
            let ok = (p.x - 15.0).abs() <= 1e-6 && (p.y - 11.25).abs() <= 1e-6;
            outcome(ok, format!("estimate ({:.9}, {:.9})", p.x, p.y))
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn surrogate(seed: u64) -> Scenario {
    let mut s = Scenario::static_target(reference_triple(), Point2D::new(12.0, 9.0), 200, seed)
        .expect("valid scenario");
    s.shadowing = ShadowingModel::new(2.0).expect("valid sigma");
    s
}

fn sub_half_meter() -> Outcome {
    let mut passing = 0;
    let mut tails = Vec::new();
    for seed in 0..100 {
        let r = match run_scenario(&surrogate(seed)) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let tail = compute_metrics_window(&r, Flavor::Kalman, 150..200)
            .map(|m| m.rmse)
            .unwrap_or(f64::INFINITY);
        if tail < 0.5 {
            passing += 1;
        }
        tails.push(tail);
    }
    tails.sort_by(f64::total_cmp);
    outcome(
        passing >= 95,
        format!(
            "{passing}/100 seeds below 0.5 m; median {:.3} m, 95th pct {:.3} m",
            tails[49], tails[94]
        ),
    )
}

fn pipeline_ordering() -> Outcome {
    let mut ordered = 0;
    for seed in 0..100 {
        let m = match compare_pipelines(&surrogate(seed)) {
            Ok(m) => m,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        if m.raw.rmse > 1.05 * m.averaged.rmse && m.averaged.rmse > 1.05 * m.kalman.rmse {
            ordered += 1;
        }
    }
    outcome(
        ordered >= 95,
        format!("{ordered}/100 seeds ordered with 5% gaps"),
    )
}

fn channel_selection() -> Outcome {
    let env = match ChannelEnvironment::with_wifi(&[1, 6, 11], Dbm(-70.0), 1.0, Dbm(-100.0)) {
        Ok(e) => e,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chosen = select_channel(&scan_all_channels(&env, &ScanConfig::default(), &mut rng));
    let busy: Vec<WifiChannel> = [1, 6, 11]
        .into_iter()
        .map(|w| WifiChannel::new(w).expect("valid"))
        .collect();
    let mut pairs = 0;
    let clean: BTreeSet<u8> = ZigbeeChannel::all()
        .filter(|z| {
            pairs += busy.len();
            busy.iter().all(|w| !channels_overlap(*z, *w))
        })
        .map(|z| z.index())
        .collect();
    let ok = chosen.index() == 15 && clean == BTreeSet::from([15, 20, 25, 26]) && pairs == 48;
    outcome(
        ok,
        format!("selected {chosen}, clean set {clean:?} from {pairs} pairs"),
    )
}

fn clean_channels(env: &ChannelEnvironment) -> Vec<ZigbeeChannel> {
    ZigbeeChannel::all().filter(|z| env.is_clean(*z)).collect()
}

/// Background of duty-1 WiFi interferers leaving at least two clean channels.
fn background<R: Rng>(rng: &mut R) -> ChannelEnvironment {
    loop {
        let picks: Vec<u8> = (1..=13).filter(|_| rng.random_bool(0.2)).collect();
        let power = Dbm(rng.random_range(-85.0..-60.0));
        let env = ChannelEnvironment::with_wifi(&picks, power, 1.0, Dbm(-100.0))
            .expect("valid background");
        if clean_channels(&env).len() >= 2 {
            return env;
        }
    }
}

fn rescan_liveness() -> Outcome {
    let mut landed = 0;
    let mut worst_packets = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let mut env = background(&mut rng);
        let mut ctl = match ChannelController::start(
            &env,
            ScanConfig::default(),
            MonitorConfig::default(),
            &mut rng,
        ) {
            Ok(c) => c,
            Err(e) => return outcome(false, e.to_string()),
        };
        for _ in 0..rng.random_range(0..200) {
            ctl.transmit(&env, &mut rng);
        }
        let active = ctl.active_channel();
        let scans = ctl.scans();

        // a new interferer over the active channel that leaves somewhere clean
        let onset = (1..=13u8)
            .filter_map(|w| WifiChannel::new(w).ok())
            .filter(|w| channels_overlap(active, *w))
            .find_map(|w| {
                let i = InterfererProfile::new(w, Dbm(rng.random_range(-80.0..-60.0)), 1.0).ok()?;
                let mut next = env.clone();
                next.interferers.push(i);
                (!clean_channels(&next).is_empty()).then_some(next)
            });
        let Some(next) = onset else {
            return outcome(
                false,
                format!("trial {trial}: no interferer leaves a clean channel"),
            );
        };
        env = next;

        let mut packets = 0;
        while ctl.scans() == scans && packets < 20 {
            ctl.transmit(&env, &mut rng);
            packets += 1;
        }
        worst_packets = worst_packets.max(packets);
        if ctl.scans() > scans && env.is_clean(ctl.active_channel()) {
            landed += 1;
        }
    }
    outcome(
        landed == 100,
        format!("{landed}/100 trials rescanned onto a clean channel, slowest after {worst_packets} packets"),
    )
}

fn random_spd<R: Rng>(rng: &mut R, scale: f64) -> Matrix2<f64> {
    let a = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0));
    a * a.transpose() * scale
}

fn kalman_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let anchors = [
        AnchorNode::new(1, 0.0, 0.0),
        AnchorNode::new(2, 30.0, 0.0),
        AnchorNode::new(3, 15.0, 30.0),
    ];
    let mut failures = Vec::new();

    // covariance symmetric and PSD over 10^4 random steps
    let mut state = KalmanState::at(Point2D::new(12.0, 9.0));
    let mut min_eig = f64::INFINITY;
    for i in 0..10_000 {
        let cfg = KalmanConfig {
            process_noise: random_spd(&mut rng, 0.1),
            measurement_noise: Matrix3::from_diagonal_element(rng.random_range(0.01..4.0)),
            ..KalmanConfig::default()
        };
        let truth = Point2D::new(rng.random_range(2.0..28.0), rng.random_range(2.0..20.0));
        let ranges = anchors.map(|a| a.position.distance_to(&truth) + rng.random_range(-1.0..1.0));
        let meas = RangeMeasurement { anchors, ranges };
        match filter_step(&state, &meas, &cfg) {
            Ok(s) => state = s,
            Err(_) => state = KalmanState::at(truth),
        }
        let cov = state.covariance;
        min_eig = min_eig.min(SymmetricEigen::new(cov).eigenvalues.min());
        if cov[(0, 1)] != cov[(1, 0)] || !cov.iter().all(|v| v.is_finite()) {
            failures.push(format!("asymmetric covariance at step {i}"));
            break;
        }
        if !state.position.iter().all(|v| v.is_finite()) || state.position.norm() > 1e3 {
            state = KalmanState::at(truth);
        }
    }
    if min_eig < -1e-9 {
        failures.push(format!("min eigenvalue {min_eig:e}"));
    }

    // zero innovation leaves the position untouched
    let cfg = KalmanConfig::default();
    let mut prior = KalmanState::at(Point2D::new(11.0, 8.0));
    prior.covariance = random_spd(&mut rng, 1.0) + Matrix2::identity() * 0.1;
    let predicted = predict(&prior, &cfg);
    let exact = RangeMeasurement::from_truth(anchors, predicted.point()).expect("valid ranges");
    match update(&predicted, &exact, &cfg) {
        Ok(s) if s.position == predicted.position => {}
        Ok(s) => failures.push(format!("fixed point moved to {}", s.point())),
        Err(e) => failures.push(e.to_string()),
    }

    // zero covariance gives zero gain; gain scales as 1/R
    let h = observation_jacobian(&Vector2::new(12.0, 9.0), &anchors)
        .unwrap_or_else(|_| Matrix3x2::zeros());
    let r = Matrix3::identity();
    match gain(&Matrix2::zeros(), &h, &r) {
        Ok(k) if k.iter().all(|v| *v == 0.0) => {}
        other => failures.push(format!("gain at zero covariance {other:?}")),
    }
    let e = Matrix2::identity() * 0.01;
    let ratio = match (gain(&e, &h, &r), gain(&e, &h, &(r * 1e6))) {
        (Ok(k1), Ok(k2)) => k1.norm() / k2.norm(),
        _ => f64::NAN,
    };
    if !((ratio / 1e6) - 1.0).abs().lt(&0.1) {
        failures.push(format!("gain ratio {ratio:e}"));
    }

    let detail = if failures.is_empty() {
        format!("10^4 steps PSD (min eigenvalue {min_eig:.2e}), fixed point exact, K(E=0)=0, gain ratio {ratio:.4e}")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn deployment_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut samples = 0usize;
    for case in 0..100 {
        let (w, h) = (
            rng.random_range(10.0..=100.0),
            rng.random_range(10.0..=100.0),
        );
        let range = rng.random_range(10.0..=60.0);
        let roi = Rect::from_size(w, h).expect("valid roi");
        let plan = match plan_square_grid_deployment(&roi, range, 0.9) {
            Ok(p) => p,
            Err(e) => return outcome(false, format!("case {case}: {e}")),
        };
        let beacons: Vec<Point2D> = plan.positions().collect();
        match verify_three_coverage(&beacons, &roi, range, 0.25) {
            Ok(r) if r.covered => samples += r.samples,
            Ok(r) => {
                return outcome(
                    false,
                    format!(
                        "case {case}: {w:.2}x{h:.2} m, range {range:.2}: {} uncovered",
                        r.uncovered.len()
                    ),
                )
            }
            Err(e) => return outcome(false, format!("case {case}: {e}")),
        }
    }
    outcome(
        true,
        format!("100 cases covered, {samples} grid points checked"),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|it| {
            it.flatten()
                .map(|e| {
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        fs::read(e.path()).unwrap_or_default(),
                    )
                })
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let Ok(dir) = TempDir::new() else {
        return outcome(false, "no temp dir");
    };
    let scenario = dir.path().join("scenario.json");
    let body = r#"{
        "seed": 2024,
        "roi": {"max_x_m": 30, "max_y_m": 30},
        "deployment": {"range_m": 25},
        "trajectory": [{"x_m": 5, "y_m": 5, "hold_steps": 30}, {"x_m": 20, "y_m": 15, "hold_steps": 30}],
        "shadowing": {"sigma_db": 3},
        "environment": {"interferers": [{"wifi_channel": 1, "rx_power_dbm": -70, "duty_cycle": 0.6, "start_step": 20}]}
    }"#;
    if let Err(e) = fs::write(&scenario, body) {
        return outcome(false, e.to_string());
    }
    let mut trees = Vec::new();
    for run in ["a", "b"] {
        let args = RunArgs {
            scenario: scenario.clone(),
            out: dir.path().join(run),
            seed: None,
            seeds: None,
            format: OutputFormat::Csv,
        };
        if let Err(e) = commands::simulate(&args) {
            return outcome(false, format!("exit {}: {e}", e.exit_code()));
        }
        trees.push(read_tree(&args.out));
    }
    let names: Vec<&str> = trees[0].iter().map(|(n, _)| n.as_str()).collect();
    let bytes: usize = trees[0].iter().map(|(_, b)| b.len()).sum();
    let same = trees[0] == trees[1] && !trees[0].is_empty();
    outcome(
        same,
        format!("{names:?} identical across runs ({bytes} bytes)"),
    )
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            1,
            "trilateration exactness",
            Some(Duration::from_secs(1)),
            trilateration_exactness,
        ),
        (2, "equal-RSSI snapshot", None, equal_rssi_snapshot),
        (
            3,
            "sub-0.5 m Kalman accuracy",
            Some(Duration::from_secs(10)),
            sub_half_meter,
        ),
        (4, "pipeline RMSE ordering", None, pipeline_ordering),
        (
            5,
            "channel selection",
            Some(Duration::from_secs(1)),
            channel_selection,
        ),
        (6, "rescan liveness", None, rescan_liveness),
        (7, "Kalman invariants", None, kalman_invariants),
        (
            8,
            "deployment soundness",
            Some(Duration::from_secs(30)),
            deployment_soundness,
        ),
        (9, "simulate determinism", None, determinism),
    ];
    let mut unexpected = 0;
    for (id, name, budget, check) in criteria {
        let o = timed(budget, check);
        let known = KNOWN_SHORTFALLS.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known shortfall)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id} {tag}: {name}: {}", o.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
