//! Named scenarios and the run driver.
//!
//! The geometric scenarios (line, turn, circle, hexagon) build their plans
//! from body-twist commands whose wheel speeds fall inside the motor's
//! trusted linear region. `hexagon-paper-replay` instead transcribes the
//! segment schedule recorded in the original hardware trial (wheel speeds
//! and timings taken verbatim, including commands below the trust region),
//! and `settling-compare` runs the same line plan under the Kalman and
//! low-pass estimators to compare their settling times.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use diffdrive_core::batch::{run_batch, BatchJob};
use diffdrive_core::kinematics::{forward_kinematics, WheelSpeeds};
use diffdrive_core::simulation::{
    compute_metrics, reference_path, simulate_run, EstimatorMode, Segment, SimConfig, SimTrace,
    TrackingMetrics, TrajectoryPlan,
};

use crate::output::{
    write_metrics, write_path_dat, write_speed_dat, write_trace_csv, Wheel,
};

/// Default line scenario: 0.1 m/s for five seconds.
pub const LINE_V_MPS: f64 = 0.1;
pub const LINE_DURATION_S: f64 = 5.0;
/// Default turn scenario: one full revolution at 1.5 rad/s.
pub const TURN_W_RADPS: f64 = 1.5;
/// Default circle scenario: radius v/w = 0.1 m.
pub const CIRCLE_V_MPS: f64 = 0.1;
pub const CIRCLE_W_RADPS: f64 = 1.0;
/// Default hexagon scenario: 0.3 m edges, corners turned at 1.5 rad/s.
pub const HEX_EDGE_M: f64 = 0.3;
pub const HEX_V_MPS: f64 = 0.1;
pub const HEX_TURN_W_RADPS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Line,
    Turn,
    Circle,
    Hexagon,
    HexagonPaperReplay,
    SettlingCompare,
}

pub const ALL_SCENARIOS: [Scenario; 6] = [
    Scenario::Line,
    Scenario::Turn,
    Scenario::Circle,
    Scenario::Hexagon,
    Scenario::HexagonPaperReplay,
    Scenario::SettlingCompare,
];

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Line => "line",
            Scenario::Turn => "turn",
            Scenario::Circle => "circle",
            Scenario::Hexagon => "hexagon",
            Scenario::HexagonPaperReplay => "hexagon-paper-replay",
            Scenario::SettlingCompare => "settling-compare",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::Line => "straight drive at 0.1 m/s for 5 s",
            Scenario::Turn => "one full turn in place at 1.5 rad/s",
            Scenario::Circle => "one full circle of radius 0.1 m",
            Scenario::Hexagon => "closed regular hexagon, 0.3 m edges",
            Scenario::HexagonPaperReplay => {
                "replay of the original hardware trial's segment schedule (three turn cycles, 5 s)"
            }
            Scenario::SettlingCompare => {
                "line plan under kf and lpf feedback; compares settling times"
            }
        }
    }

    /// The plan executed by this scenario. The replay converts its recorded
    /// per-wheel speeds through the configured geometry so the commanded
    /// wheel speeds match the transcription exactly.
    pub fn plan(&self, config: &SimConfig) -> TrajectoryPlan {
        match self {
            Scenario::Line | Scenario::SettlingCompare => {
                TrajectoryPlan::line(LINE_V_MPS, LINE_DURATION_S).expect("valid line plan")
            }
            Scenario::Turn => {
                TrajectoryPlan::turn_in_place(
                    TURN_W_RADPS,
                    2.0 * std::f64::consts::PI / TURN_W_RADPS,
                )
                .expect("valid turn plan")
            }
            Scenario::Circle => {
                TrajectoryPlan::circle(CIRCLE_V_MPS, CIRCLE_W_RADPS).expect("valid circle plan")
            }
            Scenario::Hexagon => TrajectoryPlan::hexagon(HEX_EDGE_M, HEX_V_MPS, HEX_TURN_W_RADPS)
                .expect("valid hexagon plan"),
            Scenario::HexagonPaperReplay => replay_plan(config),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_SCENARIOS
            .iter()
            .find(|sc| sc.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<_> = ALL_SCENARIOS.iter().map(|sc| sc.name()).collect();
                format!("unknown scenario {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Recorded segment schedule of the original hexagon trial, as per-wheel
/// speeds (right, left, duration): a 0.7 s straight at 4 rad/s, a 0.25 s
/// stop, a slow differential turn at 0.6 / -0.4 rad/s, then a fast ramp to
/// 7.5 / 6.2 rad/s, repeated three times, 4.95 s in total. No closure is
/// promised; the schedule is reproduced as recorded.
const REPLAY_WHEEL_SEGMENTS: [(f64, f64, f64); 12] = [
    (4.0, 4.0, 0.7),
    (0.0, 0.0, 0.25),
    (0.6, -0.4, 0.45),
    (7.5, 6.2, 0.25),
    (4.0, 4.0, 0.7),
    (0.0, 0.0, 0.25),
    (0.6, -0.4, 0.45),
    (7.5, 6.2, 0.25),
    (4.0, 4.0, 0.7),
    (0.0, 0.0, 0.25),
    (0.6, -0.4, 0.45),
    (7.5, 6.2, 0.25),
];

fn replay_plan(config: &SimConfig) -> TrajectoryPlan {
    let segments = REPLAY_WHEEL_SEGMENTS
        .iter()
        .map(|&(wr, wl, duration)| {
            let twist = forward_kinematics(WheelSpeeds::new(wr, wl), config.geometry);
            Segment::new(twist.v_mps, twist.w_radps, duration)
        })
        .collect();
    TrajectoryPlan::from_segments(segments).expect("valid replay plan")
}

/// Files written by a successful run.
pub const OUTPUT_FILES: [&str; 5] = [
    "trace.csv",
    "metrics.txt",
    "speed_r.dat",
    "speed_l.dat",
    "path.dat",
];

pub struct RunOutcome {
    pub steps: usize,
    pub metrics: TrackingMetrics,
    /// Settling times of the kf and lpf runs; only for `settling-compare`.
    pub comparison: Option<(f64, f64)>,
}

/// Executes a scenario and writes `trace.csv`, `metrics.txt`, and the plot
/// data files into `out_dir`.
pub fn run_scenario(
    scenario: Scenario,
    config: &SimConfig,
    out_dir: &Path,
) -> Result<RunOutcome, Box<dyn std::error::Error>> {
    fs::create_dir_all(out_dir)?;
    let outcome = match scenario {
        Scenario::SettlingCompare => run_settling_compare(config, out_dir),
        _ => {
            let plan = scenario.plan(config);
            let trace = simulate_run(config, &plan)?;
            let metrics = compute_metrics(&trace)?;
            let reference = reference_path(config, &plan)?;
            write_run_files(out_dir, &trace, &reference)?;

            let mut entries: Vec<(&str, f64)> = Vec::new();
            if let Some(s) = metrics.settling_wr_s {
                entries.push(("settling_wr_s", s));
            }
            if let Some(s) = metrics.settling_wl_s {
                entries.push(("settling_wl_s", s));
            }
            entries.push(("rms_speed_error_radps", metrics.rms_speed_error_radps));
            entries.push(("final_pose_error_m", metrics.final_pose_error_m));
            entries.push(("path_closure_m", metrics.path_closure_m));
            write_metrics(&out_dir.join("metrics.txt"), &entries)?;

            Ok(RunOutcome {
                steps: trace.len(),
                metrics,
                comparison: None,
            })
        }
    }?;
    // Success is only reported once every output file is in place.
    for name in OUTPUT_FILES {
        let path = out_dir.join(name);
        if !path.is_file() {
            return Err(format!("output file {} was not written", path.display()).into());
        }
    }
    Ok(outcome)
}

fn run_settling_compare(
    config: &SimConfig,
    out_dir: &Path,
) -> Result<RunOutcome, Box<dyn std::error::Error>> {
    let plan = Scenario::SettlingCompare.plan(config);
    let jobs = [EstimatorMode::Kf, EstimatorMode::Lpf].map(|estimator| {
        BatchJob::new(
            SimConfig {
                estimator,
                ..config.clone()
            },
            plan.clone(),
        )
    });
    let mut traces = run_batch(&jobs)?;
    let lpf_trace = traces.pop().expect("two traces");
    let kf_trace = traces.pop().expect("two traces");

    let kf_metrics = compute_metrics(&kf_trace)?;
    let lpf_metrics = compute_metrics(&lpf_trace)?;
    let worst = |m: &TrackingMetrics| -> Option<f64> {
        match (m.settling_wr_s, m.settling_wl_s) {
            (Some(r), Some(l)) => Some(r.max(l)),
            _ => None,
        }
    };
    let settling_kf = worst(&kf_metrics);
    let settling_lpf = worst(&lpf_metrics);

    let reference = reference_path(config, &plan)?;
    write_run_files(out_dir, &kf_trace, &reference)?;

    let mut entries: Vec<(&str, f64)> = Vec::new();
    if let Some(s) = settling_kf {
        entries.push(("settling_kf_s", s));
    }
    if let Some(s) = settling_lpf {
        entries.push(("settling_lpf_s", s));
    }
    entries.push(("rms_kf_radps", kf_metrics.rms_speed_error_radps));
    entries.push(("rms_lpf_radps", lpf_metrics.rms_speed_error_radps));
    write_metrics(&out_dir.join("metrics.txt"), &entries)?;

    Ok(RunOutcome {
        steps: kf_trace.len(),
        metrics: kf_metrics,
        comparison: settling_kf.zip(settling_lpf),
    })
}

fn write_run_files(
    out_dir: &Path,
    trace: &SimTrace,
    reference: &[diffdrive_core::kinematics::Pose],
) -> std::io::Result<()> {
    write_trace_csv(&out_dir.join("trace.csv"), trace)?;
    write_speed_dat(&out_dir.join("speed_r.dat"), trace, Wheel::Right)?;
    write_speed_dat(&out_dir.join("speed_l.dat"), trace, Wheel::Left)?;
    write_path_dat(&out_dir.join("path.dat"), reference, trace)
}
