//! Acceptance suite: one test per shipped correctness criterion.
//!
//! Each test prints a `criterion N PASS` line with the measured values once
//! its assertions hold (visible with `--nocapture`). Tolerances are pinned
//! here, next to the assertions they guard.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::Instant;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use diffdrive_cli::scenario::{Scenario, ALL_SCENARIOS};
use diffdrive_core::actuation::EncoderState;
use diffdrive_core::control::{pi_step, PiGains, PiState};
use diffdrive_core::estimation::{kf_step, kf_update, KalmanParams, KalmanState};
use diffdrive_core::kinematics::{
    forward_kinematics, inverse_kinematics, BodyTwist, RobotGeometry, WheelSpeeds,
};
use diffdrive_core::simulation::{
    compute_metrics, simulate_run, EstimatorMode, SimConfig, TrajectoryPlan,
};

/// Kinematic round trips must close to machine precision.
const ROUND_TRIP_TOL: f64 = 1e-12;
/// Agreement of the nominal straight-drive speed with its design point.
const DESIGN_POINT_REL_TOL: f64 = 0.01;
/// Filter variance must match the independent Riccati oracle this tightly.
const RICCATI_TOL: f64 = 1e-9;
/// Empirical error variance vs the Riccati prediction.
const VARIANCE_REL_TOL: f64 = 0.05;
/// Settling-time floors and ceilings for the estimator comparison.
const SETTLING_KF_MAX_S: f64 = 0.7;
const SETTLING_LPF_MIN_S: f64 = 2.0;
/// Closed plans must return to their start within this distance.
const CLOSURE_MAX_M: f64 = 0.05;
/// The trusted linear region of commanded wheel speeds.
const TRUST_REGION_RADPS: (f64, f64) = (2.0, 7.0);
/// Steady-state speed error budget, relative to the reference.
const STEADY_STATE_REL_TOL: f64 = 0.005;

fn pass(n: u32, detail: String) {
    println!("criterion {n} PASS: {detail}");
}

#[test]
fn criterion_1_kinematics_round_trip_and_design_point() {
    let started = Instant::now();
    let geom = RobotGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v_range = Uniform::new(-1.0, 1.0).unwrap();
    let w_range = Uniform::new(-10.0, 10.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let twist = BodyTwist::new(v_range.sample(&mut rng), w_range.sample(&mut rng));
        let back = forward_kinematics(inverse_kinematics(twist, geom), geom);
        worst = worst
            .max((back.v_mps - twist.v_mps).abs())
            .max((back.w_radps - twist.w_radps).abs());
    }
    assert!(
        worst < ROUND_TRIP_TOL,
        "round-trip error {worst} exceeds {ROUND_TRIP_TOL}"
    );

    let twist = forward_kinematics(WheelSpeeds::new(4.8, 4.8), geom);
    assert!((twist.v_mps - 0.1008).abs() < 1e-12);
    let deviation = (twist.v_mps - 0.1).abs() / 0.1;
    assert!(deviation < DESIGN_POINT_REL_TOL);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        1,
        format!(
            "1000 round trips close to {worst:.2e}; v(4.8, 4.8) = {:.4} m/s ({:.2}% from 0.1 m/s); {elapsed:?}",
            twist.v_mps,
            100.0 * deviation
        ),
    );
}

#[test]
fn criterion_2_encoder_quantization_bounds() {
    let mut enc = EncoderState::new(48, 4).unwrap();
    let tick = enc.tick_rad();
    assert!((tick.to_degrees() - 7.5).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let angle_range = Uniform::new(-100.0, 100.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..100_000 {
        let theta: f64 = angle_range.sample(&mut rng);
        enc.sample(theta, i as f64 * 0.002);
        let err = theta - enc.counts() as f64 * tick;
        assert!(
            (0.0..tick).contains(&err),
            "angle error {err} outside [0, {tick}) at theta={theta}"
        );
        worst = worst.max(err);
    }

    // Windowed speed error stays inside the one-count analytic bound for
    // constant-speed motion, across speeds, phases, and window lengths.
    let ts = 0.002;
    let mut worst_margin: f64 = 0.0;
    for &(omega, window_steps) in &[(5.0, 25usize), (5.0, 250), (-3.2, 25), (6.8, 50), (2.1, 100)]
    {
        for phase in [0.0, 0.02, 1.234] {
            let window = window_steps as f64 * ts;
            let bound = tick / window;
            let mut enc = EncoderState::new(48, window_steps + 2).unwrap();
            for k in 0..(window_steps * 3) {
                let t = k as f64 * ts;
                enc.sample(omega * t + phase, t);
                let est = enc.speed(window).unwrap();
                if !est.cold_start {
                    let err = (est.radps - omega).abs();
                    assert!(
                        err < bound,
                        "speed error {err} outside bound {bound} (omega={omega}, window={window})"
                    );
                    worst_margin = worst_margin.max(err / bound);
                }
            }
        }
    }
    pass(
        2,
        format!(
            "100000 angles quantized below one 7.5 deg tick (worst {:.3} deg); windowed speed within the one-count bound (worst {:.0}% of bound)",
            worst.to_degrees(),
            100.0 * worst_margin
        ),
    );
}

/// Fixed-point iteration of the variance recursion; independent of the
/// filter implementation it checks.
fn riccati_oracle(params: &KalmanParams, p0: f64, iterations: usize) -> f64 {
    let mut p = p0;
    for _ in 0..iterations {
        let p_pred = params.a * params.a * p + params.q;
        p = p_pred * params.w / (params.c * params.c * p_pred + params.w);
    }
    p
}

#[test]
fn criterion_3_kalman_variance_matches_riccati_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a_range = Uniform::new(-1.02, 1.02).unwrap();
    let c_range = Uniform::new(0.5, 2.0).unwrap();
    let log_range = Uniform::new(-2.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = KalmanParams {
            a: a_range.sample(&mut rng),
            c: c_range.sample(&mut rng),
            q: 10f64.powf(log_range.sample(&mut rng)),
            w: 10f64.powf(log_range.sample(&mut rng)),
            b: 0.0,
        };
        let p0: f64 = 10f64.powf(log_range.sample(&mut rng));
        let oracle = riccati_oracle(&params, p0, 10_000);
        let mut state = KalmanState { x_hat: 0.0, p: p0 };
        for _ in 0..10_000 {
            state = kf_step(state, 0.0, 0.0, &params).unwrap().0;
        }
        let gap = (state.p - oracle).abs();
        assert!(gap < RICCATI_TOL, "variance gap {gap} for {params:?}");
        worst = worst.max(gap);
        // Closed-form steady state agrees with the iteration as well.
        let closed_form = params.steady_state_variance();
        assert!((closed_form - oracle).abs() < 1e-7 * oracle.max(1.0));
    }

    // Gain limits: a huge measurement variance ignores the measurement, a
    // vanishing one trusts it completely (K c -> 1).
    for c in [0.5, 1.0, 2.0] {
        let deaf = KalmanParams {
            a: 1.0,
            c,
            q: 0.0,
            w: 1e12,
            b: 0.0,
        };
        let (_, gain) = kf_update(KalmanState { x_hat: 0.0, p: 1.0 }, 1.0, &deaf).unwrap();
        assert!(gain * c < 1e-11);
        let trusting = KalmanParams { w: 1e-12, ..deaf };
        let (_, gain) = kf_update(KalmanState { x_hat: 0.0, p: 1.0 }, 1.0, &trusting).unwrap();
        assert!((gain * c - 1.0).abs() < 1e-11);
    }
    pass(
        3,
        format!("100 random (a, c, q, w) tuples converge to the oracle within {worst:.2e}; gain limits verified"),
    );
}

#[test]
fn criterion_4_settling_time_ordering() {
    let started = Instant::now();
    let plan = Scenario::SettlingCompare.plan(&SimConfig::default());
    let settle = |mode: EstimatorMode| -> (f64, f64) {
        let config = SimConfig {
            estimator: mode,
            ..SimConfig::default()
        };
        let trace = simulate_run(&config, &plan).unwrap();
        let metrics = compute_metrics(&trace).unwrap();
        (
            metrics.settling_wr_s.expect("right wheel settles"),
            metrics.settling_wl_s.expect("left wheel settles"),
        )
    };
    let (kf_r, kf_l) = settle(EstimatorMode::Kf);
    let (lpf_r, lpf_l) = settle(EstimatorMode::Lpf);

    for (wheel, value) in [("right", kf_r), ("left", kf_l)] {
        assert!(
            value <= SETTLING_KF_MAX_S,
            "kf {wheel} settling {value} exceeds {SETTLING_KF_MAX_S}"
        );
    }
    for (wheel, value) in [("right", lpf_r), ("left", lpf_l)] {
        assert!(
            value >= SETTLING_LPF_MIN_S,
            "lpf {wheel} settling {value} below {SETTLING_LPF_MIN_S}"
        );
    }
    assert!(kf_r.max(kf_l) < lpf_r.min(lpf_l));

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        4,
        format!(
            "settling kf = ({kf_r:.3}, {kf_l:.3}) s <= {SETTLING_KF_MAX_S}; lpf = ({lpf_r:.3}, {lpf_l:.3}) s >= {SETTLING_LPF_MIN_S}; {elapsed:?}"
        ),
    );
}

#[test]
fn criterion_5_noise_attenuation_matches_riccati_prediction() {
    // Model-matched run: the truth follows the filter's own random-walk
    // hypothesis, so the Riccati fixed point is the exact error variance to
    // converge to. Uses the shipped preset.
    let params = KalmanParams::default();
    let predicted = riccati_oracle(&params, params.w, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut truth = 0.0f64;
    let mut state = KalmanState {
        x_hat: 0.0,
        p: params.w,
    };
    let burn_in = 10_000usize;
    let samples = 1_000_000usize;
    let mut sum_sq = 0.0;
    for k in 0..(burn_in + samples) {
        let process: f64 = StandardNormal.sample(&mut rng);
        let sensor: f64 = StandardNormal.sample(&mut rng);
        truth = params.a * truth + params.q.sqrt() * process;
        let y = params.c * truth + params.w.sqrt() * sensor;
        state = kf_step(state, 0.0, y, &params).unwrap().0;
        if k >= burn_in {
            sum_sq += (state.x_hat - truth).powi(2);
        }
    }
    let empirical = sum_sq / samples as f64;
    let deviation = (empirical - predicted).abs() / predicted;
    assert!(
        deviation < VARIANCE_REL_TOL,
        "error variance {empirical:.4e} deviates {:.2}% from predicted {predicted:.4e}",
        100.0 * deviation
    );
    assert!(
        empirical < params.w,
        "no variance reduction: {empirical} >= {}",
        params.w
    );

    // Closed-loop counterpart: on the same seed, Kalman feedback leaves
    // less speed-error energy in steady state than raw feedback.
    let plan = TrajectoryPlan::line(0.1, 5.0).unwrap();
    let tail_energy = |mode: EstimatorMode| -> f64 {
        let config = SimConfig {
            estimator: mode,
            rng_seed: 5,
            ..SimConfig::default()
        };
        let trace = simulate_run(&config, &plan).unwrap();
        let tail_start = trace.len() - (2.0 / config.ts_s) as usize;
        trace.records[tail_start..]
            .iter()
            .map(|r| (r.est_wr - r.ref_wr).powi(2) + (r.est_wl - r.ref_wl).powi(2))
            .sum()
    };
    let kf_energy = tail_energy(EstimatorMode::Kf);
    let raw_energy = tail_energy(EstimatorMode::Raw);
    assert!(kf_energy < raw_energy);

    pass(
        5,
        format!(
            "error variance {empirical:.4e} vs Riccati {predicted:.4e} ({:.2}% off), {:.0}x below measurement variance; in-loop energy ratio kf/raw = {:.3}",
            100.0 * deviation,
            params.w / empirical,
            kf_energy / raw_energy
        ),
    );
}

#[test]
fn criterion_6_hexagon_geometry_and_trust_region() {
    let config = SimConfig {
        meas_noise_std: 0.0,
        ..SimConfig::default()
    };
    let plan = Scenario::Hexagon.plan(&config);
    let trace = simulate_run(&config, &plan).unwrap();
    let metrics = compute_metrics(&trace).unwrap();
    assert!(
        metrics.path_closure_m < CLOSURE_MAX_M,
        "closure {} m exceeds {CLOSURE_MAX_M} m",
        metrics.path_closure_m
    );

    let (mut x_min, mut x_max) = (f64::MAX, f64::MIN);
    let (mut y_min, mut y_max) = (f64::MAX, f64::MIN);
    for r in &trace.records {
        assert!(
            r.pose.x_m.abs() <= config.arena_m && r.pose.y_m.abs() <= config.arena_m,
            "left the arena at ({}, {})",
            r.pose.x_m,
            r.pose.y_m
        );
        x_min = x_min.min(r.pose.x_m);
        x_max = x_max.max(r.pose.x_m);
        y_min = y_min.min(r.pose.y_m);
        y_max = y_max.max(r.pose.y_m);
    }
    // The whole path fits in a one-by-one-meter workspace.
    assert!(x_max - x_min <= 1.0 && y_max - y_min <= 1.0);

    // Nonzero commanded wheel speeds of the geometric scenarios stay inside
    // the trusted linear region. The replay scenario is excluded: it
    // transcribes recorded hardware commands, including sub-region ones.
    let (lo, hi) = TRUST_REGION_RADPS;
    for scenario in ALL_SCENARIOS {
        if scenario == Scenario::HexagonPaperReplay {
            continue;
        }
        for segment in &scenario.plan(&config).segments {
            let wheels = inverse_kinematics(
                BodyTwist::new(segment.v_mps, segment.w_radps),
                config.geometry,
            );
            for speed in [wheels.wr_radps, wheels.wl_radps] {
                if speed != 0.0 {
                    assert!(
                        (lo..=hi).contains(&speed.abs()),
                        "{scenario}: commanded wheel speed {speed} outside [{lo}, {hi}]"
                    );
                }
            }
        }
    }
    pass(
        6,
        format!(
            "hexagon closes to {:.3} cm; extent {:.2} x {:.2} m inside the 1 x 1 m arena; preset wheel speeds within [{lo}, {hi}] rad/s",
            100.0 * metrics.path_closure_m,
            x_max - x_min,
            y_max - y_min
        ),
    );
}

#[test]
fn criterion_7_pi_steady_state_and_anti_windup() {
    // Steady state is assessed after the integral transient has decayed:
    // mean true-speed error over the last five seconds of a 40 s noiseless
    // run, with the stock kp = 0.375, ki = 1 gains and a reference inside
    // the linear motor region.
    let config = SimConfig {
        meas_noise_std: 0.0,
        ..SimConfig::default()
    };
    assert_eq!(config.gains, PiGains { kp: 0.375, ki: 1.0 });
    let plan = TrajectoryPlan::line(0.1, 40.0).unwrap();
    let trace = simulate_run(&config, &plan).unwrap();
    let tail_start = trace.len() - (5.0 / config.ts_s) as usize;
    let tail = &trace.records[tail_start..];
    let reference = tail[0].ref_wr;
    let mean_err_r: f64 =
        tail.iter().map(|r| r.true_wr - r.ref_wr).sum::<f64>() / tail.len() as f64;
    let mean_err_l: f64 =
        tail.iter().map(|r| r.true_wl - r.ref_wl).sum::<f64>() / tail.len() as f64;
    for (wheel, err) in [("right", mean_err_r), ("left", mean_err_l)] {
        assert!(
            err.abs() / reference < STEADY_STATE_REL_TOL,
            "{wheel} steady-state error {:.3}% exceeds {:.1}%",
            100.0 * err.abs() / reference,
            100.0 * STEADY_STATE_REL_TOL
        );
    }

    // Forced saturation: a persistent error with the output pinned at the
    // clamp must leave the integral untouched.
    let gains = PiGains::STANDARD;
    let saturated = PiState {
        integral: 100.0,
        last_output_pwm: 255.0,
    };
    let (next, output) = pi_step(saturated, 1000.0, 0.0, gains, 0.002, 255.0).unwrap();
    assert_eq!(output, 255.0);
    assert_eq!(next.integral, saturated.integral);

    pass(
        7,
        format!(
            "steady-state error ({:.3}%, {:.3}%) of reference; integral frozen under saturation",
            100.0 * mean_err_r.abs() / reference,
            100.0 * mean_err_l.abs() / reference
        ),
    );
}

#[test]
fn criterion_8_trace_is_byte_reproducible() {
    let binary = env!("CARGO_BIN_EXE_diffdrive");
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let status = Command::new(binary)
            .args(["run", "hexagon", "--seed", "42", "--out"])
            .arg(&out)
            .status()
            .expect("run the binary");
        assert!(status.success());
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
    }
    assert!(!traces[0].is_empty());
    assert_eq!(traces[0], traces[1], "trace.csv bytes differ between runs");
    pass(
        8,
        format!(
            "two `run hexagon --seed 42` invocations produced byte-identical trace.csv ({} bytes)",
            traces[0].len()
        ),
    );
}

/// The 48-count encoder quantizes at 7.5 degrees per tick; keep the
/// constant visible next to the suite that relies on it.
#[test]
fn tick_angle_sanity() {
    let tick_deg = (TAU / 48.0).to_degrees();
    assert!((tick_deg - 7.5).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let _: f64 = rng.random();
}
