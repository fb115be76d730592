//! Closed-loop scenario engine.
//!
//! Each control period the loop reads the quantized encoders, forms a noisy
//! speed measurement, filters it with the configured estimator, commands the
//! motors (static-calibration feedforward plus PI trim on the estimate), and
//! integrates both the true pose and the odometry pose. The loop ordering
//! (sense, estimate, control, actuate, integrate) is fixed, and every random
//! draw comes from a single seeded generator, so a run is a pure function of
//! its configuration, plan, and seed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::actuation::{motor_step, pwm_for_speed, EncoderState, MotorParams, MotorState};
use crate::control::{lpf_step, pi_step, LpfState, PiGains, PiState};
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::estimation::{kf_step, KalmanParams, KalmanState};
use crate::kinematics::{
    forward_kinematics, integrate_pose, inverse_kinematics, BodyTwist, Pose, RobotGeometry,
    WheelSpeeds,
};

/// Relative half-width of the settling band around the reference.
pub const SETTLING_BAND_FRACTION: f64 = 0.05;
/// Time the estimate must continuously stay inside the band to count as
/// settled.
pub const SETTLING_DWELL_S: f64 = 0.2;

/// Which signal the controller sees as the wheel-speed feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMode {
    /// The windowed encoder speed, noise and all.
    Raw,
    /// First-order low-pass filtered measurement.
    Lpf,
    /// Scalar Kalman filter on the measurement.
    Kf,
}

impl EstimatorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorMode::Raw => "raw",
            EstimatorMode::Lpf => "lpf",
            EstimatorMode::Kf => "kf",
        }
    }
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(EstimatorMode::Raw),
            "lpf" => Ok(EstimatorMode::Lpf),
            "kf" => Ok(EstimatorMode::Kf),
            other => Err(Error::InvalidParameter {
                name: "estimator",
                reason: format!("expected raw, lpf, or kf (got {other:?})"),
            }),
        }
    }
}

/// A piecewise-constant command: hold `(v, w)` for `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub v_mps: f64,
    pub w_radps: f64,
    pub duration_s: f64,
}

impl Segment {
    pub fn new(v_mps: f64, w_radps: f64, duration_s: f64) -> Self {
        Segment {
            v_mps,
            w_radps,
            duration_s,
        }
    }
}

/// An ordered list of piecewise-constant body-twist commands.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    pub segments: Vec<Segment>,
}

impl TrajectoryPlan {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let plan = TrajectoryPlan { segments };
        plan.validate()?;
        Ok(plan)
    }

    /// Straight drive at `v` for `duration_s`.
    pub fn line(v_mps: f64, duration_s: f64) -> Result<Self> {
        Self::from_segments(vec![Segment::new(v_mps, 0.0, duration_s)])
    }

    /// Rotation in place at `w` for `duration_s`.
    pub fn turn_in_place(w_radps: f64, duration_s: f64) -> Result<Self> {
        Self::from_segments(vec![Segment::new(0.0, w_radps, duration_s)])
    }

    /// One full circle of radius `v/w`: a single segment lasting `2 pi / |w|`.
    pub fn circle(v_mps: f64, w_radps: f64) -> Result<Self> {
        if w_radps == 0.0 || !w_radps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "w_radps",
                reason: "circle requires a nonzero angular speed".into(),
            });
        }
        Self::from_segments(vec![Segment::new(
            v_mps,
            w_radps,
            2.0 * PI / w_radps.abs(),
        )])
    }

    /// A closed regular hexagon: six straight edges of `edge_m` driven at
    /// `v_mps`, each followed by a 60 degree turn in place at `turn_w_radps`.
    /// The six exterior turns sum to one full revolution.
    pub fn hexagon(edge_m: f64, v_mps: f64, turn_w_radps: f64) -> Result<Self> {
        require_positive("edge_m", edge_m)?;
        require_positive("v_mps", v_mps)?;
        if turn_w_radps == 0.0 || !turn_w_radps.is_finite() {
            return Err(Error::InvalidParameter {
                name: "turn_w_radps",
                reason: "hexagon turns require a nonzero angular speed".into(),
            });
        }
        let edge_duration = edge_m / v_mps;
        let turn_duration = (PI / 3.0) / turn_w_radps.abs();
        let mut segments = Vec::with_capacity(12);
        for _ in 0..6 {
            segments.push(Segment::new(v_mps, 0.0, edge_duration));
            segments.push(Segment::new(0.0, turn_w_radps, turn_duration));
        }
        Self::from_segments(segments)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::EmptyPlan);
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration_s > 0.0 && seg.duration_s.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "segment duration",
                    reason: format!("segment {i} has duration {}", seg.duration_s),
                });
            }
            if !seg.v_mps.is_finite() || !seg.w_radps.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "segment twist",
                    reason: format!("segment {i} has a non-finite command"),
                });
            }
        }
        Ok(())
    }

    pub fn total_duration_s(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Commanded twist at time `t_s`; times past the end hold the last
    /// segment's command.
    pub fn twist_at(&self, t_s: f64) -> BodyTwist {
        let mut end = 0.0;
        for seg in &self.segments {
            end += seg.duration_s;
            if t_s < end {
                return BodyTwist::new(seg.v_mps, seg.w_radps);
            }
        }
        match self.segments.last() {
            Some(seg) => BodyTwist::new(seg.v_mps, seg.w_radps),
            None => BodyTwist::default(),
        }
    }
}

/// Everything a run depends on besides the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Control and sampling period, seconds.
    pub ts_s: f64,
    /// Feedback estimator in the speed loop.
    pub estimator: EstimatorMode,
    pub geometry: RobotGeometry,
    /// Motor model; the left wheel reuses it with `tau_s` scaled by
    /// `left_tau_scale`.
    pub motor: MotorParams,
    /// Multiplier on the left motor's time constant (1.0 = symmetric
    /// drivetrain). Lets the slower-left-motor behavior seen on hardware be
    /// reproduced without a second parameter block.
    pub left_tau_scale: f64,
    pub gains: PiGains,
    pub kalman: KalmanParams,
    /// Initial estimate variance; defaults to the measurement variance.
    pub kalman_p0: Option<f64>,
    /// Encoder counts per revolution.
    pub cpr: u32,
    pub lpf_cutoff_hz: f64,
    /// Window over which encoder counts are differenced into a speed.
    pub speed_window_s: f64,
    /// Standard deviation of the Gaussian noise added to each wheel's
    /// measured speed, rad/s.
    pub meas_noise_std: f64,
    pub rng_seed: u64,
    /// Workspace half-extent for bounds checking, meters.
    pub arena_m: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ts_s: 0.002,
            estimator: EstimatorMode::Kf,
            geometry: RobotGeometry::default(),
            motor: MotorParams::default(),
            left_tau_scale: 1.0,
            gains: PiGains::STANDARD,
            kalman: KalmanParams::default(),
            kalman_p0: None,
            cpr: 48,
            lpf_cutoff_hz: 0.2,
            speed_window_s: 0.05,
            meas_noise_std: 0.2,
            rng_seed: 0,
            arena_m: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("ts_s", self.ts_s)?;
        self.geometry.validate()?;
        self.motor.validate()?;
        require_positive("motor.left_tau_scale", self.left_tau_scale)?;
        self.gains.validate()?;
        self.kalman.validate()?;
        if let Some(p0) = self.kalman_p0 {
            require_positive("kalman.p0", p0)?;
        }
        if self.cpr == 0 {
            return Err(Error::InvalidParameter {
                name: "cpr",
                reason: "counts per revolution must be positive".into(),
            });
        }
        require_positive("lpf_cutoff_hz", self.lpf_cutoff_hz)?;
        require_positive("speed_window_s", self.speed_window_s)?;
        if self.speed_window_s < self.ts_s {
            return Err(Error::InvalidParameter {
                name: "speed_window_s",
                reason: format!(
                    "must span at least one sample period ({} < {})",
                    self.speed_window_s, self.ts_s
                ),
            });
        }
        require_non_negative("meas_noise_std", self.meas_noise_std)?;
        require_positive("arena_m", self.arena_m)?;
        Ok(())
    }
}

/// One recorded control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t_s: f64,
    pub ref_wr: f64,
    pub ref_wl: f64,
    pub true_wr: f64,
    pub true_wl: f64,
    pub meas_wr: f64,
    pub meas_wl: f64,
    pub est_wr: f64,
    pub est_wl: f64,
    pub pwm_r: f64,
    pub pwm_l: f64,
    /// True pose at the end of the step.
    pub pose: Pose,
    /// Pose dead-reckoned from the estimator outputs.
    pub odometry: Pose,
}

/// Uniformly sampled record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub ts_s: f64,
    pub initial_pose: Pose,
    pub records: Vec<StepRecord>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_pose(&self) -> Option<Pose> {
        self.records.last().map(|r| r.pose)
    }

    pub fn final_odometry(&self) -> Option<Pose> {
        self.records.last().map(|r| r.odometry)
    }
}

/// Aggregate tracking figures of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingMetrics {
    /// First time each wheel's estimate stays within the settling band for
    /// the dwell time; absent when that never happens.
    pub settling_wr_s: Option<f64>,
    pub settling_wl_s: Option<f64>,
    /// RMS of (estimate - reference) pooled over both wheels, rad/s.
    pub rms_speed_error_radps: f64,
    /// Distance between the final true pose and the final odometry pose.
    pub final_pose_error_m: f64,
    /// Distance from the final true pose back to the starting pose.
    pub path_closure_m: f64,
}

struct WheelChannel {
    params: MotorParams,
    motor: MotorState,
    encoder: EncoderState,
    pi: PiState,
    lpf: LpfState,
    kf: Option<KalmanState>,
}

impl WheelChannel {
    fn new(config: &SimConfig, params: MotorParams) -> Result<Self> {
        let window_samples = (config.speed_window_s / config.ts_s).ceil() as usize;
        Ok(WheelChannel {
            params,
            motor: MotorState::default(),
            encoder: EncoderState::new(config.cpr, window_samples + 2)?,
            pi: PiState::default(),
            lpf: LpfState::new(config.lpf_cutoff_hz)?,
            kf: None,
        })
    }

    /// Sample the encoder and return the noisy windowed speed measurement.
    fn measure(&mut self, t_s: f64, config: &SimConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
        self.encoder.sample(self.motor.theta_rad, t_s);
        let estimate = self.encoder.speed(config.speed_window_s)?;
        // Always consume one draw so the noise stream does not depend on the
        // cold-start phase or the noise level.
        let draw: f64 = StandardNormal.sample(rng);
        Ok(estimate.radps + config.meas_noise_std * draw)
    }

    fn estimate(&mut self, reference: f64, measurement: f64, config: &SimConfig) -> Result<f64> {
        match config.estimator {
            EstimatorMode::Raw => Ok(measurement),
            EstimatorMode::Lpf => {
                self.lpf = lpf_step(self.lpf, measurement, config.ts_s)?;
                Ok(self.lpf.y)
            }
            EstimatorMode::Kf => match self.kf {
                None => {
                    let p0 = config.kalman_p0.unwrap_or(config.kalman.w);
                    self.kf = Some(KalmanState {
                        x_hat: measurement,
                        p: p0,
                    });
                    Ok(measurement)
                }
                Some(state) => {
                    let (next, _gain) = kf_step(state, reference, measurement, &config.kalman)?;
                    self.kf = Some(next);
                    Ok(next.x_hat)
                }
            },
        }
    }

    /// Static-calibration feedforward on the reference plus PI trim on the
    /// estimate, clamped to the actuator range.
    fn command(&mut self, reference: f64, estimate: f64, config: &SimConfig) -> Result<f64> {
        let (next, trim) = pi_step(
            self.pi,
            reference,
            estimate,
            config.gains,
            config.ts_s,
            self.params.max_pwm,
        )?;
        self.pi = next;
        let feedforward = pwm_for_speed(reference, &self.params);
        Ok((feedforward + trim).clamp(-self.params.max_pwm, self.params.max_pwm))
    }

    fn actuate(&mut self, pwm: f64, dt: f64) -> Result<()> {
        self.motor = motor_step(self.motor, pwm, dt, &self.params)?;
        Ok(())
    }
}

/// Executes a plan under a configuration. Deterministic: identical
/// `(config, plan)` (including the seed) produce bit-identical traces.
pub fn simulate_run(config: &SimConfig, plan: &TrajectoryPlan) -> Result<SimTrace> {
    config.validate()?;
    plan.validate()?;
    let ts = config.ts_s;
    let steps = (plan.total_duration_s() / ts).ceil() as usize;
    if steps == 0 {
        return Err(Error::EmptyPlan);
    }
    if steps > 50_000_000 {
        return Err(Error::InvalidParameter {
            name: "plan",
            reason: format!("{steps} steps exceeds the per-run limit"),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut right = WheelChannel::new(config, config.motor)?;
    let left_params = MotorParams {
        tau_s: config.motor.tau_s * config.left_tau_scale,
        ..config.motor
    };
    let mut left = WheelChannel::new(config, left_params)?;

    let mut pose = Pose::ORIGIN;
    let mut odometry = Pose::ORIGIN;
    let mut records = Vec::with_capacity(steps);

    for k in 0..steps {
        let t = k as f64 * ts;
        let refs = inverse_kinematics(plan.twist_at(t), config.geometry);

        let meas_wr = right.measure(t, config, &mut rng)?;
        let meas_wl = left.measure(t, config, &mut rng)?;
        let est_wr = right.estimate(refs.wr_radps, meas_wr, config)?;
        let est_wl = left.estimate(refs.wl_radps, meas_wl, config)?;
        let pwm_r = right.command(refs.wr_radps, est_wr, config)?;
        let pwm_l = left.command(refs.wl_radps, est_wl, config)?;
        right.actuate(pwm_r, ts)?;
        left.actuate(pwm_l, ts)?;

        let true_speeds = WheelSpeeds::new(right.motor.omega_radps, left.motor.omega_radps);
        pose = integrate_pose(&pose, forward_kinematics(true_speeds, config.geometry), ts)?;
        let est_speeds = WheelSpeeds::new(est_wr, est_wl);
        odometry = integrate_pose(
            &odometry,
            forward_kinematics(est_speeds, config.geometry),
            ts,
        )?;

        records.push(StepRecord {
            t_s: t,
            ref_wr: refs.wr_radps,
            ref_wl: refs.wl_radps,
            true_wr: right.motor.omega_radps,
            true_wl: left.motor.omega_radps,
            meas_wr,
            meas_wl,
            est_wr,
            est_wl,
            pwm_r,
            pwm_l,
            pose,
            odometry,
        });
    }

    Ok(SimTrace {
        ts_s: ts,
        initial_pose: Pose::ORIGIN,
        records,
    })
}

/// The ideal trajectory the plan describes: the commanded twists integrated
/// directly, with no plant or sensor in the way. Starts at the origin and
/// has one pose per control period plus the initial one.
pub fn reference_path(config: &SimConfig, plan: &TrajectoryPlan) -> Result<Vec<Pose>> {
    config.validate()?;
    plan.validate()?;
    let ts = config.ts_s;
    let steps = (plan.total_duration_s() / ts).ceil() as usize;
    let mut poses = Vec::with_capacity(steps + 1);
    let mut pose = Pose::ORIGIN;
    poses.push(pose);
    for k in 0..steps {
        let t = k as f64 * ts;
        pose = integrate_pose(&pose, plan.twist_at(t), ts)?;
        poses.push(pose);
    }
    Ok(poses)
}

fn settling_time(
    records: &[StepRecord],
    ts: f64,
    reference: impl Fn(&StepRecord) -> f64,
    estimate: impl Fn(&StepRecord) -> f64,
) -> Option<f64> {
    let dwell = ((SETTLING_DWELL_S / ts).ceil() as usize).max(1);
    let n = records.len();
    if n < dwell {
        return None;
    }
    // Suffix lengths of consecutive in-band samples.
    let mut run_ahead = vec![0usize; n + 1];
    for k in (0..n).rev() {
        let rec = &records[k];
        let band = SETTLING_BAND_FRACTION * reference(rec).abs();
        let in_band = (estimate(rec) - reference(rec)).abs() <= band;
        run_ahead[k] = if in_band { run_ahead[k + 1] + 1 } else { 0 };
    }
    (0..n)
        .find(|&k| run_ahead[k] >= dwell)
        .map(|k| records[k].t_s)
}

/// Settling, tracking-error, and odometry figures for a finished run.
pub fn compute_metrics(trace: &SimTrace) -> Result<TrackingMetrics> {
    if trace.records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let records = &trace.records;
    let settling_wr_s = settling_time(records, trace.ts_s, |r| r.ref_wr, |r| r.est_wr);
    let settling_wl_s = settling_time(records, trace.ts_s, |r| r.ref_wl, |r| r.est_wl);

    let sum_sq: f64 = records
        .iter()
        .map(|r| (r.est_wr - r.ref_wr).powi(2) + (r.est_wl - r.ref_wl).powi(2))
        .sum();
    let rms_speed_error_radps = (sum_sq / (2.0 * records.len() as f64)).sqrt();

    let last = records.last().expect("non-empty");
    Ok(TrackingMetrics {
        settling_wr_s,
        settling_wl_s,
        rms_speed_error_radps,
        final_pose_error_m: last.pose.distance_to(&last.odometry),
        path_closure_m: last.pose.distance_to(&trace.initial_pose),
    })
}
