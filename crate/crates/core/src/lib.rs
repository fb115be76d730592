//! Deterministic closed-loop simulation of a two-wheeled differential-drive
//! robot.
//!
//! The crate models the full speed-control stack of a small desk-scale
//! robot:
//!
//! - [`kinematics`]: exact forward/inverse maps between wheel speeds and
//!   body twists, plus explicit-Euler pose integration with wrapped heading.
//! - [`actuation`]: a PWM-commanded DC micromotor (piecewise-linear static
//!   calibration with a deadband, first-order lag dynamics) and a 48-count
//!   incremental encoder with windowed speed estimation.
//! - [`control`]: per-wheel PI regulation with conditional-integration
//!   anti-windup, a first-order low-pass filter, and a reaction-curve tuning
//!   rule.
//! - [`estimation`]: a scalar Kalman filter per wheel, the alternative to
//!   low-pass filtering in the speed feedback path.
//! - [`simulation`]: the scenario engine wiring plan, controllers, plant,
//!   and estimators into a seeded, bit-reproducible loop, with trace
//!   recording and tracking metrics.
//! - [`batch`]: parallel execution of independent runs (sweeps), with a
//!   sequential fallback behind the `parallel` feature flag.
//!
//! Runs are deterministic: a configuration, a plan, and a seed fully
//! determine every recorded sample.

pub mod actuation;
pub mod batch;
pub mod control;
pub mod error;
pub mod estimation;
pub mod kinematics;
pub mod simulation;

pub use error::{Error, Result};

pub use actuation::{
    encoder_speed_bound, motor_step, pwm_for_speed, steady_state_speed, EncoderState, MotorParams,
    MotorState, SpeedEstimate,
};
pub use batch::{run_batch, run_batch_sequential, BatchJob};
pub use control::{lpf_step, pi_step, zn_tune_pi, LpfState, PiGains, PiState, ReactionCurve};
pub use estimation::{kf_predict, kf_step, kf_update, KalmanParams, KalmanState};
pub use kinematics::{
    forward_kinematics, integrate_pose, inverse_kinematics, pose_rate, wrap_angle, BodyTwist,
    Pose, PoseRate, RobotGeometry, WheelSpeeds,
};
pub use simulation::{
    compute_metrics, reference_path, simulate_run, EstimatorMode, Segment, SimConfig, SimTrace,
    StepRecord, TrackingMetrics, TrajectoryPlan, SETTLING_BAND_FRACTION, SETTLING_DWELL_S,
};
