//! Plant models: a PWM-commanded DC micromotor and a quantized incremental
//! encoder with windowed speed estimation.
//!
//! The motor's static calibration is a piecewise-linear odd map: dead below
//! the deadband, a steep breakaway ramp up to the first calibrated point
//! (30 counts, 1 rad/s), the main linear region at 1 rad/s per 30 counts up
//! to the knee (6 rad/s), and a steeper segment (2 rad/s per 30 counts)
//! beyond. Dynamics are a first-order lag toward that static speed.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Static calibration and dynamics of one drive motor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorParams {
    /// Command magnitude below which the motor does not move, in PWM counts.
    pub deadband_pwm: f64,
    /// First calibrated command: smallest PWM that produces steady motion.
    pub breakaway_pwm: f64,
    /// Steady speed at `breakaway_pwm`, in rad/s.
    pub breakaway_radps: f64,
    /// Slope of the main linear region, in rad/s per PWM count.
    pub linear_gain: f64,
    /// Speed at which the slope changes, in rad/s.
    pub linear_knee_radps: f64,
    /// Slope past the knee, in rad/s per PWM count.
    pub upper_gain: f64,
    /// Saturation magnitude, in PWM counts.
    pub max_pwm: f64,
    /// First-order lag time constant, in seconds.
    pub tau_s: f64,
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams {
            deadband_pwm: 20.0,
            breakaway_pwm: 30.0,
            breakaway_radps: 1.0,
            linear_gain: 1.0 / 30.0,
            linear_knee_radps: 6.0,
            upper_gain: 2.0 / 30.0,
            max_pwm: 255.0,
            tau_s: 0.15,
        }
    }
}

impl MotorParams {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("motor.deadband_pwm", self.deadband_pwm)?;
        require_positive("motor.breakaway_pwm", self.breakaway_pwm)?;
        require_positive("motor.breakaway_radps", self.breakaway_radps)?;
        require_positive("motor.linear_gain", self.linear_gain)?;
        require_positive("motor.upper_gain", self.upper_gain)?;
        require_positive("motor.max_pwm", self.max_pwm)?;
        require_positive("motor.tau_s", self.tau_s)?;
        if self.breakaway_pwm <= self.deadband_pwm {
            return Err(Error::InvalidParameter {
                name: "motor.breakaway_pwm",
                reason: format!(
                    "must exceed the deadband ({} <= {})",
                    self.breakaway_pwm, self.deadband_pwm
                ),
            });
        }
        if self.linear_knee_radps < self.breakaway_radps {
            return Err(Error::InvalidParameter {
                name: "motor.linear_knee_radps",
                reason: format!(
                    "must be at least the breakaway speed ({} < {})",
                    self.linear_knee_radps, self.breakaway_radps
                ),
            });
        }
        if self.max_pwm <= self.breakaway_pwm {
            return Err(Error::InvalidParameter {
                name: "motor.max_pwm",
                reason: format!(
                    "must exceed the breakaway command ({} <= {})",
                    self.max_pwm, self.breakaway_pwm
                ),
            });
        }
        Ok(())
    }

    /// PWM command at which the static map reaches the knee speed.
    pub fn knee_pwm(&self) -> f64 {
        self.breakaway_pwm + (self.linear_knee_radps - self.breakaway_radps) / self.linear_gain
    }

    /// Largest steady speed the motor can reach, at `max_pwm`.
    pub fn max_speed_radps(&self) -> f64 {
        steady_state_speed(self.max_pwm, self)
    }
}

/// Steady-state shaft speed for a (clamped) PWM command.
///
/// Odd, continuous, monotone non-decreasing; exactly zero on
/// `[-deadband, +deadband]`.
pub fn steady_state_speed(pwm: f64, params: &MotorParams) -> f64 {
    let clamped = pwm.clamp(-params.max_pwm, params.max_pwm);
    let magnitude = clamped.abs();
    let speed = if magnitude <= params.deadband_pwm {
        0.0
    } else if magnitude <= params.breakaway_pwm {
        params.breakaway_radps * (magnitude - params.deadband_pwm)
            / (params.breakaway_pwm - params.deadband_pwm)
    } else {
        let linear = params.breakaway_radps + (magnitude - params.breakaway_pwm) * params.linear_gain;
        if linear <= params.linear_knee_radps {
            linear
        } else {
            params.linear_knee_radps + (magnitude - params.knee_pwm()) * params.upper_gain
        }
    };
    if clamped < 0.0 {
        -speed
    } else {
        speed
    }
}

/// PWM command whose steady-state speed is `speed`; the right-inverse of
/// [`steady_state_speed`] on the reachable range. Zero speed maps to zero
/// command, and speeds beyond the motor's maximum clamp to `max_pwm`.
pub fn pwm_for_speed(speed: f64, params: &MotorParams) -> f64 {
    if speed == 0.0 {
        return 0.0;
    }
    let magnitude = speed.abs();
    let pwm = if magnitude <= params.breakaway_radps {
        params.deadband_pwm
            + magnitude * (params.breakaway_pwm - params.deadband_pwm) / params.breakaway_radps
    } else if magnitude <= params.linear_knee_radps {
        params.breakaway_pwm + (magnitude - params.breakaway_radps) / params.linear_gain
    } else {
        params.knee_pwm() + (magnitude - params.linear_knee_radps) / params.upper_gain
    };
    pwm.min(params.max_pwm) * speed.signum()
}

/// Continuous shaft state: current angular speed and accumulated
/// (unwrapped) angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorState {
    pub omega_radps: f64,
    pub theta_rad: f64,
}

/// Advances the motor one sample period: first-order lag of the speed toward
/// the static map's value, then exact-hold integration of the updated speed
/// into the shaft angle.
pub fn motor_step(state: MotorState, pwm: f64, dt: f64, params: &MotorParams) -> Result<MotorState> {
    require_positive("dt", dt)?;
    let target = steady_state_speed(pwm, params);
    let omega = state.omega_radps + (dt / params.tau_s) * (target - state.omega_radps);
    Ok(MotorState {
        omega_radps: omega,
        theta_rad: state.theta_rad + omega * dt,
    })
}

/// Worst-case quantization error of a windowed speed estimate: one count of
/// slack at the window edges, i.e. `(2 pi / cpr) / window`.
pub fn encoder_speed_bound(cpr: u32, window_s: f64) -> f64 {
    (TAU / cpr as f64) / window_s
}

/// Quantized incremental encoder. Counts are the floor of the shaft angle in
/// ticks; a short history ring supports windowed speed estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    counts: i64,
    cpr: u32,
    history: VecDeque<(f64, i64)>,
    depth: usize,
}

/// A windowed speed estimate, flagged while the history is still shorter
/// than the requested window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    pub radps: f64,
    pub cold_start: bool,
}

impl EncoderState {
    /// `depth` is the number of (time, counts) samples retained; it must
    /// cover at least the largest window used plus one sample.
    pub fn new(cpr: u32, depth: usize) -> Result<Self> {
        if cpr == 0 {
            return Err(Error::InvalidParameter {
                name: "cpr",
                reason: "counts per revolution must be positive".into(),
            });
        }
        if depth < 2 {
            return Err(Error::InvalidParameter {
                name: "encoder depth",
                reason: format!("need at least 2 history samples (got {depth})"),
            });
        }
        Ok(EncoderState {
            counts: 0,
            cpr,
            history: VecDeque::with_capacity(depth),
            depth,
        })
    }

    pub fn counts(&self) -> i64 {
        self.counts
    }

    pub fn cpr(&self) -> u32 {
        self.cpr
    }

    /// Angle subtended by one count, in radians.
    pub fn tick_rad(&self) -> f64 {
        TAU / self.cpr as f64
    }

    /// Samples the shaft angle at time `t_s`, updating the tick count and
    /// appending to the history ring. Call at the fixed sampling period.
    pub fn sample(&mut self, theta_rad: f64, t_s: f64) {
        self.counts = (theta_rad / TAU * self.cpr as f64).floor() as i64;
        if self.history.len() == self.depth {
            self.history.pop_front();
        }
        self.history.push_back((t_s, self.counts));
    }

    /// Differenced tick count over (approximately) the trailing window,
    /// scaled to rad/s. Returns zero (flagged) until the history spans the
    /// window. The actual sample-aligned span is used as the divisor.
    pub fn speed(&self, window_s: f64) -> Result<SpeedEstimate> {
        require_positive("window_s", window_s)?;
        let (t_now, c_now) = match self.history.back() {
            Some(&latest) => latest,
            None => {
                return Ok(SpeedEstimate {
                    radps: 0.0,
                    cold_start: true,
                })
            }
        };
        let t_target = t_now - window_s;
        // Oldest retained sample at or after the window start; tolerate
        // sub-sample jitter in the cutoff so exact multiples of the sampling
        // period land on the intended sample.
        let slack = window_s * 1e-9;
        let past = self
            .history
            .iter()
            .find(|(t, _)| *t >= t_target - slack)
            .copied();
        let spans_window = match self.history.front() {
            Some((t_first, _)) => *t_first <= t_target + slack,
            None => false,
        };
        match past {
            Some((t_old, c_old)) if t_old < t_now && spans_window => {
                let span = t_now - t_old;
                Ok(SpeedEstimate {
                    radps: (c_now - c_old) as f64 * self.tick_rad() / span,
                    cold_start: false,
                })
            }
            _ => Ok(SpeedEstimate {
                radps: 0.0,
                cold_start: true,
            }),
        }
    }
}
