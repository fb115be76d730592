//! Per-wheel speed regulation: a discrete PI controller with output
//! saturation and conditional-integration anti-windup, a first-order
//! low-pass filter, and an open-loop reaction-curve tuning rule.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};

/// Proportional and integral gains, in PWM counts per rad/s and per
/// rad/s-second respectively. The derivative path is intentionally absent:
/// both shipped tunings pin it to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiGains {
    pub kp: f64,
    pub ki: f64,
}

impl PiGains {
    /// Default tuning (kp = 0.375, ki = 1).
    pub const STANDARD: PiGains = PiGains { kp: 0.375, ki: 1.0 };
    /// Alternate tuning with a stiffer proportional term (kp = 0.479, ki = 1).
    pub const ALTERNATE: PiGains = PiGains { kp: 0.479, ki: 1.0 };

    pub fn new(kp: f64, ki: f64) -> Result<Self> {
        let gains = PiGains { kp, ki };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kp < 0.0 || !self.kp.is_finite() {
            return Err(Error::InvalidParameter {
                name: "kp",
                reason: format!("must be finite and >= 0 (got {})", self.kp),
            });
        }
        if self.ki < 0.0 || !self.ki.is_finite() {
            return Err(Error::InvalidParameter {
                name: "ki",
                reason: format!("must be finite and >= 0 (got {})", self.ki),
            });
        }
        Ok(())
    }
}

impl Default for PiGains {
    fn default() -> Self {
        PiGains::STANDARD
    }
}

/// Controller memory: the accumulated error integral and the last emitted
/// command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PiState {
    pub integral: f64,
    pub last_output_pwm: f64,
}

/// One PI update. Returns the new state and the saturated command.
///
/// The integral accumulates `e * dt` except when the unsaturated output
/// already exceeds the clamp in the direction of the error, in which case it
/// is frozen for the step. This keeps the integral from winding up against
/// the actuator limit while still allowing it to unwind.
pub fn pi_step(
    state: PiState,
    reference_radps: f64,
    measurement_radps: f64,
    gains: PiGains,
    dt: f64,
    max_pwm: f64,
) -> Result<(PiState, f64)> {
    require_positive("dt", dt)?;
    require_positive("max_pwm", max_pwm)?;
    let error = reference_radps - measurement_radps;
    let candidate = state.integral + error * dt;
    let unsaturated = gains.kp * error + gains.ki * candidate;
    let winding_against_clamp = (unsaturated > max_pwm && error > 0.0)
        || (unsaturated < -max_pwm && error < 0.0);
    let integral = if winding_against_clamp {
        state.integral
    } else {
        candidate
    };
    let output = (gains.kp * error + gains.ki * integral).clamp(-max_pwm, max_pwm);
    Ok((
        PiState {
            integral,
            last_output_pwm: output,
        },
        output,
    ))
}

/// First-order low-pass filter state. `y` is the filtered output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpfState {
    pub y: f64,
    pub cutoff_hz: f64,
}

impl LpfState {
    pub fn new(cutoff_hz: f64) -> Result<Self> {
        require_positive("lpf_cutoff_hz", cutoff_hz)?;
        Ok(LpfState { y: 0.0, cutoff_hz })
    }
}

/// One filter update: `y += alpha (x - y)` with
/// `alpha = dt / (dt + 1 / (2 pi fc))`, so `0 < alpha < 1` for any positive
/// `dt` and cutoff.
pub fn lpf_step(state: LpfState, x: f64, dt: f64) -> Result<LpfState> {
    require_positive("dt", dt)?;
    require_positive("lpf_cutoff_hz", state.cutoff_hz)?;
    let rc = 1.0 / (2.0 * PI * state.cutoff_hz);
    let alpha = dt / (dt + rc);
    Ok(LpfState {
        y: state.y + alpha * (x - state.y),
        cutoff_hz: state.cutoff_hz,
    })
}

/// Open-loop step-response characterization: dead time `L`, time constant
/// `T`, and process gain `K` (rad/s per PWM count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionCurve {
    pub dead_time_s: f64,
    pub time_constant_s: f64,
    pub process_gain: f64,
}

/// PI gains from the open-loop reaction-curve rule:
/// `kp = 0.9 T / (K L)`, `Ti = L / 0.3`, `ki = kp / Ti`.
pub fn zn_tune_pi(curve: ReactionCurve) -> Result<PiGains> {
    require_positive("dead_time_s", curve.dead_time_s)?;
    require_positive("time_constant_s", curve.time_constant_s)?;
    require_positive("process_gain", curve.process_gain)?;
    let kp = 0.9 * curve.time_constant_s / (curve.process_gain * curve.dead_time_s);
    let ti = curve.dead_time_s / 0.3;
    Ok(PiGains { kp, ki: kp / ti })
}
