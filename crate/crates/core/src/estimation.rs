//! Scalar discrete-time Kalman filter for wheel angular speed.
//!
//! One filter instance runs per wheel, blending the encoder-derived speed
//! measurement with a near-random-walk state model. The defaults pair a
//! large process variance with a much larger measurement variance, which
//! lands the steady-state gain in the few-percent range: fast tracking with
//! strong attenuation of quantization and sensor noise.

use crate::error::{require_non_negative, Error, Result};

/// Model constants of the scalar filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanParams {
    /// State transition scalar per step. Values near 1 give a random walk
    /// with slow decay; stability (|a| <= 1) is expected but not enforced.
    pub a: f64,
    /// Observation scalar.
    pub c: f64,
    /// Process-noise variance per step, (rad/s)^2.
    pub q: f64,
    /// Measurement-noise variance, (rad/s)^2.
    pub w: f64,
    /// Input coupling mapping the commanded speed into the prediction.
    /// Zero (the default) makes the filter purely measurement-driven.
    pub b: f64,
}

impl Default for KalmanParams {
    fn default() -> Self {
        KalmanParams {
            // Continuous decay of -1e-4 discretized at the 2 ms sample period.
            a: 1.0 + (-1.0e-4) * 0.002,
            c: 1.0,
            q: 1.0e4,
            w: 1.0e7,
            b: 0.0,
        }
    }
}

impl KalmanParams {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("kalman.q", self.q)?;
        if self.w <= 0.0 || !self.w.is_finite() {
            return Err(Error::NonPositive {
                name: "kalman.w",
                value: self.w,
            });
        }
        for (name, value) in [
            ("kalman.a", self.a),
            ("kalman.c", self.c),
            ("kalman.b", self.b),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite (got {value})"),
                });
            }
        }
        Ok(())
    }

    /// Steady-state estimate variance: the positive root of the scalar
    /// Riccati fixed-point equation `p = (a^2 p + q) w / (c^2 (a^2 p + q) + w)`.
    pub fn steady_state_variance(&self) -> f64 {
        let (a2, c2) = (self.a * self.a, self.c * self.c);
        if a2 == 0.0 || c2 == 0.0 {
            // Degenerate models: no dynamics or no observation.
            return if c2 == 0.0 {
                f64::INFINITY
            } else {
                self.q * self.w / (c2 * self.q + self.w)
            };
        }
        let b = c2 * self.q + self.w * (1.0 - a2);
        let disc = b * b + 4.0 * c2 * a2 * self.w * self.q;
        (-b + disc.sqrt()) / (2.0 * c2 * a2)
    }

    /// Steady-state gain implied by [`Self::steady_state_variance`].
    pub fn steady_state_gain(&self) -> f64 {
        let p_pred = self.a * self.a * self.steady_state_variance() + self.q;
        p_pred * self.c / (self.c * self.c * p_pred + self.w)
    }
}

/// Filter state: the current estimate and its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub x_hat: f64,
    pub p: f64,
}

impl KalmanState {
    /// Standard cold start: seed the estimate with the first measurement and
    /// the variance at the measurement level.
    pub fn from_first_measurement(y: f64, params: &KalmanParams) -> Self {
        KalmanState {
            x_hat: y,
            p: params.w,
        }
    }
}

/// Time update: `x_minus = a x_hat + b u`, `p_minus = a^2 p + q`.
pub fn kf_predict(state: KalmanState, u: f64, params: &KalmanParams) -> KalmanState {
    KalmanState {
        x_hat: params.a * state.x_hat + params.b * u,
        p: params.a * params.a * state.p + params.q,
    }
}

/// Measurement update. Returns the corrected state and the gain used.
///
/// `K = p c / (c^2 p + w)`; the posterior variance `(1 - K c) p` strictly
/// shrinks whenever the measurement carries any information (`w` finite).
pub fn kf_update(state: KalmanState, y: f64, params: &KalmanParams) -> Result<(KalmanState, f64)> {
    if params.w <= 0.0 || !params.w.is_finite() {
        return Err(Error::NonPositive {
            name: "kalman.w",
            value: params.w,
        });
    }
    let gain = state.p * params.c / (params.c * params.c * state.p + params.w);
    Ok((
        KalmanState {
            x_hat: state.x_hat + gain * (y - params.c * state.x_hat),
            p: (1.0 - gain * params.c) * state.p,
        },
        gain,
    ))
}

/// One predict-then-correct cycle, run once per sample.
pub fn kf_step(
    state: KalmanState,
    u: f64,
    y: f64,
    params: &KalmanParams,
) -> Result<(KalmanState, f64)> {
    kf_update(kf_predict(state, u, params), y, params)
}
