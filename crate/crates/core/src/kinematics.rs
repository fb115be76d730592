//! Differential-drive kinematics: conversions between wheel-space, body-space,
//! and world-space motion, plus fixed-step pose integration.
//!
//! All conversions are pure functions over small value types. The forward and
//! inverse maps are exact algebraic inverses of each other, so commanding a
//! body twist and sensing it back through wheel speeds is lossless.

use std::f64::consts::PI;

use crate::error::{require_positive, Result};

/// Wheel radius and axle length; the two constants that scale every
/// kinematic conversion.
///
/// Defaults model a small desk-scale robot with 42 mm wheels on a 9 cm axle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    /// Drive wheel radius in meters.
    pub wheel_radius_m: f64,
    /// Distance between the two wheel contact points in meters.
    pub axle_length_m: f64,
}

impl RobotGeometry {
    pub fn new(wheel_radius_m: f64, axle_length_m: f64) -> Result<Self> {
        let geom = RobotGeometry {
            wheel_radius_m,
            axle_length_m,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("geometry.wheel_radius_m", self.wheel_radius_m)?;
        require_positive("geometry.axle_length_m", self.axle_length_m)
    }
}

impl Default for RobotGeometry {
    fn default() -> Self {
        RobotGeometry {
            wheel_radius_m: 0.021,
            axle_length_m: 0.09,
        }
    }
}

/// World-frame planar pose. Heading is measured counter-clockwise from the
/// x-axis and is kept in `(-PI, PI]` by [`integrate_pose`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x_m: f64,
    pub y_m: f64,
    pub phi_rad: f64,
}

impl Pose {
    pub const ORIGIN: Pose = Pose {
        x_m: 0.0,
        y_m: 0.0,
        phi_rad: 0.0,
    };

    pub fn new(x_m: f64, y_m: f64, phi_rad: f64) -> Self {
        Pose { x_m, y_m, phi_rad }
    }

    /// Euclidean distance between the (x, y) positions of two poses.
    pub fn distance_to(&self, other: &Pose) -> f64 {
        ((self.x_m - other.x_m).powi(2) + (self.y_m - other.y_m).powi(2)).sqrt()
    }
}

/// Body-frame velocity pair: linear speed along the heading and angular
/// speed about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyTwist {
    pub v_mps: f64,
    pub w_radps: f64,
}

impl BodyTwist {
    pub fn new(v_mps: f64, w_radps: f64) -> Self {
        BodyTwist { v_mps, w_radps }
    }
}

/// Right and left wheel angular speeds in rad/s. Positive values drive the
/// robot forward.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds {
    pub wr_radps: f64,
    pub wl_radps: f64,
}

impl WheelSpeeds {
    pub fn new(wr_radps: f64, wl_radps: f64) -> Self {
        WheelSpeeds { wr_radps, wl_radps }
    }
}

/// World-frame pose rate `(dx/dt, dy/dt, dphi/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseRate {
    pub xdot_mps: f64,
    pub ydot_mps: f64,
    pub phidot_radps: f64,
}

/// Wraps an angle into `(-PI, PI]`.
///
/// The half-open convention gives every heading a single representation;
/// in particular +PI maps to itself and -PI maps to +PI.
pub fn wrap_angle(angle_rad: f64) -> f64 {
    let mut a = angle_rad % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Wheel speeds to body twist:
/// `v = R (wr + wl) / 2`, `w = R (wr - wl) / l`.
pub fn forward_kinematics(wheels: WheelSpeeds, geom: RobotGeometry) -> BodyTwist {
    let r = geom.wheel_radius_m;
    BodyTwist {
        v_mps: r * (wheels.wr_radps + wheels.wl_radps) / 2.0,
        w_radps: r * (wheels.wr_radps - wheels.wl_radps) / geom.axle_length_m,
    }
}

/// Body twist to wheel speeds:
/// `wr = (v + w l/2) / R`, `wl = (v - w l/2) / R`.
///
/// Exact right-inverse of [`forward_kinematics`].
pub fn inverse_kinematics(twist: BodyTwist, geom: RobotGeometry) -> WheelSpeeds {
    let r = geom.wheel_radius_m;
    let half_axle = geom.axle_length_m / 2.0;
    WheelSpeeds {
        wr_radps: (twist.v_mps + twist.w_radps * half_axle) / r,
        wl_radps: (twist.v_mps - twist.w_radps * half_axle) / r,
    }
}

/// World-frame pose rate of a body twist at a given heading:
/// `xdot = v cos(phi)`, `ydot = v sin(phi)`, `phidot = w`.
pub fn pose_rate(pose: &Pose, twist: BodyTwist) -> PoseRate {
    PoseRate {
        xdot_mps: twist.v_mps * pose.phi_rad.cos(),
        ydot_mps: twist.v_mps * pose.phi_rad.sin(),
        phidot_radps: twist.w_radps,
    }
}

/// One explicit-Euler step of [`pose_rate`] over `dt` seconds, with the
/// resulting heading wrapped into `(-PI, PI]`.
pub fn integrate_pose(pose: &Pose, twist: BodyTwist, dt: f64) -> Result<Pose> {
    require_positive("dt", dt)?;
    let rate = pose_rate(pose, twist);
    Ok(Pose {
        x_m: pose.x_m + rate.xdot_mps * dt,
        y_m: pose.y_m + rate.ydot_mps * dt,
        phi_rad: wrap_angle(pose.phi_rad + rate.phidot_radps * dt),
    })
}
