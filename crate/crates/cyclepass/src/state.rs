//! Ego vehicle state, control input and physical parameters.
//!
//! The ego pose is referenced to the rear-axle center. Heading is kept in
//! `(-pi, pi]` by [`wrap_angle`]; speed never goes negative (the simulator
//! does not command reverse).

use nalgebra::Vector4;

/// Pose and speed of the ego vehicle, rear-axle reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, normalized to (-pi, pi].
    pub theta: f64,
    /// Longitudinal speed in m/s, never negative.
    pub v: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, theta: f64, v: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
            v: v.max(0.0),
        }
    }

    /// State as a column vector ordered (x, y, theta, v).
    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x, self.y, self.theta, self.v)
    }

    /// Rebuild from a vector ordered (x, y, theta, v), re-normalizing
    /// the heading and clamping speed at zero.
    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// Control input: longitudinal acceleration and front steering angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    /// Acceleration in m/s^2.
    pub a: f64,
    /// Steering angle in radians.
    pub delta: f64,
}

impl ControlInput {
    pub fn new(a: f64, delta: f64) -> Self {
        Self { a, delta }
    }

    /// Clamp both channels into the box given by `params`.
    pub fn clamped(self, params: &BicycleParams) -> Self {
        Self {
            a: self.a.clamp(params.a_min, params.a_max),
            delta: self.delta.clamp(-params.delta_max, params.delta_max),
        }
    }
}

/// Kinematic bicycle parameters and input limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicycleParams {
    /// Wheelbase L in meters.
    pub wheelbase: f64,
    /// Distance from the rear axle to the center of gravity, used by the
    /// slip-angle model variant.
    pub rear_axle_to_cg: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// Symmetric steering limit: |delta| <= delta_max.
    pub delta_max: f64,
    /// Controller sampling period in seconds.
    pub ts: f64,
}

impl Default for BicycleParams {
    fn default() -> Self {
        Self {
            wheelbase: 2.7,
            rear_axle_to_cg: 1.35,
            a_min: -4.0,
            a_max: 2.5,
            delta_max: 0.5,
            ts: 0.1,
        }
    }
}

/// Normalize an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * std::f64::consts::PI);
    if t > std::f64::consts::PI {
        t -= 2.0 * std::f64::consts::PI;
    }
    t
}
