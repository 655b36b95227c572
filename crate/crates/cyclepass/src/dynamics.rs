//! Kinematic bicycle model: continuous dynamics, affine discretization, and
//! an RK4 stepper used as simulation ground truth.
//!
//! State order everywhere is (x, y, theta, v); control is (a, delta). The
//! working model is rear-axle referenced:
//!
//! ```text
//!   x'     = v cos(theta)
//!   y'     = v sin(theta)
//!   theta' = v tan(delta) / L
//!   v'     = a
//! ```
//!
//! so the one-step Euler discretization has closed-form Jacobians.
//! [`linearize_discretize`] returns the affine model
//!
//! ```text
//!   x[k+1] = A_d x[k] + B_d u[k] + d_d
//! ```
//!
//! with A_d = I + Ts dF/dx, B_d = Ts dF/du, and d_d chosen so the affine
//! prediction reproduces the nonlinear Euler step exactly at the
//! linearization point. A center-of-gravity variant with a slip angle
//! (`beta = atan(l_r/L tan delta)`, yaw rate `v sin(beta)/l_r`) is available
//! for comparison; for small steering the two yaw rates agree to well under
//! a percent.

use crate::state::{BicycleParams, ControlInput, VehicleState};
use nalgebra::{Matrix4, Matrix4x2, Vector4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BicycleVariant {
    /// Rear-axle reference point, yaw rate v tan(delta)/L.
    #[default]
    RearAxle,
    /// Center-of-gravity reference point with slip angle.
    SlipAngle,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("steering angle {delta} is at or beyond the +-pi/2 singularity")]
    SteeringSingularity { delta: f64 },
}

/// Time derivative (x', y', theta', v') of the chosen model variant.
pub fn continuous_derivative(
    state: &VehicleState,
    u: &ControlInput,
    params: &BicycleParams,
    variant: BicycleVariant,
) -> Result<Vector4<f64>, DynamicsError> {
    if u.delta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(DynamicsError::SteeringSingularity { delta: u.delta });
    }
    Ok(match variant {
        BicycleVariant::RearAxle => Vector4::new(
            state.v * state.theta.cos(),
            state.v * state.theta.sin(),
            state.v * u.delta.tan() / params.wheelbase,
            u.a,
        ),
        BicycleVariant::SlipAngle => {
            let beta = (params.rear_axle_to_cg / params.wheelbase * u.delta.tan()).atan();
            Vector4::new(
                state.v * (state.theta + beta).cos(),
                state.v * (state.theta + beta).sin(),
                state.v * beta.sin() / params.rear_axle_to_cg,
                u.a,
            )
        }
    })
}

/// One-step affine model around a linearization point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedModel {
    pub a_d: Matrix4<f64>,
    pub b_d: Matrix4x2<f64>,
    pub d_d: Vector4<f64>,
}

impl LinearizedModel {
    /// Affine prediction A_d x + B_d u + d_d.
    pub fn predict(&self, x: &Vector4<f64>, u: &nalgebra::Vector2<f64>) -> Vector4<f64> {
        self.a_d * x + self.b_d * u + self.d_d
    }
}

/// Discretize the rear-axle model around `(state, u)` with sample time `ts`.
///
/// The affine remainder d_d is assembled from the stored Jacobian entries so
/// that `predict` at the linearization point cancels exactly against them,
/// leaving the nonlinear Euler step to floating-point precision.
pub fn linearize_discretize(
    state: &VehicleState,
    u: &ControlInput,
    params: &BicycleParams,
    ts: f64,
) -> Result<LinearizedModel, DynamicsError> {
    if u.delta.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(DynamicsError::SteeringSingularity { delta: u.delta });
    }
    let (s, c) = state.theta.sin_cos();
    let v = state.v;
    let l = params.wheelbase;
    let cos_d = u.delta.cos();

    let mut a_d = Matrix4::identity();
    a_d[(0, 2)] = -ts * v * s;
    a_d[(0, 3)] = ts * c;
    a_d[(1, 2)] = ts * v * c;
    a_d[(1, 3)] = ts * s;
    a_d[(2, 3)] = ts * u.delta.tan() / l;

    let mut b_d = Matrix4x2::zeros();
    b_d[(2, 1)] = ts * v / (l * cos_d * cos_d);
    b_d[(3, 0)] = ts;

    // built from the stored entries so the cancellation at the
    // linearization point is exact
    let d_d = Vector4::new(
        -a_d[(0, 2)] * state.theta,
        -a_d[(1, 2)] * state.theta,
        -b_d[(2, 1)] * u.delta,
        0.0,
    );

    Ok(LinearizedModel { a_d, b_d, d_d })
}

/// Nonlinear Euler step of the rear-axle model, the reference that the
/// affine model must reproduce at its linearization point.
pub fn euler_step(
    state: &VehicleState,
    u: &ControlInput,
    params: &BicycleParams,
    ts: f64,
) -> Result<Vector4<f64>, DynamicsError> {
    let f = continuous_derivative(state, u, params, BicycleVariant::RearAxle)?;
    Ok(state.to_vector() + f * ts)
}

/// Classic fourth-order Runge-Kutta step of the rear-axle model.
///
/// Speed is clamped at zero: stage derivatives see max(v, 0) and a braking
/// input cannot drag the state into reverse. The returned heading is
/// renormalized to (-pi, pi].
pub fn step_rk4(
    state: &VehicleState,
    u: &ControlInput,
    params: &BicycleParams,
    dt: f64,
) -> VehicleState {
    assert!(
        u.delta.abs() < std::f64::consts::FRAC_PI_2,
        "steering {} beyond the model singularity; clamp inputs first",
        u.delta
    );
    let f = |x: &Vector4<f64>| -> Vector4<f64> {
        let v = x[3].max(0.0);
        let braking_into_standstill = x[3] <= 0.0 && u.a < 0.0;
        Vector4::new(
            v * x[2].cos(),
            v * x[2].sin(),
            v * u.delta.tan() / params.wheelbase,
            if braking_into_standstill { 0.0 } else { u.a },
        )
    };
    let x0 = state.to_vector();
    let k1 = f(&x0);
    let k2 = f(&(x0 + k1 * (dt / 2.0)));
    let k3 = f(&(x0 + k2 * (dt / 2.0)));
    let k4 = f(&(x0 + k3 * dt));
    let next = x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) / 6.0 * dt;
    VehicleState::from_vector(&next)
}

/// Integrate one controller period by `substeps` RK4 steps of dt/substeps.
pub fn integrate(
    state: &VehicleState,
    u: &ControlInput,
    params: &BicycleParams,
    dt: f64,
    substeps: usize,
) -> VehicleState {
    let h = dt / substeps as f64;
    let mut s = *state;
    for _ in 0..substeps {
        s = step_rk4(&s, u, params, h);
    }
    s
}
