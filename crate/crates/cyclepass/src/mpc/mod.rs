//! Linear time-varying model predictive tracking control.
//!
//! Each control step linearizes the bicycle model along a window of the
//! reference path, condenses the horizon into a dense box-constrained QP
//! over the control sequence, and solves it with the projected accelerated
//! gradient method in [`qp`].
//!
//! The stage cost rotates position error into the reference frame, so
//! lateral and longitudinal deviations carry separate weights: with
//! heading `theta_r`, the weighted error is
//!
//! ```text
//! e_perp = -sin(theta_r) dx + cos(theta_r) dy      weight q_perp
//! e_par  =  cos(theta_r) dx + sin(theta_r) dy      weight q_par
//! e_theta, e_v                                     weights q_theta, q_v
//! ```
//!
//! Control effort and control increments are both penalized; the first
//! increment is anchored at the control actually applied in the previous
//! step, which keeps the commanded inputs rate-continuous across steps.
//!
//! The speed cap from [`speed_cap`] enters through the reference window:
//! reference speeds are clamped to the cap and the window advances at the
//! clamped speed, so a binding cap turns into a braking reference rather
//! than an extra constraint.

pub mod qp;

pub use qp::{solve_box_qp, BoxQp, QpSolution};

use crate::dynamics::{linearize_discretize, DynamicsError};
use crate::planner::{PathSample, ReferencePath};
use crate::scenario::CyclistState;
use crate::state::{wrap_angle, BicycleParams, ControlInput, VehicleState};
use nalgebra::{DMatrix, DVector, Dyn, Matrix2, Matrix4, OMatrix, Vector2, Vector4, U4};

/// Horizon length, cost weights and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    pub horizon: usize,
    pub q_perp: f64,
    pub q_par: f64,
    pub q_theta: f64,
    pub q_v: f64,
    pub r_accel: f64,
    pub r_steer: f64,
    pub rd_accel: f64,
    pub rd_steer: f64,
    /// The terminal weight is this factor times the stage state weights.
    pub terminal_scale: f64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    /// Standstill gap the collision guard steers toward, meters.
    pub guard_d_stop: f64,
    /// Gap feedback gain of the collision guard, 1/s.
    pub guard_k_gap: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            q_perp: 10.0,
            q_par: 1.0,
            q_theta: 5.0,
            q_v: 2.0,
            r_accel: 0.5,
            r_steer: 5.0,
            rd_accel: 0.5,
            rd_steer: 10.0,
            terminal_scale: 2.0,
            solver_tol: 1e-8,
            solver_max_iter: 2000,
            guard_d_stop: 6.0,
            guard_k_gap: 0.8,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.horizon < 1 {
            return Err("horizon must be >= 1".into());
        }
        for (name, v) in [
            ("q_perp", self.q_perp),
            ("q_par", self.q_par),
            ("q_theta", self.q_theta),
            ("q_v", self.q_v),
            ("r_accel", self.r_accel),
            ("r_steer", self.r_steer),
            ("terminal_scale", self.terminal_scale),
            ("solver_tol", self.solver_tol),
            ("guard_d_stop", self.guard_d_stop),
            ("guard_k_gap", self.guard_k_gap),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        for (name, v) in [("rd_accel", self.rd_accel), ("rd_steer", self.rd_steer)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0"));
            }
        }
        if self.solver_max_iter < 1 {
            return Err("solver_max_iter must be >= 1".into());
        }
        Ok(())
    }
}

/// Tracking error of a state against a reference sample, expressed in the
/// reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub e_par: f64,
    pub e_perp: f64,
    pub e_theta: f64,
    pub e_v: f64,
}

pub fn compute_errors(state: &VehicleState, reference: &PathSample) -> TrackingError {
    let dx = state.x - reference.x;
    let dy = state.y - reference.y;
    let (sin_r, cos_r) = reference.theta.sin_cos();
    TrackingError {
        e_par: cos_r * dx + sin_r * dy,
        e_perp: -sin_r * dx + cos_r * dy,
        e_theta: wrap_angle(state.theta - reference.theta),
        e_v: state.v - reference.v_ref,
    }
}

/// Reference-speed bound from the longitudinal collision guard.
///
/// Active only while the cyclist is ahead of the ego vehicle and inside
/// its lane corridor; infinite otherwise. Linear in the gap and zero at
/// `guard_d_stop`, so braking to the cap settles at the standstill gap.
pub fn speed_cap(
    ego: &VehicleState,
    cyclist: &CyclistState,
    lane_width: f64,
    cfg: &MpcConfig,
) -> f64 {
    let ahead = cyclist.x > ego.x;
    let same_corridor = (cyclist.y - ego.y).abs() <= 0.5 * lane_width;
    if ahead && same_corridor {
        (cfg.guard_k_gap * ((cyclist.x - ego.x) - cfg.guard_d_stop)).max(0.0)
    } else {
        f64::INFINITY
    }
}

/// Linear map from the stacked control vector to a predicted state.
pub type InputSensitivity = OMatrix<f64, U4, Dyn>;

/// Affine prediction of the horizon states from the stacked controls:
/// `x_t = aff[t] + su[t] * u`.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub su: Vec<InputSensitivity>,
    pub aff: Vec<Vector4<f64>>,
}

impl Prediction {
    pub fn state_at(&self, t: usize, u: &DVector<f64>) -> Vector4<f64> {
        self.aff[t] + &self.su[t] * u
    }
}

fn add_block2(h: &mut DMatrix<f64>, row: usize, col: usize, m: Matrix2<f64>) {
    for i in 0..2 {
        for j in 0..2 {
            h[(row + i, col + j)] += m[(i, j)];
        }
    }
}

fn rotated_state_weight(theta_r: f64, cfg: &MpcConfig) -> Matrix4<f64> {
    let (s, c) = theta_r.sin_cos();
    let m = Matrix4::new(
        -s, c, 0.0, 0.0, //
        c, s, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    );
    let w = Matrix4::from_diagonal(&Vector4::new(cfg.q_perp, cfg.q_par, cfg.q_theta, cfg.q_v));
    m.transpose() * w * m
}

fn terminal_weight(cfg: &MpcConfig) -> Matrix4<f64> {
    cfg.terminal_scale
        * Matrix4::from_diagonal(&Vector4::new(cfg.q_par, cfg.q_perp, cfg.q_theta, cfg.q_v))
}

/// Condense the tracking problem over `refs` into a box QP.
///
/// `refs` must hold horizon + 1 samples: the first is the linearization
/// point for the current step, the rest are the stage references. Heading
/// values are taken as already unwrapped along the window.
pub fn build_qp(
    x0: &VehicleState,
    u_prev: &ControlInput,
    refs: &[PathSample],
    params: &BicycleParams,
    cfg: &MpcConfig,
) -> Result<(BoxQp, Prediction), DynamicsError> {
    let n = refs.len() - 1;
    let nu = 2 * n;
    let mut h = DMatrix::<f64>::zeros(nu, nu);
    let mut g = DVector::<f64>::zeros(nu);
    let mut constant = 0.0;

    let r = Matrix2::from_diagonal(&Vector2::new(cfg.r_accel, cfg.r_steer));
    let rd = Matrix2::from_diagonal(&Vector2::new(cfg.rd_accel, cfg.rd_steer));
    let u_prev = Vector2::new(u_prev.a, u_prev.delta);

    // forward sensitivity recursion along the reference window
    let mut su = InputSensitivity::zeros(nu);
    let mut aff = x0.to_vector();
    let mut prediction = Prediction {
        su: vec![su.clone()],
        aff: vec![aff],
    };
    for (t, r_t) in refs.iter().take(n).enumerate() {
        let lin_state = VehicleState {
            x: r_t.x,
            y: r_t.y,
            theta: r_t.theta,
            v: r_t.v_ref,
        };
        let model =
            linearize_discretize(&lin_state, &ControlInput::new(0.0, 0.0), params, params.ts)?;
        su = model.a_d * su;
        su.fixed_view_mut::<4, 2>(0, 2 * t).copy_from(&model.b_d);
        aff = model.a_d * aff + model.d_d;
        prediction.su.push(su.clone());
        prediction.aff.push(aff);
    }

    for (t, r_t) in refs.iter().enumerate().skip(1) {
        let p = if t < n {
            rotated_state_weight(r_t.theta, cfg)
        } else {
            terminal_weight(cfg)
        };
        let r_vec = Vector4::new(r_t.x, r_t.y, r_t.theta, r_t.v_ref);
        let e = prediction.aff[t] - r_vec;
        let st = prediction.su[t].transpose();
        h += 2.0 * (&st * (p * &prediction.su[t]));
        g += 2.0 * (&st * (p * e));
        constant += (p * e).dot(&e);
    }

    for t in 0..n {
        let i = 2 * t;
        // control effort
        add_block2(&mut h, i, i, 2.0 * r);
        // control increment, anchored at the previously applied input
        add_block2(&mut h, i, i, 2.0 * rd);
        if t == 0 {
            let lin = -2.0 * rd * u_prev;
            g[0] += lin[0];
            g[1] += lin[1];
            constant += (rd * u_prev).dot(&u_prev);
        } else {
            add_block2(&mut h, i - 2, i - 2, 2.0 * rd);
            add_block2(&mut h, i - 2, i, -2.0 * rd);
            add_block2(&mut h, i, i - 2, -2.0 * rd);
        }
    }
    for i in 0..nu {
        h[(i, i)] += 1e-8;
    }

    let mut lb = DVector::zeros(nu);
    let mut ub = DVector::zeros(nu);
    for t in 0..n {
        lb[2 * t] = params.a_min;
        ub[2 * t] = params.a_max;
        lb[2 * t + 1] = -params.delta_max;
        ub[2 * t + 1] = params.delta_max;
    }

    Ok((
        BoxQp {
            h,
            g,
            lb,
            ub,
            constant,
        },
        prediction,
    ))
}

/// Result of one control step.
#[derive(Debug, Clone, Copy)]
pub struct MpcOutcome {
    pub control: ControlInput,
    pub converged: bool,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    /// Path sample index the state was projected to.
    pub projection_index: usize,
}

/// One tracking step: project onto the path, build the reference window,
/// condense and solve, return the first control of the optimal sequence.
///
/// `from_index` is the projection result of the previous step; projection
/// only searches forward from it. `cap` bounds the reference speed (pass
/// infinity for no cap).
pub fn mpc_step(
    state: &VehicleState,
    u_prev: &ControlInput,
    path: &ReferencePath,
    from_index: usize,
    cap: f64,
    params: &BicycleParams,
    cfg: &MpcConfig,
) -> Result<MpcOutcome, DynamicsError> {
    let proj = path.project_from(from_index, state.x, state.y);
    let mut refs = Vec::with_capacity(cfg.horizon + 1);
    let mut s = path.samples[proj].s;
    let first = path.sample_at(s);
    let mut prev_theta = state.theta + wrap_angle(first.theta - state.theta);
    refs.push(PathSample {
        theta: prev_theta,
        v_ref: first.v_ref.min(cap),
        ..first
    });
    for _ in 0..cfg.horizon {
        s += refs.last().unwrap().v_ref * params.ts;
        let smp = path.sample_at(s);
        let theta = prev_theta + wrap_angle(smp.theta - prev_theta);
        prev_theta = theta;
        refs.push(PathSample {
            theta,
            v_ref: smp.v_ref.min(cap),
            ..smp
        });
    }

    let (qp, _) = build_qp(state, u_prev, &refs, params, cfg)?;
    let sol = solve_box_qp(&qp, cfg.solver_tol, cfg.solver_max_iter);
    let control = ControlInput::new(sol.u[0], sol.u[1]).clamped(params);
    Ok(MpcOutcome {
        control,
        converged: sol.converged,
        iterations: sol.iterations,
        kkt_residual: sol.kkt_residual,
        objective: sol.objective,
        projection_index: proj,
    })
}
