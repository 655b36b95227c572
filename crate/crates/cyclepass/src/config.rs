//! Scenario files: TOML in, validated [`Scenario`] out.
//!
//! Every key is optional and falls back to the built-in default, so the
//! empty file is a valid scenario. Unknown keys are rejected with the key
//! name in the error. The `tau` shorthand under `[thresholds]` sets all
//! three stakeholder thresholds at once; the specific `tau_*` keys win
//! over it.
//!
//! ```text
//! [road]        lane_width, road_length, centerline_y
//! [ego]         x, y, theta, v, v_max, wheelbase, rear_axle_to_cg,
//!               a_min, a_max, delta_max
//! [cyclist]     x, y, speed
//! [reasons]     k1..k4, d_th_vru, t_th_vru, d_th_driver, t_th_driver
//! [thresholds]  tau, tau_policymaker, tau_vru, tau_driver, cooldown
//! [planner]     w1..w4, replan_w4, grid_resolution, heading_count,
//!               primitive_length, curvatures, sample_spacing,
//!               safe_clearance, obstacle_inflation, replan_lookahead,
//!               ramp_decel
//! [mpc]         horizon, q_perp, q_par, q_theta, q_v, r_accel, r_steer,
//!               rd_accel, rd_steer, terminal_scale, solver_tol,
//!               solver_max_iter, guard_d_stop, guard_k_gap
//! [sim]         ts, duration_max, goal_x, goal_y, goal_tolerance
//! ```

use crate::scenario::Scenario;
use crate::state::VehicleState;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    road: RoadSection,
    #[serde(default)]
    ego: EgoSection,
    #[serde(default)]
    cyclist: CyclistSection,
    #[serde(default)]
    reasons: ReasonsSection,
    #[serde(default)]
    thresholds: ThresholdsSection,
    #[serde(default)]
    planner: PlannerSection,
    #[serde(default)]
    mpc: MpcSection,
    #[serde(default)]
    sim: SimSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadSection {
    lane_width: Option<f64>,
    road_length: Option<f64>,
    centerline_y: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EgoSection {
    x: Option<f64>,
    y: Option<f64>,
    theta: Option<f64>,
    v: Option<f64>,
    v_max: Option<f64>,
    wheelbase: Option<f64>,
    rear_axle_to_cg: Option<f64>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    delta_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CyclistSection {
    x: Option<f64>,
    y: Option<f64>,
    speed: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReasonsSection {
    k1: Option<f64>,
    k2: Option<f64>,
    k3: Option<f64>,
    k4: Option<f64>,
    d_th_vru: Option<f64>,
    t_th_vru: Option<f64>,
    d_th_driver: Option<f64>,
    t_th_driver: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdsSection {
    tau: Option<f64>,
    tau_policymaker: Option<f64>,
    tau_vru: Option<f64>,
    tau_driver: Option<f64>,
    cooldown: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlannerSection {
    w1: Option<f64>,
    w2: Option<f64>,
    w3: Option<f64>,
    w4: Option<f64>,
    replan_w4: Option<f64>,
    grid_resolution: Option<f64>,
    heading_count: Option<usize>,
    primitive_length: Option<f64>,
    curvatures: Option<Vec<f64>>,
    sample_spacing: Option<f64>,
    safe_clearance: Option<f64>,
    obstacle_inflation: Option<f64>,
    replan_lookahead: Option<f64>,
    ramp_decel: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpcSection {
    horizon: Option<usize>,
    q_perp: Option<f64>,
    q_par: Option<f64>,
    q_theta: Option<f64>,
    q_v: Option<f64>,
    r_accel: Option<f64>,
    r_steer: Option<f64>,
    rd_accel: Option<f64>,
    rd_steer: Option<f64>,
    terminal_scale: Option<f64>,
    solver_tol: Option<f64>,
    solver_max_iter: Option<usize>,
    guard_d_stop: Option<f64>,
    guard_k_gap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    ts: Option<f64>,
    duration_max: Option<f64>,
    goal_x: Option<f64>,
    goal_y: Option<f64>,
    goal_tolerance: Option<f64>,
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl ScenarioFile {
    fn resolve(self) -> Scenario {
        let mut s = Scenario::default();

        set(&mut s.road.lane_width, self.road.lane_width);
        set(&mut s.road.road_length, self.road.road_length);
        set(&mut s.road.centerline_y, self.road.centerline_y);

        let e = &self.ego;
        let start = VehicleState {
            x: e.x.unwrap_or(s.ego_start.x),
            y: e.y.unwrap_or(s.ego_start.y),
            theta: e.theta.unwrap_or(s.ego_start.theta),
            v: e.v.unwrap_or(s.ego_start.v),
        };
        s.ego_start = start;
        set(&mut s.v_max, e.v_max);
        set(&mut s.bicycle.wheelbase, e.wheelbase);
        set(&mut s.bicycle.rear_axle_to_cg, e.rear_axle_to_cg);
        set(&mut s.bicycle.a_min, e.a_min);
        set(&mut s.bicycle.a_max, e.a_max);
        set(&mut s.bicycle.delta_max, e.delta_max);

        set(&mut s.cyclist.x, self.cyclist.x);
        set(&mut s.cyclist.y, self.cyclist.y);
        set(&mut s.cyclist.speed, self.cyclist.speed);

        let r = &self.reasons;
        set(&mut s.reasons.k1, r.k1);
        set(&mut s.reasons.k2, r.k2);
        set(&mut s.reasons.k3, r.k3);
        set(&mut s.reasons.k4, r.k4);
        set(&mut s.reasons.d_th_vru, r.d_th_vru);
        set(&mut s.reasons.t_th_vru, r.t_th_vru);
        set(&mut s.reasons.d_th_driver, r.d_th_driver);
        set(&mut s.reasons.t_th_driver, r.t_th_driver);

        let th = &self.thresholds;
        if let Some(tau) = th.tau {
            s.thresholds.tau_policymaker = tau;
            s.thresholds.tau_vru = tau;
            s.thresholds.tau_driver = tau;
        }
        set(&mut s.thresholds.tau_policymaker, th.tau_policymaker);
        set(&mut s.thresholds.tau_vru, th.tau_vru);
        set(&mut s.thresholds.tau_driver, th.tau_driver);
        set(&mut s.thresholds.cooldown, th.cooldown);

        let p = self.planner;
        set(&mut s.planner.w1, p.w1);
        set(&mut s.planner.w2, p.w2);
        set(&mut s.planner.w3, p.w3);
        set(&mut s.planner.w4, p.w4);
        set(&mut s.planner.replan_w4, p.replan_w4);
        set(&mut s.planner.grid_resolution, p.grid_resolution);
        set(&mut s.planner.heading_count, p.heading_count);
        set(&mut s.planner.primitive_length, p.primitive_length);
        if let Some(c) = p.curvatures {
            s.planner.curvatures = c;
        }
        set(&mut s.planner.sample_spacing, p.sample_spacing);
        set(&mut s.planner.safe_clearance, p.safe_clearance);
        set(&mut s.planner.obstacle_inflation, p.obstacle_inflation);
        set(&mut s.planner.replan_lookahead, p.replan_lookahead);
        set(&mut s.planner.ramp_decel, p.ramp_decel);

        let m = &self.mpc;
        set(&mut s.mpc.horizon, m.horizon);
        set(&mut s.mpc.q_perp, m.q_perp);
        set(&mut s.mpc.q_par, m.q_par);
        set(&mut s.mpc.q_theta, m.q_theta);
        set(&mut s.mpc.q_v, m.q_v);
        set(&mut s.mpc.r_accel, m.r_accel);
        set(&mut s.mpc.r_steer, m.r_steer);
        set(&mut s.mpc.rd_accel, m.rd_accel);
        set(&mut s.mpc.rd_steer, m.rd_steer);
        set(&mut s.mpc.terminal_scale, m.terminal_scale);
        set(&mut s.mpc.solver_tol, m.solver_tol);
        set(&mut s.mpc.solver_max_iter, m.solver_max_iter);
        set(&mut s.mpc.guard_d_stop, m.guard_d_stop);
        set(&mut s.mpc.guard_k_gap, m.guard_k_gap);

        set(&mut s.bicycle.ts, self.sim.ts);
        set(&mut s.sim_duration_max, self.sim.duration_max);
        set(&mut s.goal.x, self.sim.goal_x);
        set(&mut s.goal.y, self.sim.goal_y);
        set(&mut s.goal.tolerance, self.sim.goal_tolerance);

        s
    }
}

/// Parse and validate a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let scenario = file.resolve();
    scenario.validate().map_err(ConfigError::Invalid)?;
    Ok(scenario)
}

/// Load a scenario file from disk; the empty file yields the defaults.
pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}
