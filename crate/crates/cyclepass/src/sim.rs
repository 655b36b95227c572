//! The closed loop: supervision, replanning, tracking, integration.
//!
//! Each control step runs, in order:
//!
//! 1. advance the cyclist along its lane,
//! 2. update the reason accumulators and score the situation,
//! 3. check the replanning trigger; in replanner mode a trigger rebuilds
//!    the occupancy field around the cyclist's current position and plans
//!    with the relaxed traffic-rule weight (a failed replan keeps the
//!    current path),
//! 4. cap the reference speed with the collision guard and run one MPC
//!    step (a non-converged solve falls back to the previous control),
//! 5. integrate the bicycle model with RK4 substeps,
//! 6. stop on goal arrival, collision, or timeout.
//!
//! The initial plan is made on a cyclist-free field: the nominal route is
//! simply the lane itself, and the approach to the cyclist is the
//! supervision layer's problem, not the initial planner's. Replans do see
//! the cyclist, inflated to a disk.
//!
//! Nothing here draws randomness; identical scenarios produce
//! byte-identical logs.

use crate::mpc::{mpc_step, speed_cap};
use crate::planner::{generate_primitives, plan, Disk, OccupancyField, PlanError, ReferencePath};
use crate::reasons::{check_trigger, evaluate, ReasonAccumulators, TriggerDecision};
use crate::scenario::{ego_cyclist_distance, CyclistState, Scenario};
use crate::simlog::{Outcome, SimLog, SimSummary, StepRecord};
use crate::state::ControlInput;

/// Ego-cyclist distance below which the run counts as a collision, meters.
pub const COLLISION_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Score and log, but never replan.
    Baseline,
    /// Replan whenever the trigger fires.
    Replanner,
}

impl std::fmt::Display for SimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SimMode::Baseline => "baseline",
            SimMode::Replanner => "replanner",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("scenario is infeasible: {0}")]
    Infeasible(#[from] PlanError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

/// Inflated disks covering the cyclist now and along its predicted ride
/// over the replan lookahead, spaced so the strip has no gaps.
fn predicted_footprint(cyclist: &CyclistState, pcfg: &crate::planner::PlannerConfig) -> Vec<Disk> {
    let spacing_s = if cyclist.speed > 0.0 {
        (pcfg.obstacle_inflation / cyclist.speed).min(1.0)
    } else {
        f64::INFINITY
    };
    let count = if spacing_s.is_finite() {
        (pcfg.replan_lookahead / spacing_s).ceil() as usize
    } else {
        0
    };
    (0..=count)
        .map(|i| Disk {
            x: cyclist.x + cyclist.speed * (i as f64 * spacing_s).min(pcfg.replan_lookahead),
            y: cyclist.y,
            radius: pcfg.obstacle_inflation,
        })
        .collect()
}

/// Run one closed-loop simulation to completion.
pub fn run(scenario: &Scenario, mode: SimMode) -> Result<SimLog, SimError> {
    let params = scenario.bicycle;
    let ts = params.ts;
    let road = scenario.road;
    let pcfg = &scenario.planner;
    let prims = generate_primitives(pcfg, &params)?;

    let free_field = OccupancyField::for_road(&road, &[], pcfg.grid_resolution);
    let mut path: ReferencePath = plan(
        &scenario.ego_start,
        &scenario.goal,
        &free_field,
        &prims,
        &pcfg.weights(),
        pcfg,
        scenario.v_max,
    )?;

    let mut ego = scenario.ego_start;
    let mut cyclist = scenario.cyclist;
    let mut acc = ReasonAccumulators::default();
    let mut u_prev = ControlInput::new(0.0, 0.0);
    let mut proj_idx = 0usize;
    let mut last_replan_time = f64::NEG_INFINITY;
    let mut path_id = 0u32;

    let steps = (scenario.sim_duration_max / ts).round() as usize;
    let mut records = Vec::with_capacity(steps);
    let mut outcome = Outcome::Timeout;
    let mut arrival_time = None;
    let mut final_time = 0.0;
    let mut min_distance = f64::INFINITY;
    let mut min_scores = [f64::INFINITY; 3];

    for k in 0..steps {
        let t = k as f64 * ts;

        cyclist.x += cyclist.speed * ts;

        crate::reasons::update_accumulators(&mut acc, &ego, &cyclist, &scenario.reasons, ts);
        let report = evaluate(
            &ego,
            &cyclist,
            &road,
            &acc,
            &scenario.reasons,
            &scenario.thresholds,
        );
        min_distance = min_distance.min(report.d_veh_vru);
        min_scores[0] = min_scores[0].min(report.r_policymaker);
        min_scores[1] = min_scores[1].min(report.r_vru);
        min_scores[2] = min_scores[2].min(report.r_driver);

        let decision = check_trigger(&report, &scenario.thresholds, t - last_replan_time);
        let trigger = match decision {
            TriggerDecision::Replan(s) => Some(s),
            TriggerDecision::None => None,
        };
        if trigger.is_some() && mode == SimMode::Replanner {
            let field = OccupancyField::for_road(
                &road,
                &predicted_footprint(&cyclist, pcfg),
                pcfg.grid_resolution,
            );
            match plan(
                &ego,
                &scenario.goal,
                &field,
                &prims,
                &pcfg.replan_weights(),
                pcfg,
                scenario.v_max,
            ) {
                Ok(mut p) => {
                    path_id += 1;
                    p.id = path_id;
                    path = p;
                    proj_idx = 0;
                    last_replan_time = t;
                }
                // no escape route right now; keep tracking the old path
                // and let the trigger fire again next step
                Err(PlanError::NoPath) => {}
                Err(e) => return Err(e.into()),
            }
        }

        let cap = speed_cap(&ego, &cyclist, road.lane_width, &scenario.mpc);
        let out = mpc_step(&ego, &u_prev, &path, proj_idx, cap, &params, &scenario.mpc)?;
        proj_idx = out.projection_index;
        let control = if out.converged { out.control } else { u_prev };

        records.push(StepRecord {
            t,
            ego,
            control,
            cyclist,
            report,
            trigger,
            path_id: path.id,
            qp_iters: out.iterations,
            qp_residual: out.kkt_residual,
        });

        ego = crate::dynamics::integrate(&ego, &control, &params, ts, 10);
        u_prev = control;
        final_time = t + ts;

        let goal_gap =
            ((ego.x - scenario.goal.x).powi(2) + (ego.y - scenario.goal.y).powi(2)).sqrt();
        if goal_gap <= scenario.goal.tolerance {
            outcome = Outcome::Goal;
            arrival_time = Some(final_time);
            break;
        }
        let gap = ego_cyclist_distance(&ego, &cyclist);
        min_distance = min_distance.min(gap);
        if gap < COLLISION_RADIUS {
            outcome = Outcome::Collision;
            break;
        }
    }

    let last = records.last().expect("at least one step runs");
    let summary = SimSummary {
        mode,
        outcome,
        arrival_time,
        final_time,
        num_replans: path_id,
        min_distance,
        min_r_policymaker: min_scores[0],
        min_r_vru: min_scores[1],
        min_r_driver: min_scores[2],
        final_r_policymaker: last.report.r_policymaker,
        final_r_vru: last.report.r_vru,
        final_r_driver: last.report.r_driver,
    };
    Ok(SimLog { records, summary })
}
