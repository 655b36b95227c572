//! Per-step telemetry and run summaries.
//!
//! The CSV layout is a stable interface: one row per control step, columns
//! as listed in [`CSV_HEADER`]. Floats are written with Rust's shortest
//! round-trip formatting, so parsing a value back yields exactly the bits
//! the simulation produced.

use crate::reasons::{ReasonReport, Stakeholder};
use crate::scenario::CyclistState;
use crate::sim::SimMode;
use crate::state::{ControlInput, VehicleState};
use std::fmt::Write as _;

pub const CSV_HEADER: &str = "t,x,y,theta,v,a,delta,cyclist_x,cyclist_y,d_veh_vru,\
r_policy,r_vru_safety,r_vru_comfort,r_vru,r_driver,t_close_vru,t_behind_driver,\
trigger,path_id,qp_iters,qp_residual";

/// Everything recorded at one control step, state as of the instant the
/// control was computed (before integration).
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: f64,
    pub ego: VehicleState,
    pub control: ControlInput,
    pub cyclist: CyclistState,
    pub report: ReasonReport,
    /// Stakeholder that demanded a replan this step, if any.
    pub trigger: Option<Stakeholder>,
    /// Identifier of the path being tracked; bumps on every executed
    /// replan.
    pub path_id: u32,
    pub qp_iters: usize,
    pub qp_residual: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Goal,
    Collision,
    Timeout,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Goal => "goal",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSummary {
    pub mode: SimMode,
    pub outcome: Outcome,
    /// Time the goal was reached, absent unless `outcome` is `Goal`.
    pub arrival_time: Option<f64>,
    /// Time of the last integrated state.
    pub final_time: f64,
    pub num_replans: u32,
    pub min_distance: f64,
    pub min_r_policymaker: f64,
    pub min_r_vru: f64,
    pub min_r_driver: f64,
    pub final_r_policymaker: f64,
    pub final_r_vru: f64,
    pub final_r_driver: f64,
}

/// Full record of one simulation run.
#[derive(Debug, Clone)]
pub struct SimLog {
    pub records: Vec<StepRecord>,
    pub summary: SimSummary,
}

impl SimLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 + 160 * self.records.len());
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let trigger = match r.trigger {
                Some(s) => s.to_string(),
                None => String::new(),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.ego.x,
                r.ego.y,
                r.ego.theta,
                r.ego.v,
                r.control.a,
                r.control.delta,
                r.cyclist.x,
                r.cyclist.y,
                r.report.d_veh_vru,
                r.report.r_policymaker,
                r.report.r_vru_safety,
                r.report.r_vru_comfort,
                r.report.r_vru,
                r.report.r_driver,
                r.report.t_close_vru,
                r.report.t_behind_driver,
                trigger,
                r.path_id,
                r.qp_iters,
                r.qp_residual,
            )
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// The key-value block written to summary.txt.
    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let arrival = match s.arrival_time {
            Some(t) => t.to_string(),
            None => "none".to_string(),
        };
        format!(
            "mode: {}\noutcome: {}\narrival_time: {}\nfinal_time: {}\nnum_replans: {}\n\
             min_distance: {}\nmin_r_policymaker: {}\nmin_r_vru: {}\nmin_r_driver: {}\n\
             final_r_policymaker: {}\nfinal_r_vru: {}\nfinal_r_driver: {}\n",
            s.mode,
            s.outcome,
            arrival,
            s.final_time,
            s.num_replans,
            s.min_distance,
            s.min_r_policymaker,
            s.min_r_vru,
            s.min_r_driver,
            s.final_r_policymaker,
            s.final_r_vru,
            s.final_r_driver,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasons::evaluate;
    use crate::reasons::{ReasonAccumulators, ReasonParams, TriggerThresholds};
    use crate::scenario::RoadGeometry;

    fn record(t: f64) -> StepRecord {
        let ego = VehicleState::new(1.0 / 3.0, -1.75, 0.1234567890123, 7.77);
        let cyclist = CyclistState {
            x: 25.0 + t,
            y: -1.75,
            speed: 3.0,
        };
        let report = evaluate(
            &ego,
            &cyclist,
            &RoadGeometry::default(),
            &ReasonAccumulators::default(),
            &ReasonParams::default(),
            &TriggerThresholds::default(),
        );
        StepRecord {
            t,
            ego,
            control: ControlInput::new(0.3, -0.01),
            cyclist,
            report,
            trigger: None,
            path_id: 0,
            qp_iters: 42,
            qp_residual: 3.2e-9,
        }
    }

    fn log() -> SimLog {
        SimLog {
            records: vec![record(0.0), record(0.1)],
            summary: SimSummary {
                mode: SimMode::Baseline,
                outcome: Outcome::Goal,
                arrival_time: Some(41.3),
                final_time: 41.3,
                num_replans: 0,
                min_distance: 9.7,
                min_r_policymaker: 1.0,
                min_r_vru: 0.9,
                min_r_driver: 0.4,
                final_r_policymaker: 1.0,
                final_r_vru: 1.0,
                final_r_driver: 1.0,
            },
        }
    }

    #[test]
    fn header_is_frozen() {
        assert_eq!(
            CSV_HEADER,
            "t,x,y,theta,v,a,delta,cyclist_x,cyclist_y,d_veh_vru,r_policy,r_vru_safety,\
             r_vru_comfort,r_vru,r_driver,t_close_vru,t_behind_driver,trigger,path_id,\
             qp_iters,qp_residual"
        );
        assert_eq!(CSV_HEADER.split(',').count(), 21);
    }

    #[test]
    fn rows_match_the_header_width() {
        let csv = log().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for line in lines {
            assert_eq!(line.split(',').count(), 21);
        }
    }

    #[test]
    fn floats_round_trip_exactly() {
        let log = log();
        let csv = log.to_csv();
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let x: f64 = row[1].parse().unwrap();
        assert_eq!(x, 1.0 / 3.0);
        let theta: f64 = row[3].parse().unwrap();
        assert_eq!(theta, 0.1234567890123);
        let residual: f64 = row[20].parse().unwrap();
        assert_eq!(residual, 3.2e-9);
    }

    #[test]
    fn summary_text_lists_every_key() {
        let text = log().summary_text();
        for key in [
            "mode:",
            "outcome:",
            "arrival_time:",
            "final_time:",
            "num_replans:",
            "min_distance:",
            "min_r_policymaker:",
            "min_r_vru:",
            "min_r_driver:",
            "final_r_policymaker:",
            "final_r_vru:",
            "final_r_driver:",
        ] {
            assert!(text.lines().any(|l| l.starts_with(key)), "missing {key}");
        }
        assert!(text.contains("mode: baseline"));
        assert!(text.contains("outcome: goal"));
    }
}
