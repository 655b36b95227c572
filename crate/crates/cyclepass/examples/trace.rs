//! Runs the default scenario in both modes and prints a step trace of the
//! replanner run, marking where the supervisor fired.
//!
//! ```sh
//! cargo run --example trace
//! ```

use cyclepass::scenario::Scenario;
use cyclepass::sim::{run, SimMode};

fn main() {
    let scenario = Scenario::default();

    let base = run(&scenario, SimMode::Baseline).unwrap();
    println!(
        "baseline:  outcome={} arrival={:?} replans={} min_d={:.2} final_r_driver={:.4}",
        base.summary.outcome,
        base.summary.arrival_time,
        base.summary.num_replans,
        base.summary.min_distance,
        base.summary.final_r_driver,
    );

    let repl = run(&scenario, SimMode::Replanner).unwrap();
    println!(
        "replanner: outcome={} arrival={:?} replans={} min_d={:.2}",
        repl.summary.outcome,
        repl.summary.arrival_time,
        repl.summary.num_replans,
        repl.summary.min_distance,
    );
    if let (Some(a), Some(b)) = (repl.summary.arrival_time, base.summary.arrival_time) {
        println!("arrival ratio (replanner/baseline) = {:.4}", a / b);
    }
    println!();

    for (i, r) in repl.records.iter().enumerate() {
        let marker = if r.trigger.is_some() {
            "  <<< trigger"
        } else {
            ""
        };
        if i % 10 == 0 || r.trigger.is_some() {
            println!(
                "t={:5.1}  ego=({:7.2},{:6.2}) v={:5.2}  d={:6.2}  r_pol={:.3} r_vru={:.3} r_drv={:.3}  path={}{}",
                r.t,
                r.ego.x,
                r.ego.y,
                r.ego.v,
                r.report.d_veh_vru,
                r.report.r_policymaker,
                r.report.r_vru,
                r.report.r_driver,
                r.path_id,
                marker,
            );
        }
    }
}
