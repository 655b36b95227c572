//! Closed-loop simulation of an automated vehicle negotiating a slow
//! cyclist on a two-lane road, supervised by explicit stakeholder reason
//! models.
//!
//! The loop couples four pieces:
//!
//! * [`reasons`]: scores every timestep against three stakeholder
//!   perspectives (policymaker, cyclist, following driver) and raises a
//!   replanning trigger when any score drops below its threshold.
//! * [`planner`]: lattice A* over constant-curvature primitives; the
//!   trigger relaxes its traffic-rule cost so an overtake across the
//!   centerline becomes affordable.
//! * [`mpc`]: linear time-varying model predictive control tracking the
//!   planned path under actuation bounds.
//! * [`dynamics`]: the kinematic bicycle model, linearized for the
//!   controller and integrated with RK4 as the simulation ground truth.
//!
//! [`sim`] wires these together and records per-step telemetry; the
//! `cyclepass` binary drives it from TOML scenario files.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod mpc;
pub mod planner;
pub mod reasons;
pub mod scenario;
pub mod sim;
pub mod simlog;
pub mod state;
pub mod svg;

// Every code block in the guide compiles and runs as a doc-test, so the
// book cannot drift from the crate.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(scenario, "../../../book/src/scenario.md");
    chapter!(reasons, "../../../book/src/reasons.md");
    chapter!(dynamics, "../../../book/src/dynamics.md");
    chapter!(planner, "../../../book/src/planner.md");
    chapter!(mpc, "../../../book/src/mpc.md");
    chapter!(simulation, "../../../book/src/simulation.md");
    chapter!(cli, "../../../book/src/cli.md");
}
