//! Command-line interface of the `cyclepass` binary.
//!
//! Two subcommands:
//!
//! * `run` simulates one mode and writes `log.csv`, `summary.txt` and the
//!   three SVG plots into the output directory.
//! * `compare` simulates both modes into `baseline/` and `replanner/`
//!   subdirectories and adds `comparison.txt` and `comparison.csv`.
//!
//! Exit codes: 0 on success (including a timeout that simply did not reach
//! the goal), 2 for configuration problems, 3 when no path to the goal
//! exists, 4 when the run ends in a collision.

use crate::config::{load_scenario, ConfigError};
use crate::scenario::Scenario;
use crate::sim::{self, SimError, SimMode};
use crate::simlog::{Outcome, SimLog};
use crate::svg;
use clap::{Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_COLLISION: i32 = 4;

#[derive(Parser)]
#[command(
    name = "cyclepass",
    version,
    about = "Closed-loop overtaking simulator with stakeholder-reason supervision"
)]
struct Cli {
    /// Suppress the summary printed to stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one mode and write its artifacts.
    Run {
        /// Scenario TOML file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Replanner)]
        mode: ModeArg,
        /// Directory for log.csv, summary.txt and the plots.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Simulate both modes and write a side-by-side comparison.
    Compare {
        /// Scenario TOML file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for the per-mode subdirectories and the comparison.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Baseline,
    Replanner,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Baseline => SimMode::Baseline,
            ModeArg::Replanner => SimMode::Replanner,
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            ref config,
            mode,
            ref out,
        } => run_command(config.as_deref(), mode.into(), out, cli.quiet),
        Command::Compare {
            ref config,
            ref out,
        } => compare_command(config.as_deref(), out, cli.quiet),
    }
}

fn load(config: Option<&Path>) -> Result<Scenario, ConfigError> {
    match config {
        Some(path) => load_scenario(path),
        None => Ok(Scenario::default()),
    }
}

fn fail(code: i32, message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    code
}

fn simulate(scenario: &Scenario, mode: SimMode) -> Result<SimLog, i32> {
    sim::run(scenario, mode).map_err(|e| match e {
        SimError::Infeasible(_) => fail(EXIT_INFEASIBLE, e),
        SimError::Dynamics(_) => fail(EXIT_FAILURE, e),
    })
}

fn write_artifacts(dir: &Path, log: &SimLog, scenario: &Scenario) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("log.csv"), log.to_csv())?;
    std::fs::write(dir.join("summary.txt"), log.summary_text())?;
    std::fs::write(
        dir.join("trajectory.svg"),
        svg::trajectory_svg(log, scenario),
    )?;
    std::fs::write(dir.join("scores.svg"), svg::scores_svg(log, scenario))?;
    std::fs::write(dir.join("speed.svg"), svg::speed_svg(log, scenario))?;
    Ok(())
}

fn outcome_code(outcome: Outcome) -> i32 {
    if outcome == Outcome::Collision {
        EXIT_COLLISION
    } else {
        EXIT_OK
    }
}

fn run_command(config: Option<&Path>, mode: SimMode, out: &Path, quiet: bool) -> i32 {
    let scenario = match load(config) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let log = match simulate(&scenario, mode) {
        Ok(log) => log,
        Err(code) => return code,
    };
    if let Err(e) = write_artifacts(out, &log, &scenario) {
        return fail(
            EXIT_FAILURE,
            format_args!("cannot write {}: {e}", out.display()),
        );
    }
    if !quiet {
        print!("{}", log.summary_text());
    }
    outcome_code(log.summary.outcome)
}

fn compare_command(config: Option<&Path>, out: &Path, quiet: bool) -> i32 {
    let scenario = match load(config) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let baseline = match simulate(&scenario, SimMode::Baseline) {
        Ok(log) => log,
        Err(code) => return code,
    };
    let replanner = match simulate(&scenario, SimMode::Replanner) {
        Ok(log) => log,
        Err(code) => return code,
    };

    let text = comparison_text(&baseline, &replanner);
    let written = write_artifacts(&out.join("baseline"), &baseline, &scenario)
        .and_then(|()| write_artifacts(&out.join("replanner"), &replanner, &scenario))
        .and_then(|()| std::fs::write(out.join("comparison.txt"), &text))
        .and_then(|()| {
            std::fs::write(
                out.join("comparison.csv"),
                comparison_csv(&baseline, &replanner),
            )
        });
    if let Err(e) = written {
        return fail(
            EXIT_FAILURE,
            format_args!("cannot write {}: {e}", out.display()),
        );
    }
    if !quiet {
        print!("{text}");
    }
    outcome_code(baseline.summary.outcome).max(outcome_code(replanner.summary.outcome))
}

fn metric_rows(
    baseline: &SimLog,
    replanner: &SimLog,
    num: &dyn Fn(f64) -> String,
) -> Vec<(&'static str, String, String)> {
    let (b, r) = (&baseline.summary, &replanner.summary);
    let opt = |t: Option<f64>| t.map_or_else(|| "none".to_string(), num);
    vec![
        ("outcome", b.outcome.to_string(), r.outcome.to_string()),
        ("arrival_time", opt(b.arrival_time), opt(r.arrival_time)),
        ("final_time", num(b.final_time), num(r.final_time)),
        (
            "num_replans",
            b.num_replans.to_string(),
            r.num_replans.to_string(),
        ),
        ("min_distance", num(b.min_distance), num(r.min_distance)),
        (
            "min_r_policymaker",
            num(b.min_r_policymaker),
            num(r.min_r_policymaker),
        ),
        ("min_r_vru", num(b.min_r_vru), num(r.min_r_vru)),
        ("min_r_driver", num(b.min_r_driver), num(r.min_r_driver)),
        (
            "final_r_policymaker",
            num(b.final_r_policymaker),
            num(r.final_r_policymaker),
        ),
        ("final_r_vru", num(b.final_r_vru), num(r.final_r_vru)),
        (
            "final_r_driver",
            num(b.final_r_driver),
            num(r.final_r_driver),
        ),
    ]
}

/// Six significant decimals with trailing zeros trimmed, for the
/// human-facing table; the CSV keeps full precision.
fn rounded(v: f64) -> String {
    let mut s = format!("{v:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

fn comparison_csv(baseline: &SimLog, replanner: &SimLog) -> String {
    let mut out = String::from("metric,baseline,replanner\n");
    for (name, b, r) in metric_rows(baseline, replanner, &|v| v.to_string()) {
        let _ = writeln!(out, "{name},{b},{r}");
    }
    out
}

fn comparison_text(baseline: &SimLog, replanner: &SimLog) -> String {
    let mut out = format!("{:<22}{:<16}{}\n", "metric", "baseline", "replanner");
    for (name, b, r) in metric_rows(baseline, replanner, &rounded) {
        let _ = writeln!(out, "{name:<22}{b:<16}{r}");
    }
    if let (Some(tb), Some(tr)) = (
        baseline.summary.arrival_time,
        replanner.summary.arrival_time,
    ) {
        let _ = writeln!(out, "arrival_ratio (replanner/baseline): {:.4}", tr / tb);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_defaults_to_replanner_into_out() {
        let cli = Cli::try_parse_from(["cyclepass", "run"]).unwrap();
        assert!(!cli.quiet);
        match cli.command {
            Command::Run { config, mode, out } => {
                assert!(config.is_none());
                assert!(matches!(mode, ModeArg::Replanner));
                assert_eq!(out, PathBuf::from("out"));
            }
            Command::Compare { .. } => panic!("parsed the wrong subcommand"),
        }
    }

    #[test]
    fn flags_are_accepted_anywhere() {
        let cli = Cli::try_parse_from([
            "cyclepass",
            "run",
            "--mode",
            "baseline",
            "--quiet",
            "--config",
            "s.toml",
            "--out",
            "results",
        ])
        .unwrap();
        assert!(cli.quiet);
        match cli.command {
            Command::Run { config, mode, out } => {
                assert_eq!(config.as_deref(), Some(Path::new("s.toml")));
                assert!(matches!(mode, ModeArg::Baseline));
                assert_eq!(out, PathBuf::from("results"));
            }
            Command::Compare { .. } => panic!("parsed the wrong subcommand"),
        }
    }

    #[test]
    fn bad_mode_is_a_usage_error() {
        assert!(Cli::try_parse_from(["cyclepass", "run", "--mode", "turbo"]).is_err());
        assert!(Cli::try_parse_from(["cyclepass"]).is_err());
    }

    #[test]
    fn comparison_tables_align_with_the_metrics() {
        let scenario = Scenario::default();
        let mut short = scenario.clone();
        short.sim_duration_max = 1.0;
        let log = sim::run(&short, SimMode::Baseline).unwrap();
        let csv = comparison_csv(&log, &log);
        assert_eq!(csv.lines().next().unwrap(), "metric,baseline,replanner");
        assert_eq!(csv.lines().count(), 12);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 3);
        }
        let text = comparison_text(&log, &log);
        assert!(text.lines().count() >= 12);
        assert!(!text.contains("arrival_ratio"));
    }
}
