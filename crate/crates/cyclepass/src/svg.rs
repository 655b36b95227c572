//! Self-contained SVG plots of a simulation log.
//!
//! Three views cover a run: the bird's-eye trajectory over the road, the
//! stakeholder scores against their thresholds, and the speed profile.
//! The output is plain SVG text with no external resources, written with
//! fixed-precision coordinates so identical runs produce identical files.
//!
//! Stable hooks for downstream tooling: the threshold line in the score
//! plot carries `id="tau-line"`, and every replanning trigger is marked
//! with a vertical line of `class="trigger-marker"`.

use crate::scenario::Scenario;
use crate::simlog::SimLog;
use std::fmt::Write as _;

const EGO_COLOR: &str = "#1f6fb4";
const CYCLIST_COLOR: &str = "#e08214";
const POLICY_COLOR: &str = "#2c9a40";
const VRU_COLOR: &str = "#e08214";
const DRIVER_COLOR: &str = "#8a5cc4";
const THRESHOLD_COLOR: &str = "#d03030";
const FRAME_COLOR: &str = "#555";
const ROAD_COLOR: &str = "#999";

struct Frame {
    width: f64,
    height: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(width: f64, height: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        let spread = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a, a + 1.0) };
        let (x0, x1) = spread(x);
        let (y0, y1) = spread(y);
        Frame {
            width,
            height,
            left: 56.0,
            right: 14.0,
            top: 14.0,
            bottom: 42.0,
            x0,
            x1,
            y0,
            y1,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.width - self.left - self.right)
    }

    fn py(&self, y: f64) -> f64 {
        self.height
            - self.bottom
            - (y - self.y0) / (self.y1 - self.y0) * (self.height - self.top - self.bottom)
    }

    fn open(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
             width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">",
            w = self.width,
            h = self.height
        );
        let _ = writeln!(
            out,
            "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
            self.width, self.height
        );
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r) = (self.left, self.width - self.right);
        let (t, b) = (self.top, self.height - self.bottom);
        let _ = writeln!(
            out,
            "<path d=\"M {l:.2} {t:.2} L {l:.2} {b:.2} L {r:.2} {b:.2}\" \
             fill=\"none\" stroke=\"{FRAME_COLOR}\" stroke-width=\"1\"/>"
        );
        for i in 0..=5 {
            let fx = self.x0 + (self.x1 - self.x0) * f64::from(i) / 5.0;
            let fy = self.y0 + (self.y1 - self.y0) * f64::from(i) / 5.0;
            let px = self.px(fx);
            let py = self.py(fy);
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{b:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                 stroke=\"{FRAME_COLOR}\"/>",
                b + 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                b + 18.0,
                tick_label(fx, self.x1 - self.x0)
            );
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{l:.2}\" y2=\"{py:.2}\" \
                 stroke=\"{FRAME_COLOR}\"/>",
                l - 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                l - 8.0,
                py + 4.0,
                tick_label(fy, self.y1 - self.y0)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xlabel}</text>",
            (l + r) / 2.0,
            self.height - 8.0
        );
        let _ = writeln!(
            out,
            "<text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 14 {0:.2})\">{ylabel}</text>",
            (t + b) / 2.0
        );
    }

    fn polyline<I>(&self, out: &mut String, points: I, color: &str, width: f64, extra: &str)
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut attr = String::new();
        for (x, y) in points {
            let _ = write!(attr, "{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
             stroke-width=\"{width}\"{}{}/>",
            attr.trim_end(),
            if extra.is_empty() { "" } else { " " },
            extra
        );
    }

    fn hline(&self, out: &mut String, y: f64, color: &str, extra: &str) {
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y2:.2}\" x2=\"{:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\"{}{}/>",
            self.left,
            self.width - self.right,
            if extra.is_empty() { "" } else { " " },
            extra,
            y2 = self.py(y)
        );
    }

    fn vline(&self, out: &mut String, x: f64, color: &str, extra: &str) {
        let _ = writeln!(
            out,
            "<line x1=\"{x2:.2}\" y1=\"{:.2}\" x2=\"{x2:.2}\" y2=\"{:.2}\" stroke=\"{color}\"{}{}/>",
            self.top,
            self.height - self.bottom,
            if extra.is_empty() { "" } else { " " },
            extra,
            x2 = self.px(x)
        );
    }

    fn legend(&self, out: &mut String, entries: &[(&str, &str)]) {
        let x = self.width - self.right - 10.0;
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = self.top + 16.0 + 16.0 * i as f64;
            let _ = writeln!(
                out,
                "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"end\" fill=\"{color}\">{label}</text>"
            );
        }
    }
}

fn tick_label(value: f64, range: f64) -> String {
    if range >= 20.0 {
        format!("{value:.0}")
    } else if range >= 2.0 {
        format!("{value:.1}")
    } else {
        format!("{value:.2}")
    }
}

fn time_range(log: &SimLog) -> (f64, f64) {
    let end = log.records.last().map_or(1.0, |r| r.t);
    (0.0, end.max(1e-9))
}

/// Bird's-eye view: road band, both lane markings, ego and cyclist paths,
/// and the goal position.
pub fn trajectory_svg(log: &SimLog, scenario: &Scenario) -> String {
    let road = &scenario.road;
    let half = road.lane_width;
    let frame = Frame::new(
        860.0,
        260.0,
        (0.0, road.road_length),
        (
            road.centerline_y - half - 0.8,
            road.centerline_y + half + 0.8,
        ),
    );
    let mut out = String::new();
    frame.open(&mut out);

    frame.hline(
        &mut out,
        road.centerline_y - half,
        ROAD_COLOR,
        "stroke-width=\"2\"",
    );
    frame.hline(
        &mut out,
        road.centerline_y + half,
        ROAD_COLOR,
        "stroke-width=\"2\"",
    );
    frame.hline(
        &mut out,
        road.centerline_y,
        ROAD_COLOR,
        "stroke-dasharray=\"10 8\"",
    );

    frame.polyline(
        &mut out,
        log.records.iter().map(|r| (r.cyclist.x, r.cyclist.y)),
        CYCLIST_COLOR,
        1.5,
        "stroke-dasharray=\"4 4\"",
    );
    frame.polyline(
        &mut out,
        log.records.iter().map(|r| (r.ego.x, r.ego.y)),
        EGO_COLOR,
        2.0,
        "",
    );

    for r in log.records.iter().filter(|r| r.trigger.is_some()) {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"none\" stroke=\"{THRESHOLD_COLOR}\" \
             stroke-width=\"1.5\"/>",
            frame.px(r.ego.x),
            frame.py(r.ego.y)
        );
    }
    let _ = writeln!(
        out,
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"none\" stroke=\"{POLICY_COLOR}\" \
         stroke-width=\"2\"/>",
        frame.px(scenario.goal.x),
        frame.py(scenario.goal.y)
    );

    frame.axes(&mut out, "x [m]", "y [m]");
    frame.legend(&mut out, &[("ego", EGO_COLOR), ("cyclist", CYCLIST_COLOR)]);
    out.push_str("</svg>\n");
    out
}

/// Stakeholder scores over time with the replanning threshold
/// (`id="tau-line"`) and one `class="trigger-marker"` line per trigger.
pub fn scores_svg(log: &SimLog, scenario: &Scenario) -> String {
    let frame = Frame::new(860.0, 360.0, time_range(log), (0.0, 1.05));
    let mut out = String::new();
    frame.open(&mut out);

    for r in log.records.iter().filter(|r| r.trigger.is_some()) {
        frame.vline(
            &mut out,
            r.t,
            THRESHOLD_COLOR,
            "class=\"trigger-marker\" stroke-dasharray=\"2 3\" opacity=\"0.7\"",
        );
    }

    let th = &scenario.thresholds;
    let mut taus = vec![th.tau_policymaker];
    for tau in [th.tau_vru, th.tau_driver] {
        if !taus.contains(&tau) {
            taus.push(tau);
        }
    }
    for (i, tau) in taus.iter().enumerate() {
        let extra = if i == 0 {
            "id=\"tau-line\" stroke-dasharray=\"6 4\"".to_string()
        } else {
            "stroke-dasharray=\"6 4\"".to_string()
        };
        frame.hline(&mut out, *tau, THRESHOLD_COLOR, &extra);
    }

    type ScorePick = fn(&crate::simlog::StepRecord) -> f64;
    let series: [(&str, ScorePick); 3] = [
        (POLICY_COLOR, |r| r.report.r_policymaker),
        (VRU_COLOR, |r| r.report.r_vru),
        (DRIVER_COLOR, |r| r.report.r_driver),
    ];
    for (color, pick) in series {
        frame.polyline(
            &mut out,
            log.records.iter().map(|r| (r.t, pick(r))),
            color,
            1.8,
            "",
        );
    }

    frame.axes(&mut out, "t [s]", "reason score");
    frame.legend(
        &mut out,
        &[
            ("policymaker", POLICY_COLOR),
            ("vru", VRU_COLOR),
            ("driver", DRIVER_COLOR),
        ],
    );
    out.push_str("</svg>\n");
    out
}

/// Ego speed over time against the scenario speed limit.
pub fn speed_svg(log: &SimLog, scenario: &Scenario) -> String {
    let top = scenario
        .v_max
        .max(log.records.iter().map(|r| r.ego.v).fold(0.0, f64::max));
    let frame = Frame::new(860.0, 300.0, time_range(log), (0.0, top * 1.08));
    let mut out = String::new();
    frame.open(&mut out);

    frame.hline(
        &mut out,
        scenario.v_max,
        ROAD_COLOR,
        "stroke-dasharray=\"6 4\"",
    );
    frame.polyline(
        &mut out,
        log.records.iter().map(|r| (r.t, r.ego.v)),
        EGO_COLOR,
        2.0,
        "",
    );

    frame.axes(&mut out, "t [s]", "v [m/s]");
    frame.legend(
        &mut out,
        &[("ego speed", EGO_COLOR), ("speed limit", ROAD_COLOR)],
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasons::{evaluate, ReasonAccumulators, Stakeholder};
    use crate::scenario::CyclistState;
    use crate::sim::SimMode;
    use crate::simlog::{Outcome, SimSummary, StepRecord};
    use crate::state::{ControlInput, VehicleState};

    fn tiny_log(with_trigger: bool) -> SimLog {
        let scenario = Scenario::default();
        let records = (0..20)
            .map(|k| {
                let t = 0.1 * f64::from(k);
                let ego = VehicleState::new(2.0 * t, -1.75, 0.0, 4.0);
                let cyclist = CyclistState {
                    x: 25.0 + 3.0 * t,
                    y: -1.75,
                    speed: 3.0,
                };
                let report = evaluate(
                    &ego,
                    &cyclist,
                    &scenario.road,
                    &ReasonAccumulators::default(),
                    &scenario.reasons,
                    &scenario.thresholds,
                );
                StepRecord {
                    t,
                    ego,
                    control: ControlInput::new(0.0, 0.0),
                    cyclist,
                    report,
                    trigger: (with_trigger && k == 10).then_some(Stakeholder::Driver),
                    path_id: 0,
                    qp_iters: 10,
                    qp_residual: 1e-9,
                }
            })
            .collect();
        SimLog {
            records,
            summary: SimSummary {
                mode: SimMode::Baseline,
                outcome: Outcome::Timeout,
                arrival_time: None,
                final_time: 2.0,
                num_replans: 0,
                min_distance: 20.0,
                min_r_policymaker: 1.0,
                min_r_vru: 1.0,
                min_r_driver: 1.0,
                final_r_policymaker: 1.0,
                final_r_vru: 1.0,
                final_r_driver: 1.0,
            },
        }
    }

    #[test]
    fn scores_plot_has_threshold_line_and_trigger_markers() {
        let scenario = Scenario::default();
        let svg = scores_svg(&tiny_log(true), &scenario);
        assert_eq!(svg.matches("id=\"tau-line\"").count(), 1);
        assert_eq!(svg.matches("class=\"trigger-marker\"").count(), 1);

        let svg = scores_svg(&tiny_log(false), &scenario);
        assert_eq!(svg.matches("id=\"tau-line\"").count(), 1);
        assert!(!svg.contains("trigger-marker"));
    }

    #[test]
    fn distinct_thresholds_draw_extra_lines_but_one_id() {
        let mut scenario = Scenario::default();
        scenario.thresholds.tau_vru = 0.5;
        scenario.thresholds.tau_driver = 0.3;
        let svg = scores_svg(&tiny_log(false), &scenario);
        assert_eq!(svg.matches("id=\"tau-line\"").count(), 1);
        assert_eq!(svg.matches("stroke-dasharray=\"6 4\"").count(), 3);
    }

    #[test]
    fn plots_are_wellformed_and_deterministic() {
        let scenario = Scenario::default();
        let log = tiny_log(true);
        for svg in [
            trajectory_svg(&log, &scenario),
            scores_svg(&log, &scenario),
            speed_svg(&log, &scenario),
        ] {
            assert!(svg.starts_with("<svg "));
            assert!(svg.ends_with("</svg>\n"));
            assert!(svg.contains("<polyline"));
        }
        assert_eq!(
            trajectory_svg(&log, &scenario),
            trajectory_svg(&log, &scenario)
        );
    }

    #[test]
    fn trajectory_shows_road_and_both_paths() {
        let scenario = Scenario::default();
        let svg = trajectory_svg(&tiny_log(false), &scenario);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray=\"10 8\""));
        assert!(svg.contains(">ego</text>"));
        assert!(svg.contains(">cyclist</text>"));
    }

    #[test]
    fn empty_log_still_renders() {
        let scenario = Scenario::default();
        let log = SimLog {
            records: Vec::new(),
            ..tiny_log(false)
        };
        for svg in [
            trajectory_svg(&log, &scenario),
            scores_svg(&log, &scenario),
            speed_svg(&log, &scenario),
        ] {
            assert!(svg.ends_with("</svg>\n"));
        }
    }
}
