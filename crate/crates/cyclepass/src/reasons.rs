//! Stakeholder reason models and the replanning trigger.
//!
//! Each timestep is scored from the point of view of three stakeholders.
//! Every score lives in [0, 1], where 1 means "this stakeholder has no
//! complaint" and lower values mean the current motion increasingly
//! frustrates what that stakeholder cares about:
//!
//! * policymaker: keep to the legal travel lane. The score is 1 while the
//!   ego stays on its side of the centerline and decays exponentially with
//!   incursion depth into the opposing lane,
//!   `exp(k1 * d_veh)` for `d_veh <= 0` (d_veh is the signed lateral
//!   displacement, positive in the legal lane).
//! * cyclist (VRU): two factors. Safety decays with proximity,
//!   `exp(k2 * (d - d_th_vru))` once the gap `d` falls under `d_th_vru`.
//!   Comfort decays with *sustained* proximity: a clock `t_close_vru`
//!   accrues while `d < d_th_vru`, and once it exceeds `t_th_vru` the score
//!   is `exp(-k3 * (t_close - t_th_vru))`. The cyclist score is the product
//!   of the two factors.
//! * following driver: delay pressure. A clock `t_behind_driver` accrues
//!   while the ego sits behind the cyclist inside `d_th_driver`; once the
//!   clock passes `t_th_driver` the score is `exp(-k4 * (t_behind -
//!   t_th_driver))`.
//!
//! The clocks never reset: they are cumulative exposure, not a sliding
//! window. With the default gains this gives the driver model a sharp
//! closed-form property: starting the clock at zero, the score first drops
//! under 0.7 when `t_behind = t_th_driver - ln(0.7)/k4 ~ 11.783 s`, which is
//! what the supervision layer's trigger fires on in the canned scenario.
//!
//! [`check_trigger`] turns a scored step into a replanning decision: replan
//! when any stakeholder's score sits below its threshold, rate-limited by a
//! cooldown so one sustained dip (an overtake in progress pushes the
//! cyclist's score down for several seconds) produces one replan, not a
//! storm of them.

use crate::scenario::{
    ego_cyclist_distance, signed_lateral_displacement, CyclistState, RoadGeometry,
};
use crate::state::VehicleState;

/// Gains and thresholds of the three stakeholder models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReasonParams {
    /// Policymaker decay gain per meter of lane incursion.
    pub k1: f64,
    /// Cyclist safety decay gain per meter of proximity deficit.
    pub k2: f64,
    /// Cyclist comfort decay gain per second of sustained proximity.
    pub k3: f64,
    /// Driver patience decay gain per second of sustained following.
    pub k4: f64,
    /// Proximity radius around the cyclist, meters.
    pub d_th_vru: f64,
    /// Sustained-proximity grace period, seconds.
    pub t_th_vru: f64,
    /// Following radius behind the cyclist, meters.
    pub d_th_driver: f64,
    /// Following grace period, seconds.
    pub t_th_driver: f64,
}

impl Default for ReasonParams {
    fn default() -> Self {
        Self {
            k1: 0.2,
            k2: 0.2,
            k3: 0.2,
            k4: 0.2,
            d_th_vru: 8.0,
            t_th_vru: 5.0,
            d_th_driver: 12.0,
            t_th_driver: 10.0,
        }
    }
}

impl ReasonParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("d_th_vru", self.d_th_vru),
            ("t_th_vru", self.t_th_vru),
            ("d_th_driver", self.d_th_driver),
            ("t_th_driver", self.t_th_driver),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }
}

/// Per-stakeholder score thresholds and the replan rate limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerThresholds {
    pub tau_policymaker: f64,
    pub tau_vru: f64,
    pub tau_driver: f64,
    /// Minimum time between replans, seconds. Long enough by default to
    /// cover the transient score dip of a whole overtake.
    pub cooldown: f64,
}

impl Default for TriggerThresholds {
    fn default() -> Self {
        Self {
            tau_policymaker: 0.7,
            tau_vru: 0.7,
            tau_driver: 0.7,
            cooldown: 15.0,
        }
    }
}

impl TriggerThresholds {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("tau_policymaker", self.tau_policymaker),
            ("tau_vru", self.tau_vru),
            ("tau_driver", self.tau_driver),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} must be in (0, 1)"));
            }
        }
        if !(self.cooldown >= 0.0 && self.cooldown.is_finite()) {
            return Err("cooldown must be >= 0".into());
        }
        Ok(())
    }

    fn tau(&self, s: Stakeholder) -> f64 {
        match s {
            Stakeholder::Policymaker => self.tau_policymaker,
            Stakeholder::Vru => self.tau_vru,
            Stakeholder::Driver => self.tau_driver,
        }
    }
}

/// Cumulative exposure clocks. Monotone nondecreasing over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReasonAccumulators {
    /// Seconds spent with the cyclist gap under `d_th_vru`.
    pub t_close_vru: f64,
    /// Seconds spent behind the cyclist inside `d_th_driver`.
    pub t_behind_driver: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stakeholder {
    Policymaker,
    Vru,
    Driver,
}

impl std::fmt::Display for Stakeholder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stakeholder::Policymaker => write!(f, "policymaker"),
            Stakeholder::Vru => write!(f, "vru"),
            Stakeholder::Driver => write!(f, "driver"),
        }
    }
}

/// All scores of one timestep plus the accumulator snapshot they were
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReasonReport {
    pub r_policymaker: f64,
    pub r_vru_safety: f64,
    pub r_vru_comfort: f64,
    /// Product of the safety and comfort factors.
    pub r_vru: f64,
    pub r_driver: f64,
    /// Minimum over the three top-level stakeholder scores.
    pub min_score: f64,
    /// Lowest-scoring stakeholder whose score sits below its threshold,
    /// if any.
    pub violating: Option<Stakeholder>,
    pub t_close_vru: f64,
    pub t_behind_driver: f64,
    /// Ego-cyclist gap the scores were computed from, meters.
    pub d_veh_vru: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerDecision {
    None,
    Replan(Stakeholder),
}

/// Lane-keeping score. `d_veh` is the signed lateral displacement from the
/// centerline, positive inside the legal lane.
pub fn policymaker_score(d_veh: f64, k1: f64) -> f64 {
    if d_veh > 0.0 {
        1.0
    } else {
        (k1 * d_veh).exp()
    }
}

/// Cyclist proximity score: 1 beyond `d_th`, exponential decay with the
/// deficit inside it.
pub fn vru_safety_score(d: f64, d_th: f64, k2: f64) -> f64 {
    if d > d_th {
        1.0
    } else {
        (k2 * (d - d_th)).exp()
    }
}

/// Cyclist sustained-proximity score. The escape clause (`d > d_th_vru`)
/// means a long-gone vehicle stops being penalized for history: the clock
/// keeps its value but the score snaps back to 1.
pub fn vru_comfort_score(t_close: f64, d: f64, p: &ReasonParams) -> f64 {
    if t_close < p.t_th_vru || d > p.d_th_vru {
        1.0
    } else {
        (-p.k3 * (t_close - p.t_th_vru)).exp()
    }
}

/// Combined cyclist score: safety times comfort.
pub fn vru_score(d: f64, t_close: f64, p: &ReasonParams) -> f64 {
    vru_safety_score(d, p.d_th_vru, p.k2) * vru_comfort_score(t_close, d, p)
}

/// Following-driver patience score, with the same escape clause shape as
/// the comfort factor: pull more than `d_th_driver` ahead and the score
/// recovers to 1.
pub fn driver_score(t_behind: f64, d: f64, p: &ReasonParams) -> f64 {
    if t_behind < p.t_th_driver || d > p.d_th_driver {
        1.0
    } else {
        (-p.k4 * (t_behind - p.t_th_driver)).exp()
    }
}

/// Advance the exposure clocks by one step of length `dt`. The proximity
/// clock runs whenever the gap is inside `d_th_vru`; the following clock
/// runs only while the ego is *behind* the cyclist (smaller x) inside
/// `d_th_driver`.
pub fn update_accumulators(
    acc: &mut ReasonAccumulators,
    ego: &VehicleState,
    cyclist: &CyclistState,
    p: &ReasonParams,
    dt: f64,
) {
    let d = ego_cyclist_distance(ego, cyclist);
    if d < p.d_th_vru {
        acc.t_close_vru += dt;
    }
    if d < p.d_th_driver && ego.x < cyclist.x {
        acc.t_behind_driver += dt;
    }
}

/// Score one timestep for all stakeholders.
pub fn evaluate(
    ego: &VehicleState,
    cyclist: &CyclistState,
    road: &RoadGeometry,
    acc: &ReasonAccumulators,
    p: &ReasonParams,
    thresholds: &TriggerThresholds,
) -> ReasonReport {
    let d_veh = signed_lateral_displacement(ego.y, road);
    let d = ego_cyclist_distance(ego, cyclist);
    let r_policymaker = policymaker_score(d_veh, p.k1);
    let r_vru_safety = vru_safety_score(d, p.d_th_vru, p.k2);
    let r_vru_comfort = vru_comfort_score(acc.t_close_vru, d, p);
    let r_vru = r_vru_safety * r_vru_comfort;
    let r_driver = driver_score(acc.t_behind_driver, d, p);

    let scored = [
        (Stakeholder::Policymaker, r_policymaker),
        (Stakeholder::Vru, r_vru),
        (Stakeholder::Driver, r_driver),
    ];
    let min_score = scored.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    let violating = scored
        .iter()
        .filter(|&&(s, r)| r < thresholds.tau(s))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(s, _)| s);

    ReasonReport {
        r_policymaker,
        r_vru_safety,
        r_vru_comfort,
        r_vru,
        r_driver,
        min_score,
        violating,
        t_close_vru: acc.t_close_vru,
        t_behind_driver: acc.t_behind_driver,
        d_veh_vru: d,
    }
}

/// Replanning decision for one scored step: replan when some stakeholder is
/// below threshold and the cooldown since the last replan has elapsed.
pub fn check_trigger(
    report: &ReasonReport,
    thresholds: &TriggerThresholds,
    time_since_last_replan: f64,
) -> TriggerDecision {
    if time_since_last_replan < thresholds.cooldown {
        return TriggerDecision::None;
    }
    match report.violating {
        Some(s) => TriggerDecision::Replan(s),
        None => TriggerDecision::None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> ReasonParams {
        ReasonParams::default()
    }

    #[test]
    fn policymaker_spot_values() {
        assert_eq!(policymaker_score(2.0, 0.2), 1.0);
        assert_eq!(policymaker_score(0.0, 0.2), 1.0);
        let r = policymaker_score(-1.0, 0.2);
        assert!((r - 0.818_730_753_077_981_8).abs() < 1e-15);
    }

    #[test]
    fn safety_spot_values() {
        assert_eq!(vru_safety_score(10.0, 8.0, 0.2), 1.0);
        assert_eq!(vru_safety_score(8.0, 8.0, 0.2), 1.0);
        let r = vru_safety_score(6.0, 8.0, 0.2);
        assert!((r - 0.670_320_046_035_639).abs() < 1e-15);
    }

    #[test]
    fn comfort_spot_values() {
        // grace period not yet used up
        assert_eq!(vru_comfort_score(3.0, 2.0, &p()), 1.0);
        // escape clause: clock long expired but the gap is open again
        assert_eq!(vru_comfort_score(20.0, 9.0, &p()), 1.0);
        let r = vru_comfort_score(7.0, 4.0, &p());
        assert!((r - (-0.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn vru_is_product_of_factors() {
        // both factors at exp(-0.4): d = 6 within radius, clock at 7 s
        let r = vru_score(6.0, 7.0, &p());
        assert!((r - 0.449_328_964_117_222).abs() < 1e-12);
        assert!(
            (r - vru_safety_score(6.0, 8.0, 0.2) * vru_comfort_score(7.0, 6.0, &p())).abs() < 1e-15
        );
    }

    #[test]
    fn driver_spot_values() {
        assert_eq!(driver_score(5.0, 6.0, &p()), 1.0);
        // escape clause: far ahead
        assert_eq!(driver_score(30.0, 15.0, &p()), 1.0);
        let r = driver_score(12.0, 6.0, &p());
        assert!((r - (-0.4f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn branch_boundaries_are_continuous() {
        let eps = 1e-9;
        // every model evaluates to exactly 1 at its branch point
        assert!((policymaker_score(0.0, 0.2) - 1.0).abs() < 1e-15);
        assert!((vru_safety_score(8.0, 8.0, 0.2) - 1.0).abs() < 1e-15);
        assert!((vru_comfort_score(5.0, 4.0, &p()) - 1.0).abs() < 1e-15);
        assert!((driver_score(10.0, 6.0, &p()) - 1.0).abs() < 1e-15);
        // and the two sides of each branch meet there
        assert!((policymaker_score(-eps, 0.2) - policymaker_score(eps, 0.2)).abs() < 1e-9);
        assert!(
            (vru_safety_score(8.0 - eps, 8.0, 0.2) - vru_safety_score(8.0 + eps, 8.0, 0.2)).abs()
                < 1e-9
        );
        assert!(
            (vru_comfort_score(5.0 - eps, 4.0, &p()) - vru_comfort_score(5.0 + eps, 4.0, &p()))
                .abs()
                < 1e-9
        );
        assert!(
            (driver_score(10.0 - eps, 6.0, &p()) - driver_score(10.0 + eps, 6.0, &p())).abs()
                < 1e-9
        );
    }

    #[test]
    fn driver_crosses_070_near_11_78_seconds() {
        // accumulate the following clock at 10 ms resolution with a constant
        // 6 m gap; the closed-form crossing is t_th + ln(1/0.7)/k4 = 11.7834 s
        let params = p();
        let mut t_behind: f64 = 0.0;
        let dt = 0.01;
        loop {
            t_behind += dt;
            if driver_score(t_behind, 6.0, &params) < 0.7 {
                break;
            }
            assert!(t_behind < 20.0, "score never crossed 0.7");
        }
        assert!((11.78..=11.79).contains(&t_behind), "crossed at {t_behind}");
    }

    #[test]
    fn accumulators_follow_gating_rules() {
        let params = p();
        let mut acc = ReasonAccumulators::default();
        let cyclist = CyclistState {
            x: 30.0,
            y: -1.75,
            speed: 3.0,
        };

        // far away: neither clock runs
        let ego = VehicleState::new(5.0, -1.75, 0.0, 5.0);
        update_accumulators(&mut acc, &ego, &cyclist, &params, 0.1);
        assert_eq!(acc, ReasonAccumulators::default());

        // 10 m behind: only the following clock runs (8 < 10 < 12)
        let ego = VehicleState::new(20.0, -1.75, 0.0, 5.0);
        update_accumulators(&mut acc, &ego, &cyclist, &params, 0.1);
        assert_eq!(acc.t_close_vru, 0.0);
        assert!((acc.t_behind_driver - 0.1).abs() < 1e-15);

        // 5 m behind: both clocks run
        let ego = VehicleState::new(25.0, -1.75, 0.0, 5.0);
        update_accumulators(&mut acc, &ego, &cyclist, &params, 0.1);
        assert!((acc.t_close_vru - 0.1).abs() < 1e-15);
        assert!((acc.t_behind_driver - 0.2).abs() < 1e-15);

        // 5 m ahead: proximity clock runs, following clock holds
        let ego = VehicleState::new(35.0, -1.75, 0.0, 5.0);
        update_accumulators(&mut acc, &ego, &cyclist, &params, 0.1);
        assert!((acc.t_close_vru - 0.2).abs() < 1e-15);
        assert!((acc.t_behind_driver - 0.2).abs() < 1e-15);
    }

    #[test]
    fn evaluate_spot_cases() {
        let road = RoadGeometry::default();
        let params = p();
        let thresholds = TriggerThresholds::default();

        // nominal driving, everything far away
        let ego = VehicleState::new(0.0, -1.75, 0.0, 5.0);
        let cyclist = CyclistState {
            x: 100.0,
            y: -1.75,
            speed: 3.0,
        };
        let r = evaluate(
            &ego,
            &cyclist,
            &road,
            &ReasonAccumulators::default(),
            &params,
            &thresholds,
        );
        assert_eq!(
            (
                r.r_policymaker,
                r.r_vru_safety,
                r.r_vru_comfort,
                r.r_vru,
                r.r_driver
            ),
            (1.0, 1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(r.min_score, 1.0);
        assert_eq!(r.violating, None);

        // 1 m into the opposing lane, cyclist far: only the policymaker
        // objects, and not badly enough to violate its 0.7 threshold
        let ego = VehicleState::new(0.0, 1.0, 0.0, 5.0);
        let r = evaluate(
            &ego,
            &cyclist,
            &road,
            &ReasonAccumulators::default(),
            &params,
            &thresholds,
        );
        assert!((r.r_policymaker - 0.818_730_753_077_981_8).abs() < 1e-12);
        assert_eq!((r.r_vru, r.r_driver), (1.0, 1.0));
        assert_eq!(r.violating, None);

        // sustained close follow: cyclist and driver both below threshold,
        // the cyclist scores lower and is named the violator
        let ego = VehicleState::new(94.0, -1.75, 0.0, 3.0);
        let acc = ReasonAccumulators {
            t_close_vru: 7.0,
            t_behind_driver: 12.0,
        };
        let r = evaluate(&ego, &cyclist, &road, &acc, &params, &thresholds);
        assert_eq!(r.r_policymaker, 1.0);
        assert!((r.r_vru - 0.449_328_964_117_222).abs() < 1e-12);
        assert!((r.r_driver - (-0.4f64).exp()).abs() < 1e-12);
        assert!((r.min_score - r.r_vru).abs() < 1e-15);
        assert_eq!(r.violating, Some(Stakeholder::Vru));
    }

    #[test]
    fn trigger_respects_threshold_and_cooldown() {
        let thresholds = TriggerThresholds {
            cooldown: 1.0,
            ..TriggerThresholds::default()
        };
        let clean = ReasonReport {
            r_policymaker: 1.0,
            r_vru_safety: 1.0,
            r_vru_comfort: 1.0,
            r_vru: 1.0,
            r_driver: 1.0,
            min_score: 1.0,
            violating: None,
            t_close_vru: 0.0,
            t_behind_driver: 0.0,
            d_veh_vru: 50.0,
        };
        assert_eq!(
            check_trigger(&clean, &thresholds, 100.0),
            TriggerDecision::None
        );

        let impatient = ReasonReport {
            r_driver: 0.65,
            min_score: 0.65,
            violating: Some(Stakeholder::Driver),
            ..clean
        };
        assert_eq!(
            check_trigger(&impatient, &thresholds, 2.0),
            TriggerDecision::Replan(Stakeholder::Driver)
        );
        // same report, but only 0.2 s since the last replan
        assert_eq!(
            check_trigger(&impatient, &thresholds, 0.2),
            TriggerDecision::None
        );
    }

    proptest! {
        #[test]
        fn scores_stay_in_unit_interval(
            d_veh in -50.0f64..50.0,
            d in 0.0f64..200.0,
            t_close in 0.0f64..500.0,
            t_behind in 0.0f64..500.0,
        ) {
            let params = p();
            for r in [
                policymaker_score(d_veh, params.k1),
                vru_safety_score(d, params.d_th_vru, params.k2),
                vru_comfort_score(t_close, d, &params),
                vru_score(d, t_close, &params),
                driver_score(t_behind, d, &params),
            ] {
                prop_assert!((0.0..=1.0).contains(&r), "score {r} out of range");
                prop_assert!(r.is_finite());
            }
        }

        #[test]
        fn scores_are_monotone(
            a in -30.0f64..30.0,
            b in -30.0f64..30.0,
            t1 in 0.0f64..100.0,
            t2 in 0.0f64..100.0,
        ) {
            let params = p();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // nondecreasing in lateral displacement / gap
            prop_assert!(policymaker_score(lo, params.k1) <= policymaker_score(hi, params.k1));
            prop_assert!(
                vru_safety_score(lo.max(0.0), params.d_th_vru, params.k2)
                    <= vru_safety_score(hi.max(0.0), params.d_th_vru, params.k2)
            );
            // nonincraesing in the clocks at a fixed close gap
            let (tlo, thi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(vru_comfort_score(thi, 4.0, &params) <= vru_comfort_score(tlo, 4.0, &params));
            prop_assert!(driver_score(thi, 6.0, &params) <= driver_score(tlo, 6.0, &params));
        }

        #[test]
        fn accumulators_never_decrease(
            steps in proptest::collection::vec((0.0f64..50.0, 0.0f64..50.0), 1..50)
        ) {
            let params = p();
            let mut acc = ReasonAccumulators::default();
            let cyclist = CyclistState { x: 25.0, y: -1.75, speed: 0.0 };
            let mut prev = acc;
            for (x, y) in steps {
                let ego = VehicleState::new(x, y.min(1.75) - 1.75, 0.0, 3.0);
                update_accumulators(&mut acc, &ego, &cyclist, &params, 0.1);
                prop_assert!(acc.t_close_vru >= prev.t_close_vru);
                prop_assert!(acc.t_behind_driver >= prev.t_behind_driver);
                prev = acc;
            }
        }
    }
}
