//! Road geometry, the cyclist, and the scenario bundle.
//!
//! The road is a straight bidirectional carriageway with one lane per
//! direction. The ego vehicle's legal lane (the right lane) lies *below* the
//! centerline: y < centerline_y. The opposing lane lies above it. All
//! stakeholder scoring conventions hang off this sign choice, see
//! [`signed_lateral_displacement`].

use crate::state::{BicycleParams, VehicleState};

/// Straight two-lane road segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadGeometry {
    /// Width of each lane in meters.
    pub lane_width: f64,
    /// Length of the segment in meters, starting at x = 0.
    pub road_length: f64,
    /// y coordinate of the dividing centerline.
    pub centerline_y: f64,
}

impl Default for RoadGeometry {
    fn default() -> Self {
        Self {
            lane_width: 3.5,
            road_length: 180.0,
            centerline_y: 0.0,
        }
    }
}

impl RoadGeometry {
    /// y coordinate of the ego lane center (middle of the right lane).
    pub fn right_lane_center(&self) -> f64 {
        self.centerline_y - 0.5 * self.lane_width
    }

    /// y coordinate of the opposing lane center.
    pub fn left_lane_center(&self) -> f64 {
        self.centerline_y + 0.5 * self.lane_width
    }

    /// True if (x, y) lies inside the paved area.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && x <= self.road_length && (y - self.centerline_y).abs() <= self.lane_width
    }
}

/// Which side of the centerline a point is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    /// The ego vehicle's legal travel lane (below the centerline).
    Right,
    /// The opposing lane (above the centerline).
    Left,
    /// Exactly on the dividing line.
    Centerline,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("y = {y} is off the road (more than {lane_width} m from the centerline)")]
    OffRoad { y: f64, lane_width: f64 },
}

/// Classify a lateral position. Errors if the point is off the paved area.
pub fn lane_of(y: f64, road: &RoadGeometry) -> Result<Lane, GeometryError> {
    let off = (y - road.centerline_y).abs() > road.lane_width;
    if off {
        return Err(GeometryError::OffRoad {
            y,
            lane_width: road.lane_width,
        });
    }
    Ok(if y < road.centerline_y {
        Lane::Right
    } else if y > road.centerline_y {
        Lane::Left
    } else {
        Lane::Centerline
    })
}

/// Lateral offset from the centerline, signed so that the legal lane is
/// positive: `centerline_y - y`. This is the quantity the policymaker score
/// is built on; it goes negative the moment the ego crosses into the
/// opposing lane.
pub fn signed_lateral_displacement(y: f64, road: &RoadGeometry) -> f64 {
    road.centerline_y - y
}

/// Euclidean distance between the ego reference point (rear axle) and the
/// cyclist.
pub fn ego_cyclist_distance(ego: &VehicleState, cyclist: &CyclistState) -> f64 {
    ((ego.x - cyclist.x).powi(2) + (ego.y - cyclist.y).powi(2)).sqrt()
}

/// The cyclist rides straight down the right lane at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclistState {
    pub x: f64,
    pub y: f64,
    /// Forward speed in m/s, along +x.
    pub speed: f64,
}

impl Default for CyclistState {
    fn default() -> Self {
        Self {
            x: 25.0,
            y: -1.75,
            speed: 3.0,
        }
    }
}

/// Goal point with an arrival tolerance radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Goal {
    pub x: f64,
    pub y: f64,
    pub tolerance: f64,
}

impl Default for Goal {
    fn default() -> Self {
        Self {
            x: 170.0,
            y: -1.75,
            tolerance: 1.0,
        }
    }
}

/// Everything that defines one run: road, actors, scoring parameters,
/// planner and controller settings, and the simulation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub road: RoadGeometry,
    pub ego_start: VehicleState,
    pub bicycle: BicycleParams,
    /// Ego speed limit used by the velocity profile, m/s.
    pub v_max: f64,
    pub goal: Goal,
    pub cyclist: CyclistState,
    pub reasons: crate::reasons::ReasonParams,
    pub thresholds: crate::reasons::TriggerThresholds,
    pub planner: crate::planner::PlannerConfig,
    pub mpc: crate::mpc::MpcConfig,
    /// Hard cap on simulated time in seconds.
    pub sim_duration_max: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            road: RoadGeometry::default(),
            ego_start: VehicleState::new(0.0, -1.75, 0.0, 0.0),
            bicycle: BicycleParams::default(),
            v_max: 8.0,
            goal: Goal::default(),
            cyclist: CyclistState::default(),
            reasons: crate::reasons::ReasonParams::default(),
            thresholds: crate::reasons::TriggerThresholds::default(),
            planner: crate::planner::PlannerConfig::default(),
            mpc: crate::mpc::MpcConfig::default(),
            sim_duration_max: 60.0,
        }
    }
}

impl Scenario {
    /// Check cross-field consistency. Error messages name the offending
    /// configuration key.
    pub fn validate(&self) -> Result<(), String> {
        fn positive(name: &str, v: f64) -> Result<(), String> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be > 0"))
            }
        }
        positive("lane_width", self.road.lane_width)?;
        positive("road_length", self.road.road_length)?;
        positive("v_max", self.v_max)?;
        positive("goal_tolerance", self.goal.tolerance)?;
        positive("wheelbase", self.bicycle.wheelbase)?;
        positive("rear_axle_to_cg", self.bicycle.rear_axle_to_cg)?;
        positive("ts", self.bicycle.ts)?;
        positive("delta_max", self.bicycle.delta_max)?;
        positive("a_max", self.bicycle.a_max)?;
        if self.bicycle.a_min >= 0.0 {
            return Err("a_min must be < 0".into());
        }
        if self.bicycle.delta_max >= std::f64::consts::FRAC_PI_2 {
            return Err("delta_max must be < pi/2".into());
        }
        positive("sim_duration_max", self.sim_duration_max)?;
        if self.cyclist.speed < 0.0 {
            return Err("cyclist speed must be >= 0".into());
        }
        if !self.road.contains(self.ego_start.x, self.ego_start.y) {
            return Err("ego start must lie on the road".into());
        }
        if !self.road.contains(self.goal.x, self.goal.y) {
            return Err("goal must lie on the road".into());
        }
        self.reasons.validate()?;
        self.thresholds.validate()?;
        self.planner.validate(&self.bicycle)?;
        self.mpc.validate()?;
        Ok(())
    }
}
