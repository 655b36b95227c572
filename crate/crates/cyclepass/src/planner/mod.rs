//! Global route planning: lattice A* over motion primitives.
//!
//! The planner searches a 4-dimensional lattice (grid position, discrete
//! heading, incoming curvature) with constant-curvature arc primitives.
//! Edge cost is the weighted sum
//!
//! ```text
//!   w1 * arc_length                       path length
//! + w2 * |kappa - kappa_prev|             smoothness
//! + w3 * sum max(0, d_safe - clearance)^2 obstacle proximity, per sample
//! + w4 * (# prohibited samples)           traffic rule (opposing lane)
//! ```
//!
//! and infinite when any sample lands inside an obstacle or off the grid.
//! The traffic-rule term is what the supervision layer relaxes when it asks
//! for a replan: with the default w4 the opposing lane is effectively
//! fenced off, with the relaxed value a short excursion is affordable.
//!
//! The A* heuristic is Euclidean distance times w1, deflated by the worst
//! arc-to-lattice-displacement ratio of the primitive set. End-pose
//! snapping can credit an edge with slightly more lattice displacement than
//! its true arc length, and without the deflation that would make the
//! heuristic inadmissible.

pub mod occupancy;
pub mod primitives;

pub use occupancy::{CellInfo, Disk, OccupancyField};
pub use primitives::{generate_primitives, MotionPrimitive, PrimitiveSet};

use crate::scenario::Goal;
use crate::state::{wrap_angle, BicycleParams, VehicleState};
use std::collections::{BinaryHeap, HashMap};

/// Lattice geometry, cost weights and profile settings for the planner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    /// Traffic-rule weight for nominal (goal-directed) planning.
    pub w4: f64,
    /// Traffic-rule weight used when a replan is triggered.
    pub replan_w4: f64,
    pub grid_resolution: f64,
    pub heading_count: usize,
    pub primitive_length: f64,
    /// Curvature magnitudes; 0 and the signed pairs are generated from
    /// these.
    pub curvatures: Vec<f64>,
    /// Pose sample spacing along primitives, meters.
    pub sample_spacing: f64,
    /// Clearance below which the obstacle penalty starts, meters.
    pub safe_clearance: f64,
    /// Inflation radius applied to the cyclist footprint, meters.
    pub obstacle_inflation: f64,
    /// How far ahead, in seconds, a replan blocks the cyclist's predicted
    /// positions. Zero plans around the current position only, which makes
    /// the path merge back into a spot the cyclist will meanwhile have
    /// reached.
    pub replan_lookahead: f64,
    /// Comfortable deceleration for the end-of-path speed ramp, m/s^2.
    pub ramp_decel: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 5.0,
            w3: 10.0,
            w4: 1000.0,
            replan_w4: 2.0,
            grid_resolution: 0.5,
            heading_count: 16,
            primitive_length: 2.0,
            curvatures: vec![0.05, 0.1, 0.15],
            sample_spacing: 0.25,
            safe_clearance: 3.0,
            obstacle_inflation: 1.5,
            replan_lookahead: 10.0,
            ramp_decel: 2.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self, params: &BicycleParams) -> Result<(), String> {
        for (name, v) in [
            ("w1", self.w1),
            ("grid_resolution", self.grid_resolution),
            ("primitive_length", self.primitive_length),
            ("sample_spacing", self.sample_spacing),
            ("safe_clearance", self.safe_clearance),
            ("obstacle_inflation", self.obstacle_inflation),
            ("ramp_decel", self.ramp_decel),
            ("replan_w4", self.replan_w4),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0"));
            }
        }
        for (name, v) in [("w2", self.w2), ("w3", self.w3), ("w4", self.w4)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0"));
            }
        }
        if self.heading_count < 4 {
            return Err("heading_count must be >= 4".into());
        }
        if !(self.replan_lookahead >= 0.0 && self.replan_lookahead.is_finite()) {
            return Err("replan_lookahead must be >= 0".into());
        }
        let kappa_max = params.delta_max.tan() / params.wheelbase;
        for &k in &self.curvatures {
            if !(k > 0.0 && k <= kappa_max) {
                return Err(format!(
                    "curvatures must lie in (0, tan(delta_max)/wheelbase = {kappa_max:.4}]; got {k}"
                ));
            }
        }
        Ok(())
    }

    /// Cost weights for nominal planning.
    pub fn weights(&self) -> PlannerWeights {
        PlannerWeights {
            w1: self.w1,
            w2: self.w2,
            w3: self.w3,
            w4: self.w4,
        }
    }

    /// Cost weights with the traffic-rule term relaxed for a replan.
    pub fn replan_weights(&self) -> PlannerWeights {
        PlannerWeights {
            w1: self.w1,
            w2: self.w2,
            w3: self.w3,
            w4: self.replan_w4,
        }
    }
}

/// The four edge-cost weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("no feasible path to the goal")]
    NoPath,
    #[error("curvature {kappa} exceeds the steering limit (max {kappa_max:.4} 1/m)")]
    InfeasibleCurvature { kappa: f64, kappa_max: f64 },
}

/// A search state: lattice cell, discrete heading, and the curvature the
/// node was entered with (the smoothness term needs it, so it is part of
/// the state).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SearchNode {
    pub ix: i32,
    pub iy: i32,
    pub ih: u8,
    pub ik: u8,
}

/// Cost of placing `prim` with its start node at `origin`, arriving with
/// `prev_curvature`. Infinite when any sample is blocked or off the grid.
pub fn edge_cost(
    prim: &MotionPrimitive,
    origin: (f64, f64),
    prev_curvature: f64,
    field: &OccupancyField,
    weights: &PlannerWeights,
    safe_clearance: f64,
) -> f64 {
    let mut cost =
        weights.w1 * prim.arc_length + weights.w2 * (prim.curvature - prev_curvature).abs();
    for &(dx, dy, _) in &prim.samples {
        let Some(cell) = field.query(origin.0 + dx, origin.1 + dy) else {
            return f64::INFINITY;
        };
        if cell.obstacle {
            return f64::INFINITY;
        }
        let deficit = (safe_clearance - cell.clearance).max(0.0);
        cost += weights.w3 * deficit * deficit;
        if cell.prohibited {
            cost += weights.w4;
        }
    }
    cost
}

/// The implicit search graph: primitives applied on the occupancy grid.
pub struct LatticeGraph<'a> {
    field: &'a OccupancyField,
    prims: &'a PrimitiveSet,
    weights: PlannerWeights,
    safe_clearance: f64,
    goal: Goal,
    /// Admissibility deflation: min over primitives of arc length divided
    /// by snapped lattice displacement.
    eta: f64,
}

impl<'a> LatticeGraph<'a> {
    pub fn new(
        field: &'a OccupancyField,
        prims: &'a PrimitiveSet,
        weights: PlannerWeights,
        safe_clearance: f64,
        goal: Goal,
    ) -> Self {
        let mut eta = 1.0f64;
        for p in prims.all() {
            let disp = (((p.di as f64) * prims.resolution).powi(2)
                + ((p.dj as f64) * prims.resolution).powi(2))
            .sqrt();
            if disp > 0.0 {
                eta = eta.min(p.arc_length / disp);
            }
        }
        Self {
            field,
            prims,
            weights,
            safe_clearance,
            goal,
            eta,
        }
    }

    /// Nearest lattice node to a vehicle pose, entered straight.
    pub fn snap(&self, state: &VehicleState) -> SearchNode {
        let (ix, iy) = self.field.node_at(state.x, state.y);
        let step = 2.0 * std::f64::consts::PI / self.prims.heading_count as f64;
        let ih = (state.theta.rem_euclid(2.0 * std::f64::consts::PI) / step).round() as i64;
        SearchNode {
            ix,
            iy,
            ih: (ih.rem_euclid(self.prims.heading_count as i64)) as u8,
            ik: self.prims.straight_index() as u8,
        }
    }

    pub fn node_pose(&self, n: &SearchNode) -> (f64, f64, f64) {
        let (x, y) = self.field.node_position(n.ix, n.iy);
        (x, y, wrap_angle(self.prims.heading_angle(n.ih as usize)))
    }

    pub fn is_goal(&self, n: &SearchNode) -> bool {
        let (x, y) = self.field.node_position(n.ix, n.iy);
        ((x - self.goal.x).powi(2) + (y - self.goal.y).powi(2)).sqrt() <= self.goal.tolerance
    }

    pub fn heuristic(&self, n: &SearchNode) -> f64 {
        let (x, y) = self.field.node_position(n.ix, n.iy);
        let d = ((x - self.goal.x).powi(2) + (y - self.goal.y).powi(2)).sqrt();
        self.eta * self.weights.w1 * (d - self.goal.tolerance).max(0.0)
    }

    /// Expand a node: (successor, primitive index, edge cost) for every
    /// feasible primitive.
    pub fn successors(&self, n: &SearchNode) -> Vec<(SearchNode, usize, f64)> {
        let origin = self.field.node_position(n.ix, n.iy);
        let prev_kappa = self.prims.curvatures[n.ik as usize];
        let mut out = Vec::new();
        for (prim_index, prim) in self.prims.indexed_for_heading(n.ih as usize) {
            let succ = SearchNode {
                ix: n.ix + prim.di,
                iy: n.iy + prim.dj,
                ih: prim.end_heading_index as u8,
                ik: prim.curvature_index as u8,
            };
            if !self.field.in_bounds(succ.ix, succ.iy) {
                continue;
            }
            let cost = edge_cost(
                prim,
                origin,
                prev_kappa,
                self.field,
                &self.weights,
                self.safe_clearance,
            );
            if cost.is_finite() {
                out.push((succ, prim_index, cost));
            }
        }
        out
    }
}

/// A solved search: visited nodes plus the primitive applied at each step.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub nodes: Vec<SearchNode>,
    pub prims: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    f: f64,
    h: f64,
    seq: u64,
    g: f64,
    node: SearchNode,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // BinaryHeap is a max-heap; invert so the smallest f wins, ties broken
    // by lower heuristic, then by insertion order
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.total_cmp(&self.h))
            .then(other.seq.cmp(&self.seq))
    }
}

/// A* over the lattice graph.
pub fn astar(graph: &LatticeGraph, start: SearchNode) -> Result<SearchResult, PlanError> {
    let mut open = BinaryHeap::new();
    let mut best_g: HashMap<SearchNode, f64> = HashMap::new();
    let mut parent: HashMap<SearchNode, (SearchNode, usize)> = HashMap::new();
    let mut seq = 0u64;

    let h0 = graph.heuristic(&start);
    best_g.insert(start, 0.0);
    open.push(HeapEntry {
        f: h0,
        h: h0,
        seq,
        g: 0.0,
        node: start,
    });

    while let Some(entry) = open.pop() {
        if entry.g > best_g[&entry.node] {
            continue;
        }
        if graph.is_goal(&entry.node) {
            let mut nodes = vec![entry.node];
            let mut prims = Vec::new();
            let mut cur = entry.node;
            while let Some(&(prev, prim)) = parent.get(&cur) {
                nodes.push(prev);
                prims.push(prim);
                cur = prev;
            }
            nodes.reverse();
            prims.reverse();
            return Ok(SearchResult {
                nodes,
                prims,
                cost: entry.g,
            });
        }
        for (succ, prim, cost) in graph.successors(&entry.node) {
            let g = entry.g + cost;
            if g < *best_g.get(&succ).unwrap_or(&f64::INFINITY) {
                best_g.insert(succ, g);
                parent.insert(succ, (entry.node, prim));
                let h = graph.heuristic(&succ);
                seq += 1;
                open.push(HeapEntry {
                    f: g + h,
                    h,
                    seq,
                    g,
                    node: succ,
                });
            }
        }
    }
    Err(PlanError::NoPath)
}

/// One pose sample of a planned path with its reference speed and arc
/// length coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v_ref: f64,
    /// Cumulative arc length from the path start, meters.
    pub s: f64,
}

/// A planned geometric path with a speed profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    /// Bumped by the simulator every time a replan swaps the path.
    pub id: u32,
    pub samples: Vec<PathSample>,
    pub total_length: f64,
}

impl ReferencePath {
    /// Interpolated sample at arc length `s`, clamped to the path ends.
    pub fn sample_at(&self, s: f64) -> PathSample {
        let samples = &self.samples;
        if s <= 0.0 || samples.len() == 1 {
            return samples[0];
        }
        let last = samples[samples.len() - 1];
        if s >= last.s {
            return last;
        }
        let mut hi = samples.partition_point(|p| p.s < s);
        if hi == 0 {
            hi = 1;
        }
        let (a, b) = (samples[hi - 1], samples[hi]);
        let span = (b.s - a.s).max(1e-12);
        let t = ((s - a.s) / span).clamp(0.0, 1.0);
        PathSample {
            x: a.x + (b.x - a.x) * t,
            y: a.y + (b.y - a.y) * t,
            theta: a.theta + wrap_angle(b.theta - a.theta) * t,
            v_ref: a.v_ref + (b.v_ref - a.v_ref) * t,
            s,
        }
    }

    /// Index of the sample nearest to (x, y), searched forward from
    /// `from_index` only, so repeated projection cannot slide backward
    /// along the path.
    pub fn project_from(&self, from_index: usize, x: f64, y: f64) -> usize {
        let window = 80usize;
        let end = (from_index + window).min(self.samples.len() - 1);
        let mut best = from_index;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.samples[from_index..=end].iter().enumerate() {
            let d = (p.x - x).powi(2) + (p.y - y).powi(2);
            if d < best_d {
                best_d = d;
                best = from_index + i;
            }
        }
        best
    }
}

/// Plan a path from the ego pose to the goal over the given field.
///
/// The start pose is snapped to the nearest lattice node; the returned path
/// carries pose samples at the primitive sampling resolution with a speed
/// profile that holds `v_max` and ramps down to zero at the goal.
pub fn plan(
    start: &VehicleState,
    goal: &Goal,
    field: &OccupancyField,
    prims: &PrimitiveSet,
    weights: &PlannerWeights,
    config: &PlannerConfig,
    v_max: f64,
) -> Result<ReferencePath, PlanError> {
    let graph = LatticeGraph::new(field, prims, *weights, config.safe_clearance, *goal);
    let start_node = graph.snap(start);
    if !field.in_bounds(start_node.ix, start_node.iy) {
        return Err(PlanError::NoPath);
    }
    let result = astar(&graph, start_node)?;

    let mut poses: Vec<(f64, f64, f64)> = Vec::new();
    poses.push(graph.node_pose(&result.nodes[0]));
    for (node, &prim_idx) in result.nodes.iter().zip(&result.prims) {
        let (ox, oy, _) = graph.node_pose(node);
        let prim = &prims.all()[prim_idx];
        for &(dx, dy, theta) in &prim.samples {
            poses.push((ox + dx, oy + dy, wrap_angle(theta)));
        }
    }

    let mut samples = Vec::with_capacity(poses.len());
    let mut s = 0.0;
    for (i, &(x, y, theta)) in poses.iter().enumerate() {
        if i > 0 {
            let (px, py, _) = poses[i - 1];
            s += ((x - px).powi(2) + (y - py).powi(2)).sqrt();
        }
        samples.push(PathSample {
            x,
            y,
            theta,
            v_ref: 0.0,
            s,
        });
    }
    let total = s;
    // aim the braking ramp at a stop half a tolerance past the last
    // sample, so the vehicle rolls through the goal region instead of
    // stalling exactly on its edge
    let stop_s = total + 0.5 * goal.tolerance;
    for p in &mut samples {
        let braking = (2.0 * config.ramp_decel * (stop_s - p.s)).max(0.0).sqrt();
        p.v_ref = v_max.min(braking);
    }

    Ok(ReferencePath {
        id: 0,
        samples,
        total_length: total,
    })
}
