//! Constant-curvature motion primitives on a position-heading lattice.
//!
//! For every discrete start heading there is one primitive per curvature in
//! {0, +-c1, +-c2, ...}: an arc of fixed length whose end pose is snapped to
//! the nearest lattice node (position to the grid, heading to the nearest
//! discrete heading). The pre-snap sample chain is kept for cost evaluation
//! and path reconstruction.

use super::{PlanError, PlannerConfig};
use crate::state::BicycleParams;

/// One arc primitive, expressed relative to a start node at the origin with
/// discrete heading `heading_index`.
#[derive(Debug, Clone)]
pub struct MotionPrimitive {
    pub heading_index: usize,
    /// Index into the signed curvature table shared by the whole set.
    pub curvature_index: usize,
    pub curvature: f64,
    pub arc_length: f64,
    /// Poses (dx, dy, theta) sampled along the arc at the configured
    /// spacing, endpoint included, start point excluded.
    pub samples: Vec<(f64, f64, f64)>,
    /// Lattice displacement of the snapped end node.
    pub di: i32,
    pub dj: i32,
    /// Snapped end heading index, absolute.
    pub end_heading_index: usize,
}

/// All primitives of a lattice, grouped by start heading.
#[derive(Debug, Clone)]
pub struct PrimitiveSet {
    pub resolution: f64,
    pub heading_count: usize,
    /// Signed curvature table: 0 first, then +-c for each magnitude.
    pub curvatures: Vec<f64>,
    prims: Vec<MotionPrimitive>,
    by_heading: Vec<Vec<usize>>,
}

impl PrimitiveSet {
    pub fn for_heading(&self, heading_index: usize) -> impl Iterator<Item = &MotionPrimitive> {
        self.by_heading[heading_index]
            .iter()
            .map(|&i| &self.prims[i])
    }

    /// Same as [`for_heading`](Self::for_heading), paired with each
    /// primitive's index into [`all`](Self::all).
    pub fn indexed_for_heading(
        &self,
        heading_index: usize,
    ) -> impl Iterator<Item = (usize, &MotionPrimitive)> {
        self.by_heading[heading_index]
            .iter()
            .map(|&i| (i, &self.prims[i]))
    }

    pub fn all(&self) -> &[MotionPrimitive] {
        &self.prims
    }

    /// Index of the zero-curvature entry in the curvature table.
    pub fn straight_index(&self) -> usize {
        0
    }

    pub fn heading_angle(&self, index: usize) -> f64 {
        index as f64 * 2.0 * std::f64::consts::PI / self.heading_count as f64
    }
}

/// Pose along an arc of curvature `kappa` after distance `s`, starting at
/// the origin with heading `psi`.
fn arc_pose(psi: f64, kappa: f64, s: f64) -> (f64, f64, f64) {
    if kappa == 0.0 {
        (s * psi.cos(), s * psi.sin(), psi)
    } else {
        let end = psi + kappa * s;
        (
            (end.sin() - psi.sin()) / kappa,
            (psi.cos() - end.cos()) / kappa,
            end,
        )
    }
}

/// Build the primitive set for a lattice configuration, rejecting
/// curvatures the vehicle cannot track at full steering lock.
pub fn generate_primitives(
    config: &PlannerConfig,
    params: &BicycleParams,
) -> Result<PrimitiveSet, PlanError> {
    let kappa_max = params.delta_max.tan() / params.wheelbase;
    let mut curvatures = vec![0.0];
    for &c in &config.curvatures {
        if !c.is_finite() || c <= 0.0 {
            return Err(PlanError::InfeasibleCurvature {
                kappa: c,
                kappa_max,
            });
        }
        curvatures.push(c);
        curvatures.push(-c);
    }
    for &k in &curvatures {
        if k.abs() > kappa_max {
            return Err(PlanError::InfeasibleCurvature {
                kappa: k,
                kappa_max,
            });
        }
    }

    let n = config.heading_count;
    let heading_step = 2.0 * std::f64::consts::PI / n as f64;
    let sample_count = (config.primitive_length / config.sample_spacing).round() as usize;
    let mut prims = Vec::new();
    let mut by_heading = vec![Vec::new(); n];

    for (h, bucket) in by_heading.iter_mut().enumerate() {
        let psi = h as f64 * heading_step;
        for (ci, &kappa) in curvatures.iter().enumerate() {
            let samples: Vec<_> = (1..=sample_count)
                .map(|i| arc_pose(psi, kappa, i as f64 * config.sample_spacing))
                .collect();
            let (ex, ey, etheta) = arc_pose(psi, kappa, config.primitive_length);
            let di = (ex / config.grid_resolution).round() as i32;
            let dj = (ey / config.grid_resolution).round() as i32;
            let end_heading_index =
                ((etheta / heading_step).round() as i64).rem_euclid(n as i64) as usize;
            bucket.push(prims.len());
            prims.push(MotionPrimitive {
                heading_index: h,
                curvature_index: ci,
                curvature: kappa,
                arc_length: config.primitive_length,
                samples,
                di,
                dj,
                end_heading_index,
            });
        }
    }

    Ok(PrimitiveSet {
        resolution: config.grid_resolution,
        heading_count: n,
        curvatures,
        prims,
        by_heading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PlannerConfig;
    use crate::state::BicycleParams;

    fn set() -> PrimitiveSet {
        generate_primitives(&PlannerConfig::default(), &BicycleParams::default()).unwrap()
    }

    #[test]
    fn straight_primitive_runs_down_the_heading() {
        let s = set();
        let p = s.for_heading(0).find(|p| p.curvature == 0.0).unwrap();
        assert_eq!((p.di, p.dj), (4, 0));
        assert_eq!(p.end_heading_index, 0);
        let (x, y, th) = *p.samples.last().unwrap();
        assert!((x - 2.0).abs() < 1e-12 && y.abs() < 1e-12 && th.abs() < 1e-12);
    }

    #[test]
    fn curvature_changes_heading_by_kappa_times_length() {
        let s = set();
        for p in s.for_heading(0) {
            let (_, _, th) = *p.samples.last().unwrap();
            assert!((th - p.curvature * p.arc_length).abs() < 1e-12);
        }
    }

    #[test]
    fn opposite_curvatures_mirror_across_the_heading_axis() {
        let s = set();
        let pos: Vec<_> = s.for_heading(0).filter(|p| p.curvature > 0.0).collect();
        for p in pos {
            let neg = s
                .for_heading(0)
                .find(|q| q.curvature == -p.curvature)
                .unwrap();
            for (a, b) in p.samples.iter().zip(&neg.samples) {
                assert!((a.0 - b.0).abs() < 1e-12);
                assert!((a.1 + b.1).abs() < 1e-12);
                assert!((a.2 + b.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn snap_error_stays_under_half_a_cell() {
        let s = set();
        let res = s.resolution;
        for p in s.all() {
            let (ex, ey, _) = *p.samples.last().unwrap();
            assert!((ex - p.di as f64 * res).abs() <= res / 2.0 + 1e-9);
            assert!((ey - p.dj as f64 * res).abs() <= res / 2.0 + 1e-9);
        }
    }

    #[test]
    fn every_heading_gets_the_full_curvature_fan() {
        let s = set();
        for h in 0..s.heading_count {
            assert_eq!(s.for_heading(h).count(), 7);
        }
    }

    #[test]
    fn infeasible_curvature_is_rejected() {
        // tan(0.5)/2.7 ~ 0.202, so 0.5 1/m is beyond full steering lock
        let config = PlannerConfig {
            curvatures: vec![0.5],
            ..PlannerConfig::default()
        };
        let err = generate_primitives(&config, &BicycleParams::default()).unwrap_err();
        assert!(matches!(err, PlanError::InfeasibleCurvature { .. }));
    }
}
