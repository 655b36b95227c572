//! Occupancy, clearance and traffic-rule grid over the road.
//!
//! Cells are centered on lattice nodes. The grid is anchored at the right
//! lane center so that lane centers land exactly on nodes (for the default
//! geometry), and covers the full paved width plus the road length.
//! Obstacles are inflated disks; the clearance value stored per cell is the
//! exact Euclidean distance from the cell center to the nearest inflated
//! footprint, zero inside one.

use crate::scenario::RoadGeometry;

/// A circular obstacle footprint (already inflated by whatever margin the
/// caller wants).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// What the field knows about one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInfo {
    pub obstacle: bool,
    /// Meters to the nearest obstacle footprint, 0 inside one, infinite on
    /// an obstacle-free field.
    pub clearance: f64,
    /// True in the opposing lane (above the centerline).
    pub prohibited: bool,
}

#[derive(Debug, Clone)]
pub struct OccupancyField {
    pub resolution: f64,
    /// World position of node (0, 0).
    origin: (f64, f64),
    ix_min: i32,
    ix_max: i32,
    iy_min: i32,
    iy_max: i32,
    nx: usize,
    obstacle: Vec<bool>,
    clearance: Vec<f64>,
    prohibited: Vec<bool>,
}

impl OccupancyField {
    pub fn for_road(road: &RoadGeometry, obstacles: &[Disk], resolution: f64) -> Self {
        let origin = (0.0, road.centerline_y - 0.5 * road.lane_width);
        let ix_min = 0;
        let ix_max = (road.road_length / resolution).floor() as i32;
        // widest |iy| with the node still on the pavement
        let mut iy_min = 0;
        while (origin.1 + (iy_min - 1) as f64 * resolution - road.centerline_y).abs()
            <= road.lane_width
        {
            iy_min -= 1;
        }
        let mut iy_max = 0;
        while (origin.1 + (iy_max + 1) as f64 * resolution - road.centerline_y).abs()
            <= road.lane_width
        {
            iy_max += 1;
        }

        let nx = (ix_max - ix_min + 1) as usize;
        let ny = (iy_max - iy_min + 1) as usize;
        let mut obstacle = vec![false; nx * ny];
        let mut clearance = vec![f64::INFINITY; nx * ny];
        let mut prohibited = vec![false; nx * ny];

        for iy in iy_min..=iy_max {
            for ix in ix_min..=ix_max {
                let x = origin.0 + ix as f64 * resolution;
                let y = origin.1 + iy as f64 * resolution;
                let idx = (iy - iy_min) as usize * nx + (ix - ix_min) as usize;
                prohibited[idx] = y > road.centerline_y;
                for d in obstacles {
                    let gap = ((x - d.x).powi(2) + (y - d.y).powi(2)).sqrt() - d.radius;
                    if gap <= 0.0 {
                        obstacle[idx] = true;
                    }
                    clearance[idx] = clearance[idx].min(gap.max(0.0));
                }
            }
        }

        Self {
            resolution,
            origin,
            ix_min,
            ix_max,
            iy_min,
            iy_max,
            nx,
            obstacle,
            clearance,
            prohibited,
        }
    }

    pub fn in_bounds(&self, ix: i32, iy: i32) -> bool {
        ix >= self.ix_min && ix <= self.ix_max && iy >= self.iy_min && iy <= self.iy_max
    }

    pub fn node_position(&self, ix: i32, iy: i32) -> (f64, f64) {
        (
            self.origin.0 + ix as f64 * self.resolution,
            self.origin.1 + iy as f64 * self.resolution,
        )
    }

    /// Nearest node indices for a world point (may be out of bounds).
    pub fn node_at(&self, x: f64, y: f64) -> (i32, i32) {
        (
            ((x - self.origin.0) / self.resolution).round() as i32,
            ((y - self.origin.1) / self.resolution).round() as i32,
        )
    }

    pub fn cell(&self, ix: i32, iy: i32) -> Option<CellInfo> {
        if !self.in_bounds(ix, iy) {
            return None;
        }
        let idx = (iy - self.iy_min) as usize * self.nx + (ix - self.ix_min) as usize;
        Some(CellInfo {
            obstacle: self.obstacle[idx],
            clearance: self.clearance[idx],
            prohibited: self.prohibited[idx],
        })
    }

    /// Cell lookup for a world point; None when the point is off the grid.
    pub fn query(&self, x: f64, y: f64) -> Option<CellInfo> {
        let (ix, iy) = self.node_at(x, y);
        self.cell(ix, iy)
    }

    pub fn ix_range(&self) -> (i32, i32) {
        (self.ix_min, self.ix_max)
    }

    pub fn iy_range(&self) -> (i32, i32) {
        (self.iy_min, self.iy_max)
    }
}
