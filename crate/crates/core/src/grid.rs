//! Scene geometry shared by the solver, the wall rasterizer and the radar
//! model.
//!
//! The scene is the ground plane spanned by x (cross-range, centered on the
//! radar) and z (range, starting at 0). Interior grid node `(i, k)` sits at
//! `x = -x_extent / 2 + i * cell_size`, `z = k * cell_size`.

use serde::{Deserialize, Serialize};

/// Speed of light used throughout, m/s.
pub const C0: f64 = 2.998e8;
pub const EPS0: f64 = 8.854_187_817e-12;
pub const MU0: f64 = 1.256_637_061_4e-6;
/// Free-space wave impedance, ohms.
pub const ETA0: f64 = 376.730_313;

pub const DEFAULT_CARRIER: f64 = 2.4e9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Total span along x, centered on x = 0.
    pub x_extent: f64,
    /// Span along z starting at z = 0.
    pub z_extent: f64,
    pub cell_size: f64,
    pub dt: f64,
    pub duration: f64,
    pub pml_thickness: f64,
    pub carrier_freq: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            x_extent: 4.5,
            z_extent: 6.5,
            cell_size: 0.0125,
            dt: 2.0e-11,
            duration: 6.54e-8,
            pml_thickness: 2.0 * C0 / DEFAULT_CARRIER,
            carrier_freq: DEFAULT_CARRIER,
        }
    }
}

impl GridConfig {
    pub fn wavelength(&self) -> f64 {
        C0 / self.carrier_freq
    }

    /// Largest stable time step of the 2D Yee scheme.
    pub fn courant_limit(&self) -> f64 {
        self.cell_size / (C0 * std::f64::consts::SQRT_2)
    }

    pub fn satisfies_courant(&self) -> bool {
        self.dt > 0.0 && self.dt <= self.courant_limit()
    }

    /// Interior node counts `(nx, nz)`.
    pub fn interior_cells(&self) -> (usize, usize) {
        (
            (self.x_extent / self.cell_size).round() as usize,
            (self.z_extent / self.cell_size).round() as usize,
        )
    }

    pub fn pml_cells(&self) -> usize {
        (self.pml_thickness / self.cell_size).round() as usize
    }

    /// Number of leapfrog steps covering `duration`.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn geometry(&self) -> MapGeometry {
        let (nx, nz) = self.interior_cells();
        MapGeometry {
            nx,
            nz,
            cell_size: self.cell_size,
            x_min: -self.x_extent / 2.0,
            z_min: 0.0,
        }
    }
}

/// Placement of the interior node lattice in scene coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapGeometry {
    pub nx: usize,
    pub nz: usize,
    pub cell_size: f64,
    pub x_min: f64,
    pub z_min: f64,
}

impl MapGeometry {
    /// Geometry implied by node counts and cell size alone (x centered, z from 0).
    pub fn centered(nx: usize, nz: usize, cell_size: f64) -> Self {
        MapGeometry {
            nx,
            nz,
            cell_size,
            x_min: -(nx as f64) * cell_size / 2.0,
            z_min: 0.0,
        }
    }

    pub fn node_position(&self, i: usize, k: usize) -> [f64; 2] {
        [
            self.x_min + i as f64 * self.cell_size,
            self.z_min + k as f64 * self.cell_size,
        ]
    }

    /// Nearest interior node to a scene point, if the point is inside.
    pub fn nearest_node(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fi = (p[0] - self.x_min) / self.cell_size;
        let fk = (p[1] - self.z_min) / self.cell_size;
        if !self.contains(p) {
            return None;
        }
        Some((
            (fi.round() as usize).min(self.nx - 1),
            (fk.round() as usize).min(self.nz - 1),
        ))
    }

    /// True when `p` lies within the convex hull of the interior nodes.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let fi = (p[0] - self.x_min) / self.cell_size;
        let fk = (p[1] - self.z_min) / self.cell_size;
        fi.is_finite()
            && fk.is_finite()
            && fi >= 0.0
            && fk >= 0.0
            && fi <= (self.nx - 1) as f64
            && fk <= (self.nz - 1) as f64
    }

    /// Strictly inside the hull, away from its boundary.
    pub fn contains_strictly(&self, p: [f64; 2]) -> bool {
        let fi = (p[0] - self.x_min) / self.cell_size;
        let fk = (p[1] - self.z_min) / self.cell_size;
        fi > 0.0 && fk > 0.0 && fi < (self.nx - 1) as f64 && fk < (self.nz - 1) as f64
    }
}
