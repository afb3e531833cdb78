//! Catalog of inhomogeneous wall cases and their rasterization onto the
//! FDTD grid.
//!
//! Two wall families are enumerated: three-layer dielectric walls
//! (`outer | inner | outer` along z) and homogeneous walls perforated by a
//! row of rectangular air gaps. Each family contributes 60 cases.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridConfig;

/// Air-gap extent along x, meters.
pub const GAP_WIDTH: f64 = 0.25;
/// Air-gap extent along z, meters.
pub const GAP_DEPTH: f64 = 0.10;

const ML_INNER_EPS: [f64; 5] = [4.0, 5.0, 6.0, 7.0, 8.0];
const ML_OUTER_EPS: [f64; 3] = [2.0, 2.5, 3.0];
const ML_INNER_THICKNESS: [f64; 2] = [0.15, 0.20];
const ML_OUTER_THICKNESS: [f64; 2] = [0.05, 0.10];
const AG_EPS_COUNT: usize = 10;
const AG_EPS_RANGE: (f64, f64) = (4.0, 8.0);
const AG_THICKNESS: [f64; 2] = [0.20, 0.30];
const AG_GAP_COUNTS: [u32; 3] = [3, 4, 5];

#[derive(Debug, Error, PartialEq)]
pub enum WallError {
    #[error(
        "wall depth {depth_cells} cells at front cell {front} exceeds interior depth {nz} cells"
    )]
    TooDeep {
        front: usize,
        depth_cells: usize,
        nz: usize,
    },
    #[error("wall front z = {0} m lies outside the interior")]
    FrontOutside(f64),
    #[error("air gap depth {gap} m exceeds wall thickness {thickness} m")]
    GapDeeperThanWall { gap: f64, thickness: f64 },
    #[error("{count} gaps of {width_cells} cells do not fit into {nx} cells of wall width")]
    GapsTooWide {
        count: u32,
        width_cells: usize,
        nx: usize,
    },
    #[error("invalid wall parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    Multilayer,
    AirGap,
}

impl WallKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WallKind::Multilayer => "multilayer",
            WallKind::AirGap => "air_gap",
        }
    }
}

/// Dielectric layout of a wall. All lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WallLayout {
    /// `outer | inner | outer` slabs stacked along z.
    Multilayer {
        outer_eps: f64,
        inner_eps: f64,
        outer_thickness: f64,
        inner_thickness: f64,
    },
    /// Homogeneous slab with `gap_count` rectangular air gaps spaced evenly
    /// along x and centered in z.
    AirGap {
        eps: f64,
        thickness: f64,
        gap_count: u32,
        gap_width: f64,
        gap_depth: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallCase {
    pub id: String,
    #[serde(flatten)]
    pub layout: WallLayout,
}

impl WallCase {
    /// Gap-free homogeneous slab. Not part of the catalog; used for
    /// validating the solver against closed-form slab transmission.
    pub fn homogeneous(eps: f64, thickness: f64) -> Self {
        WallCase {
            id: format!("slab_e{eps}_t{thickness}"),
            layout: WallLayout::AirGap {
                eps,
                thickness,
                gap_count: 0,
                gap_width: GAP_WIDTH,
                gap_depth: GAP_DEPTH,
            },
        }
    }

    pub fn kind(&self) -> WallKind {
        match self.layout {
            WallLayout::Multilayer { .. } => WallKind::Multilayer,
            WallLayout::AirGap { .. } => WallKind::AirGap,
        }
    }

    /// Total wall thickness along z in meters.
    pub fn depth(&self) -> f64 {
        match self.layout {
            WallLayout::Multilayer {
                outer_thickness,
                inner_thickness,
                ..
            } => 2.0 * outer_thickness + inner_thickness,
            WallLayout::AirGap { thickness, .. } => thickness,
        }
    }

    /// Wall thickness in whole cells after per-layer rounding.
    pub fn depth_cells(&self, cell_size: f64) -> usize {
        match self.layout {
            WallLayout::Multilayer {
                outer_thickness,
                inner_thickness,
                ..
            } => 2 * cells(outer_thickness, cell_size) + cells(inner_thickness, cell_size),
            WallLayout::AirGap { thickness, .. } => cells(thickness, cell_size),
        }
    }

    /// Distinct relative permittivities that may appear in the rasterized patch.
    pub fn permittivities(&self) -> Vec<f64> {
        match self.layout {
            WallLayout::Multilayer {
                outer_eps,
                inner_eps,
                ..
            } => vec![1.0, outer_eps, inner_eps],
            WallLayout::AirGap { eps, .. } => vec![1.0, eps],
        }
    }

    fn validate(&self) -> Result<(), WallError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(WallError::InvalidParameter(format!("{name} = {v}")))
            }
        };
        let permittivity = |name: &str, v: f64| {
            if v.is_finite() && v >= 1.0 {
                Ok(())
            } else {
                Err(WallError::InvalidParameter(format!("{name} = {v}")))
            }
        };
        match self.layout {
            WallLayout::Multilayer {
                outer_eps,
                inner_eps,
                outer_thickness,
                inner_thickness,
            } => {
                permittivity("outer_eps", outer_eps)?;
                permittivity("inner_eps", inner_eps)?;
                positive("outer_thickness", outer_thickness)?;
                positive("inner_thickness", inner_thickness)
            }
            WallLayout::AirGap {
                eps,
                thickness,
                gap_width,
                gap_depth,
                ..
            } => {
                permittivity("eps", eps)?;
                positive("thickness", thickness)?;
                positive("gap_width", gap_width)?;
                positive("gap_depth", gap_depth)?;
                if gap_depth > thickness {
                    return Err(WallError::GapDeeperThanWall {
                        gap: gap_depth,
                        thickness,
                    });
                }
                Ok(())
            }
        }
    }
}

fn cells(length: f64, cell_size: f64) -> usize {
    (length / cell_size).round() as usize
}

/// The 120 catalog cases: 60 multilayer followed by 60 air-gap walls, each
/// family in lexicographic parameter order.
pub fn enumerate_cases() -> Vec<WallCase> {
    let mut cases = Vec::with_capacity(120);
    for &inner_eps in &ML_INNER_EPS {
        for &outer_eps in &ML_OUTER_EPS {
            for &inner_thickness in &ML_INNER_THICKNESS {
                for &outer_thickness in &ML_OUTER_THICKNESS {
                    cases.push(WallCase {
                        id: format!("ml-{:03}", cases.len() + 1),
                        layout: WallLayout::Multilayer {
                            outer_eps,
                            inner_eps,
                            outer_thickness,
                            inner_thickness,
                        },
                    });
                }
            }
        }
    }
    let (lo, hi) = AG_EPS_RANGE;
    let step = (hi - lo) / (AG_EPS_COUNT - 1) as f64;
    let mut n = 0;
    for k in 0..AG_EPS_COUNT {
        let eps = lo + step * k as f64;
        for &thickness in &AG_THICKNESS {
            for &gap_count in &AG_GAP_COUNTS {
                n += 1;
                cases.push(WallCase {
                    id: format!("ag-{n:03}"),
                    layout: WallLayout::AirGap {
                        eps,
                        thickness,
                        gap_count,
                        gap_width: GAP_WIDTH,
                        gap_depth: GAP_DEPTH,
                    },
                });
            }
        }
    }
    cases
}

pub fn find_case(id: &str) -> Option<WallCase> {
    enumerate_cases().into_iter().find(|c| c.id == id)
}

/// Catalog as a JSON array for embedding into manifests.
pub fn catalog_json(cases: &[WallCase]) -> serde_json::Result<String> {
    serde_json::to_string_pretty(cases)
}

/// Relative permittivity over the wall rows of the interior.
///
/// `eps` is row-major with `depth` rows (z) of `nx` interior columns (x);
/// row 0 sits at interior z index `front`.
#[derive(Clone, Debug, PartialEq)]
pub struct WallPatch {
    pub front: usize,
    pub depth: usize,
    pub nx: usize,
    pub eps: Vec<f64>,
}

impl WallPatch {
    pub fn at(&self, i: usize, row: usize) -> f64 {
        self.eps[row * self.nx + i]
    }

    /// Permittivity profile along z of column `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.depth).map(|r| self.at(i, r)).collect()
    }
}

/// Rasterizes `case` into interior cells with its front face at `front_z`.
pub fn rasterize(case: &WallCase, grid: &GridConfig, front_z: f64) -> Result<WallPatch, WallError> {
    case.validate()?;
    let dx = grid.cell_size;
    let (nx, nz) = grid.interior_cells();
    if !(front_z.is_finite() && front_z >= 0.0) {
        return Err(WallError::FrontOutside(front_z));
    }
    let front = cells(front_z, dx);
    if front >= nz {
        return Err(WallError::FrontOutside(front_z));
    }
    let depth = case.depth_cells(dx);
    if front + depth > nz {
        return Err(WallError::TooDeep {
            front,
            depth_cells: depth,
            nz,
        });
    }

    let mut eps = vec![1.0; depth * nx];
    match case.layout {
        WallLayout::Multilayer {
            outer_eps,
            inner_eps,
            outer_thickness,
            inner_thickness,
        } => {
            let outer = cells(outer_thickness, dx);
            let inner = cells(inner_thickness, dx);
            for row in 0..depth {
                let value = if row < outer || row >= outer + inner {
                    outer_eps
                } else {
                    inner_eps
                };
                eps[row * nx..(row + 1) * nx].fill(value);
            }
        }
        WallLayout::AirGap {
            eps: slab_eps,
            gap_count,
            gap_width,
            gap_depth,
            ..
        } => {
            eps.fill(slab_eps);
            let gap_w = cells(gap_width, dx);
            let gap_d = cells(gap_depth, dx).min(depth);
            if gap_count as usize * gap_w > nx {
                return Err(WallError::GapsTooWide {
                    count: gap_count,
                    width_cells: gap_w,
                    nx,
                });
            }
            let z0 = (depth - gap_d) / 2;
            let pitch = nx as f64 / gap_count.max(1) as f64;
            for g in 0..gap_count as usize {
                let center = (g as f64 + 0.5) * pitch;
                let x0 = (center - gap_w as f64 / 2.0).round().max(0.0) as usize;
                let x0 = x0.min(nx - gap_w);
                for row in z0..z0 + gap_d {
                    eps[row * nx + x0..row * nx + x0 + gap_w].fill(1.0);
                }
            }
        }
    }
    Ok(WallPatch {
        front,
        depth,
        nx,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridConfig {
        GridConfig::default()
    }

    #[test]
    fn family_counts() {
        let cases = enumerate_cases();
        assert_eq!(cases.len(), 120);
        let ml = cases
            .iter()
            .filter(|c| c.kind() == WallKind::Multilayer)
            .count();
        assert_eq!(ml, 5 * 3 * 2 * 2);
        assert_eq!(cases.len() - ml, 10 * 2 * 3);
    }

    #[test]
    fn ids_unique_and_stable() {
        let a = enumerate_cases();
        let b = enumerate_cases();
        assert_eq!(a, b);
        let mut ids: Vec<_> = a.iter().map(|c| c.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 120);
        assert_eq!(a[0].id, "ml-001");
        assert_eq!(a[60].id, "ag-001");
    }

    #[test]
    fn air_gap_eps_endpoints_inclusive() {
        let eps: Vec<f64> = enumerate_cases()
            .iter()
            .filter_map(|c| match c.layout {
                WallLayout::AirGap { eps, .. } => Some(eps),
                _ => None,
            })
            .collect();
        assert_eq!(eps.first().copied(), Some(4.0));
        assert_eq!(eps.last().copied(), Some(8.0));
    }

    #[test]
    fn multilayer_profile_thicknesses() {
        let case = WallCase {
            id: "t".into(),
            layout: WallLayout::Multilayer {
                outer_eps: 2.0,
                inner_eps: 4.0,
                outer_thickness: 0.05,
                inner_thickness: 0.15,
            },
        };
        let patch = rasterize(&case, &grid(), 1.0).unwrap();
        assert_eq!(patch.depth, 20);
        assert_eq!(patch.front, 80);
        let col = patch.column(100);
        assert!(col[..4].iter().all(|&e| e == 2.0));
        assert!(col[4..16].iter().all(|&e| e == 4.0));
        assert!(col[16..].iter().all(|&e| e == 2.0));
        // uniform along x
        for i in 0..patch.nx {
            assert_eq!(patch.column(i), col);
        }
    }

    #[test]
    fn air_gap_occupies_middle_rows() {
        let case = WallCase {
            id: "t".into(),
            layout: WallLayout::AirGap {
                eps: 5.0,
                thickness: 0.20,
                gap_count: 3,
                gap_width: GAP_WIDTH,
                gap_depth: GAP_DEPTH,
            },
        };
        let patch = rasterize(&case, &grid(), 1.0).unwrap();
        assert_eq!(patch.depth, 16);
        // column through the first gap (gap cells 50..70)
        let col = patch.column(60);
        assert!(col[..4].iter().all(|&e| e == 5.0));
        assert!(col[4..12].iter().all(|&e| e == 1.0));
        assert!(col[12..].iter().all(|&e| e == 5.0));
        // a column between gaps is solid
        assert!(patch.column(100).iter().all(|&e| e == 5.0));
        let air = patch.eps.iter().filter(|&&e| e == 1.0).count();
        assert_eq!(air, 3 * 20 * 8);
    }

    #[test]
    fn zero_gaps_is_homogeneous_slab() {
        let patch = rasterize(&WallCase::homogeneous(4.0, 0.2), &grid(), 1.0).unwrap();
        assert!(patch.eps.iter().all(|&e| e == 4.0));
    }

    #[test]
    fn rejects_too_deep() {
        let err = rasterize(&WallCase::homogeneous(4.0, 0.3), &grid(), 6.4).unwrap_err();
        assert!(matches!(err, WallError::TooDeep { .. }));
    }

    #[test]
    fn rejects_gap_deeper_than_wall() {
        let case = WallCase {
            id: "t".into(),
            layout: WallLayout::AirGap {
                eps: 4.0,
                thickness: 0.05,
                gap_count: 3,
                gap_width: GAP_WIDTH,
                gap_depth: GAP_DEPTH,
            },
        };
        assert!(matches!(
            rasterize(&case, &grid(), 1.0),
            Err(WallError::GapDeeperThanWall { .. })
        ));
    }

    #[test]
    fn patch_values_come_from_layout() {
        for case in enumerate_cases() {
            let patch = rasterize(&case, &grid(), 1.0).unwrap();
            let allowed = case.permittivities();
            assert!(patch.eps.iter().all(|e| allowed.contains(e)), "{}", case.id);
        }
    }

    #[test]
    fn json_export_carries_kind_and_id() {
        let json = catalog_json(&enumerate_cases()[..1]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["id"], "ml-001");
        assert_eq!(v[0]["kind"], "multilayer");
        assert_eq!(v[0]["inner_eps"], 4.0);
        let back: Vec<WallCase> = serde_json::from_str(&json).unwrap();
        assert_eq!(back[0], enumerate_cases()[0]);
    }
}
