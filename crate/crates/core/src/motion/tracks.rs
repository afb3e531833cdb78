//! Scene placement of a clip and per-bone scatterer tracks at the radar rate.

use std::io::Write;

use nalgebra::Vector3;

use super::skeleton::{ground_rotation, Bone, MotionClip, Skeleton};
use super::MotionError;
use crate::grid::MapGeometry;

pub const DEFAULT_SAMPLE_RATE: f64 = 500.0;
pub const DEFAULT_DURATION: f64 = 1.53;

/// Axis-aligned ground-plane box `(x, z)` that scatterers must stay inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl GroundRegion {
    pub fn from_geometry(geo: &MapGeometry) -> Self {
        GroundRegion {
            x_min: geo.x_min,
            x_max: geo.x_min + (geo.nx - 1) as f64 * geo.cell_size,
            z_min: geo.z_min,
            z_max: geo.z_min + (geo.nz - 1) as f64 * geo.cell_size,
        }
    }

    /// Same box with the near edge pushed back, e.g. to the rear face of a wall.
    pub fn beyond(self, z: f64) -> Self {
        GroundRegion {
            z_min: self.z_min.max(z),
            ..self
        }
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        x > self.x_min && x < self.x_max && z > self.z_min && z < self.z_max
    }
}

/// Moves the clip so its frame-0 root sits over `start = (x, z)` and turns
/// the whole motion by `yaw_deg` about the vertical axis through that point.
pub fn place_and_orient(
    clip: &MotionClip,
    start: [f64; 2],
    yaw_deg: f64,
    region: Option<&GroundRegion>,
) -> Result<MotionClip, MotionError> {
    if !yaw_deg.is_finite() || !start.iter().all(|v| v.is_finite()) {
        return Err(MotionError::InvalidParameter(
            "yaw and start must be finite".into(),
        ));
    }
    let Some(first) = clip.frames.first() else {
        return Err(MotionError::InvalidParameter("clip has no frames".into()));
    };
    let rot = ground_rotation(yaw_deg);
    let pivot = Vector3::new(first.root_translation.x, 0.0, first.root_translation.z);
    let target = Vector3::new(start[0], 0.0, start[1]);
    let frames: Vec<_> = clip
        .frames
        .iter()
        .map(|f| {
            let mut f = f.clone();
            f.root_translation = rot * (f.root_translation - pivot) + target;
            f
        })
        .collect();
    if let Some(region) = region {
        for (i, f) in frames.iter().enumerate() {
            if !region.contains(f.root_translation.x, f.root_translation.z) {
                return Err(MotionError::OutsideInterior {
                    bone: "root".into(),
                    sample: i,
                });
            }
        }
    }
    Ok(MotionClip {
        frame_rate: clip.frame_rate,
        frames,
        heading_deg: clip.heading_deg + yaw_deg,
    })
}

/// Geometric-optics backscatter of an ellipsoid with semi-axes `(a, b, c)`
/// seen along the unit direction `l` expressed in the ellipsoid's own axes.
pub fn ellipsoid_rcs(semi_axes: [f64; 3], l: [f64; 3]) -> f64 {
    let [a, b, c] = semi_axes;
    let den = a * a * l[0] * l[0] + b * b * l[1] * l[1] + c * c * l[2] * l[2];
    std::f64::consts::PI * (a * b * c).powi(2) / (den * den)
}

/// One body part sampled over time.
#[derive(Clone, Debug, PartialEq)]
pub struct PartTrack {
    pub name: String,
    /// Ellipsoid centroid, scene `(x, y, z)`.
    pub centroid: Vec<[f64; 3]>,
    /// Ground projection `(x, z)`.
    pub rho: Vec<[f64; 2]>,
    /// Distance to the radar.
    pub range: Vec<f64>,
    /// Square root of the radar cross-section.
    pub amplitude: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScattererTrack {
    pub sample_rate: f64,
    pub samples: usize,
    pub radar: [f64; 3],
    pub parts: Vec<PartTrack>,
}

impl ScattererTrack {
    /// Ground distance from the radar to part `b` at sample `n`.
    pub fn ground_range(&self, b: usize, n: usize) -> f64 {
        let p = self.parts[b].rho[n];
        (p[0] - self.radar[0]).hypot(p[1] - self.radar[2])
    }

    /// Track restricted to the listed parts.
    pub fn select(&self, parts: &[usize]) -> ScattererTrack {
        ScattererTrack {
            parts: parts.iter().map(|&b| self.parts[b].clone()).collect(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> ScattererTrack {
        ScattererTrack {
            sample_rate: self.sample_rate,
            samples: self.samples,
            radar: self.radar,
            parts: Vec::new(),
        }
    }

    /// Track of a single point scatterer with constant amplitude.
    pub fn point(
        radar: [f64; 3],
        sample_rate: f64,
        amplitude: f64,
        path: &[[f64; 3]],
    ) -> ScattererTrack {
        let mut part = PartTrack {
            name: "point".into(),
            centroid: path.to_vec(),
            rho: Vec::with_capacity(path.len()),
            range: Vec::with_capacity(path.len()),
            amplitude: vec![amplitude; path.len()],
        };
        for p in path {
            part.rho.push([p[0], p[2]]);
            part.range.push(distance(p, &radar));
        }
        ScattererTrack {
            sample_rate,
            samples: path.len(),
            radar,
            parts: vec![part],
        }
    }

    /// Debug export: one row per (sample, part).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,bone_id,x,y,z,rho_x,rho_z,r,a")?;
        for n in 0..self.samples {
            let t = n as f64 / self.sample_rate;
            for (b, p) in self.parts.iter().enumerate() {
                let c = p.centroid[n];
                writeln!(
                    out,
                    "{t},{b},{},{},{},{},{},{},{}",
                    c[0], c[1], c[2], p.rho[n][0], p.rho[n][1], p.range[n], p.amplitude[n]
                )?;
            }
        }
        Ok(())
    }
}

fn distance(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Forward kinematics of every bone at `round(duration * fs)` instants.
pub fn sample_tracks(
    skeleton: &Skeleton,
    clip: &MotionClip,
    radar: [f64; 3],
    fs: f64,
    duration: f64,
    region: Option<&GroundRegion>,
) -> Result<ScattererTrack, MotionError> {
    if !(fs > 0.0 && fs.is_finite() && duration > 0.0 && duration.is_finite()) {
        return Err(MotionError::InvalidParameter(
            "sample rate and duration must be positive".into(),
        ));
    }
    if clip.frames.is_empty() || clip.duration() + 1e-9 < duration {
        return Err(MotionError::ClipTooShort {
            available: clip.duration(),
            required: duration,
        });
    }
    let samples = (duration * fs).round() as usize;
    let bones: &[Bone] = skeleton.bones();
    let mut parts: Vec<PartTrack> = bones
        .iter()
        .map(|b| PartTrack {
            name: b.name.clone(),
            centroid: Vec::with_capacity(samples),
            rho: Vec::with_capacity(samples),
            range: Vec::with_capacity(samples),
            amplitude: Vec::with_capacity(samples),
        })
        .collect();
    let radar_v = Vector3::from(radar);
    for n in 0..samples {
        let frame = clip.frame_at(n as f64 / fs);
        let pose = skeleton.pose(&frame, clip.heading_deg);
        for (bone, part) in bones.iter().zip(parts.iter_mut()) {
            let c = pose.centroid(bone);
            if let Some(region) = region {
                if !region.contains(c.x, c.z) {
                    return Err(MotionError::OutsideInterior {
                        bone: bone.name.clone(),
                        sample: n,
                    });
                }
            }
            let los = radar_v - c;
            let r = los.norm();
            let a = if r > 0.0 {
                let u = los / r;
                let axes = pose.bone_axes(bone);
                ellipsoid_rcs(
                    bone.semi_axes,
                    [axes[0].dot(&u), axes[1].dot(&u), axes[2].dot(&u)],
                )
                .sqrt()
            } else {
                0.0
            };
            part.centroid.push([c.x, c.y, c.z]);
            part.rho.push([c.x, c.z]);
            part.range.push(r);
            part.amplitude.push(a);
        }
    }
    Ok(ScattererTrack {
        sample_rate: fs,
        samples,
        radar,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{default_skeleton, generate_motion, Frame, GaitParams, MotionKind};

    const RADAR: [f64; 3] = [0.0, 0.5, 0.5];

    fn still_clip(sk: &Skeleton, frames: usize) -> MotionClip {
        MotionClip {
            frame_rate: 120.0,
            frames: vec![
                Frame {
                    root_translation: Vector3::new(0.3, 0.98, 3.0),
                    rotations: vec![[0.0; 3]; sk.joints.len()],
                };
                frames
            ],
            heading_deg: 0.0,
        }
    }

    #[test]
    fn sample_count() {
        let (sk, clip) =
            generate_motion(MotionKind::Walk, DEFAULT_DURATION, &GaitParams::default());
        let clip = place_and_orient(&clip, [0.0, 4.5], 0.0, None).unwrap();
        let tr = sample_tracks(&sk, &clip, RADAR, 500.0, DEFAULT_DURATION, None).unwrap();
        assert_eq!(tr.samples, 765);
        assert_eq!(tr.parts.len(), 17);
        assert!(tr.parts.iter().all(|p| p.range.len() == 765));
    }

    #[test]
    fn sphere_rcs_is_aspect_free() {
        for l in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.48, 0.6, 0.64]] {
            let s = ellipsoid_rcs([0.1; 3], l);
            assert!((s.sqrt() - (std::f64::consts::PI * 0.01).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_range_constant() {
        let sk = default_skeleton();
        let clip = still_clip(&sk, 200);
        let tr = sample_tracks(&sk, &clip, RADAR, 500.0, 1.53, None).unwrap();
        for p in &tr.parts {
            assert!(p.range.iter().all(|&r| r == p.range[0]));
        }
    }

    #[test]
    fn projection_consistency() {
        let (sk, clip) = generate_motion(MotionKind::WalkLeapWalk, 1.53, &GaitParams::default());
        let clip = place_and_orient(&clip, [0.0, 4.5], 30.0, None).unwrap();
        let tr = sample_tracks(&sk, &clip, RADAR, 500.0, 1.53, None).unwrap();
        for (b, p) in tr.parts.iter().enumerate() {
            for n in 0..tr.samples {
                let dy = p.centroid[n][1] - RADAR[1];
                let g = tr.ground_range(b, n);
                let resid = p.range[n].powi(2) - g * g - dy * dy;
                assert!(resid.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn short_clip_rejected() {
        let sk = default_skeleton();
        let clip = still_clip(&sk, 100);
        assert!(matches!(
            sample_tracks(&sk, &clip, RADAR, 500.0, 1.53, None),
            Err(MotionError::ClipTooShort { .. })
        ));
    }

    #[test]
    fn collision_reports_sample() {
        let (sk, clip) = generate_motion(MotionKind::Walk, 1.53, &GaitParams::default());
        let clip = place_and_orient(&clip, [0.0, 2.5], 0.0, None).unwrap();
        let region = GroundRegion {
            x_min: -2.25,
            x_max: 2.25,
            z_min: 0.0,
            z_max: 6.5,
        }
        .beyond(1.4);
        match sample_tracks(&sk, &clip, RADAR, 500.0, 1.53, Some(&region)) {
            Err(MotionError::OutsideInterior { sample, .. }) => assert!(sample > 0),
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn placement_puts_root_at_start() {
        let (_, clip) = generate_motion(MotionKind::Walk, 1.53, &GaitParams::default());
        let placed = place_and_orient(&clip, [0.4, 4.0], 15.0, None).unwrap();
        let r = placed.frames[0].root_translation;
        assert!((r.x - 0.4).abs() < 1e-12 && (r.z - 4.0).abs() < 1e-12);
        assert_eq!(placed.heading_deg, 15.0);
        let bad = GroundRegion {
            x_min: -1.0,
            x_max: 1.0,
            z_min: 3.0,
            z_max: 5.0,
        };
        assert!(place_and_orient(&clip, [0.0, 4.0], 0.0, Some(&bad)).is_err());
    }

    #[test]
    fn csv_rows() {
        let tr = ScattererTrack::point(RADAR, 500.0, 1.0, &[[0.0, 0.5, 2.0], [0.0, 0.5, 2.1]]);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("0,0,0,0.5,2,0,2,1.5,1"));
    }
}
