//! Skeleton trees, motion clips and forward kinematics.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::MotionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    /// Rest offset from the parent joint, meters, in the parent's frame.
    pub offset: Vector3<f64>,
    /// Euler rotation channel order, applied left to right.
    pub rotation_order: Vec<Axis>,
    /// Radial semi-axis of the ellipsoid on the bone ending at this joint.
    pub radius: f64,
}

/// A rigid segment from `parent` joint to `joint`, modelled as an ellipsoid
/// with semi-axes `(radius, radius, length / 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bone {
    pub name: String,
    pub joint: usize,
    pub parent: usize,
    pub offset: Vector3<f64>,
    pub length: f64,
    pub semi_axes: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub joints: Vec<Joint>,
    pub root: usize,
    bones: Vec<Bone>,
    /// Joint indices in an order where parents precede children.
    order: Vec<usize>,
}

impl Skeleton {
    /// Validates the joint list as a single-rooted tree with positive bone
    /// lengths.
    pub fn new(joints: Vec<Joint>) -> Result<Self, MotionError> {
        if joints.is_empty() {
            return Err(MotionError::Hierarchy("empty skeleton".into()));
        }
        let roots: Vec<usize> = (0..joints.len())
            .filter(|&j| joints[j].parent.is_none())
            .collect();
        for (j, joint) in joints.iter().enumerate() {
            if let Some(p) = joint.parent {
                if p >= joints.len() {
                    return Err(MotionError::Hierarchy(format!(
                        "joint {} has parent index {p} out of range",
                        joint.name
                    )));
                }
                if p == j {
                    return Err(MotionError::Cycle(joint.name.clone()));
                }
            }
        }
        // walk every joint up to a root; a walk longer than the joint count is a cycle
        for (j, joint) in joints.iter().enumerate() {
            let mut cur = j;
            let mut hops = 0;
            while let Some(p) = joints[cur].parent {
                cur = p;
                hops += 1;
                if hops > joints.len() {
                    return Err(MotionError::Cycle(joint.name.clone()));
                }
            }
        }
        if roots.len() != 1 {
            return Err(MotionError::Hierarchy(format!(
                "expected one root, found {}",
                roots.len()
            )));
        }
        let root = roots[0];

        let mut order = Vec::with_capacity(joints.len());
        let mut stack = vec![root];
        while let Some(j) = stack.pop() {
            order.push(j);
            for c in (0..joints.len()).rev() {
                if joints[c].parent == Some(j) {
                    stack.push(c);
                }
            }
        }

        let mut bones = Vec::new();
        for &j in &order {
            let joint = &joints[j];
            let Some(parent) = joint.parent else { continue };
            let length = joint.offset.norm();
            if !length.is_finite() {
                return Err(MotionError::Hierarchy(format!(
                    "bone to {} has non-finite length",
                    joint.name
                )));
            }
            // coincident joints carry no segment
            if length == 0.0 {
                continue;
            }
            if !(joint.radius.is_finite() && joint.radius > 0.0) {
                return Err(MotionError::Hierarchy(format!(
                    "bone to {} has invalid radius",
                    joint.name
                )));
            }
            bones.push(Bone {
                name: joint.name.clone(),
                joint: j,
                parent,
                offset: joint.offset,
                length,
                semi_axes: [joint.radius, joint.radius, length / 2.0],
            });
        }
        Ok(Skeleton {
            joints,
            root,
            bones,
            order,
        })
    }

    pub fn bones(&self) -> &[Bone] {
        &self.bones
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Forward kinematics for one set of channel values.
    pub fn pose(&self, frame: &Frame, heading_deg: f64) -> Pose {
        let n = self.joints.len();
        let mut rotation = vec![Matrix3::identity(); n];
        let mut position = vec![Vector3::zeros(); n];
        let heading = ground_rotation(heading_deg);
        for &j in &self.order {
            let joint = &self.joints[j];
            let local = euler_matrix(&joint.rotation_order, &frame.rotations[j]);
            match joint.parent {
                None => {
                    rotation[j] = heading * local;
                    position[j] = frame.root_translation;
                }
                Some(p) => {
                    position[j] = position[p] + rotation[p] * joint.offset;
                    rotation[j] = rotation[p] * local;
                }
            }
        }
        Pose { rotation, position }
    }
}

/// Rotation about the vertical (y) axis taking +x to `(cos, 0, sin)` in
/// scene `(x, y, z)`.
pub fn ground_rotation(yaw_deg: f64) -> Matrix3<f64> {
    let (s, c) = yaw_deg.to_radians().sin_cos();
    Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c)
}

/// `R = R_a0(t0) * R_a1(t1) * R_a2(t2)`, angles in degrees.
pub fn euler_matrix(order: &[Axis], angles: &[f64; 3]) -> Matrix3<f64> {
    order
        .iter()
        .zip(angles)
        .fold(Matrix3::identity(), |acc, (axis, deg)| {
            let r = Rotation3::from_axis_angle(
                &nalgebra::Unit::new_unchecked(axis.unit()),
                deg.to_radians(),
            );
            acc * r.matrix()
        })
}

/// Channel values for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    /// Root position, meters.
    pub root_translation: Vector3<f64>,
    /// Per joint, angles in degrees following the joint's `rotation_order`;
    /// unused slots are zero.
    pub rotations: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionClip {
    pub frame_rate: f64,
    pub frames: Vec<Frame>,
    /// Extra rotation of the whole figure about the vertical axis, degrees.
    pub heading_deg: f64,
}

impl MotionClip {
    /// Frame count times frame period.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.frame_rate
    }

    /// Channel values at time `t`, linearly interpolated between frames and
    /// held constant past the last frame.
    pub fn frame_at(&self, t: f64) -> Frame {
        let last = self.frames.len() - 1;
        let pos = (t * self.frame_rate).max(0.0);
        // snap to native frame instants so they reproduce stored frames exactly
        let pos = if (pos - pos.round()).abs() < 1e-9 {
            pos.round()
        } else {
            pos
        };
        let i0 = (pos.floor() as usize).min(last);
        let i1 = (i0 + 1).min(last);
        let w = if i0 == i1 { 0.0 } else { pos - i0 as f64 };
        if w == 0.0 {
            return self.frames[i0].clone();
        }
        let (a, b) = (&self.frames[i0], &self.frames[i1]);
        Frame {
            root_translation: a.root_translation + (b.root_translation - a.root_translation) * w,
            rotations: a
                .rotations
                .iter()
                .zip(&b.rotations)
                .map(|(ra, rb)| {
                    let mut out = [0.0; 3];
                    for c in 0..3 {
                        out[c] = ra[c] + wrap_degrees(rb[c] - ra[c]) * w;
                    }
                    out
                })
                .collect(),
        }
    }
}

fn wrap_degrees(d: f64) -> f64 {
    (d + 180.0).rem_euclid(360.0) - 180.0
}

/// Global joint frames.
#[derive(Clone, Debug)]
pub struct Pose {
    pub rotation: Vec<Matrix3<f64>>,
    pub position: Vec<Vector3<f64>>,
}

impl Pose {
    pub fn centroid(&self, bone: &Bone) -> Vector3<f64> {
        (self.position[bone.parent] + self.position[bone.joint]) * 0.5
    }

    /// Ellipsoid axes `(a, b, c)` of a bone as global unit vectors; `c` runs
    /// along the bone.
    pub fn bone_axes(&self, bone: &Bone) -> [Vector3<f64>; 3] {
        let c = bone.offset / bone.length;
        let helper = if c.x.abs() <= c.y.abs() && c.x.abs() <= c.z.abs() {
            Vector3::x()
        } else if c.y.abs() <= c.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let a = c.cross(&helper).normalize();
        let b = c.cross(&a);
        let r = &self.rotation[bone.parent];
        [r * a, r * b, r * c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(name: &str, parent: Option<usize>, offset: [f64; 3]) -> Joint {
        Joint {
            name: name.into(),
            parent,
            offset: Vector3::from(offset),
            rotation_order: vec![Axis::Z, Axis::X, Axis::Y],
            radius: 0.05,
        }
    }

    #[test]
    fn rejects_self_parent() {
        let err = Skeleton::new(vec![
            joint("a", None, [0.0; 3]),
            joint("b", Some(1), [0.0, 1.0, 0.0]),
        ]);
        assert!(matches!(err, Err(MotionError::Cycle(_))));
    }

    #[test]
    fn rejects_loop() {
        let err = Skeleton::new(vec![
            joint("r", None, [0.0; 3]),
            joint("a", Some(2), [0.0, 1.0, 0.0]),
            joint("b", Some(1), [0.0, 1.0, 0.0]),
        ]);
        assert!(matches!(err, Err(MotionError::Cycle(_))));
    }

    #[test]
    fn rejects_two_roots() {
        let err = Skeleton::new(vec![joint("a", None, [0.0; 3]), joint("b", None, [0.0; 3])]);
        assert!(matches!(err, Err(MotionError::Hierarchy(_))));
    }

    #[test]
    fn ground_rotation_maps_x() {
        let r = ground_rotation(45.0);
        let v = r * Vector3::x();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v - Vector3::new(h, 0.0, h)).norm() < 1e-15);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_order_matters() {
        let a = euler_matrix(&[Axis::Z, Axis::X, Axis::Y], &[30.0, 20.0, 10.0]);
        let b = euler_matrix(&[Axis::Y, Axis::X, Axis::Z], &[10.0, 20.0, 30.0]);
        assert!((a - b).norm() > 1e-3);
        let rz = Rotation3::from_euler_angles(0.0, 0.0, 30f64.to_radians());
        let single = euler_matrix(&[Axis::Z], &[30.0, 0.0, 0.0]);
        assert!((rz.matrix() - single).norm() < 1e-14);
    }

    #[test]
    fn wrap_interpolation_takes_short_way() {
        let clip = MotionClip {
            frame_rate: 1.0,
            frames: vec![
                Frame {
                    root_translation: Vector3::zeros(),
                    rotations: vec![[170.0, 0.0, 0.0]],
                },
                Frame {
                    root_translation: Vector3::zeros(),
                    rotations: vec![[-170.0, 0.0, 0.0]],
                },
            ],
            heading_deg: 0.0,
        };
        let f = clip.frame_at(0.5);
        assert!((f.rotations[0][0] - 180.0).abs() < 1e-12);
    }
}
