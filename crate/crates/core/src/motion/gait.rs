//! Parametric motion synthesis used when no mocap file is supplied.
//!
//! The canonical figure walks toward -z (toward the radar) with its
//! shoulder line along x. Limb swing is pitch (X rotation) at the hips,
//! knees, shoulders and elbows; positive pitch swings a hanging limb forward.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::skeleton::{Axis, Frame, Joint, MotionClip, Skeleton};

/// Gravity, m/s^2.
const G: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Walk,
    WalkLeapWalk,
}

impl MotionKind {
    pub const ALL: [MotionKind; 2] = [MotionKind::Walk, MotionKind::WalkLeapWalk];

    pub fn as_str(self) -> &'static str {
        match self {
            MotionKind::Walk => "walk",
            MotionKind::WalkLeapWalk => "walk_leap_walk",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            MotionKind::Walk => 0,
            MotionKind::WalkLeapWalk => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(MotionKind::Walk),
            1 => Some(MotionKind::WalkLeapWalk),
            _ => None,
        }
    }
}

impl std::str::FromStr for MotionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "walk" => Ok(MotionKind::Walk),
            "walk_leap_walk" | "walk-leap-walk" | "wlw" => Ok(MotionKind::WalkLeapWalk),
            _ => Err(format!(
                "unknown motion `{s}` (expected walk or walk_leap_walk)"
            )),
        }
    }
}

impl std::fmt::Display for MotionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaitParams {
    /// Forward root speed while walking, m/s.
    pub speed: f64,
    /// Full gait cycles (two steps) per second.
    pub stride_rate: f64,
    pub hip_swing_deg: f64,
    pub knee_flex_deg: f64,
    pub arm_swing_deg: f64,
    pub elbow_flex_deg: f64,
    /// Vertical root oscillation, meters (two bobs per gait cycle).
    pub bob: f64,
    pub frame_rate: f64,
    /// Leap: forward speed in flight, m/s.
    pub leap_speed: f64,
    /// Leap: root lowering before take-off and after landing, meters.
    pub leap_crouch: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams {
            speed: 1.2,
            stride_rate: 0.9,
            hip_swing_deg: 25.0,
            knee_flex_deg: 40.0,
            arm_swing_deg: 20.0,
            elbow_flex_deg: 15.0,
            bob: 0.025,
            frame_rate: 120.0,
            leap_speed: 2.0,
            leap_crouch: 0.08,
        }
    }
}

/// Leap schedule in seconds: walking until `WALK_END`, run-up, ballistic
/// flight `[TAKEOFF, LANDING]` peaking at 0.8 s, recovery, walking again
/// over the final 0.53 s.
pub const WALK_END: f64 = 0.2;
pub const TAKEOFF: f64 = 0.6;
pub const LANDING: f64 = 1.0;
const RECOVERY_END: f64 = 1.1;
const CROUCH_START: f64 = 0.35;
const CROUCH_END: f64 = 1.2;
const BLEND: f64 = 0.12;

/// Standard 17-bone figure of a 1.75 m adult.
pub fn default_skeleton() -> Skeleton {
    // (name, parent, offset, radius); left side is -x for a figure facing -z
    let spec: [(&str, Option<usize>, [f64; 3], f64); 18] = [
        ("Hips", None, [0.0, 0.0, 0.0], 0.14),
        ("Spine", Some(0), [0.0, 0.22, 0.0], 0.14),
        ("Chest", Some(1), [0.0, 0.26, 0.0], 0.16),
        ("Head", Some(2), [0.0, 0.29, 0.0], 0.10),
        ("LeftShoulder", Some(2), [-0.18, -0.02, 0.0], 0.05),
        ("LeftElbow", Some(4), [0.0, -0.30, 0.0], 0.05),
        ("LeftWrist", Some(5), [0.0, -0.27, 0.0], 0.04),
        ("RightShoulder", Some(2), [0.18, -0.02, 0.0], 0.05),
        ("RightElbow", Some(7), [0.0, -0.30, 0.0], 0.05),
        ("RightWrist", Some(8), [0.0, -0.27, 0.0], 0.04),
        ("LeftHip", Some(0), [-0.09, -0.04, 0.0], 0.08),
        ("LeftKnee", Some(10), [0.0, -0.43, 0.0], 0.08),
        ("LeftAnkle", Some(11), [0.0, -0.43, 0.0], 0.055),
        ("LeftToe", Some(12), [0.0, -0.05, -0.15], 0.04),
        ("RightHip", Some(0), [0.09, -0.04, 0.0], 0.08),
        ("RightKnee", Some(14), [0.0, -0.43, 0.0], 0.08),
        ("RightAnkle", Some(15), [0.0, -0.43, 0.0], 0.055),
        ("RightToe", Some(16), [0.0, -0.05, -0.15], 0.04),
    ];
    let leaves = ["Head", "LeftWrist", "RightWrist", "LeftToe", "RightToe"];
    let joints = spec
        .iter()
        .map(|&(name, parent, offset, radius)| Joint {
            name: name.to_string(),
            parent,
            offset: Vector3::from(offset),
            rotation_order: if leaves.contains(&name) {
                Vec::new()
            } else {
                vec![Axis::Z, Axis::X, Axis::Y]
            },
            radius,
        })
        .collect();
    Skeleton::new(joints).expect("default skeleton is a valid tree")
}

/// Root height of the default figure standing upright.
pub const HIP_HEIGHT: f64 = 0.98;

pub fn generate_motion(
    kind: MotionKind,
    duration: f64,
    params: &GaitParams,
) -> (Skeleton, MotionClip) {
    let skeleton = default_skeleton();
    let idx = |n: &str| skeleton.joint_index(n).expect("default joint");
    let joints = Joints {
        l_hip: idx("LeftHip"),
        r_hip: idx("RightHip"),
        l_knee: idx("LeftKnee"),
        r_knee: idx("RightKnee"),
        l_shoulder: idx("LeftShoulder"),
        r_shoulder: idx("RightShoulder"),
        l_elbow: idx("LeftElbow"),
        r_elbow: idx("RightElbow"),
    };
    let n = ((duration.max(0.0) * params.frame_rate).round() as usize).max(1);
    let frames = (0..n)
        .map(|f| {
            let t = f as f64 / params.frame_rate;
            match kind {
                MotionKind::Walk => walk_frame(&skeleton, &joints, params, t),
                MotionKind::WalkLeapWalk => leap_frame(&skeleton, &joints, params, t),
            }
        })
        .collect();
    (
        skeleton,
        MotionClip {
            frame_rate: params.frame_rate,
            frames,
            heading_deg: 0.0,
        },
    )
}

struct Joints {
    l_hip: usize,
    r_hip: usize,
    l_knee: usize,
    r_knee: usize,
    l_shoulder: usize,
    r_shoulder: usize,
    l_elbow: usize,
    r_elbow: usize,
}

/// Pitch angles (degrees) of the articulated joints.
#[derive(Clone, Copy, Default)]
struct Limbs {
    hips: [f64; 2],
    knees: [f64; 2],
    shoulders: [f64; 2],
    elbows: [f64; 2],
}

impl Limbs {
    fn gait(p: &GaitParams, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Limbs {
            hips: [p.hip_swing_deg * s, -p.hip_swing_deg * s],
            knees: [
                -p.knee_flex_deg * c.max(0.0),
                -p.knee_flex_deg * (-c).max(0.0),
            ],
            shoulders: [-p.arm_swing_deg * s, p.arm_swing_deg * s],
            elbows: [
                p.elbow_flex_deg * (0.5 - 0.5 * s),
                p.elbow_flex_deg * (0.5 + 0.5 * s),
            ],
        }
    }

    /// Tucked flight pose: thighs raised, knees bent, arms forward.
    fn tuck(p: &GaitParams) -> Self {
        let scale = if p.hip_swing_deg == 0.0 { 0.0 } else { 1.0 };
        Limbs {
            hips: [55.0 * scale, 40.0 * scale],
            knees: [-80.0 * scale, -70.0 * scale],
            shoulders: [35.0 * scale, 35.0 * scale],
            elbows: [30.0 * scale, 30.0 * scale],
        }
    }

    fn mix(a: Limbs, b: Limbs, w: f64) -> Self {
        let m =
            |x: [f64; 2], y: [f64; 2]| [x[0] * (1.0 - w) + y[0] * w, x[1] * (1.0 - w) + y[1] * w];
        Limbs {
            hips: m(a.hips, b.hips),
            knees: m(a.knees, b.knees),
            shoulders: m(a.shoulders, b.shoulders),
            elbows: m(a.elbows, b.elbows),
        }
    }

    fn frame(&self, skeleton: &Skeleton, j: &Joints, root: Vector3<f64>) -> Frame {
        let mut rotations = vec![[0.0; 3]; skeleton.joints.len()];
        // rotation order is Z X Y: pitch lives in slot 1
        let mut set = |joint: usize, v: f64| rotations[joint][1] = v;
        set(j.l_hip, self.hips[0]);
        set(j.r_hip, self.hips[1]);
        set(j.l_knee, self.knees[0]);
        set(j.r_knee, self.knees[1]);
        set(j.l_shoulder, self.shoulders[0]);
        set(j.r_shoulder, self.shoulders[1]);
        set(j.l_elbow, self.elbows[0]);
        set(j.r_elbow, self.elbows[1]);
        Frame {
            root_translation: root,
            rotations,
        }
    }
}

fn walk_frame(skeleton: &Skeleton, j: &Joints, p: &GaitParams, t: f64) -> Frame {
    let phase = 2.0 * std::f64::consts::PI * p.stride_rate * t;
    let y = HIP_HEIGHT + p.bob * (2.0 * phase).cos();
    let root = Vector3::new(0.0, y, -p.speed * t);
    Limbs::gait(p, phase).frame(skeleton, j, root)
}

/// Raised-cosine step from 0 at `a` to 1 at `b`.
fn smoothstep(t: f64, a: f64, b: f64) -> f64 {
    if t <= a {
        0.0
    } else if t >= b {
        1.0
    } else {
        0.5 - 0.5 * (std::f64::consts::PI * (t - a) / (b - a)).cos()
    }
}

/// Forward speed profile of the leap clip: walk, linear run-up to flight
/// speed, constant in flight, linear slow-down back to walking.
fn leap_speed(p: &GaitParams, t: f64) -> f64 {
    if t < WALK_END {
        p.speed
    } else if t < TAKEOFF {
        p.speed + (p.leap_speed - p.speed) * (t - WALK_END) / (TAKEOFF - WALK_END)
    } else if t < LANDING {
        p.leap_speed
    } else if t < RECOVERY_END {
        p.leap_speed + (p.speed - p.leap_speed) * (t - LANDING) / (RECOVERY_END - LANDING)
    } else {
        p.speed
    }
}

/// Integral of [`leap_speed`] from 0 to `t` (exact for the piecewise-linear profile).
fn leap_distance(p: &GaitParams, t: f64) -> f64 {
    let knots = [0.0, WALK_END, TAKEOFF, LANDING, RECOVERY_END];
    let mut dist = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1].min(t));
        if b <= a {
            break;
        }
        dist += 0.5 * (leap_speed(p, a) + leap_speed(p, b)) * (b - a);
    }
    if t > RECOVERY_END {
        dist += p.speed * (t - RECOVERY_END);
    }
    dist
}

fn leap_frame(skeleton: &Skeleton, j: &Joints, p: &GaitParams, t: f64) -> Frame {
    let phase = 2.0 * std::f64::consts::PI * p.stride_rate * t;
    // weight of the walking pattern: 1 while walking, 0 in flight
    let walk_w =
        1.0 - smoothstep(t, TAKEOFF - BLEND, TAKEOFF) + smoothstep(t, LANDING, LANDING + BLEND);
    let walk_w = walk_w.clamp(0.0, 1.0);
    let crouch = -p.leap_crouch
        * (smoothstep(t, CROUCH_START, TAKEOFF) - smoothstep(t, LANDING, CROUCH_END));
    let flight = if (TAKEOFF..=LANDING).contains(&t) {
        let air = LANDING - TAKEOFF;
        let vy = 0.5 * G * air;
        let s = t - TAKEOFF;
        vy * s - 0.5 * G * s * s
    } else {
        0.0
    };
    let y = HIP_HEIGHT + walk_w * p.bob * (2.0 * phase).cos() + crouch + flight;
    let root = Vector3::new(0.0, y, -leap_distance(p, t));
    let limbs = Limbs::mix(Limbs::tuck(p), Limbs::gait(p, phase), walk_w);
    limbs.frame(skeleton, j, root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_skeleton_shape() {
        let sk = default_skeleton();
        assert_eq!(sk.bones().len(), 17);
        let pose = sk.pose(
            &Frame {
                root_translation: Vector3::new(0.0, HIP_HEIGHT, 0.0),
                rotations: vec![[0.0; 3]; sk.joints.len()],
            },
            0.0,
        );
        let head = pose.position[sk.joint_index("Head").unwrap()];
        assert!((head.y - 1.75).abs() < 1e-12);
        let toe = pose.position[sk.joint_index("LeftToe").unwrap()];
        assert!(toe.y > 0.0 && toe.z < 0.0 && toe.x < 0.0);
    }

    #[test]
    fn walk_root_advance() {
        let p = GaitParams::default();
        let sk = default_skeleton();
        let j = Joints {
            l_hip: 0,
            r_hip: 0,
            l_knee: 0,
            r_knee: 0,
            l_shoulder: 0,
            r_shoulder: 0,
            l_elbow: 0,
            r_elbow: 0,
        };
        let start = walk_frame(&sk, &j, &p, 0.0).root_translation;
        let end = walk_frame(&sk, &j, &p, 1.53).root_translation;
        assert!(((start.z - end.z) - 1.836).abs() < 1e-9);
        let (_, clip) = generate_motion(MotionKind::Walk, 1.53, &p);
        assert_eq!(clip.frames.len(), 184);
        let last = clip.frames.last().unwrap().root_translation;
        assert!((last.z + 1.2 * 183.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn leap_peak_inside_flight() {
        let (_, clip) = generate_motion(MotionKind::WalkLeapWalk, 1.53, &GaitParams::default());
        let ys: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let t = 0.6 + 0.4 * i as f64 / 400.0;
                (t, clip.frame_at(t).root_translation.y)
            })
            .collect();
        let maxima: Vec<f64> = ys
            .windows(3)
            .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
            .map(|w| w[1].0)
            .collect();
        assert_eq!(maxima.len(), 1, "{maxima:?}");
        assert!((maxima[0] - 0.8).abs() < 0.01);
    }

    #[test]
    fn leap_distance_is_integral_of_speed() {
        let p = GaitParams::default();
        let mut num = 0.0;
        let dt = 1e-5;
        let mut t = 0.0;
        while t < 1.5 - 1e-12 {
            num += leap_speed(&p, t + dt / 2.0) * dt;
            t += dt;
        }
        assert!((num - leap_distance(&p, 1.5)).abs() < 1e-6);
    }

    #[test]
    fn zero_swing_gives_constant_angles() {
        let p = GaitParams {
            hip_swing_deg: 0.0,
            knee_flex_deg: 0.0,
            arm_swing_deg: 0.0,
            elbow_flex_deg: 0.0,
            ..GaitParams::default()
        };
        for kind in MotionKind::ALL {
            let (_, clip) = generate_motion(kind, 1.53, &p);
            let first = &clip.frames[0].rotations;
            assert!(clip.frames.iter().all(|f| &f.rotations == first));
        }
    }

    #[test]
    fn motion_names_round_trip() {
        for k in MotionKind::ALL {
            assert_eq!(k.as_str().parse::<MotionKind>().unwrap(), k);
            assert_eq!(MotionKind::from_code(k.code()), Some(k));
        }
    }
}
