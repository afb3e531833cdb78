//! Human motion: skeletons, mocap ingest, parametric gaits and scatterer tracks.

mod bvh;
mod gait;
mod skeleton;
mod tracks;

pub use bvh::{
    default_radius, parse_motion_file, parse_motion_file_with, write_motion_file, ParseOptions,
};
pub use gait::{
    default_skeleton, generate_motion, GaitParams, MotionKind, HIP_HEIGHT, LANDING, TAKEOFF,
    WALK_END,
};
pub use skeleton::{
    euler_matrix, ground_rotation, Axis, Bone, Frame, Joint, MotionClip, Pose, Skeleton,
};
pub use tracks::{
    ellipsoid_rcs, place_and_orient, sample_tracks, GroundRegion, PartTrack, ScattererTrack,
    DEFAULT_DURATION, DEFAULT_SAMPLE_RATE,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    #[error("malformed hierarchy: {0}")]
    Hierarchy(String),
    #[error("cyclic parent reference at joint `{0}`")]
    Cycle(String),
    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),
    #[error("frame {frame}: expected {expected} channel values, found {found}")]
    ChannelCount {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("header declares {declared} frames, found {found}")]
    FrameCount { declared: usize, found: usize },
    #[error("bone `{bone}` leaves the scene interior at sample {sample}")]
    OutsideInterior { bone: String, sample: usize },
    #[error("clip lasts {available:.4} s, {required:.4} s required")]
    ClipTooShort { available: f64, required: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
