//! Reader and writer for hierarchical skeleton/channel mocap text files
//! (`HIERARCHY` block followed by `MOTION` frame rows).
//!
//! Only the root may carry position channels. End sites become leaf joints
//! without channels so that every segment of the file is a bone.

use nalgebra::Vector3;
use std::fmt::Write as _;

use super::skeleton::{Axis, Frame, Joint, MotionClip, Skeleton};
use super::MotionError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParseOptions {
    /// Scale from file length units to meters.
    pub units_to_meters: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            units_to_meters: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Channel {
    Position(Axis),
    Rotation(Axis),
}

struct Tokens<'a> {
    inner: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, MotionError> {
        self.inner.next().ok_or_else(|| {
            MotionError::Hierarchy(format!("unexpected end of file, expected {what}"))
        })
    }

    fn expect(&mut self, word: &str) -> Result<(), MotionError> {
        let tok = self.next(word)?;
        if tok.eq_ignore_ascii_case(word) {
            Ok(())
        } else {
            Err(MotionError::Hierarchy(format!(
                "expected `{word}`, found `{tok}`"
            )))
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, MotionError> {
        let tok = self.next(what)?;
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                MotionError::Hierarchy(format!("expected number for {what}, found `{tok}`"))
            })
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().copied()
    }
}

struct Builder {
    joints: Vec<Joint>,
    channels: Vec<Vec<Channel>>,
    scale: f64,
}

impl Builder {
    fn joint(&mut self, tok: &mut Tokens, parent: Option<usize>) -> Result<(), MotionError> {
        let name = tok.next("joint name")?.to_string();
        let mut ancestor = parent;
        while let Some(a) = ancestor {
            if self.joints[a].name == name {
                return Err(MotionError::Cycle(name));
            }
            ancestor = self.joints[a].parent;
        }
        tok.expect("{")?;
        tok.expect("OFFSET")?;
        let offset = self.offset(tok)?;
        let index = self.joints.len();
        self.joints.push(Joint {
            name,
            parent,
            offset,
            rotation_order: Vec::new(),
            radius: 0.0,
        });
        self.channels.push(Vec::new());

        if tok
            .peek()
            .is_some_and(|t| t.eq_ignore_ascii_case("CHANNELS"))
        {
            tok.next("CHANNELS")?;
            let count = tok.number("channel count")?;
            if count < 0.0 || count.fract() != 0.0 || count > 6.0 {
                return Err(MotionError::Hierarchy(format!("bad channel count {count}")));
            }
            for _ in 0..count as usize {
                let ch = parse_channel(tok.next("channel name")?)?;
                if matches!(ch, Channel::Position(_)) && parent.is_some() {
                    return Err(MotionError::UnsupportedChannel(format!(
                        "position channel on non-root joint {}",
                        self.joints[index].name
                    )));
                }
                if let Channel::Rotation(axis) = ch {
                    self.joints[index].rotation_order.push(axis);
                }
                self.channels[index].push(ch);
            }
            if self.joints[index].rotation_order.len() > 3 {
                return Err(MotionError::Hierarchy(
                    "more than three rotation channels".into(),
                ));
            }
        }

        loop {
            let tok_s = tok.next("`}`")?;
            if tok_s == "}" {
                return Ok(());
            } else if tok_s.eq_ignore_ascii_case("JOINT") {
                self.joint(tok, Some(index))?;
            } else if tok_s.eq_ignore_ascii_case("End") {
                tok.expect("Site")?;
                tok.expect("{")?;
                tok.expect("OFFSET")?;
                let offset = self.offset(tok)?;
                tok.expect("}")?;
                let name = format!("{}_end", self.joints[index].name);
                self.joints.push(Joint {
                    name,
                    parent: Some(index),
                    offset,
                    rotation_order: Vec::new(),
                    radius: 0.0,
                });
                self.channels.push(Vec::new());
            } else {
                return Err(MotionError::Hierarchy(format!(
                    "unexpected token `{tok_s}`"
                )));
            }
        }
    }

    fn offset(&self, tok: &mut Tokens) -> Result<Vector3<f64>, MotionError> {
        Ok(Vector3::new(
            tok.number("offset x")?,
            tok.number("offset y")?,
            tok.number("offset z")?,
        ) * self.scale)
    }
}

fn parse_channel(s: &str) -> Result<Channel, MotionError> {
    let lower = s.to_ascii_lowercase();
    let axis = match lower.chars().next() {
        Some('x') => Axis::X,
        Some('y') => Axis::Y,
        Some('z') => Axis::Z,
        _ => return Err(MotionError::UnsupportedChannel(s.into())),
    };
    match &lower[1..] {
        "position" => Ok(Channel::Position(axis)),
        "rotation" => Ok(Channel::Rotation(axis)),
        _ => Err(MotionError::UnsupportedChannel(s.into())),
    }
}

/// Ellipsoid radius assigned to file bones, which carry no body dimensions:
/// a fifth of the bone length, clamped to [3 cm, 15 cm].
pub fn default_radius(length: f64) -> f64 {
    (0.2 * length).clamp(0.03, 0.15)
}

pub fn parse_motion_file(bytes: &[u8]) -> Result<(Skeleton, MotionClip), MotionError> {
    parse_motion_file_with(bytes, ParseOptions::default())
}

pub fn parse_motion_file_with(
    bytes: &[u8],
    opts: ParseOptions,
) -> Result<(Skeleton, MotionClip), MotionError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| MotionError::Hierarchy("file is not UTF-8".into()))?;
    let (head, motion) = split_motion(text)?;
    let mut tok = Tokens {
        inner: head.split_whitespace().peekable(),
    };
    tok.expect("HIERARCHY")?;
    tok.expect("ROOT")?;
    let mut b = Builder {
        joints: Vec::new(),
        channels: Vec::new(),
        scale: opts.units_to_meters,
    };
    b.joint(&mut tok, None)?;
    if let Some(extra) = tok.peek() {
        return Err(MotionError::Hierarchy(format!(
            "unexpected `{extra}` after root joint"
        )));
    }

    for j in 0..b.joints.len() {
        let len = b.joints[j].offset.norm();
        b.joints[j].radius = default_radius(len);
    }
    let channels = std::mem::take(&mut b.channels);
    let root_offset = b.joints[0].offset;
    let skeleton = Skeleton::new(b.joints)?;

    let mut lines = motion.lines().map(str::trim).filter(|l| !l.is_empty());
    let frames_line = lines
        .next()
        .ok_or_else(|| MotionError::Hierarchy("missing `Frames:`".into()))?;
    let n_frames = header_value(frames_line, "Frames:")?;
    if n_frames.fract() != 0.0 || n_frames < 1.0 {
        return Err(MotionError::Hierarchy(format!(
            "bad frame count {n_frames}"
        )));
    }
    let n_frames = n_frames as usize;
    let time_line = lines
        .next()
        .ok_or_else(|| MotionError::Hierarchy("missing `Frame Time:`".into()))?;
    let frame_time = header_value(time_line, "Frame Time:")?;
    if frame_time <= 0.0 {
        return Err(MotionError::Hierarchy(format!(
            "bad frame time {frame_time}"
        )));
    }

    let total: usize = channels.iter().map(Vec::len).sum();
    let mut frames = Vec::with_capacity(n_frames);
    for (row, line) in lines.enumerate() {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| MotionError::Hierarchy(format!("non-numeric value in frame {row}")))?;
        if values.len() != total {
            return Err(MotionError::ChannelCount {
                frame: row,
                expected: total,
                found: values.len(),
            });
        }
        let mut it = values.into_iter();
        let mut frame = Frame {
            root_translation: root_offset,
            rotations: vec![[0.0; 3]; channels.len()],
        };
        for (j, chans) in channels.iter().enumerate() {
            let mut slot = 0;
            for ch in chans {
                let v = it.next().expect("length checked");
                match ch {
                    Channel::Position(axis) => {
                        let k = *axis as usize;
                        frame.root_translation[k] += v * opts.units_to_meters;
                    }
                    Channel::Rotation(_) => {
                        frame.rotations[j][slot] = v;
                        slot += 1;
                    }
                }
            }
        }
        frames.push(frame);
    }
    if frames.len() != n_frames {
        return Err(MotionError::FrameCount {
            declared: n_frames,
            found: frames.len(),
        });
    }
    Ok((
        skeleton,
        MotionClip {
            frame_rate: 1.0 / frame_time,
            frames,
            heading_deg: 0.0,
        },
    ))
}

fn split_motion(text: &str) -> Result<(&str, &str), MotionError> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().eq_ignore_ascii_case("MOTION") {
            return Ok((&text[..offset], &text[offset + line.len()..]));
        }
        offset += line.len();
    }
    Err(MotionError::Hierarchy("missing MOTION section".into()))
}

fn header_value(line: &str, key: &str) -> Result<f64, MotionError> {
    let rest = line
        .get(..key.len())
        .filter(|h| h.eq_ignore_ascii_case(key))
        .map(|_| &line[key.len()..])
        .ok_or_else(|| MotionError::Hierarchy(format!("expected `{key}`, found `{line}`")))?;
    rest.trim()
        .parse()
        .map_err(|_| MotionError::Hierarchy(format!("bad value in `{line}`")))
}

/// Serializes a skeleton and clip. Leaf joints without channels are written
/// as end sites; the root gets position channels. Lengths in meters.
pub fn write_motion_file(skeleton: &Skeleton, clip: &MotionClip) -> String {
    let mut out = String::from("HIERARCHY\n");
    write_joint(&mut out, skeleton, skeleton.root, 0);
    let _ = writeln!(
        out,
        "MOTION\nFrames: {}\nFrame Time: {}",
        clip.frames.len(),
        1.0 / clip.frame_rate
    );
    for frame in &clip.frames {
        let mut row = Vec::new();
        let root = &skeleton.joints[skeleton.root];
        for k in 0..3 {
            row.push(frame.root_translation[k] - root.offset[k]);
        }
        for j in joint_order(skeleton) {
            let joint = &skeleton.joints[j];
            if is_end_site(skeleton, j) {
                continue;
            }
            row.extend(
                frame.rotations[j][..joint.rotation_order.len()]
                    .iter()
                    .copied(),
            );
        }
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn children(skeleton: &Skeleton, j: usize) -> impl Iterator<Item = usize> + '_ {
    (0..skeleton.joints.len()).filter(move |&c| skeleton.joints[c].parent == Some(j))
}

fn is_end_site(skeleton: &Skeleton, j: usize) -> bool {
    j != skeleton.root
        && skeleton.joints[j].rotation_order.is_empty()
        && children(skeleton, j).next().is_none()
}

fn joint_order(skeleton: &Skeleton) -> Vec<usize> {
    fn visit(s: &Skeleton, j: usize, out: &mut Vec<usize>) {
        out.push(j);
        for c in children(s, j).collect::<Vec<_>>() {
            visit(s, c, out);
        }
    }
    let mut out = Vec::new();
    visit(skeleton, skeleton.root, &mut out);
    out
}

fn write_joint(out: &mut String, s: &Skeleton, j: usize, depth: usize) {
    let pad = "  ".repeat(depth);
    let joint = &s.joints[j];
    let offset = |o: &Vector3<f64>| format!("OFFSET {} {} {}", o.x, o.y, o.z);
    if is_end_site(s, j) {
        let _ = writeln!(
            out,
            "{pad}End Site\n{pad}{{\n{pad}  {}\n{pad}}}",
            offset(&joint.offset)
        );
        return;
    }
    let kw = if joint.parent.is_none() {
        "ROOT"
    } else {
        "JOINT"
    };
    let _ = writeln!(out, "{pad}{kw} {}\n{pad}{{", joint.name);
    let _ = writeln!(out, "{pad}  {}", offset(&joint.offset));
    let mut chans: Vec<String> = Vec::new();
    if joint.parent.is_none() {
        chans.extend(["Xposition", "Yposition", "Zposition"].map(String::from));
    }
    chans.extend(
        joint
            .rotation_order
            .iter()
            .map(|a| format!("{}rotation", a.letter())),
    );
    if !chans.is_empty() {
        let _ = writeln!(out, "{pad}  CHANNELS {} {}", chans.len(), chans.join(" "));
    }
    for c in children(s, j).collect::<Vec<_>>() {
        write_joint(out, s, c, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}
