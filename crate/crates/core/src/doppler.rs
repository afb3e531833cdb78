//! Short-time Fourier analysis of baseband returns and the 64×64 image form
//! fed to the learning stage.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::motion::MotionKind;
use crate::radar::ComplexTimeSeries;

pub const WINDOW_LEN: f64 = 0.2;
pub const DEFAULT_HOP: usize = 3;
/// Doppler resolution of the zero-padded transform, Hz.
pub const BIN_WIDTH: f64 = 2.5;
pub const IMAGE_SIZE: usize = 64;
/// Doppler band kept in images, Hz: `[-IMAGE_BAND, +IMAGE_BAND)`.
pub const IMAGE_BAND: f64 = 160.0;
/// Dynamic range of image log compression, dB.
pub const DYNAMIC_RANGE_DB: f64 = 60.0;

#[derive(Debug, Error, PartialEq)]
pub enum DopplerError {
    #[error("series has {len} samples, a window needs {window}")]
    TooShort { len: usize, window: usize },
    #[error("invalid STFT parameter: {0}")]
    InvalidParameter(String),
    #[error("spectrogram axis is not the standard 200-bin ±250 Hz axis")]
    NonstandardAxis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    /// Row-major `frames × bins`.
    pub values: Vec<Complex64>,
    pub frames: usize,
    pub bins: usize,
    /// Window-center time of each frame, s.
    pub frame_times: Vec<f64>,
    /// Bin frequencies, Hz, ascending from `-fs/2`.
    pub doppler_axis: Vec<f64>,
    pub window_len: f64,
    pub hop: usize,
    pub sample_rate: f64,
}

impl Spectrogram {
    pub fn at(&self, frame: usize, bin: usize) -> Complex64 {
        self.values[frame * self.bins + bin]
    }

    pub fn frame(&self, frame: usize) -> &[Complex64] {
        &self.values[frame * self.bins..(frame + 1) * self.bins]
    }

    /// Bin of largest magnitude in a frame.
    pub fn peak_bin(&self, frame: usize) -> usize {
        let row = self.frame(frame);
        (0..self.bins).fold(0, |best, b| {
            if row[b].norm() > row[best].norm() {
                b
            } else {
                best
            }
        })
    }

    pub fn bin_of(&self, freq: f64) -> Option<usize> {
        let step = self.sample_rate / self.bins as f64;
        let b = ((freq - self.doppler_axis[0]) / step).round();
        (b >= 0.0 && (b as usize) < self.bins).then_some(b as usize)
    }
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// STFT with a Hann window of `window_len` seconds, `hop` samples between
/// frames and `sample_rate / BIN_WIDTH` zero-padded bins. Phases refer to
/// absolute time, so a tone keeps a steady phase from frame to frame.
pub fn stft(
    series: &ComplexTimeSeries,
    window_len: f64,
    hop: usize,
) -> Result<Spectrogram, DopplerError> {
    let fs = series.sample_rate;
    if !(fs > 0.0 && fs.is_finite()) || hop == 0 || !(window_len.is_finite() && window_len > 0.0) {
        return Err(DopplerError::InvalidParameter(format!(
            "sample rate {fs}, window {window_len}, hop {hop}"
        )));
    }
    let w = (window_len * fs).round() as usize;
    let bins = (fs / BIN_WIDTH).round() as usize;
    if w == 0 || bins < w {
        return Err(DopplerError::InvalidParameter(format!(
            "window {w} samples, {bins} bins"
        )));
    }
    let n = series.len();
    if n < w {
        return Err(DopplerError::TooShort { len: n, window: w });
    }
    let frames = (n - w) / hop + 1;
    let window = hann(w);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(bins);
    let half = bins / 2;
    let mut values = vec![Complex64::new(0.0, 0.0); frames * bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); bins];
    for m in 0..frames {
        let start = m * hop;
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (l, (b, x)) in buf
            .iter_mut()
            .zip(&series.samples[start..start + w])
            .enumerate()
        {
            *b = x * window[l];
        }
        fft.process(&mut buf);
        let row = &mut values[m * bins..(m + 1) * bins];
        for (q, v) in buf.iter().enumerate() {
            // signed bin index, moved so that -fs/2 comes first
            let signed = if q < bins - half {
                q as i64
            } else {
                q as i64 - bins as i64
            };
            let phase = -2.0
                * std::f64::consts::PI
                * (signed * start as i64).rem_euclid(bins as i64) as f64
                / bins as f64;
            row[(signed + half as i64) as usize] = v * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(Spectrogram {
        values,
        frames,
        bins,
        frame_times: (0..frames)
            .map(|m| (m * hop) as f64 / fs + window_len / 2.0)
            .collect(),
        doppler_axis: (0..bins)
            .map(|b| (b as f64 - half as f64) * fs / bins as f64)
            .collect(),
        window_len,
        hop,
        sample_rate: fs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    None,
    Train,
    Test,
}

impl SplitTag {
    pub fn code(self) -> u8 {
        match self {
            SplitTag::None => 0,
            SplitTag::Train => 1,
            SplitTag::Test => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(SplitTag::None),
            1 => Some(SplitTag::Train),
            2 => Some(SplitTag::Test),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageMeta {
    pub motion: MotionKind,
    pub yaw_deg: f32,
    pub wall_id: String,
    pub split: SplitTag,
}

/// Normalized log-magnitude image; row `r` holds Doppler `-160 + 5 r` Hz,
/// column `c` is time.
#[derive(Clone, Debug, PartialEq)]
pub struct GanImage {
    pub pixels: Vec<f32>,
    pub meta: ImageMeta,
}

impl GanImage {
    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * IMAGE_SIZE + col]
    }

    /// Row with the largest summed intensity.
    pub fn brightest_row(&self) -> usize {
        let sums: Vec<f32> = self
            .pixels
            .chunks(IMAGE_SIZE)
            .map(|r| r.iter().sum())
            .collect();
        (0..IMAGE_SIZE).fold(0, |best, r| if sums[r] > sums[best] { r } else { best })
    }

    pub fn row_frequency(row: usize) -> f64 {
        -IMAGE_BAND + row as f64 * 2.0 * BIN_WIDTH
    }
}

/// Crop to ±160 Hz, keep every other bin, resample time to 64 columns,
/// then log-compress and min-max normalize into `[0, 1]`.
pub fn to_gan_image(spec: &Spectrogram, meta: ImageMeta) -> Result<GanImage, DopplerError> {
    let standard = spec.bins == 200
        && (spec.sample_rate - 500.0).abs() < 1e-9
        && spec.frames >= 1
        && spec.values.len() == spec.frames * spec.bins;
    if !standard {
        return Err(DopplerError::NonstandardAxis);
    }
    let first = spec
        .bin_of(-IMAGE_BAND)
        .ok_or(DopplerError::NonstandardAxis)?;
    let mag = |f: usize, r: usize| spec.at(f, first + 2 * r).norm();

    let mut img = vec![0.0f64; IMAGE_SIZE * IMAGE_SIZE];
    for c in 0..IMAGE_SIZE {
        let pos = if spec.frames == 1 {
            0.0
        } else {
            c as f64 * (spec.frames - 1) as f64 / (IMAGE_SIZE - 1) as f64
        };
        let f0 = (pos.floor() as usize).min(spec.frames - 1);
        let f1 = (f0 + 1).min(spec.frames - 1);
        let w = pos - f0 as f64;
        for r in 0..IMAGE_SIZE {
            img[r * IMAGE_SIZE + c] = if w == 0.0 {
                mag(f0, r)
            } else {
                (1.0 - w) * mag(f0, r) + w * mag(f1, r)
            };
        }
    }
    Ok(GanImage {
        pixels: normalize_db(&img),
        meta,
    })
}

/// `20 log10(x + eps)` floored at the top level minus the dynamic range, then
/// mapped onto `[0, 1]`. Constant inputs map to 0.5.
pub fn normalize_db(mag: &[f64]) -> Vec<f32> {
    let max = mag.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-6 * max;
    let db: Vec<f64> = mag.iter().map(|&m| 20.0 * (m + eps).log10()).collect();
    let top = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = top - DYNAMIC_RANGE_DB;
    let db: Vec<f64> = db.iter().map(|&d| d.max(floor)).collect();
    let lo = db.iter().cloned().fold(f64::INFINITY, f64::min);
    let span = top - lo;
    if !(span > 0.0 && span.is_finite()) {
        return vec![0.5; mag.len()];
    }
    db.iter()
        .map(|&d| (((d - lo) / span).clamp(0.0, 1.0)) as f32)
        .collect()
}
