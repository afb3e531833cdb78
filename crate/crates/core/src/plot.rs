//! PNG rendering of spectrogram images with simple axis annotations.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use thiserror::Error;

use crate::doppler::{GanImage, IMAGE_BAND, IMAGE_SIZE};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: png::EncodingError,
    },
    #[error("nothing to plot")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Colormap {
    Gray,
    Viridis,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    /// Output pixels per image pixel.
    pub scale: usize,
    pub colormap: Colormap,
    /// Times of the first and last image column, s.
    pub time_span: [f64; 2],
    pub title: bool,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            scale: 1,
            colormap: Colormap::Gray,
            time_span: [0.1, 0.1 + 221.0 * 3.0 / 500.0],
            title: true,
        }
    }
}

const GLYPH_W: usize = 3;
const GLYPH_H: usize = 5;
const LEFT: usize = 22;
const BOTTOM: usize = 14;
const TOP: usize = 9;
const RIGHT: usize = 4;
const FG: [u8; 3] = [230, 230, 230];

fn glyph(c: char) -> [u8; 5] {
    match c.to_ascii_uppercase() {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        'A' => [2, 5, 7, 5, 5],
        'B' => [6, 5, 6, 5, 6],
        'C' => [3, 4, 4, 4, 3],
        'D' => [6, 5, 5, 5, 6],
        'E' => [7, 4, 6, 4, 7],
        'F' => [7, 4, 6, 4, 4],
        'G' => [3, 4, 5, 5, 3],
        'H' => [5, 5, 7, 5, 5],
        'I' => [7, 2, 2, 2, 7],
        'J' => [1, 1, 1, 5, 2],
        'K' => [5, 5, 6, 5, 5],
        'L' => [4, 4, 4, 4, 7],
        'M' => [5, 7, 7, 5, 5],
        'N' => [6, 5, 5, 5, 5],
        'O' => [2, 5, 5, 5, 2],
        'P' => [6, 5, 6, 4, 4],
        'Q' => [2, 5, 5, 6, 3],
        'R' => [6, 5, 6, 5, 5],
        'S' => [3, 4, 2, 1, 6],
        'T' => [7, 2, 2, 2, 2],
        'U' => [5, 5, 5, 5, 7],
        'V' => [5, 5, 5, 5, 2],
        'W' => [5, 5, 7, 7, 5],
        'X' => [5, 5, 2, 5, 5],
        'Y' => [5, 5, 2, 2, 2],
        'Z' => [7, 1, 2, 4, 7],
        '-' => [0, 0, 7, 0, 0],
        '+' => [0, 2, 7, 2, 0],
        '.' => [0, 0, 0, 0, 2],
        '_' => [0, 0, 0, 0, 7],
        '/' => [1, 1, 2, 4, 4],
        _ => [0; 5],
    }
}

struct Canvas {
    w: usize,
    h: usize,
    rgb: Vec<u8>,
}

impl Canvas {
    fn new(w: usize, h: usize) -> Self {
        Canvas {
            w,
            h,
            rgb: vec![0; w * h * 3],
        }
    }

    fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.w && y < self.h {
            let o = (y * self.w + x) * 3;
            self.rgb[o..o + 3].copy_from_slice(&c);
        }
    }

    fn text(&mut self, x: usize, y: usize, s: &str) {
        for (n, ch) in s.chars().enumerate() {
            let g = glyph(ch);
            for (row, bits) in g.iter().enumerate() {
                for col in 0..GLYPH_W {
                    if bits >> (GLYPH_W - 1 - col) & 1 == 1 {
                        self.put(x + n * (GLYPH_W + 1) + col, y + row, FG);
                    }
                }
            }
        }
    }

    fn blit(&mut self, other: &Canvas, x0: usize, y0: usize) {
        for y in 0..other.h {
            for x in 0..other.w {
                let o = (y * other.w + x) * 3;
                self.put(
                    x0 + x,
                    y0 + y,
                    [other.rgb[o], other.rgb[o + 1], other.rgb[o + 2]],
                );
            }
        }
    }
}

fn text_width(s: &str) -> usize {
    (s.chars().count() * (GLYPH_W + 1)).saturating_sub(1)
}

/// Maps `[0, 1]` to a color.
pub fn colorize(v: f32, map: Colormap) -> [u8; 3] {
    let v = if v.is_finite() {
        v.clamp(0.0, 1.0)
    } else {
        0.0
    };
    match map {
        Colormap::Gray => {
            let g = (v * 255.0).round() as u8;
            [g, g, g]
        }
        Colormap::Viridis => {
            const STOPS: [[f32; 3]; 9] = [
                [68.0, 1.0, 84.0],
                [71.0, 44.0, 122.0],
                [59.0, 81.0, 139.0],
                [44.0, 113.0, 142.0],
                [33.0, 144.0, 141.0],
                [39.0, 173.0, 129.0],
                [92.0, 200.0, 99.0],
                [170.0, 220.0, 50.0],
                [253.0, 231.0, 37.0],
            ];
            let pos = v * 8.0;
            let i = (pos.floor() as usize).min(7);
            let w = pos - i as f32;
            let mut out = [0u8; 3];
            for c in 0..3 {
                out[c] = (STOPS[i][c] * (1.0 - w) + STOPS[i + 1][c] * w).round() as u8;
            }
            out
        }
    }
}

/// Data region origin inside a rendered panel.
pub fn data_origin() -> (usize, usize) {
    (LEFT, TOP)
}

/// Panel with the image (positive Doppler up, time to the right), Doppler
/// ticks in Hz on the left and time ticks in seconds below.
fn render(img: &GanImage, opts: &PlotOptions) -> Canvas {
    let s = opts.scale.max(1);
    let side = IMAGE_SIZE * s;
    let mut cv = Canvas::new(LEFT + side + RIGHT, TOP + side + BOTTOM);
    for r in 0..IMAGE_SIZE {
        for c in 0..IMAGE_SIZE {
            let color = colorize(img.at(r, c), opts.colormap);
            let y0 = TOP + (IMAGE_SIZE - 1 - r) * s;
            for dy in 0..s {
                for dx in 0..s {
                    cv.put(LEFT + c * s + dx, y0 + dy, color);
                }
            }
        }
    }
    // Doppler ticks; row r sits at -160 + 5 r Hz
    let hz_per_px = 2.0 * IMAGE_BAND / side as f64;
    for f in [-160i32, -80, 0, 80, 155] {
        let label = if f == 155 {
            "160".to_string()
        } else {
            f.to_string()
        };
        let y = TOP + side - 1 - ((f as f64 + IMAGE_BAND) / hz_per_px).round() as usize;
        cv.put(LEFT - 2, y, FG);
        cv.put(LEFT - 1, y, FG);
        let ty = y
            .saturating_sub(GLYPH_H / 2)
            .clamp(TOP.saturating_sub(2), TOP + side - GLYPH_H);
        cv.text((LEFT - 3).saturating_sub(text_width(&label)), ty, &label);
    }
    cv.text(1, 1, "HZ");
    let [t0, t1] = opts.time_span;
    for t in [0.5, 1.0] {
        if t < t0 || t > t1 {
            continue;
        }
        let x = LEFT + (((t - t0) / (t1 - t0)) * (side - 1) as f64).round() as usize;
        cv.put(x, TOP + side, FG);
        cv.put(x, TOP + side + 1, FG);
        let label = format!("{t:.1}");
        cv.text(
            x.saturating_sub(text_width(&label) / 2),
            TOP + side + 3,
            &label,
        );
    }
    let unit = "S";
    cv.text(
        LEFT + side - text_width(unit),
        TOP + side + 3 + GLYPH_H + 1,
        unit,
    );
    if opts.title {
        let title = format!(
            "{} {} {}",
            img.meta.wall_id,
            img.meta.motion.as_str(),
            img.meta.yaw_deg
        );
        let max_chars = (cv.w - LEFT) / (GLYPH_W + 1);
        let title: String = title.chars().take(max_chars).collect();
        cv.text(LEFT, 1, &title);
    }
    cv
}

fn save(cv: &Canvas, path: &Path, gray: bool) -> Result<(), PlotError> {
    let file = File::create(path).map_err(|source| PlotError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut enc = png::Encoder::new(BufWriter::new(file), cv.w as u32, cv.h as u32);
    enc.set_depth(png::BitDepth::Eight);
    let enc_err = |source| PlotError::Encode {
        path: path.display().to_string(),
        source,
    };
    if gray {
        enc.set_color(png::ColorType::Grayscale);
        let data: Vec<u8> = cv.rgb.chunks_exact(3).map(|p| p[0]).collect();
        enc.write_header()
            .and_then(|mut w| w.write_image_data(&data))
            .map_err(enc_err)
    } else {
        enc.set_color(png::ColorType::Rgb);
        enc.write_header()
            .and_then(|mut w| w.write_image_data(&cv.rgb))
            .map_err(enc_err)
    }
}

pub fn write_png(img: &GanImage, path: &Path, opts: &PlotOptions) -> Result<(), PlotError> {
    save(&render(img, opts), path, opts.colormap == Colormap::Gray)
}

/// Panels laid out row by row, `columns` per row.
pub fn write_montage(
    images: &[GanImage],
    columns: usize,
    path: &Path,
    opts: &PlotOptions,
) -> Result<(), PlotError> {
    if images.is_empty() {
        return Err(PlotError::Empty);
    }
    let panels: Vec<Canvas> = images.iter().map(|i| render(i, opts)).collect();
    let cols = columns.clamp(1, panels.len());
    let rows = panels.len().div_ceil(cols);
    let (pw, ph) = (panels[0].w, panels[0].h);
    let mut cv = Canvas::new(pw * cols, ph * rows);
    for (n, p) in panels.iter().enumerate() {
        cv.blit(p, (n % cols) * pw, (n / cols) * ph);
    }
    save(&cv, path, opts.colormap == Colormap::Gray)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doppler::{ImageMeta, SplitTag};
    use crate::motion::MotionKind;

    fn img() -> GanImage {
        GanImage {
            pixels: (0..4096).map(|i| (i / 64) as f32 / 63.0).collect(),
            meta: ImageMeta {
                motion: MotionKind::Walk,
                yaw_deg: 15.0,
                wall_id: "ml-001".into(),
                split: SplitTag::Train,
            },
        }
    }

    #[test]
    fn data_region_is_flipped_copy() {
        let cv = render(&img(), &PlotOptions::default());
        let (x0, y0) = data_origin();
        // top data row holds the highest Doppler row (value 1.0)
        assert_eq!(cv.rgb[(y0 * cv.w + x0 + 10) * 3], 255);
        assert_eq!(cv.rgb[((y0 + 63) * cv.w + x0 + 10) * 3], 0);
        assert_eq!((cv.w, cv.h), (LEFT + 64 + RIGHT, TOP + 64 + BOTTOM));
    }

    #[test]
    fn viridis_endpoints() {
        assert_eq!(colorize(0.0, Colormap::Viridis), [68, 1, 84]);
        assert_eq!(colorize(1.0, Colormap::Viridis), [253, 231, 37]);
        assert_eq!(colorize(f32::NAN, Colormap::Gray), [0, 0, 0]);
    }

    #[test]
    fn montage_and_missing_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.png");
        let imgs = vec![img(); 8];
        write_montage(&imgs, 4, &p, &PlotOptions::default()).unwrap();
        let dec = png::Decoder::new(File::open(&p).unwrap());
        let reader = dec.read_info().unwrap();
        let info = reader.info();
        assert_eq!(info.width as usize, 4 * (LEFT + 64 + RIGHT));
        assert_eq!(info.height as usize, 2 * (TOP + 64 + BOTTOM));
        let err = write_png(
            &img(),
            &dir.path().join("no/such/x.png"),
            &PlotOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("no/such/x.png"));
    }
}
