//! Little-endian binary containers for transmission maps (`TWTM`), baseband
//! series (`TWBB`) and spectrogram images (`TWMD`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::{Complex32, Complex64};
use thiserror::Error;

use crate::doppler::{GanImage, ImageMeta, SplitTag, IMAGE_SIZE};
use crate::fdtd::TransmissionMap;
use crate::grid::MapGeometry;
use crate::motion::MotionKind;
use crate::radar::{ComplexTimeSeries, SeriesLabel};

pub const TWTM_MAGIC: [u8; 4] = *b"TWTM";
pub const TWBB_MAGIC: [u8; 4] = *b"TWBB";
pub const TWMD_MAGIC: [u8; 4] = *b"TWMD";
pub const TWTM_VERSION: u32 = 1;
pub const TWMD_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported version {found} (this reader handles {supported})")]
    Version { found: u32, supported: u32 },
    #[error("file is truncated")]
    Truncated,
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Path {
        path: String,
        #[source]
        source: Box<FormatError>,
    },
    #[error(transparent)]
    Io(std::io::Error),
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            FormatError::Truncated
        } else {
            FormatError::Io(e)
        }
    }
}

impl FormatError {
    fn at(self, path: &Path) -> Self {
        FormatError::Path {
            path: path.display().to_string(),
            source: Box::new(self),
        }
    }
}

struct Reader<R>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn magic(&mut self, expected: [u8; 4]) -> Result<(), FormatError> {
        let found = self.bytes::<4>()?;
        if found != expected {
            return Err(FormatError::BadMagic {
                expected: String::from_utf8_lossy(&expected).into_owned(),
                found: String::from_utf8_lossy(&found).into_owned(),
            });
        }
        Ok(())
    }
    fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>, FormatError> {
        let mut raw = vec![0u8; n * 4];
        self.0.read_exact(&mut raw)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
    fn end(&mut self) -> Result<(), FormatError> {
        let mut extra = [0u8; 1];
        match self.0.read(&mut extra)? {
            0 => Ok(()),
            _ => Err(FormatError::Invalid("trailing bytes after payload".into())),
        }
    }
}

fn put_f32s<W: Write>(w: &mut W, values: impl Iterator<Item = f32>) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| FormatError::from(e).at(path))
}

fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| FormatError::from(e).at(path))
}

/// Writes the map; the wall id is not part of the container.
pub fn write_twtm<W: Write>(mut w: W, map: &TransmissionMap) -> Result<(), FormatError> {
    let g = &map.geometry;
    if map.h.len() != g.nx * g.nz {
        return Err(FormatError::Invalid(
            "map size does not match its geometry".into(),
        ));
    }
    w.write_all(&TWTM_MAGIC)?;
    w.write_all(&TWTM_VERSION.to_le_bytes())?;
    w.write_all(&(g.nx as u32).to_le_bytes())?;
    w.write_all(&(g.nz as u32).to_le_bytes())?;
    w.write_all(&g.cell_size.to_le_bytes())?;
    w.write_all(&map.carrier.to_le_bytes())?;
    put_f32s(&mut w, map.h.iter().flat_map(|c| [c.re, c.im]))?;
    w.flush()?;
    Ok(())
}

/// Reads a map, placing it with x centered and z from 0.
pub fn read_twtm<R: Read>(r: R, wall_id: &str) -> Result<TransmissionMap, FormatError> {
    let mut r = Reader(r);
    r.magic(TWTM_MAGIC)?;
    let version = r.u32()?;
    if version != TWTM_VERSION {
        return Err(FormatError::Version {
            found: version,
            supported: TWTM_VERSION,
        });
    }
    let nx = r.u32()? as usize;
    let nz = r.u32()? as usize;
    let cell = r.f64()?;
    let carrier = r.f64()?;
    if nx < 2 || nz < 2 || !(cell.is_finite() && cell > 0.0 && carrier.is_finite() && carrier > 0.0)
    {
        return Err(FormatError::Invalid(format!(
            "header nx={nx} nz={nz} cell={cell} f={carrier}"
        )));
    }
    let raw = r.f32_vec(2 * nx * nz)?;
    r.end()?;
    Ok(TransmissionMap {
        geometry: MapGeometry::centered(nx, nz, cell),
        carrier,
        wall_id: wall_id.to_string(),
        h: raw
            .chunks_exact(2)
            .map(|p| Complex32::new(p[0], p[1]))
            .collect(),
    })
}

/// Samples are stored as f32 pairs.
pub fn write_twbb<W: Write>(mut w: W, series: &ComplexTimeSeries) -> Result<(), FormatError> {
    w.write_all(&TWBB_MAGIC)?;
    w.write_all(&(series.len() as u32).to_le_bytes())?;
    w.write_all(&series.sample_rate.to_le_bytes())?;
    put_f32s(
        &mut w,
        series
            .samples
            .iter()
            .flat_map(|c| [c.re as f32, c.im as f32]),
    )?;
    w.flush()?;
    Ok(())
}

/// Reads samples back (widened to f64); label and motion are not stored.
pub fn read_twbb<R: Read>(r: R) -> Result<ComplexTimeSeries, FormatError> {
    let mut r = Reader(r);
    r.magic(TWBB_MAGIC)?;
    let n = r.u32()? as usize;
    let fs = r.f64()?;
    let raw = r.f32_vec(2 * n)?;
    r.end()?;
    Ok(ComplexTimeSeries::new(
        raw.chunks_exact(2)
            .map(|p| Complex64::new(p[0] as f64, p[1] as f64))
            .collect(),
        fs,
        SeriesLabel::FreeSpace,
    ))
}

pub fn write_twmd<W: Write>(mut w: W, img: &GanImage) -> Result<(), FormatError> {
    if img.pixels.len() != IMAGE_SIZE * IMAGE_SIZE {
        return Err(FormatError::Invalid(format!("{} pixels", img.pixels.len())));
    }
    let id = img.meta.wall_id.as_bytes();
    w.write_all(&TWMD_MAGIC)?;
    w.write_all(&TWMD_VERSION.to_le_bytes())?;
    w.write_all(&(IMAGE_SIZE as u32).to_le_bytes())?;
    w.write_all(&(IMAGE_SIZE as u32).to_le_bytes())?;
    w.write_all(&[img.meta.motion.code()])?;
    w.write_all(&img.meta.yaw_deg.to_le_bytes())?;
    w.write_all(&(id.len() as u32).to_le_bytes())?;
    w.write_all(id)?;
    w.write_all(&[img.meta.split.code()])?;
    put_f32s(&mut w, img.pixels.iter().copied())?;
    w.flush()?;
    Ok(())
}

pub fn read_twmd<R: Read>(r: R) -> Result<GanImage, FormatError> {
    let mut r = Reader(r);
    r.magic(TWMD_MAGIC)?;
    let version = r.u32()?;
    if version != TWMD_VERSION {
        return Err(FormatError::Version {
            found: version,
            supported: TWMD_VERSION,
        });
    }
    let (h, w) = (r.u32()? as usize, r.u32()? as usize);
    if h != IMAGE_SIZE || w != IMAGE_SIZE {
        return Err(FormatError::Invalid(format!("image is {h}×{w}")));
    }
    let motion_code = r.u8()?;
    let motion = MotionKind::from_code(motion_code)
        .ok_or_else(|| FormatError::Invalid(format!("motion code {motion_code}")))?;
    let yaw_deg = r.f32()?;
    let id_len = r.u32()? as usize;
    if id_len > 4096 {
        return Err(FormatError::Invalid(format!("wall id length {id_len}")));
    }
    let mut id = vec![0u8; id_len];
    r.0.read_exact(&mut id)?;
    let wall_id =
        String::from_utf8(id).map_err(|_| FormatError::Invalid("wall id is not UTF-8".into()))?;
    let split_code = r.u8()?;
    let split = SplitTag::from_code(split_code)
        .ok_or_else(|| FormatError::Invalid(format!("split code {split_code}")))?;
    let pixels = r.f32_vec(h * w)?;
    r.end()?;
    Ok(GanImage {
        pixels,
        meta: ImageMeta {
            motion,
            yaw_deg,
            wall_id,
            split,
        },
    })
}

pub fn save_twtm(path: &Path, map: &TransmissionMap) -> Result<(), FormatError> {
    write_twtm(create(path)?, map).map_err(|e| e.at(path))
}

pub fn load_twtm(path: &Path, wall_id: &str) -> Result<TransmissionMap, FormatError> {
    read_twtm(open(path)?, wall_id).map_err(|e| e.at(path))
}

pub fn save_twbb(path: &Path, series: &ComplexTimeSeries) -> Result<(), FormatError> {
    write_twbb(create(path)?, series).map_err(|e| e.at(path))
}

pub fn load_twbb(path: &Path) -> Result<ComplexTimeSeries, FormatError> {
    read_twbb(open(path)?).map_err(|e| e.at(path))
}

pub fn save_twmd(path: &Path, img: &GanImage) -> Result<(), FormatError> {
    write_twmd(create(path)?, img).map_err(|e| e.at(path))
}

pub fn load_twmd(path: &Path) -> Result<GanImage, FormatError> {
    read_twmd(open(path)?).map_err(|e| e.at(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image() -> GanImage {
        GanImage {
            pixels: (0..4096).map(|i| i as f32 / 4095.0).collect(),
            meta: ImageMeta {
                motion: MotionKind::WalkLeapWalk,
                yaw_deg: 30.0,
                wall_id: "ag-017".into(),
                split: SplitTag::Test,
            },
        }
    }

    #[test]
    fn twmd_round_trip() {
        let mut buf = Vec::new();
        write_twmd(&mut buf, &image()).unwrap();
        assert_eq!(buf.len(), 4 + 12 + 1 + 4 + 4 + 6 + 1 + 4096 * 4);
        assert_eq!(read_twmd(&buf[..]).unwrap(), image());
    }

    #[test]
    fn twmd_rejects_magic_version_truncation() {
        let mut buf = Vec::new();
        write_twmd(&mut buf, &image()).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_twmd(&bad[..]),
            Err(FormatError::BadMagic { .. })
        ));
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(matches!(
            read_twmd(&v2[..]),
            Err(FormatError::Version {
                found: 2,
                supported: 1
            })
        ));
        assert!(matches!(
            read_twmd(&buf[..buf.len() - 1]),
            Err(FormatError::Truncated)
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_twmd(&long[..]), Err(FormatError::Invalid(_))));
    }

    #[test]
    fn twtm_round_trip() {
        let map = TransmissionMap {
            geometry: MapGeometry::centered(3, 2, 0.0125),
            carrier: 2.4e9,
            wall_id: "x".into(),
            h: (0..6)
                .map(|i| Complex32::new(i as f32, -(i as f32) / 3.0))
                .collect(),
        };
        let mut buf = Vec::new();
        write_twtm(&mut buf, &map).unwrap();
        assert_eq!(buf.len(), 32 + 48);
        assert_eq!(read_twtm(&buf[..], "x").unwrap(), map);
    }

    #[test]
    fn twbb_round_trip_bytes() {
        let s = ComplexTimeSeries::new(
            vec![Complex64::new(0.1, -0.2), Complex64::new(1e-3, 7.0)],
            500.0,
            SeriesLabel::FreeSpace,
        );
        let mut a = Vec::new();
        write_twbb(&mut a, &s).unwrap();
        let back = read_twbb(&a[..]).unwrap();
        let mut b = Vec::new();
        write_twbb(&mut b, &back).unwrap();
        assert_eq!(a, b);
        assert_eq!(back.samples[1], Complex64::new(1e-3f32 as f64, 7.0));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_twmd(Path::new("/nonexistent/x.twmd")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.twmd"));
    }
}
