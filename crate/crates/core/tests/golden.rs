//! Binary formats against committed reference files. Regenerate with
//! `TWSIM_BLESS=1 cargo test -p twsim --test golden`.

use std::path::PathBuf;

use num_complex::{Complex32, Complex64};
use twsim::doppler::{GanImage, ImageMeta, SplitTag};
use twsim::fdtd::TransmissionMap;
use twsim::formats::*;
use twsim::grid::MapGeometry;
use twsim::motion::MotionKind;
use twsim::radar::{ComplexTimeSeries, SeriesLabel};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn check(name: &str, bytes: Vec<u8>) -> Vec<u8> {
    let path = golden(name);
    if std::env::var_os("TWSIM_BLESS").is_some() {
        std::fs::write(&path, &bytes).unwrap();
    }
    let stored = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stored, bytes, "{name} differs from the committed file");
    stored
}

fn sample_map() -> TransmissionMap {
    TransmissionMap {
        geometry: MapGeometry::centered(4, 3, 0.0125),
        carrier: 2.4e9,
        wall_id: "ml-001".into(),
        h: (0..12)
            .map(|n| Complex32::new(n as f32 * 0.25 - 1.0, 1.0 / (n as f32 + 1.0)))
            .collect(),
    }
}

fn sample_series() -> ComplexTimeSeries {
    ComplexTimeSeries::new(
        (0..8)
            .map(|n| Complex64::new(n as f64 / 8.0, -(n as f64) / 4.0))
            .collect(),
        500.0,
        SeriesLabel::FreeSpace,
    )
}

fn sample_image() -> GanImage {
    GanImage {
        pixels: (0..4096).map(|i| (i % 97) as f32 / 96.0).collect(),
        meta: ImageMeta {
            motion: MotionKind::WalkLeapWalk,
            yaw_deg: 30.0,
            wall_id: "ag-017".into(),
            split: SplitTag::Train,
        },
    }
}

#[test]
fn twtm_matches_golden() {
    let mut bytes = Vec::new();
    write_twtm(&mut bytes, &sample_map()).unwrap();
    let stored = check("map_4x3.twtm", bytes);
    assert_eq!(&stored[..4], b"TWTM");
    let back = read_twtm(&stored[..], "ml-001").unwrap();
    assert_eq!(back, sample_map());
    let mut again = Vec::new();
    write_twtm(&mut again, &back).unwrap();
    assert_eq!(again, stored);
}

#[test]
fn twbb_matches_golden() {
    let mut bytes = Vec::new();
    write_twbb(&mut bytes, &sample_series()).unwrap();
    let stored = check("series_8.twbb", bytes);
    assert_eq!(stored.len(), 4 + 4 + 8 + 8 * 8);
    let back = read_twbb(&stored[..]).unwrap();
    assert_eq!(back.samples, sample_series().samples);
    assert_eq!(back.sample_rate, 500.0);
    let mut again = Vec::new();
    write_twbb(&mut again, &back).unwrap();
    assert_eq!(again, stored);
}

#[test]
fn twmd_matches_golden() {
    let mut bytes = Vec::new();
    write_twmd(&mut bytes, &sample_image()).unwrap();
    let stored = check("image_64.twmd", bytes);
    let back = read_twmd(&stored[..]).unwrap();
    assert_eq!(back, sample_image());
    let mut again = Vec::new();
    write_twmd(&mut again, &back).unwrap();
    assert_eq!(again, stored);
}
