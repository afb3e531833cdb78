//! Baseband returns of the scatterer tracks, in free space or through a wall
//! characterized by a transmission map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdtd::{TransmissionMap, REFERENCE_DISTANCE};
use crate::grid::{MapGeometry, C0, DEFAULT_CARRIER};
use crate::motion::ScattererTrack;

#[derive(Debug, Error, PartialEq)]
pub enum RadarError {
    #[error("point ({x:.4}, {z:.4}) is outside the map interior")]
    OutsideMap { x: f64, z: f64 },
    #[error("part `{part}` at sample {sample} is outside the map interior")]
    TrackOutsideMap { part: String, sample: usize },
    #[error("map carrier {map} Hz differs from radar carrier {radar} Hz")]
    CarrierMismatch { map: f64, radar: f64 },
    #[error("track was sampled for a radar at {track:?}, parameters place it at {params:?}")]
    RadarMismatch { track: [f64; 3], params: [f64; 3] },
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarParams {
    pub carrier: f64,
    /// Amplitude calibration `A`.
    pub amplitude: f64,
    /// Scene `(x, height, z)` of the co-located transmitter and receiver.
    pub position: [f64; 3],
}

impl Default for RadarParams {
    fn default() -> Self {
        RadarParams {
            carrier: DEFAULT_CARRIER,
            amplitude: 1.0,
            position: [0.0, 0.5, 0.5],
        }
    }
}

impl RadarParams {
    fn validate(&self) -> Result<(), RadarError> {
        if !(self.carrier > 0.0 && self.carrier.is_finite()) {
            return Err(RadarError::InvalidParams("carrier must be positive".into()));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(RadarError::InvalidParams(
                "amplitude must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Two-way wavenumber `4 pi f / c`.
    pub fn two_way_k(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.carrier / C0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesLabel {
    FreeSpace,
    ThroughWall(String),
}

impl SeriesLabel {
    pub fn wall_id(&self) -> &str {
        match self {
            SeriesLabel::FreeSpace => "free_space",
            SeriesLabel::ThroughWall(id) => id,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTimeSeries {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub label: SeriesLabel,
    pub motion: String,
    pub yaw_deg: f64,
}

impl ComplexTimeSeries {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, label: SeriesLabel) -> Self {
        ComplexTimeSeries {
            samples,
            sample_rate,
            label,
            motion: String::new(),
            yaw_deg: 0.0,
        }
    }

    pub fn with_motion(mut self, motion: impl Into<String>, yaw_deg: f64) -> Self {
        self.motion = motion.into();
        self.yaw_deg = yaw_deg;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Bilinear interpolation of node values `f(i, k)` at scene point `p`,
/// which must lie within the node hull.
pub fn bilinear(
    geo: &MapGeometry,
    f: impl Fn(usize, usize) -> Complex64,
    p: [f64; 2],
) -> Complex64 {
    let fi = (p[0] - geo.x_min) / geo.cell_size;
    let fk = (p[1] - geo.z_min) / geo.cell_size;
    let i0 = (fi.floor() as usize).min(geo.nx.saturating_sub(2));
    let k0 = (fk.floor() as usize).min(geo.nz.saturating_sub(2));
    let (wx, wz) = (fi - i0 as f64, fk - k0 as f64);
    let i1 = (i0 + 1).min(geo.nx - 1);
    let k1 = (k0 + 1).min(geo.nz - 1);
    // skip zero-weight corners so exact node hits return the node value unchanged
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, k, w) in [
        (i0, k0, (1.0 - wx) * (1.0 - wz)),
        (i1, k0, wx * (1.0 - wz)),
        (i0, k1, (1.0 - wx) * wz),
        (i1, k1, wx * wz),
    ] {
        if w != 0.0 {
            acc += f(i, k) * w;
        }
    }
    acc
}

pub fn sample_transmission(map: &TransmissionMap, rho: [f64; 2]) -> Result<Complex64, RadarError> {
    if !map.geometry.contains(rho) {
        return Err(RadarError::OutsideMap {
            x: rho[0],
            z: rho[1],
        });
    }
    Ok(bilinear(
        &map.geometry,
        |i, k| {
            let h = map.at(i, k);
            Complex64::new(h.re as f64, h.im as f64)
        },
        rho,
    ))
}

fn check_track(track: &ScattererTrack, p: &RadarParams) -> Result<(), RadarError> {
    p.validate()?;
    if track.radar != p.position {
        return Err(RadarError::RadarMismatch {
            track: track.radar,
            params: p.position,
        });
    }
    Ok(())
}

/// `sum_b A a_b H(rho_b)^2 exp(-j 4 pi f_c (r_b - |rho_b - radar|) / c)`.
pub fn synth_throughwall(
    track: &ScattererTrack,
    map: &TransmissionMap,
    p: &RadarParams,
) -> Result<ComplexTimeSeries, RadarError> {
    check_track(track, p)?;
    if (map.carrier - p.carrier).abs() > 1e-9 * p.carrier {
        return Err(RadarError::CarrierMismatch {
            map: map.carrier,
            radar: p.carrier,
        });
    }
    let k = p.two_way_k();
    let mut out = vec![Complex64::new(0.0, 0.0); track.samples];
    for (b, part) in track.parts.iter().enumerate() {
        for (n, acc) in out.iter_mut().enumerate() {
            let h =
                sample_transmission(map, part.rho[n]).map_err(|_| RadarError::TrackOutsideMap {
                    part: part.name.clone(),
                    sample: n,
                })?;
            let rho = track.ground_range(b, n);
            *acc += p.amplitude
                * part.amplitude[n]
                * h
                * h
                * Complex64::from_polar(1.0, -k * (part.range[n] - rho));
        }
    }
    Ok(ComplexTimeSeries::new(
        out,
        track.sample_rate,
        SeriesLabel::ThroughWall(map.wall_id.clone()),
    ))
}

/// `sum_b A a_b (rho_ref / r_b)^2 exp(-j 4 pi f_c r_b / c)`.
pub fn synth_freespace(
    track: &ScattererTrack,
    p: &RadarParams,
) -> Result<ComplexTimeSeries, RadarError> {
    check_track(track, p)?;
    let k = p.two_way_k();
    let mut out = vec![Complex64::new(0.0, 0.0); track.samples];
    for part in &track.parts {
        for (n, acc) in out.iter_mut().enumerate() {
            let r = part.range[n];
            let decay = (REFERENCE_DISTANCE / r).powi(2);
            *acc += Complex64::from_polar(p.amplitude * part.amplitude[n] * decay, -k * r);
        }
    }
    Ok(ComplexTimeSeries::new(
        out,
        track.sample_rate,
        SeriesLabel::FreeSpace,
    ))
}

/// Upper bound on the through-wall energy of a track: every part adds in
/// phase with the largest `|H|^2` seen anywhere on the track's footprint.
pub fn throughwall_energy_bound(
    track: &ScattererTrack,
    map: &TransmissionMap,
    p: &RadarParams,
) -> Result<f64, RadarError> {
    let mut h_max: f64 = 0.0;
    for part in &track.parts {
        for (n, rho) in part.rho.iter().enumerate() {
            let h = sample_transmission(map, *rho).map_err(|_| RadarError::TrackOutsideMap {
                part: part.name.clone(),
                sample: n,
            })?;
            h_max = h_max.max(h.norm());
        }
    }
    let mut bound = 0.0;
    for n in 0..track.samples {
        let s: f64 = track
            .parts
            .iter()
            .map(|part| p.amplitude * part.amplitude[n])
            .sum();
        bound += s * s;
    }
    // slack for the f64 summation order
    Ok(bound * h_max.powi(4) * (1.0 + 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex32;

    fn ramp_map() -> TransmissionMap {
        let geo = MapGeometry::centered(8, 6, 0.5);
        let h = (0..48)
            .map(|n| Complex32::new((n % 8) as f32, (n / 8) as f32 * 2.0))
            .collect();
        TransmissionMap {
            geometry: geo,
            carrier: DEFAULT_CARRIER,
            wall_id: "ramp".into(),
            h,
        }
    }

    #[test]
    fn node_and_midpoint() {
        let m = ramp_map();
        let node = m.geometry.node_position(3, 2);
        assert_eq!(
            sample_transmission(&m, node).unwrap(),
            Complex64::new(3.0, 4.0)
        );
        let a = m.geometry.node_position(3, 2);
        let b = m.geometry.node_position(4, 2);
        let mid = [(a[0] + b[0]) / 2.0, a[1]];
        assert_eq!(
            sample_transmission(&m, mid).unwrap(),
            Complex64::new(3.5, 4.0)
        );
        let last = m.geometry.node_position(7, 5);
        assert_eq!(
            sample_transmission(&m, last).unwrap(),
            Complex64::new(7.0, 10.0)
        );
    }

    #[test]
    fn outside_rejected() {
        let m = ramp_map();
        assert!(sample_transmission(&m, [-10.0, 1.0]).is_err());
        assert!(sample_transmission(&m, [0.0, -0.01]).is_err());
    }

    #[test]
    fn freespace_static_phase() {
        let p = RadarParams::default();
        let radar = p.position;
        let target = [radar[0], radar[1], radar[2] + 3.0];
        let tr = ScattererTrack::point(radar, 500.0, 1.0, &[target; 10]);
        let s = synth_freespace(&tr, &p).unwrap();
        let want = (-p.two_way_k() * 3.0).rem_euclid(2.0 * std::f64::consts::PI);
        for v in &s.samples {
            let got = v.arg().rem_euclid(2.0 * std::f64::consts::PI);
            assert!((got - want).abs() < 1e-9);
            assert!((v.norm() - 1.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn freespace_reference_amplitude_and_decay() {
        let p = RadarParams {
            amplitude: 2.0,
            ..RadarParams::default()
        };
        let r = p.position;
        let near = ScattererTrack::point(r, 500.0, 0.3, &[[r[0], r[1], r[2] + 1.0]]);
        let s1 = synth_freespace(&near, &p).unwrap().samples[0].norm();
        assert!((s1 - 0.6).abs() < 1e-12);
        let far = ScattererTrack::point(r, 500.0, 0.3, &[[r[0], r[1], r[2] + 2.0]]);
        let s2 = synth_freespace(&far, &p).unwrap().samples[0].norm();
        assert!((s2 / s1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn radar_mismatch_rejected() {
        let tr = ScattererTrack::point([0.0, 0.0, 0.0], 500.0, 1.0, &[[0.0, 0.0, 2.0]]);
        assert!(matches!(
            synth_freespace(&tr, &RadarParams::default()),
            Err(RadarError::RadarMismatch { .. })
        ));
    }

    #[test]
    fn carrier_mismatch_rejected() {
        let mut m = ramp_map();
        m.carrier = 5.8e9;
        let p = RadarParams::default();
        let tr = ScattererTrack::point(p.position, 500.0, 1.0, &[[0.0, 0.5, 1.0]]);
        assert!(matches!(
            synth_throughwall(&tr, &m, &p),
            Err(RadarError::CarrierMismatch { .. })
        ));
    }
}
