//! Two-dimensional TM-mode FDTD solver with a convolutional PML.
//!
//! The solver works in its own plane frame: the out-of-plane electric
//! field is called `ez` and the in-plane magnetic components `hx`, `hy`.
//! The solver's second axis is the scene's range axis z: `hx` points along
//! scene x and `hy` along scene z. Arrays are row-major with the range
//! index outermost (`index = k * nx_total + i`).
//!
//! Staggering: `ez[k][i]` at node `(i, k)`, `hx[k][i]` at `(i, k + 1/2)`,
//! `hy[k][i]` at `(i + 1/2, k)`. The outermost ring of `ez` nodes is held at
//! zero behind the PML.

use num_complex::{Complex32, Complex64};
use thiserror::Error;

use crate::grid::{GridConfig, MapGeometry, EPS0, ETA0, MU0};
use crate::walls::{rasterize, WallCase, WallError};

/// Polynomial grading order of the PML conductivity profile.
pub const PML_ORDER: f64 = 3.0;
/// Theoretical normal-incidence reflection of the PML (-60 dB).
pub const PML_REFLECTION: f64 = 1e-3;
/// Source ramp length in carrier cycles.
pub const RAMP_CYCLES: f64 = 2.0;
/// Length of the phasor extraction window in carrier cycles.
pub const WINDOW_CYCLES: f64 = 24.0;
/// Distance from the source at which free-space maps are normalized to 1.
pub const REFERENCE_DISTANCE: f64 = 1.0;
/// Default z of the wall's front face, meters.
pub const DEFAULT_WALL_FRONT: f64 = 1.0;

const CHECK_EVERY: usize = 16;

#[derive(Debug, Error)]
pub enum FdtdError {
    #[error("time step {dt:e} s violates the Courant bound {limit:e} s")]
    Courant { dt: f64, limit: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("source at ({0}, {1}) m is not strictly inside the interior")]
    SourceOutside(f64, f64),
    #[error(transparent)]
    Wall(#[from] WallError),
    #[error("non-finite field at step {0}")]
    Unstable(usize),
    #[error("field state does not match scene dimensions")]
    StateMismatch,
    #[error("extraction window of {window:e} s is shorter than one carrier cycle")]
    WindowTooShort { window: f64 },
    #[error("record was accumulated at {recorded} Hz, not {requested} Hz")]
    FrequencyMismatch { recorded: f64, requested: f64 },
    #[error("reference point is outside the interior")]
    ReferenceOutside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    /// Scene position (x, z), meters.
    pub position: [f64; 2],
    pub frequency: f64,
    pub amplitude: f64,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            position: [0.0, 0.5],
            frequency: crate::grid::DEFAULT_CARRIER,
            amplitude: 1.0,
        }
    }
}

/// Material layout on the full grid (interior plus PML).
#[derive(Clone, Debug)]
pub struct SceneGrid {
    pub grid: GridConfig,
    pub source: SourceSpec,
    pub wall_id: String,
    /// Relative permittivity per `ez` node.
    pub permittivity: Vec<f64>,
    /// Conductivity per `ez` node, S/m.
    pub conductivity: Vec<f64>,
    nx_total: usize,
    nz_total: usize,
    npml: usize,
    source_node: (usize, usize),
}

impl SceneGrid {
    pub fn dims(&self) -> (usize, usize) {
        (self.nx_total, self.nz_total)
    }

    pub fn pml_cells(&self) -> usize {
        self.npml
    }

    pub fn geometry(&self) -> MapGeometry {
        self.grid.geometry()
    }

    /// Full-grid index of interior node `(i, k)`.
    pub fn index(&self, i: usize, k: usize) -> usize {
        (k + self.npml) * self.nx_total + i + self.npml
    }

    pub fn source_node(&self) -> (usize, usize) {
        self.source_node
    }

    /// Relative permittivity at interior node `(i, k)`.
    pub fn eps_at(&self, i: usize, k: usize) -> f64 {
        self.permittivity[self.index(i, k)]
    }
}

/// Builds the scene: free space everywhere, plus the rasterized wall (front
/// face at `wall_front` m) extended through the x-PML so it is infinite in x.
pub fn build_scene(
    grid: &GridConfig,
    wall: Option<&WallCase>,
    wall_front: f64,
    source: &SourceSpec,
) -> Result<SceneGrid, FdtdError> {
    if !grid.satisfies_courant() {
        return Err(FdtdError::Courant {
            dt: grid.dt,
            limit: grid.courant_limit(),
        });
    }
    build_scene_unchecked(grid, wall, wall_front, source)
}

/// [`build_scene`] without the Courant check. Exists to exercise the
/// solver's run-time instability detection.
#[doc(hidden)]
pub fn build_scene_unchecked(
    grid: &GridConfig,
    wall: Option<&WallCase>,
    wall_front: f64,
    source: &SourceSpec,
) -> Result<SceneGrid, FdtdError> {
    let (nx, nz) = grid.interior_cells();
    let npml = grid.pml_cells();
    let valid = |v: f64| v.is_finite() && v > 0.0;
    if nx < 3 || nz < 3 || !valid(grid.cell_size) || !valid(grid.dt) || !valid(grid.carrier_freq) {
        return Err(FdtdError::InvalidGrid(format!("{grid:?}")));
    }
    if npml == 0 {
        return Err(FdtdError::InvalidGrid("PML thinner than one cell".into()));
    }
    let geo = grid.geometry();
    if !geo.contains_strictly(source.position) {
        return Err(FdtdError::SourceOutside(
            source.position[0],
            source.position[1],
        ));
    }
    let (si, sk) = geo.nearest_node(source.position).expect("checked above");
    let nx_total = nx + 2 * npml;
    let nz_total = nz + 2 * npml;
    let mut permittivity = vec![1.0; nx_total * nz_total];
    let conductivity = vec![0.0; nx_total * nz_total];

    let wall_id = match wall {
        Some(case) => {
            let patch = rasterize(case, grid, wall_front)?;
            for row in 0..patch.depth {
                let k = npml + patch.front + row;
                let line = &mut permittivity[k * nx_total..(k + 1) * nx_total];
                for (i, cell) in line.iter_mut().enumerate() {
                    let col = i.saturating_sub(npml).min(nx - 1);
                    *cell = patch.at(col, row);
                }
            }
            case.id.clone()
        }
        None => "free_space".to_string(),
    };

    Ok(SceneGrid {
        grid: grid.clone(),
        source: source.clone(),
        wall_id,
        permittivity,
        conductivity,
        nx_total,
        nz_total,
        npml,
        source_node: (si + npml, sk + npml),
    })
}

/// Electromagnetic field on the full grid plus PML auxiliary accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub ez: Vec<f32>,
    pub hx: Vec<f32>,
    pub hy: Vec<f32>,
    pub psi_ezx: Vec<f32>,
    pub psi_ezz: Vec<f32>,
    pub psi_hx: Vec<f32>,
    pub psi_hy: Vec<f32>,
    pub step_index: usize,
}

impl FieldState {
    pub fn zeros(scene: &SceneGrid) -> Self {
        let n = scene.nx_total * scene.nz_total;
        FieldState {
            ez: vec![0.0; n],
            hx: vec![0.0; n],
            hy: vec![0.0; n],
            psi_ezx: vec![0.0; n],
            psi_ezz: vec![0.0; n],
            psi_hx: vec![0.0; n],
            psi_hy: vec![0.0; n],
            step_index: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.ez.iter().all(|v| v.is_finite())
            && self.hx.iter().all(|v| v.is_finite())
            && self.hy.iter().all(|v| v.is_finite())
    }
}

/// CPML coefficients along one axis.
#[derive(Clone, Debug)]
struct PmlAxis {
    /// `b`, `c` at integer (E) and half-integer (H) positions.
    be: Vec<f32>,
    ce: Vec<f32>,
    bh: Vec<f32>,
    ch: Vec<f32>,
    /// E-node indices inside the layer (excluding the PEC ring).
    e_ranges: [std::ops::Range<usize>; 2],
    /// H-node indices whose half-integer position lies inside the layer.
    h_ranges: [std::ops::Range<usize>; 2],
}

impl PmlAxis {
    fn new(n_interior: usize, npml: usize, dx: f64, dt: f64) -> Self {
        let total = n_interior + 2 * npml;
        let thickness = npml as f64 * dx;
        let sigma_max = -(PML_ORDER + 1.0) * PML_REFLECTION.ln() / (2.0 * ETA0 * thickness);
        let last_interior = (npml + n_interior - 1) as f64;
        let depth = |pos: f64| -> f64 {
            if pos < npml as f64 {
                (npml as f64 - pos) * dx
            } else if pos > last_interior {
                (pos - last_interior) * dx
            } else {
                0.0
            }
        };
        let coeffs = |pos: f64| -> (f32, f32) {
            let d = depth(pos);
            if d <= 0.0 {
                return (1.0, 0.0);
            }
            let sigma = sigma_max * (d / thickness).powf(PML_ORDER);
            let b = (-sigma * dt / EPS0).exp();
            (b as f32, (b - 1.0) as f32)
        };
        let (be, ce): (Vec<f32>, Vec<f32>) = (0..total).map(|i| coeffs(i as f64)).unzip();
        let (bh, ch): (Vec<f32>, Vec<f32>) = (0..total).map(|i| coeffs(i as f64 + 0.5)).unzip();
        PmlAxis {
            be,
            ce,
            bh,
            ch,
            e_ranges: [1..npml, npml + n_interior..total - 1],
            h_ranges: [0..npml, npml + n_interior - 1..total - 1],
        }
    }
}

/// Precomputed update coefficients for one scene.
#[derive(Clone, Debug)]
pub struct Updater {
    nx: usize,
    nz: usize,
    ca: Vec<f32>,
    cb: Vec<f32>,
    /// `cb * dx`, multiplies the PML auxiliary terms.
    cb_dx: Vec<f32>,
    dh: f32,
    dh_dx: f32,
    inv_dx: f32,
    pml_x: PmlAxis,
    pml_z: PmlAxis,
    source_index: usize,
    omega: f64,
    amplitude: f64,
    ramp_time: f64,
    dt: f64,
}

impl Updater {
    pub fn new(scene: &SceneGrid) -> Self {
        let g = &scene.grid;
        let dx = g.cell_size;
        let dt = g.dt;
        let n = scene.nx_total * scene.nz_total;
        let mut ca = vec![0.0f32; n];
        let mut cb = vec![0.0f32; n];
        let mut cb_dx = vec![0.0f32; n];
        for idx in 0..n {
            let eps = EPS0 * scene.permittivity[idx];
            let loss = scene.conductivity[idx] * dt / (2.0 * eps);
            ca[idx] = ((1.0 - loss) / (1.0 + loss)) as f32;
            let b = (dt / eps) / (1.0 + loss);
            cb[idx] = (b / dx) as f32;
            cb_dx[idx] = b as f32;
        }
        let (nx, nz) = g.interior_cells();
        let npml = scene.npml;
        let (si, sk) = scene.source_node;
        Updater {
            nx: scene.nx_total,
            nz: scene.nz_total,
            ca,
            cb,
            cb_dx,
            dh: (dt / (MU0 * dx)) as f32,
            dh_dx: (dt / MU0) as f32,
            inv_dx: (1.0 / dx) as f32,
            pml_x: PmlAxis::new(nx, npml, dx, dt),
            pml_z: PmlAxis::new(nz, npml, dx, dt),
            source_index: sk * scene.nx_total + si,
            omega: 2.0 * std::f64::consts::PI * scene.source.frequency,
            amplitude: scene.source.amplitude,
            ramp_time: RAMP_CYCLES / scene.source.frequency,
            dt,
        }
    }

    /// Soft-source value added after the E update of step `n`, i.e. at
    /// time `(n + 1) dt`.
    fn source_value(&self, n: usize) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let t = (n + 1) as f64 * self.dt;
        let ramp = if t < self.ramp_time {
            0.5 * (1.0 - (std::f64::consts::PI * t / self.ramp_time).cos())
        } else {
            1.0
        };
        self.amplitude * ramp * (self.omega * t).sin()
    }

    /// One leapfrog update: H to `n + 1/2`, then E to `n + 1`, then the source.
    pub fn step(&self, state: &mut FieldState) -> Result<(), FdtdError> {
        let n = self.nx * self.nz;
        if state.ez.len() != n || state.hx.len() != n || state.hy.len() != n {
            return Err(FdtdError::StateMismatch);
        }
        self.update_h(state);
        self.update_e(state);
        let s = self.source_value(state.step_index);
        state.ez[self.source_index] += s as f32;
        state.step_index += 1;
        if state.step_index % CHECK_EVERY == 0 && !state.ez.iter().all(|v| v.is_finite()) {
            return Err(FdtdError::Unstable(state.step_index));
        }
        Ok(())
    }

    fn update_h(&self, s: &mut FieldState) {
        let nx = self.nx;
        let dh = self.dh;
        let ez = &s.ez;
        // hx at (i, k + 1/2)
        for k in 0..self.nz - 1 {
            let e0 = &ez[k * nx..(k + 1) * nx];
            let e1 = &ez[(k + 1) * nx..(k + 2) * nx];
            let h = &mut s.hx[k * nx..(k + 1) * nx];
            for ((h, &a), &b) in h.iter_mut().zip(e0).zip(e1) {
                *h -= dh * (b - a);
            }
        }
        // hy at (i + 1/2, k)
        for k in 0..self.nz {
            let e = &ez[k * nx..(k + 1) * nx];
            let h = &mut s.hy[k * nx..(k + 1) * nx - 1];
            for (h, w) in h.iter_mut().zip(e.windows(2)) {
                *h += dh * (w[1] - w[0]);
            }
        }

        let (inv_dx, dh_dx) = (self.inv_dx, self.dh_dx);
        for range in &self.pml_z.h_ranges {
            for k in range.clone() {
                let (b, c) = (self.pml_z.bh[k], self.pml_z.ch[k]);
                for i in 0..nx {
                    let idx = k * nx + i;
                    let grad = (ez[idx + nx] - ez[idx]) * inv_dx;
                    let psi = b * s.psi_hx[idx] + c * grad;
                    s.psi_hx[idx] = psi;
                    s.hx[idx] -= dh_dx * psi;
                }
            }
        }
        for k in 0..self.nz {
            for range in &self.pml_x.h_ranges {
                for i in range.clone() {
                    let idx = k * nx + i;
                    let grad = (ez[idx + 1] - ez[idx]) * inv_dx;
                    let psi = self.pml_x.bh[i] * s.psi_hy[idx] + self.pml_x.ch[i] * grad;
                    s.psi_hy[idx] = psi;
                    s.hy[idx] += dh_dx * psi;
                }
            }
        }
    }

    fn update_e(&self, s: &mut FieldState) {
        let nx = self.nx;
        for k in 1..self.nz - 1 {
            let row = k * nx;
            let hy = &s.hy[row..row + nx];
            let hx0 = &s.hx[row - nx..row];
            let hx1 = &s.hx[row..row + nx];
            let ez = &mut s.ez[row..row + nx];
            let ca = &self.ca[row..row + nx];
            let cb = &self.cb[row..row + nx];
            for i in 1..nx - 1 {
                let curl = (hy[i] - hy[i - 1]) - (hx1[i] - hx0[i]);
                ez[i] = ca[i] * ez[i] + cb[i] * curl;
            }
        }

        let inv_dx = self.inv_dx;
        for range in &self.pml_z.e_ranges {
            for k in range.clone() {
                let (b, c) = (self.pml_z.be[k], self.pml_z.ce[k]);
                for i in 1..nx - 1 {
                    let idx = k * nx + i;
                    let grad = (s.hx[idx] - s.hx[idx - nx]) * inv_dx;
                    let psi = b * s.psi_ezz[idx] + c * grad;
                    s.psi_ezz[idx] = psi;
                    s.ez[idx] -= self.cb_dx[idx] * psi;
                }
            }
        }
        for k in 1..self.nz - 1 {
            for range in &self.pml_x.e_ranges {
                for i in range.clone() {
                    let idx = k * nx + i;
                    let grad = (s.hy[idx] - s.hy[idx - 1]) * inv_dx;
                    let psi = self.pml_x.be[i] * s.psi_ezx[idx] + self.pml_x.ce[i] * grad;
                    s.psi_ezx[idx] = psi;
                    s.ez[idx] += self.cb_dx[idx] * psi;
                }
            }
        }
    }
}

/// Single leapfrog step of `state` through `scene`.
///
/// Rebuilds the update coefficients on every call; loops should hold an
/// [`Updater`] instead.
pub fn step(state: &mut FieldState, scene: &SceneGrid) -> Result<(), FdtdError> {
    Updater::new(scene).step(state)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Scene points whose `ez` time series is recorded every step.
    pub probes: Vec<[f64; 2]>,
    /// Record the interior max |ez| every this many steps.
    pub max_every: Option<usize>,
    /// Override the number of steps (defaults to `duration / dt`).
    pub steps: Option<usize>,
}

/// Output of a run: streaming phasor accumulation over the settled tail.
#[derive(Clone, Debug)]
pub struct FieldRecord {
    pub geometry: MapGeometry,
    pub wall_id: String,
    pub frequency: f64,
    pub source_position: [f64; 2],
    pub dt: f64,
    pub steps: usize,
    pub window_steps: usize,
    /// Interior phasors `(2/N) sum ez(t_n) exp(-j w t_n)`, row-major in z then x.
    pub phasor: Vec<Complex64>,
    pub probes: Vec<Vec<f32>>,
    /// `(step, max |ez| over the interior)` samples.
    pub max_trace: Vec<(usize, f32)>,
}

impl FieldRecord {
    pub fn phasor_at(&self, i: usize, k: usize) -> Complex64 {
        self.phasor[k * self.geometry.nx + i]
    }
}

pub fn run(scene: &SceneGrid) -> Result<FieldRecord, FdtdError> {
    run_with(scene, &RunOptions::default())
}

pub fn run_with(scene: &SceneGrid, opts: &RunOptions) -> Result<FieldRecord, FdtdError> {
    let updater = Updater::new(scene);
    let mut state = FieldState::zeros(scene);
    let geo = scene.geometry();
    let (nx, nz) = (geo.nx, geo.nz);
    let steps = opts.steps.unwrap_or_else(|| scene.grid.steps());
    let freq = scene.source.frequency;
    let window_steps = ((WINDOW_CYCLES / (freq * scene.grid.dt)).round() as usize).min(steps);
    let window_start = steps - window_steps;
    let omega = 2.0 * std::f64::consts::PI * freq;

    let probe_idx: Vec<usize> = opts
        .probes
        .iter()
        .map(|&p| {
            geo.nearest_node(p)
                .map(|(i, k)| scene.index(i, k))
                .ok_or(FdtdError::ReferenceOutside)
        })
        .collect::<Result<_, _>>()?;
    let mut probes = vec![Vec::with_capacity(steps); probe_idx.len()];
    let mut max_trace = Vec::new();
    let mut acc_re = vec![0.0f64; nx * nz];
    let mut acc_im = vec![0.0f64; nx * nz];
    let npml = scene.npml;
    let stride = scene.nx_total;

    for n in 0..steps {
        updater.step(&mut state)?;
        for (trace, &idx) in probes.iter_mut().zip(&probe_idx) {
            trace.push(state.ez[idx]);
        }
        if let Some(every) = opts.max_every {
            if (n + 1) % every == 0 {
                let mut m = 0.0f32;
                for k in 0..nz {
                    let row = (k + npml) * stride + npml;
                    m = state.ez[row..row + nx]
                        .iter()
                        .fold(m, |m, v| m.max(v.abs()));
                }
                max_trace.push((n + 1, m));
            }
        }
        if n >= window_start {
            let t = (n + 1) as f64 * scene.grid.dt;
            let (s, c) = (omega * t).sin_cos();
            for k in 0..nz {
                let src = &state.ez[(k + npml) * stride + npml..][..nx];
                let re = &mut acc_re[k * nx..(k + 1) * nx];
                let im = &mut acc_im[k * nx..(k + 1) * nx];
                for ((r, j), &e) in re.iter_mut().zip(im.iter_mut()).zip(src) {
                    let e = e as f64;
                    *r += e * c;
                    *j -= e * s;
                }
            }
        }
    }
    if !state.is_finite() {
        return Err(FdtdError::Unstable(state.step_index));
    }
    let scale = if window_steps > 0 {
        2.0 / window_steps as f64
    } else {
        0.0
    };
    let phasor = acc_re
        .iter()
        .zip(&acc_im)
        .map(|(&r, &i)| Complex64::new(r * scale, i * scale))
        .collect();
    Ok(FieldRecord {
        geometry: geo,
        wall_id: scene.wall_id.clone(),
        frequency: freq,
        source_position: scene.source.position,
        dt: scene.grid.dt,
        steps,
        window_steps,
        phasor,
        probes,
        max_trace,
    })
}

/// Scene point at the reference distance from the source, on the +z axis.
pub fn reference_point(source: [f64; 2]) -> [f64; 2] {
    [source[0], source[1] + REFERENCE_DISTANCE]
}

/// Phasor magnitude at the reference point of a record (bilinear).
pub fn reference_magnitude(record: &FieldRecord) -> Result<f64, FdtdError> {
    let p = reference_point(record.source_position);
    let geo = &record.geometry;
    if !geo.contains(p) {
        return Err(FdtdError::ReferenceOutside);
    }
    Ok(crate::radar::bilinear(geo, |i, k| record.phasor_at(i, k), p).norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// Normalize by the record's own magnitude at the reference point
    /// (meaningful for free-space records).
    SelfReference,
    /// Divide by a given free-space reference magnitude.
    Reference(f64),
}

/// Complex wall-transmission response at the carrier on interior nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionMap {
    pub geometry: MapGeometry,
    pub carrier: f64,
    pub wall_id: String,
    /// Row-major in z then x.
    pub h: Vec<Complex32>,
}

impl TransmissionMap {
    pub fn at(&self, i: usize, k: usize) -> Complex32 {
        self.h[k * self.geometry.nx + i]
    }
}

pub fn extract_transmission(
    record: &FieldRecord,
    f_c: f64,
    normalization: Normalization,
) -> Result<TransmissionMap, FdtdError> {
    let window = record.window_steps as f64 * record.dt;
    if window * f_c < 1.0 {
        return Err(FdtdError::WindowTooShort { window });
    }
    if (f_c - record.frequency).abs() > 1e-9 * record.frequency {
        return Err(FdtdError::FrequencyMismatch {
            recorded: record.frequency,
            requested: f_c,
        });
    }
    let reference = match normalization {
        Normalization::SelfReference => reference_magnitude(record)?,
        Normalization::Reference(m) => m,
    };
    if !(reference.is_finite() && reference > 0.0) {
        return Err(FdtdError::ReferenceOutside);
    }
    let h = record
        .phasor
        .iter()
        .map(|p| {
            let v = p / reference;
            Complex32::new(v.re as f32, v.im as f32)
        })
        .collect();
    Ok(TransmissionMap {
        geometry: record.geometry,
        carrier: f_c,
        wall_id: record.wall_id.clone(),
        h,
    })
}
