//! C ABI for the twsim simulator.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns a
//! [`TwsimStatus`]; on failure [`twsim_last_error`] describes the problem
//! for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use twsim::doppler::{self, GanImage, ImageMeta, SplitTag};
use twsim::fdtd::{self, Normalization, TransmissionMap};
use twsim::formats;
use twsim::motion::{self, GroundRegion, MotionKind, ScattererTrack};
use twsim::pipeline::{self, BuildConfig, MapProvider, PipelineError};
use twsim::radar::{self, ComplexTimeSeries};
use twsim::walls::{self, WallCase};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotFound = 3,
    Solver = 4,
    Motion = 5,
    Radar = 6,
    Spectral = 7,
    Format = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

pub struct TwsimMap(TransmissionMap);
pub struct TwsimTrack(ScattererTrack);
pub struct TwsimSeries(ComplexTimeSeries);
pub struct TwsimImage(GanImage);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(TwsimStatus, String);

impl Failure {
    fn new(status: TwsimStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match root(&e) {
            PipelineError::Fdtd(_) => TwsimStatus::Solver,
            PipelineError::Motion(_) => TwsimStatus::Motion,
            PipelineError::Radar(_) => TwsimStatus::Radar,
            PipelineError::Doppler(_) => TwsimStatus::Spectral,
            PipelineError::Format(_) => TwsimStatus::Format,
            PipelineError::Io { .. } => TwsimStatus::Io,
            _ => TwsimStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn root(e: &PipelineError) -> &PipelineError {
    match e {
        PipelineError::Case { source, .. } => root(source),
        other => other,
    }
}

impl From<formats::FormatError> for Failure {
    fn from(e: formats::FormatError) -> Self {
        let status = match &e {
            formats::FormatError::Path { source, .. }
                if matches!(**source, formats::FormatError::Io(_)) =>
            {
                TwsimStatus::Io
            }
            formats::FormatError::Io(_) => TwsimStatus::Io,
            _ => TwsimStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! from_err {
    ($t:ty, $status:expr) => {
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure($status, e.to_string())
            }
        }
    };
}
from_err!(fdtd::FdtdError, TwsimStatus::Solver);
from_err!(motion::MotionError, TwsimStatus::Motion);
from_err!(radar::RadarError, TwsimStatus::Radar);
from_err!(doppler::DopplerError, TwsimStatus::Spectral);

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TwsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TwsimStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TwsimStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure::new(TwsimStatus::NullPointer, "null pointer argument")
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(TwsimStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

fn motion_kind(code: u8) -> Result<MotionKind, Failure> {
    MotionKind::from_code(code).ok_or_else(|| {
        Failure::new(
            TwsimStatus::InvalidArgument,
            format!("motion code {code} (0 walk, 1 walk-leap-walk)"),
        )
    })
}

fn wall_case(id: Option<&str>) -> Result<Option<WallCase>, Failure> {
    match id {
        None | Some("free") | Some(pipeline::FREE_SPACE_ID) => Ok(None),
        Some(id) => walls::find_case(id)
            .map(Some)
            .ok_or_else(|| Failure::new(TwsimStatus::NotFound, format!("unknown wall `{id}`"))),
    }
}

fn default_config() -> BuildConfig {
    BuildConfig {
        use_cache: false,
        ..BuildConfig::default()
    }
}

fn copy_out<T: Copy>(
    src: &[T],
    dst: *mut T,
    capacity: usize,
    needed: *mut usize,
) -> Result<(), Failure> {
    if !needed.is_null() {
        unsafe { *needed = src.len() };
    }
    if dst.is_null() {
        return if capacity == 0 { Ok(()) } else { Err(null()) };
    }
    if capacity < src.len() {
        return Err(Failure::new(
            TwsimStatus::BufferTooSmall,
            format!("buffer holds {capacity}, {} needed", src.len()),
        ));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn twsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn twsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of cases in the wall catalog.
#[no_mangle]
pub extern "C" fn twsim_wall_count() -> usize {
    walls::enumerate_cases().len()
}

/// Copies the NUL-terminated id of catalog case `index` into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn twsim_wall_id(index: usize, buf: *mut c_char, len: usize) -> TwsimStatus {
    guard(|| {
        let cases = walls::enumerate_cases();
        let case = cases
            .get(index)
            .ok_or_else(|| Failure::new(TwsimStatus::NotFound, format!("wall index {index}")))?;
        let id = CString::new(case.id.as_str()).expect("ids have no NUL");
        copy_out(
            id.as_bytes_with_nul(),
            buf.cast::<u8>(),
            len,
            ptr::null_mut(),
        )
    })
}

/// Solves the default scene with wall `wall_id` (NULL or "free" for free
/// space) and returns its normalized transmission map.
///
/// # Safety
/// `wall_id` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_compute(
    wall_id: *const c_char,
    out: *mut *mut TwsimMap,
) -> TwsimStatus {
    guard(|| {
        let id = if wall_id.is_null() {
            None
        } else {
            Some(str_arg(wall_id, "wall id")?)
        };
        let case = wall_case(id)?;
        let cfg = default_config();
        let map = match &case {
            Some(c) => MapProvider::new(&cfg).map_for(c)?,
            None => {
                let scene = fdtd::build_scene(&cfg.grid, None, cfg.wall_front, &cfg.source())?;
                let record = fdtd::run(&scene)?;
                fdtd::extract_transmission(
                    &record,
                    cfg.radar.carrier,
                    Normalization::SelfReference,
                )?
            }
        };
        out_ptr(out, TwsimMap(map))
    })
}

/// # Safety
/// `path` and `wall_id` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_load(
    path: *const c_char,
    wall_id: *const c_char,
    out: *mut *mut TwsimMap,
) -> TwsimStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let id = str_arg(wall_id, "wall id")?;
        let map = formats::load_twtm(Path::new(path), id)?;
        out_ptr(out, TwsimMap(map))
    })
}

/// # Safety
/// `map` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_save(map: *const TwsimMap, path: *const c_char) -> TwsimStatus {
    guard(|| {
        let map = handle(map)?;
        formats::save_twtm(Path::new(str_arg(path, "path")?), &map.0)?;
        Ok(())
    })
}

/// # Safety
/// `map` must be a live handle; `nx` and `nz` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_dims(
    map: *const TwsimMap,
    nx: *mut usize,
    nz: *mut usize,
) -> TwsimStatus {
    guard(|| {
        let map = handle(map)?;
        if nx.is_null() || nz.is_null() {
            return Err(null());
        }
        *nx = map.0.geometry.nx;
        *nz = map.0.geometry.nz;
        Ok(())
    })
}

/// Bilinear sample of the map at scene point `(x, z)`.
///
/// # Safety
/// `map` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_sample(
    map: *const TwsimMap,
    x: f64,
    z: f64,
    re: *mut f64,
    im: *mut f64,
) -> TwsimStatus {
    guard(|| {
        let map = handle(map)?;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        let h = radar::sample_transmission(&map.0, [x, z])?;
        *re = h.re;
        *im = h.im;
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twsim_map_free(map: *mut TwsimMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Scatterer tracks of a generated motion (`0` walk, `1` walk-leap-walk)
/// placed at the default start and turned by `yaw_deg`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_track_generate(
    motion: u8,
    yaw_deg: f64,
    out: *mut *mut TwsimTrack,
) -> TwsimStatus {
    guard(|| {
        let kind = motion_kind(motion)?;
        let cfg = default_config();
        let region = GroundRegion::from_geometry(&cfg.grid.geometry());
        let (skeleton, clip) = motion::generate_motion(kind, cfg.duration, &cfg.gait);
        let clip = motion::place_and_orient(&clip, cfg.human_start, yaw_deg, Some(&region))?;
        let track = motion::sample_tracks(
            &skeleton,
            &clip,
            cfg.radar.position,
            cfg.sample_rate,
            cfg.duration,
            Some(&region),
        )?;
        out_ptr(out, TwsimTrack(track))
    })
}

/// # Safety
/// `track` must be a live handle; `parts` and `samples` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_track_dims(
    track: *const TwsimTrack,
    parts: *mut usize,
    samples: *mut usize,
) -> TwsimStatus {
    guard(|| {
        let t = handle(track)?;
        if parts.is_null() || samples.is_null() {
            return Err(null());
        }
        *parts = t.0.parts.len();
        *samples = t.0.samples;
        Ok(())
    })
}

/// Copies the radar range of part `part` over all samples into `buf`.
///
/// # Safety
/// `track` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn twsim_track_range(
    track: *const TwsimTrack,
    part: usize,
    buf: *mut f64,
    len: usize,
) -> TwsimStatus {
    guard(|| {
        let t = handle(track)?;
        let p =
            t.0.parts
                .get(part)
                .ok_or_else(|| Failure::new(TwsimStatus::NotFound, format!("part {part}")))?;
        copy_out(&p.range, buf, len, ptr::null_mut())
    })
}

/// # Safety
/// `track` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twsim_track_free(track: *mut TwsimTrack) {
    if !track.is_null() {
        drop(Box::from_raw(track));
    }
}

/// Free-space baseband return of a track with default radar parameters.
///
/// # Safety
/// `track` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_synth_freespace(
    track: *const TwsimTrack,
    out: *mut *mut TwsimSeries,
) -> TwsimStatus {
    guard(|| {
        let t = handle(track)?;
        let s = radar::synth_freespace(&t.0, &default_config().radar)?;
        out_ptr(out, TwsimSeries(s))
    })
}

/// Through-wall baseband return of a track using `map`.
///
/// # Safety
/// `track` and `map` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_synth_throughwall(
    track: *const TwsimTrack,
    map: *const TwsimMap,
    out: *mut *mut TwsimSeries,
) -> TwsimStatus {
    guard(|| {
        let t = handle(track)?;
        let m = handle(map)?;
        let s = radar::synth_throughwall(&t.0, &m.0, &default_config().radar)?;
        out_ptr(out, TwsimSeries(s))
    })
}

/// Copies interleaved `(re, im)` samples into `buf`, which must hold
/// `2 * length` doubles; `needed` (optional) receives that count.
///
/// # Safety
/// `series` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn twsim_series_samples(
    series: *const TwsimSeries,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> TwsimStatus {
    guard(|| {
        let s = handle(series)?;
        let flat: Vec<f64> = s.0.samples.iter().flat_map(|c| [c.re, c.im]).collect();
        copy_out(&flat, buf, len, needed)
    })
}

/// # Safety
/// `series` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn twsim_series_save(
    series: *const TwsimSeries,
    path: *const c_char,
) -> TwsimStatus {
    guard(|| {
        let s = handle(series)?;
        formats::save_twbb(Path::new(str_arg(path, "path")?), &s.0)?;
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twsim_series_free(series: *mut TwsimSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Spectrogram image of a series, tagged with motion, yaw and the series'
/// wall label.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_image_from_series(
    series: *const TwsimSeries,
    motion: u8,
    yaw_deg: f32,
    out: *mut *mut TwsimImage,
) -> TwsimStatus {
    guard(|| {
        let s = handle(series)?;
        let kind = motion_kind(motion)?;
        let spec = doppler::stft(&s.0, doppler::WINDOW_LEN, doppler::DEFAULT_HOP)?;
        let img = doppler::to_gan_image(
            &spec,
            ImageMeta {
                motion: kind,
                yaw_deg,
                wall_id: s.0.label.wall_id().to_string(),
                split: SplitTag::None,
            },
        )?;
        out_ptr(out, TwsimImage(img))
    })
}

/// Whole chain for one sample with the default configuration.
///
/// # Safety
/// `wall_id` must be NULL or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_run_case(
    wall_id: *const c_char,
    motion: u8,
    yaw_deg: f64,
    out: *mut *mut TwsimImage,
) -> TwsimStatus {
    guard(|| {
        let id = if wall_id.is_null() {
            None
        } else {
            Some(str_arg(wall_id, "wall id")?)
        };
        let case = wall_case(id)?;
        let kind = motion_kind(motion)?;
        let cfg = default_config();
        let map = case
            .as_ref()
            .map(|c| MapProvider::new(&cfg).map_for(c))
            .transpose()?;
        let res = pipeline::run_case(case.as_ref(), map.as_ref(), kind, yaw_deg, &cfg, false)?;
        out_ptr(out, TwsimImage(res.image))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn twsim_image_load(
    path: *const c_char,
    out: *mut *mut TwsimImage,
) -> TwsimStatus {
    guard(|| {
        let img = formats::load_twmd(Path::new(str_arg(path, "path")?))?;
        out_ptr(out, TwsimImage(img))
    })
}

/// # Safety
/// `image` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn twsim_image_save(
    image: *const TwsimImage,
    path: *const c_char,
) -> TwsimStatus {
    guard(|| {
        let img = handle(image)?;
        formats::save_twmd(Path::new(str_arg(path, "path")?), &img.0)?;
        Ok(())
    })
}

/// Copies the 64×64 row-major pixels (row = Doppler, column = time).
///
/// # Safety
/// `image` must be a live handle and `buf` valid for `len` floats.
#[no_mangle]
pub unsafe extern "C" fn twsim_image_pixels(
    image: *const TwsimImage,
    buf: *mut f32,
    len: usize,
) -> TwsimStatus {
    guard(|| {
        let img = handle(image)?;
        copy_out(&img.0.pixels, buf, len, ptr::null_mut())
    })
}

/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twsim_image_free(image: *mut TwsimImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}
