//! Dataset build: FDTD sweeps over the wall catalog, motion synthesis,
//! spectrogram images, stratified split and manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::doppler::{self, GanImage, ImageMeta, Spectrogram, SplitTag};
use crate::fdtd::{self, FdtdError, Normalization, SourceSpec, TransmissionMap};
use crate::formats::{self, FormatError};
use crate::grid::GridConfig;
use crate::motion::{self, GaitParams, GroundRegion, MotionError, MotionKind};
use crate::radar::{self, ComplexTimeSeries, RadarError, RadarParams};
use crate::walls::{self, WallCase, WallKind};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Yaw angles a dataset build may use, degrees.
pub const CATALOG_YAWS: [f64; 4] = [0.0, 15.0, 30.0, 45.0];
pub const FREE_SPACE_ID: &str = "free_space";
pub const CACHE_ENV: &str = "TWSIM_CACHE_DIR";
pub const IMAGE_DIR: &str = "images";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid build plan: {0}")]
    Plan(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Fdtd(#[from] FdtdError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Radar(#[from] RadarError),
    #[error(transparent)]
    Doppler(#[from] doppler::DopplerError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{context}: {source}")]
    Case {
        context: String,
        #[source]
        source: Box<PipelineError>,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    fn in_case(self, context: impl Into<String>) -> Self {
        PipelineError::Case {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub seed: u64,
    pub split_fraction: f64,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    pub motions: Vec<MotionKind>,
    pub yaws: Vec<f64>,
    /// Wall ids to include; all catalog cases when absent.
    pub walls: Option<Vec<String>>,
    pub duration: f64,
    pub sample_rate: f64,
    pub hop: usize,
    /// Frame-0 ground position `(x, z)` of the human.
    pub human_start: [f64; 2],
    pub wall_front: f64,
    /// Map cache directory; falls back to `TWSIM_CACHE_DIR`, then the system
    /// temp directory.
    pub cache_dir: Option<PathBuf>,
    pub use_cache: bool,
    pub grid: GridConfig,
    pub radar: RadarParams,
    pub gait: GaitParams,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            seed: 20_240_601,
            split_fraction: 0.8,
            output_dir: PathBuf::from("out"),
            parallelism: 8,
            motions: MotionKind::ALL.to_vec(),
            yaws: CATALOG_YAWS.to_vec(),
            walls: None,
            duration: motion::DEFAULT_DURATION,
            sample_rate: motion::DEFAULT_SAMPLE_RATE,
            hop: doppler::DEFAULT_HOP,
            human_start: [0.0, 4.5],
            wall_front: fdtd::DEFAULT_WALL_FRONT,
            cache_dir: None,
            use_cache: true,
            grid: GridConfig::default(),
            radar: RadarParams::default(),
            gait: GaitParams::default(),
        }
    }
}

impl BuildConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text).map_err(|e| e.in_case(path.display().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hash of everything that affects output bytes (not paths or worker count).
    pub fn config_hash(&self) -> String {
        let view = BuildConfig {
            output_dir: PathBuf::new(),
            parallelism: 0,
            cache_dir: None,
            use_cache: false,
            ..self.clone()
        };
        hex_digest(&serde_json::to_vec(&view).expect("config serializes"))
    }

    pub fn source(&self) -> SourceSpec {
        SourceSpec {
            position: [self.radar.position[0], self.radar.position[2]],
            frequency: self.radar.carrier,
            amplitude: 1.0,
        }
    }

    pub fn cache_root(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| std::env::temp_dir().join("twsim-cache"))
    }

    pub fn wall_cases(&self) -> Result<Vec<WallCase>, PipelineError> {
        match &self.walls {
            None => Ok(walls::enumerate_cases()),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    walls::find_case(id)
                        .ok_or_else(|| PipelineError::Plan(format!("unknown wall `{id}`")))
                })
                .collect(),
        }
    }

    /// Checks the dataset plan against the catalog contract.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let plan = |m: String| Err(PipelineError::Plan(m));
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return plan(format!(
                "split fraction {} outside (0, 1)",
                self.split_fraction
            ));
        }
        if self.motions.is_empty() || self.yaws.is_empty() {
            return plan("motions and yaws must be non-empty".into());
        }
        if let Some(y) = self.yaws.iter().find(|y| !CATALOG_YAWS.contains(y)) {
            return plan(format!("yaw {y}° is not one of {CATALOG_YAWS:?}"));
        }
        let mut seen = Vec::new();
        for y in &self.yaws {
            if seen.contains(y) {
                return plan(format!("yaw {y}° listed twice"));
            }
            seen.push(*y);
        }
        for (i, m) in self.motions.iter().enumerate() {
            if self.motions[..i].contains(m) {
                return plan(format!("motion {m} listed twice"));
            }
        }
        if self.parallelism == 0 {
            return plan("parallelism must be at least 1".into());
        }
        if (self.grid.carrier_freq - self.radar.carrier).abs() > 1e-9 * self.radar.carrier {
            return plan("grid carrier and radar carrier differ".into());
        }
        let cases = self.wall_cases()?;
        if cases.is_empty() {
            return plan("no wall cases selected".into());
        }
        let mut ids: Vec<&str> = cases.iter().map(|c| c.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return plan("wall listed twice".into());
        }
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Supplies transmission maps, computing each at most once per process and
/// persisting them under the cache directory when enabled.
pub struct MapProvider {
    grid: GridConfig,
    source: SourceSpec,
    wall_front: f64,
    cache: Option<PathBuf>,
    reference: OnceLock<Result<f64, String>>,
}

impl MapProvider {
    pub fn new(config: &BuildConfig) -> Self {
        MapProvider {
            grid: config.grid.clone(),
            source: config.source(),
            wall_front: config.wall_front,
            cache: config.use_cache.then(|| config.cache_root()),
            reference: OnceLock::new(),
        }
    }

    /// Cache file for `name`; the key covers the solver inputs, including the
    /// wall layout, so stale or renumbered entries never match.
    fn cache_path(&self, name: &str, wall: Option<&WallCase>, ext: &str) -> Option<PathBuf> {
        let payload = serde_json::json!({
            "grid": self.grid,
            "source": [self.source.position, [self.source.frequency, self.source.amplitude]],
            "wall_front": self.wall_front,
            "wall": wall,
            "solver": TOOL_VERSION,
        });
        let key = &hex_digest(payload.to_string().as_bytes())[..16];
        self.cache
            .as_ref()
            .map(|dir| dir.join(format!("{name}-{key}.{ext}")))
    }

    fn run_free_space(&self) -> Result<f64, PipelineError> {
        let path = self.cache_path(FREE_SPACE_ID, None, "json");
        if let Some(p) = &path {
            if let Ok(text) = fs::read_to_string(p) {
                if let Ok(v) = serde_json::from_str::<f64>(&text) {
                    return Ok(v);
                }
            }
        }
        info!("running free-space FDTD reference");
        let scene = fdtd::build_scene(&self.grid, None, self.wall_front, &self.source)?;
        let record = fdtd::run(&scene)?;
        let m = fdtd::reference_magnitude(&record)?;
        if let Some(p) = &path {
            write_atomic(
                p,
                serde_json::to_string(&m)
                    .expect("f64 serializes")
                    .as_bytes(),
            )?;
        }
        Ok(m)
    }

    /// Free-space phasor magnitude at the reference distance.
    pub fn reference_magnitude(&self) -> Result<f64, PipelineError> {
        self.reference
            .get_or_init(|| self.run_free_space().map_err(|e| e.to_string()))
            .clone()
            .map_err(|e| PipelineError::Plan(format!("free-space reference failed: {e}")))
    }

    pub fn map_for(&self, case: &WallCase) -> Result<TransmissionMap, PipelineError> {
        let path = self.cache_path(&case.id, Some(case), "twtm");
        if let Some(p) = &path {
            if p.exists() {
                match formats::load_twtm(p, &case.id) {
                    Ok(mut map) => {
                        map.geometry = self.grid.geometry();
                        return Ok(map);
                    }
                    Err(e) => warn!("ignoring unreadable cache entry: {e}"),
                }
            }
        }
        let reference = self.reference_magnitude()?;
        info!("running FDTD for wall {}", case.id);
        let scene = fdtd::build_scene(&self.grid, Some(case), self.wall_front, &self.source)?;
        let record = fdtd::run(&scene)?;
        let map = fdtd::extract_transmission(
            &record,
            self.source.frequency,
            Normalization::Reference(reference),
        )?;
        if let Some(p) = &path {
            let mut bytes = Vec::new();
            formats::write_twtm(&mut bytes, &map)?;
            write_atomic(p, &bytes)?;
        }
        Ok(map)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Clone, Debug)]
pub struct CaseOutput {
    pub image: GanImage,
    pub series: ComplexTimeSeries,
    pub spectrogram: Option<Spectrogram>,
}

/// One sample through the whole chain. Any yaw is accepted here; catalog
/// restrictions are enforced by [`BuildConfig::validate`].
pub fn run_case(
    wall: Option<&WallCase>,
    map: Option<&TransmissionMap>,
    kind: MotionKind,
    yaw_deg: f64,
    config: &BuildConfig,
    keep_spectrogram: bool,
) -> Result<CaseOutput, PipelineError> {
    let wall_id = wall.map_or(FREE_SPACE_ID, |w| w.id.as_str());
    let context = format!("{wall_id}/{kind}/yaw {yaw_deg}");
    let inner = || -> Result<CaseOutput, PipelineError> {
        let geo = config.grid.geometry();
        let mut region = GroundRegion::from_geometry(&geo);
        if let Some(w) = wall {
            region = region.beyond(
                config.wall_front
                    + w.depth_cells(config.grid.cell_size) as f64 * config.grid.cell_size,
            );
        }
        let (skeleton, clip) = motion::generate_motion(kind, config.duration, &config.gait);
        let clip = motion::place_and_orient(&clip, config.human_start, yaw_deg, Some(&region))?;
        let track = motion::sample_tracks(
            &skeleton,
            &clip,
            config.radar.position,
            config.sample_rate,
            config.duration,
            Some(&region),
        )?;
        let series = match (wall, map) {
            (None, _) => radar::synth_freespace(&track, &config.radar)?,
            (Some(_), Some(m)) => radar::synth_throughwall(&track, m, &config.radar)?,
            (Some(w), None) => {
                return Err(PipelineError::Plan(format!(
                    "no transmission map for {}",
                    w.id
                )))
            }
        }
        .with_motion(kind.as_str(), yaw_deg);
        let spec = doppler::stft(&series, doppler::WINDOW_LEN, config.hop)?;
        let image = doppler::to_gan_image(
            &spec,
            ImageMeta {
                motion: kind,
                yaw_deg: yaw_deg as f32,
                wall_id: wall_id.to_string(),
                split: SplitTag::None,
            },
        )?;
        Ok(CaseOutput {
            image,
            series,
            spectrogram: keep_spectrogram.then_some(spec),
        })
    };
    inner().map_err(|e| e.in_case(context))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory.
    pub path: String,
    pub motion: MotionKind,
    pub yaw: f64,
    pub wall_id: String,
    pub wall_kind: Option<WallKind>,
    pub split: SplitTag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub wall_id: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub split_fraction: f64,
    pub walls: Vec<WallCase>,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<CaseFailure>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn count(&self, pred: impl Fn(&ManifestEntry) -> bool) -> usize {
        self.entries.iter().filter(|e| pred(e)).count()
    }
}

fn image_name(wall_id: &str, kind: MotionKind, yaw: f64) -> String {
    format!(
        "{IMAGE_DIR}/{wall_id}_{}_yaw{:02}.twmd",
        kind.as_str(),
        yaw.round() as i64
    )
}

/// Planned entries in manifest order with their splits assigned: free-space
/// entries first, then walls in catalog order; the split is drawn per
/// (motion, wall kind) stratum.
pub fn plan_entries(config: &BuildConfig) -> Result<Vec<ManifestEntry>, PipelineError> {
    config.validate()?;
    let cases = config.wall_cases()?;
    let mut entries = Vec::new();
    for &m in &config.motions {
        for &y in &config.yaws {
            entries.push(ManifestEntry {
                path: image_name(FREE_SPACE_ID, m, y),
                motion: m,
                yaw: y,
                wall_id: FREE_SPACE_ID.into(),
                wall_kind: None,
                split: SplitTag::None,
            });
        }
    }
    for case in &cases {
        for &m in &config.motions {
            for &y in &config.yaws {
                entries.push(ManifestEntry {
                    path: image_name(&case.id, m, y),
                    motion: m,
                    yaw: y,
                    wall_id: case.id.clone(),
                    wall_kind: Some(case.kind()),
                    split: SplitTag::Test,
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for &m in &config.motions {
        for kind in [WallKind::Multilayer, WallKind::AirGap] {
            let mut idx: Vec<usize> = (0..entries.len())
                .filter(|&i| entries[i].motion == m && entries[i].wall_kind == Some(kind))
                .collect();
            idx.shuffle(&mut rng);
            let train = (config.split_fraction * idx.len() as f64).round() as usize;
            for &i in &idx[..train] {
                entries[i].split = SplitTag::Train;
            }
        }
    }
    Ok(entries)
}

#[derive(Clone, Debug)]
pub struct BuildReport {
    pub manifest: DatasetManifest,
    pub computed: usize,
    pub reused: usize,
}

impl BuildReport {
    pub fn succeeded(&self) -> bool {
        self.manifest.failures.is_empty()
    }
}

fn existing_matches(path: &Path, entry: &ManifestEntry) -> bool {
    match formats::load_twmd(path) {
        Ok(img) => {
            img.meta.motion == entry.motion
                && img.meta.yaw_deg == entry.yaw as f32
                && img.meta.wall_id == entry.wall_id
                && img.meta.split == entry.split
        }
        Err(_) => false,
    }
}

/// Builds (or completes) the dataset under `config.output_dir`. Individual
/// case failures are collected in the manifest instead of aborting.
pub fn build_dataset(config: &BuildConfig) -> Result<BuildReport, PipelineError> {
    let entries = plan_entries(config)?;
    let cases = config.wall_cases()?;
    let out = &config.output_dir;
    let image_dir = out.join(IMAGE_DIR);
    fs::create_dir_all(&image_dir).map_err(io_err(&image_dir))?;

    // entries grouped by wall, preserving plan order
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let order: BTreeMap<&str, usize> = std::iter::once(FREE_SPACE_ID)
        .chain(cases.iter().map(|c| c.id.as_str()))
        .enumerate()
        .map(|(i, id)| (id, i))
        .collect();
    for (i, e) in entries.iter().enumerate() {
        groups.entry(order[e.wall_id.as_str()]).or_default().push(i);
    }

    let provider = MapProvider::new(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let groups: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();

    // per wall: (entry index, freshly computed) plus an optional failure
    type GroupResult = (Vec<(usize, bool)>, Option<CaseFailure>);
    let results: Vec<GroupResult> = pool.install(|| {
        groups
            .par_iter()
            .map(|(g, idx)| {
                let wall = (*g > 0).then(|| &cases[g - 1]);
                let wall_id = wall.map_or(FREE_SPACE_ID, |w| w.id.as_str());
                let pending: Vec<usize> = idx
                    .iter()
                    .copied()
                    .filter(|&i| !existing_matches(&out.join(&entries[i].path), &entries[i]))
                    .collect();
                let mut done: Vec<(usize, bool)> = idx
                    .iter()
                    .filter(|i| !pending.contains(i))
                    .map(|&i| (i, false))
                    .collect();
                if pending.is_empty() {
                    return (done, None);
                }
                let map = match wall.map(|w| provider.map_for(w)).transpose() {
                    Ok(m) => m,
                    Err(e) => {
                        warn!("wall {wall_id} failed: {e}");
                        return (
                            done,
                            Some(CaseFailure {
                                wall_id: wall_id.into(),
                                error: e.to_string(),
                            }),
                        );
                    }
                };
                for i in pending {
                    let e = &entries[i];
                    let result = run_case(wall, map.as_ref(), e.motion, e.yaw, config, false)
                        .and_then(|mut c| {
                            c.image.meta.split = e.split;
                            let mut bytes = Vec::new();
                            formats::write_twmd(&mut bytes, &c.image)?;
                            write_atomic(&out.join(&e.path), &bytes)
                        });
                    if let Err(err) = result {
                        warn!("{err}");
                        return (
                            done,
                            Some(CaseFailure {
                                wall_id: wall_id.into(),
                                error: err.to_string(),
                            }),
                        );
                    }
                    done.push((i, true));
                }
                (done, None)
            })
            .collect()
    });

    let mut ok = vec![false; entries.len()];
    let (mut computed, mut reused) = (0, 0);
    let mut failures = Vec::new();
    for (done, failure) in results {
        for (i, fresh) in done {
            ok[i] = true;
            if fresh {
                computed += 1;
            } else {
                reused += 1;
            }
        }
        failures.extend(failure);
    }
    let manifest = DatasetManifest {
        tool_version: TOOL_VERSION.into(),
        config_hash: config.config_hash(),
        seed: config.seed,
        split_fraction: config.split_fraction,
        walls: cases,
        entries: entries
            .into_iter()
            .zip(ok)
            .filter(|(_, ok)| *ok)
            .map(|(e, _)| e)
            .collect(),
        failures,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out.join(MANIFEST_FILE), format!("{text}\n").as_bytes())?;
    info!("dataset: {computed} images computed, {reused} reused");
    Ok(BuildReport {
        manifest,
        computed,
        reused,
    })
}

/// Checks a manifest against its plan and the files on disk; returns every
/// problem found.
pub fn validate_manifest(
    manifest: &DatasetManifest,
    config: &BuildConfig,
    out_dir: &Path,
) -> Vec<String> {
    let mut problems = Vec::new();
    match plan_entries(config) {
        Ok(plan) => {
            if plan != manifest.entries {
                problems.push(format!(
                    "manifest has {} entries, plan has {} (or they differ)",
                    manifest.entries.len(),
                    plan.len()
                ));
            }
        }
        Err(e) => problems.push(e.to_string()),
    }
    if manifest.config_hash != config.config_hash() {
        problems.push("config hash mismatch".into());
    }
    if !manifest.failures.is_empty() {
        problems.push(format!("{} failed cases", manifest.failures.len()));
    }
    let mut listed = std::collections::BTreeSet::new();
    for e in &manifest.entries {
        let p = out_dir.join(&e.path);
        if !p.is_file() {
            problems.push(format!("missing file {}", e.path));
        }
        listed.insert(e.path.clone());
    }
    match fs::read_dir(out_dir.join(IMAGE_DIR)) {
        Ok(rd) => {
            for f in rd.flatten() {
                let rel = format!("{IMAGE_DIR}/{}", f.file_name().to_string_lossy());
                if !listed.contains(&rel) {
                    problems.push(format!("unlisted file {rel}"));
                }
            }
        }
        Err(e) => problems.push(format!("image directory: {e}")),
    }
    let strata: BTreeMap<(MotionKind, Option<WallKind>), (usize, usize)> = manifest
        .entries
        .iter()
        .filter(|e| e.wall_kind.is_some())
        .fold(BTreeMap::new(), |mut acc, e| {
            let s = acc.entry((e.motion, e.wall_kind)).or_insert((0, 0));
            match e.split {
                SplitTag::Train => s.0 += 1,
                SplitTag::Test => s.1 += 1,
                SplitTag::None => {}
            }
            acc
        });
    for ((m, k), (train, test)) in strata {
        let want = (manifest.split_fraction * (train + test) as f64).round() as usize;
        if train != want {
            problems.push(format!("stratum {m}/{k:?}: {train} train, expected {want}"));
        }
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_counts() {
        let plan = plan_entries(&BuildConfig::default()).unwrap();
        assert_eq!(plan.len(), 968);
        let free = plan.iter().filter(|e| e.wall_kind.is_none()).count();
        let train = plan.iter().filter(|e| e.split == SplitTag::Train).count();
        let test = plan.iter().filter(|e| e.split == SplitTag::Test).count();
        assert_eq!((free, train, test), (8, 768, 192));
    }

    #[test]
    fn split_depends_only_on_seed() {
        let a = plan_entries(&BuildConfig::default()).unwrap();
        let b = plan_entries(&BuildConfig {
            parallelism: 1,
            output_dir: "elsewhere".into(),
            ..BuildConfig::default()
        })
        .unwrap();
        assert_eq!(a, b);
        let c = plan_entries(&BuildConfig {
            seed: 7,
            ..BuildConfig::default()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn yaw_outside_catalog_rejected() {
        let cfg = BuildConfig {
            yaws: vec![0.0, 90.0],
            ..BuildConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(PipelineError::Plan(_))));
    }

    #[test]
    fn bad_split_and_unknown_wall_rejected() {
        for cfg in [
            BuildConfig {
                split_fraction: 1.0,
                ..BuildConfig::default()
            },
            BuildConfig {
                walls: Some(vec!["zz-999".into()]),
                ..BuildConfig::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = BuildConfig::default();
        assert_eq!(BuildConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let partial =
            BuildConfig::from_toml("seed = 5\nyaws = [0.0, 45.0]\n[grid]\ncell_size = 0.0125\n")
                .unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.grid, GridConfig::default());
        assert!(BuildConfig::from_toml("sede = 5").is_err());
    }

    #[test]
    fn hash_ignores_paths_and_workers() {
        let a = BuildConfig::default();
        let b = BuildConfig {
            parallelism: 2,
            output_dir: "x".into(),
            ..a.clone()
        };
        assert_eq!(a.config_hash(), b.config_hash());
        let c = BuildConfig {
            seed: 1,
            ..a.clone()
        };
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
