use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use twsim::doppler;
use twsim::fdtd::{self, Normalization};
use twsim::formats;
use twsim::motion::{self, GroundRegion, MotionKind};
use twsim::pipeline::{self, BuildConfig, DatasetManifest, MapProvider, FREE_SPACE_ID};
use twsim::plot::{self, Colormap, PlotOptions};
use twsim::radar;
use twsim::walls;

#[derive(Parser)]
#[command(
    name = "twsim",
    version,
    about = "Through-wall micro-Doppler simulator"
)]
struct Cli {
    /// Increase log verbosity (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Wall catalog.
    Walls {
        #[command(subcommand)]
        action: WallsCmd,
    },
    /// Electromagnetic solver.
    Fdtd {
        #[command(subcommand)]
        action: FdtdCmd,
    },
    /// Synthesize one spectrogram image.
    Synth(SynthArgs),
    /// Dataset generation.
    Dataset {
        #[command(subcommand)]
        action: DatasetCmd,
    },
    /// Render image files to PNG.
    Plot(PlotArgs),
}

#[derive(Subcommand)]
enum WallsCmd {
    /// Print the wall cases.
    List {
        /// Emit the catalog as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum FdtdCmd {
    /// Compute the transmission map of a wall case (or `free`).
    Run {
        #[arg(long)]
        wall: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output map file.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    motion: MotionKind,
    #[arg(long, allow_hyphen_values = true)]
    yaw: f64,
    /// Wall id or `free`.
    #[arg(long)]
    wall: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Image output (TWMD).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    png: Option<PathBuf>,
    /// Baseband output (TWBB).
    #[arg(long)]
    baseband: Option<PathBuf>,
    /// Scatterer track CSV output.
    #[arg(long)]
    tracks: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Build or complete a dataset.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        parallelism: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Recompute maps instead of using the cache.
        #[arg(long)]
        no_cache: bool,
    },
    /// Check a built dataset against its config.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the default build configuration.
    DefaultConfig,
}

#[derive(Args)]
struct PlotArgs {
    /// TWMD files.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Directory for one PNG per input (default: next to each input).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write a single montage instead.
    #[arg(long)]
    montage: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    columns: usize,
    #[arg(long, default_value_t = 1)]
    scale: usize,
    #[arg(long)]
    viridis: bool,
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Walls {
            action: WallsCmd::List { json },
        } => walls_list(json),
        Command::Fdtd {
            action: FdtdCmd::Run { wall, config, out },
        } => fdtd_run(&wall, config.as_deref(), out.as_deref()),
        Command::Synth(args) => synth(args),
        Command::Dataset { action } => dataset(action),
        Command::Plot(args) => plot_cmd(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<BuildConfig, pipeline::PipelineError> {
    path.map_or_else(|| Ok(BuildConfig::default()), BuildConfig::load)
}

fn lookup_wall(id: &str) -> Result<Option<walls::WallCase>, String> {
    if id == "free" || id == FREE_SPACE_ID {
        return Ok(None);
    }
    walls::find_case(id)
        .map(Some)
        .ok_or_else(|| format!("unknown wall `{id}` (see `twsim walls list`)"))
}

fn walls_list(json: bool) -> CliResult {
    let cases = walls::enumerate_cases();
    if json {
        println!("{}", walls::catalog_json(&cases)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!(
        "{:<8} {:<10} {:>7} {:>7} {:>8} {:>8} {:>5}",
        "id", "kind", "eps_out", "eps_in", "l_out", "l_in", "gaps"
    );
    for c in &cases {
        match &c.layout {
            walls::WallLayout::Multilayer {
                outer_eps,
                inner_eps,
                outer_thickness,
                inner_thickness,
            } => println!(
                "{:<8} {:<10} {:>7.2} {:>7.2} {:>8.3} {:>8.3} {:>5}",
                c.id,
                c.kind().as_str(),
                outer_eps,
                inner_eps,
                outer_thickness,
                inner_thickness,
                "-"
            ),
            walls::WallLayout::AirGap {
                eps,
                thickness,
                gap_count,
                ..
            } => println!(
                "{:<8} {:<10} {:>7.3} {:>7} {:>8.3} {:>8} {:>5}",
                c.id,
                c.kind().as_str(),
                eps,
                "-",
                thickness,
                "-",
                gap_count
            ),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn fdtd_run(wall: &str, config: Option<&Path>, out: Option<&Path>) -> CliResult {
    let cfg = load_config(config)?;
    let case = lookup_wall(wall)?;
    let source = cfg.source();
    let start = Instant::now();
    let map = match &case {
        None => {
            let scene = fdtd::build_scene(&cfg.grid, None, cfg.wall_front, &source)?;
            let record = fdtd::run(&scene)?;
            fdtd::extract_transmission(&record, source.frequency, Normalization::SelfReference)?
        }
        Some(c) => {
            let cfg = BuildConfig {
                use_cache: false,
                ..cfg.clone()
            };
            MapProvider::new(&cfg).map_for(c)?
        }
    };
    info!("solved in {:.1} s", start.elapsed().as_secs_f64());
    let geo = map.geometry;
    println!(
        "map {} × {} nodes, cell {} m",
        geo.nx, geo.nz, geo.cell_size
    );
    for z in [2.0, 3.0, 4.5, 6.0] {
        if let Ok(h) = radar::sample_transmission(&map, [source.position[0], z]) {
            println!(
                "  |H| at z = {z:.1} m: {:.4}  phase {:+.3} rad",
                h.norm(),
                h.arg()
            );
        }
    }
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("{}.twtm", map.wall_id)));
    formats::save_twtm(&path, &map)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn synth(args: SynthArgs) -> CliResult {
    let cfg = load_config(args.config.as_deref())?;
    let case = lookup_wall(&args.wall)?;
    let map = case
        .as_ref()
        .map(|c| MapProvider::new(&cfg).map_for(c))
        .transpose()?;
    let out = pipeline::run_case(
        case.as_ref(),
        map.as_ref(),
        args.motion,
        args.yaw,
        &cfg,
        true,
    )?;
    let spec = out.spectrogram.as_ref().expect("spectrogram requested");
    let peak = (0..spec.frames)
        .map(|m| spec.doppler_axis[spec.peak_bin(m)])
        .sum::<f64>()
        / spec.frames as f64;
    println!(
        "{} frames × {} bins; mean peak Doppler {peak:+.1} Hz; brightest image row {} ({:+.0} Hz)",
        spec.frames,
        spec.bins,
        out.image.brightest_row(),
        doppler::GanImage::row_frequency(out.image.brightest_row())
    );
    let stem = format!(
        "{}_{}_yaw{}",
        out.image.meta.wall_id,
        args.motion.as_str(),
        args.yaw
    );
    let img_path = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{stem}.twmd")));
    formats::save_twmd(&img_path, &out.image)?;
    println!("wrote {}", img_path.display());
    if let Some(p) = args.png {
        plot::write_png(&out.image, &p, &PlotOptions::default())?;
        println!("wrote {}", p.display());
    }
    if let Some(p) = args.baseband {
        formats::save_twbb(&p, &out.series)?;
        println!("wrote {}", p.display());
    }
    if let Some(p) = args.tracks {
        let geo = cfg.grid.geometry();
        let (skeleton, clip) = motion::generate_motion(args.motion, cfg.duration, &cfg.gait);
        let clip = motion::place_and_orient(&clip, cfg.human_start, args.yaw, None)?;
        let region = GroundRegion::from_geometry(&geo);
        let track = motion::sample_tracks(
            &skeleton,
            &clip,
            cfg.radar.position,
            cfg.sample_rate,
            cfg.duration,
            Some(&region),
        )?;
        let file = std::fs::File::create(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        track.write_csv(std::io::BufWriter::new(file))?;
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn dataset(action: DatasetCmd) -> CliResult {
    match action {
        DatasetCmd::DefaultConfig => {
            print!("{}", BuildConfig::default().to_toml());
            Ok(ExitCode::SUCCESS)
        }
        DatasetCmd::Build {
            config,
            parallelism,
            output,
            no_cache,
        } => {
            let mut cfg = BuildConfig::load(&config)?;
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            if no_cache {
                cfg.use_cache = false;
            }
            let start = Instant::now();
            let report = pipeline::build_dataset(&cfg)?;
            let m = &report.manifest;
            let free = m.count(|e| e.wall_kind.is_none());
            let train = m.count(|e| e.split == doppler::SplitTag::Train);
            let test = m.count(|e| e.split == doppler::SplitTag::Test);
            println!(
                "{} images ({free} free-space, {} through-wall: {train} train / {test} test); {} computed, {} reused in {:.0} s",
                m.entries.len(),
                train + test,
                report.computed,
                report.reused,
                start.elapsed().as_secs_f64()
            );
            println!(
                "manifest: {}",
                cfg.output_dir.join(pipeline::MANIFEST_FILE).display()
            );
            if report.succeeded() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{} wall case(s) failed:", m.failures.len());
                for f in &m.failures {
                    eprintln!("  {}: {}", f.wall_id, f.error);
                }
                Ok(ExitCode::from(2))
            }
        }
        DatasetCmd::Validate { config, output } => {
            let mut cfg = BuildConfig::load(&config)?;
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            let manifest = DatasetManifest::load(&cfg.output_dir.join(pipeline::MANIFEST_FILE))?;
            let problems = pipeline::validate_manifest(&manifest, &cfg, &cfg.output_dir);
            if problems.is_empty() {
                println!("manifest valid: {} entries", manifest.entries.len());
                Ok(ExitCode::SUCCESS)
            } else {
                for p in &problems {
                    eprintln!("{p}");
                }
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn plot_cmd(args: PlotArgs) -> CliResult {
    let opts = PlotOptions {
        scale: args.scale,
        colormap: if args.viridis {
            Colormap::Viridis
        } else {
            Colormap::Gray
        },
        ..PlotOptions::default()
    };
    let images = args
        .paths
        .iter()
        .map(|p| formats::load_twmd(p))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(m) = args.montage {
        plot::write_montage(&images, args.columns, &m, &opts)?;
        println!("wrote {}", m.display());
        return Ok(ExitCode::SUCCESS);
    }
    for (img, src) in images.iter().zip(&args.paths) {
        let name = src.with_extension("png");
        let dest = match &args.out_dir {
            Some(d) => d.join(name.file_name().expect("input has a file name")),
            None => name,
        };
        plot::write_png(img, &dest, &opts)?;
        println!("wrote {}", dest.display());
    }
    Ok(ExitCode::SUCCESS)
}
