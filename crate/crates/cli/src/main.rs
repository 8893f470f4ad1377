use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;

use ffl_core::config::{PhantomKind, RunConfig};
use ffl_core::forward::{add_noise_with, simulate_fast, simulate_oracle, FastOptions};
use ffl_core::grid::{make_grid, Image2D};
use ffl_core::io;
use ffl_core::metrics::metrics;
use ffl_core::model::{maxwell_validate, static_field, SampledField};
use ffl_core::phantom::xray_project;
use ffl_core::recon::{reconstruct, run_stage1, run_stage2};
use ffl_core::{Error, ProjectionStack, Signal, Vec3};

mod render;

use render::{image_slice, min_max, to_png, volume_slice, SliceAxis};

#[derive(Parser)]
#[command(
    name = "ffl",
    version,
    about = "3D field-free-line MPI simulation and reconstruction"
)]
struct Cli {
    /// TOML run configuration; the desk-scale defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize an analytic phantom into a volume file.
    Phantom(PhantomArgs),
    /// X-ray projections of a volume along the FFL directions.
    Xray(XrayArgs),
    /// Synthesize one signal file per scan angle.
    Simulate(SimulateArgs),
    /// Run the three-stage reconstruction on a directory of signal files.
    Reconstruct(ReconstructArgs),
    /// Compare two volumes: RMSE, relative L2 (second is reference) and Dice.
    Metrics(MetricsArgs),
    /// Write a volume slice or an image as an 8-bit grayscale PNG.
    Render(RenderArgs),
    /// Maxwell checks of the rotated selection field.
    ValidateField(ValidateFieldArgs),
    /// Print a configuration document.
    Config(ConfigArgs),
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Cell counts `nx,ny,nz`.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Box `x1,x2,y1,y2,z1,z2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    extents: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    apex: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base: Option<Vec<f64>>,
    #[arg(long)]
    base_radius: Option<f64>,
    #[arg(long)]
    supersample: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ball,
    Cone,
}

#[derive(Args)]
struct XrayArgs {
    #[arg(long)]
    volume: PathBuf,
    /// Explicit angles in radians; defaults to the configured angle set.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    angles: Option<Vec<f64>>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    volume: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Direct 3D integral instead of the projection route.
    #[arg(long)]
    oracle: bool,
    /// Additive Gaussian noise as a fraction of the per-angle maximum.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    signals: Option<PathBuf>,
    /// Volume file for stage 3; image directory for stages 1 and 2.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    stage: StageArg,
    /// Also write trace and projection images next to the output.
    #[arg(long)]
    dump_intermediates: bool,
}

#[derive(Args)]
struct MetricsArgs {
    a: PathBuf,
    /// Reference volume.
    b: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "z")]
    axis: SliceAxis,
    /// Slice index; the middle slice by default.
    #[arg(long)]
    index: Option<usize>,
    /// Normalise by the whole volume's range instead of the slice's.
    #[arg(long)]
    global_norm: bool,
    /// Also export the slice as one value per line.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateFieldArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    gradient: f64,
    /// Sample points per axis on `[-1,1]³`.
    #[arg(long, default_value_t = 9)]
    points: usize,
}

#[derive(Args)]
struct ConfigArgs {
    /// Print the reference-experiment constants instead of the desk-scale defaults.
    #[arg(long)]
    paper_defaults: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let solver = e
                .chain()
                .any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_solver_failure));
            ExitCode::from(if solver { 2 } else { 1 })
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FFL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow!("FFL_THREADS must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("FFL_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(RunConfig::load(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Config(a) => {
            let cfg = if a.paper_defaults {
                RunConfig::reference()
            } else {
                load_config(&cli.config)?
            };
            print!("{}", cfg.to_toml_string()?);
            Ok(())
        }
        Command::Phantom(a) => cmd_phantom(load_config(&cli.config)?, a),
        Command::Xray(a) => cmd_xray(load_config(&cli.config)?, a),
        Command::Simulate(a) => cmd_simulate(load_config(&cli.config)?, a),
        Command::Reconstruct(a) => cmd_reconstruct(load_config(&cli.config)?, a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Render(a) => cmd_render(a),
        Command::ValidateField(a) => cmd_validate_field(a),
    }
}

fn exact<const N: usize, V: Copy>(flag: &str, v: &[V]) -> Result<[V; N]> {
    v.try_into()
        .map_err(|_| anyhow!("--{flag} takes {N} comma-separated values, got {}", v.len()))
}

fn cmd_phantom(mut cfg: RunConfig, a: PhantomArgs) -> Result<()> {
    if let Some(k) = a.kind {
        cfg.phantom.kind = match k {
            KindArg::Ball => PhantomKind::Ball,
            KindArg::Cone => PhantomKind::Cone,
        };
    }
    if let Some(d) = a.dims {
        cfg.grid.dims = exact("dims", &d)?;
    }
    if let Some(e) = a.extents {
        let e: [f64; 6] = exact("extents", &e)?;
        cfg.grid.extents = [[e[0], e[1]], [e[2], e[3]], [e[4], e[5]]];
    }
    let p = &mut cfg.phantom;
    if let Some(c) = a.center {
        p.center = exact("center", &c)?;
    }
    if let Some(r) = a.radius {
        p.radius = r;
    }
    if let Some(c) = a.apex {
        p.apex = exact("apex", &c)?;
    }
    if let Some(c) = a.base {
        p.base_center = exact("base", &c)?;
    }
    if let Some(r) = a.base_radius {
        p.base_radius = r;
    }
    if let Some(s) = a.supersample {
        p.supersample = s;
    }
    let vol = cfg
        .phantom()
        .context("--kind/--dims/--extents describe an invalid phantom")?;
    io::write_volume(&a.output, &vol)?;
    info!("wrote {} ({} cells)", a.output.display(), vol.values.len());
    Ok(())
}

fn cmd_xray(cfg: RunConfig, a: XrayArgs) -> Result<()> {
    let vol = io::read_volume(&a.volume)?;
    let angles = a.angles.unwrap_or_else(|| cfg.angles());
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let plane = vol.grid.projection_grid();
    for (l, &theta) in angles.iter().enumerate() {
        let img = xray_project(&vol, theta, &plane);
        io::write_image(a.out_dir.join(format!("xray_{l:04}.ffli")), &img)?;
    }
    Ok(())
}

fn signal_path(dir: &Path, angle_index: usize) -> PathBuf {
    dir.join(format!("signal_{angle_index:04}.ffls"))
}

fn cmd_simulate(mut cfg: RunConfig, a: SimulateArgs) -> Result<()> {
    if let Some(n) = a.noise {
        cfg.noise.level = n;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.forward.oracle |= a.oracle;
    let vol = match a.volume.or(cfg.paths.phantom.clone()) {
        Some(p) => io::read_volume(p)?,
        None => cfg.phantom()?,
    };
    let out = a
        .out_dir
        .or(cfg.paths.signals.clone())
        .ok_or_else(|| anyhow!("--out-dir is required (or set paths.signals)"))?;
    let geom = cfg.geometry()?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let fast = FastOptions {
        truncation_radius: cfg.forward.truncation_radius,
    };
    for l in 0..geom.angles.len() {
        let clean = if cfg.forward.oracle {
            simulate_oracle(&vol, l, &geom, cfg.forward.fd_step)?
        } else {
            simulate_fast(&vol, l, &geom, &fast)?
        };
        let rec = add_noise_with(&clean, cfg.noise.level, cfg.seed, cfg.noise.scale)?;
        io::write_signal(signal_path(&out, l), &rec)?;
        info!("angle {l}: {} samples", rec.samples.len());
    }
    Ok(())
}

fn read_signals(dir: &Path) -> Result<Vec<Signal>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading --signals directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ffls"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .ffls signal files in {}", dir.display());
    }
    let mut recs = paths
        .par_iter()
        .map(|p| io::read_signal(p).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    recs.sort_by_key(|r| r.angle_index);
    Ok(recs)
}

fn write_stack(dir: &Path, prefix: &str, stack: &ProjectionStack, indices: &[usize]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (img, l) in stack.images.iter().zip(indices) {
        io::write_image(dir.join(format!("{prefix}_{l:04}.ffli")), img)?;
    }
    Ok(())
}

fn cmd_reconstruct(cfg: RunConfig, a: ReconstructArgs) -> Result<()> {
    let sig_dir = a
        .signals
        .or(cfg.paths.signals.clone())
        .ok_or_else(|| anyhow!("--signals is required (or set paths.signals)"))?;
    let output = a
        .output
        .or(cfg.paths.output.clone())
        .ok_or_else(|| anyhow!("--output is required (or set paths.output)"))?;
    let recs = read_signals(&sig_dir)?;
    let geom = cfg.geometry()?;
    let grid = cfg.grid()?;
    let indices: Vec<usize> = recs.iter().map(|r| r.angle_index).collect();
    let dump_dir = |out: &Path| {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".intermediates");
        out.with_file_name(name)
    };

    match a.stage {
        StageArg::One | StageArg::Two => {
            let (traces, _) = run_stage1(&recs, &geom, &grid, &cfg.recon)?;
            if a.stage == StageArg::One {
                return write_stack(&output, "trace", &traces, &indices);
            }
            let (chis, _) = run_stage2(&traces, &indices, geom.h, &cfg.recon)?;
            write_stack(&output, "chi", &chis, &indices)?;
            if a.dump_intermediates {
                write_stack(&dump_dir(&output), "trace", &traces, &indices)?;
            }
            Ok(())
        }
        StageArg::Three | StageArg::All => {
            let rec = reconstruct(&recs, &geom, &grid, &cfg.recon)?;
            for s in &rec.stats {
                info!(
                    "angle {}: dropped {}, flagged {}, CG {} it (residual {:e})",
                    s.angle_index, s.dropped, s.flagged_cells, s.cg_iterations, s.cg_residual
                );
            }
            io::write_volume(&output, &rec.volume)?;
            if a.dump_intermediates {
                let d = dump_dir(&output);
                write_stack(&d, "trace", &rec.traces, &indices)?;
                write_stack(&d, "chi", &rec.projections, &indices)?;
            }
            Ok(())
        }
    }
}

fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let va = io::read_volume(&a.a)?;
    let vb = io::read_volume(&a.b)?;
    let m = metrics(&va, &vb, a.threshold)
        .with_context(|| format!("comparing {} with {}", a.a.display(), a.b.display()))?;
    println!("rmse={:e}", m.rmse);
    println!("rel_l2={:e}", m.rel_l2);
    println!("dice={}", m.dice);
    Ok(())
}

fn cmd_render(a: RenderArgs) -> Result<()> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let name = a.input.display().to_string();
    let (slice, global) = if bytes.starts_with(io::VOLUME_MAGIC) {
        let vol = io::decode_volume(&bytes, &name)?;
        let [nx, ny, nz] = vol.grid.dims();
        let n = match a.axis {
            SliceAxis::X => nx,
            SliceAxis::Y => ny,
            SliceAxis::Z => nz,
        };
        let s = volume_slice(&vol, a.axis, a.index.unwrap_or(n / 2))?;
        (s, min_max(&vol.values))
    } else if bytes.starts_with(io::IMAGE_MAGIC) {
        let img: Image2D<f64> = io::decode_image(&bytes, &name)?;
        let s = image_slice(&img);
        let g = min_max(&s.values);
        (s, g)
    } else {
        bail!("{name} is neither a volume nor an image file");
    };
    to_png(&slice, a.global_norm.then_some(global), &a.output)?;
    if let Some(csv) = a.csv {
        fs::write(&csv, io::values_to_csv(&slice.values)).with_context(|| format!("writing {}", csv.display()))?;
    }
    Ok(())
}

fn cmd_validate_field(a: ValidateFieldArgs) -> Result<()> {
    let n = a.points;
    let grid = make_grid([[-1.0, 1.0]; 3], [n; 3]).context("--points must be at least 1")?;
    let origin = Vec3::new(grid.x.center(0), grid.y.center(0), grid.z.center(0));
    let spacing = [grid.x.spacing(), grid.y.spacing(), grid.z.spacing()];
    let field = SampledField::sample([n; 3], origin, spacing, |x| static_field(x, a.theta, a.gradient));
    let norms = maxwell_validate(&field)?;
    println!("div_norm={:e}", norms.div_norm);
    println!("curl_norm={:e}", norms.curl_norm);
    println!("jac_asym_norm={:e}", norms.jac_asym_norm);
    Ok(())
}
