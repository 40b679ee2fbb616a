//! Command-line interface.
//!
//! Exit codes: 0 success, 1 I/O or usage error, 2 antipodal obstacles,
//! 3 no separating height function, 4 certification failure (the report is
//! still written when requested).

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::figure_eight::FigureEightParams;
use crate::framing::{
    build_frame, check_separation, choose_pole, separate, HarmonicTerm, OddHarmonicSeries,
    Separation, DEFAULT_MARGIN,
};
use crate::immersion::ExtensionParams;
use crate::io::{
    gauss_samples, parse_spin_expression, read_obstacles, write_obj, write_ply, write_report,
    ReportJson,
};
use crate::verify::{
    auto_tune, circle_torus, immersion_check, verify_extension, Axis, Grid, VerificationReport,
    DEFAULT_GRID, QUICK_GRID,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_ANTIPODAL: i32 = 2;
pub const EXIT_SEPARATION: i32 = 3;
pub const EXIT_CERTIFICATION: i32 = 4;

pub const DEFAULT_MAX_DEGREE: u32 = 15;
pub const DEFAULT_TARGET_RADIUS: f64 = 1e-3;
pub const DEFAULT_MESH_GRID: (usize, usize) = (256, 128);
pub const DEFAULT_CLOUD_GRID: (usize, usize) = (256, 256);

#[derive(Debug, Parser)]
#[command(
    name = "gauss-avoid",
    version,
    about = "Tori whose Gauss map misses a finite set of directions"
)]
pub struct Cli {
    /// TOML file with defaults for any flag (flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, certify and export the torus for an obstacle file.
    Construct(PipelineArgs),
    /// Build and certify; writes only the report.
    Verify(PipelineArgs),
    /// Build the torus and write its OBJ mesh without certification.
    ExportMesh(PipelineArgs),
    /// Evaluate a spin expression and check that it is immersed.
    Spin(SpinArgs),
    /// Print samples and image length of the figure-eight curve.
    FigureEightInfo(FigureEightArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Obstacle file: `x y z` or `lonlat: <lon_deg> <lat_deg>` per line.
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    /// Tube scale; tuned automatically unless given together with --delta.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Figure-eight amplitude; tuned automatically unless given with --epsilon.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Verification grid `NxM` or `N` [default: 1024x1024].
    #[arg(long, value_name = "NxM")]
    pub grid: Option<String>,
    /// Use the 256x256 verification grid.
    #[arg(long)]
    pub quick: bool,
    /// Seed for pole selection.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Side margin of the fitted height function, in tan(latitude) [default: 0.1].
    #[arg(long)]
    pub margin: Option<f64>,
    /// Largest harmonic tried by the fit [default: 15].
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Height function `k:a:b,...` (odd k) replacing the fit.
    #[arg(long, value_name = "SERIES")]
    pub series: Option<String>,
    /// Certified radius required by auto-tuning [default: 0.001].
    #[arg(long)]
    pub target_radius: Option<f64>,
    /// JSON report path [construct default: report.json].
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// OBJ mesh path [construct and export-mesh default: torus.obj].
    #[arg(long, value_name = "FILE")]
    pub mesh: Option<PathBuf>,
    /// Mesh resolution `NxM` [default: 256x128].
    #[arg(long, value_name = "NxM")]
    pub mesh_grid: Option<String>,
    /// PLY point cloud of the Gauss image plus obstacles.
    #[arg(long, value_name = "FILE")]
    pub gauss_cloud: Option<PathBuf>,
    /// Point cloud resolution `NxM` [default: 256x256].
    #[arg(long, value_name = "NxM")]
    pub cloud_grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SpinArgs {
    /// Expression file: `point c…` or `circle r c…`, then `translate v…` / `spin` lines.
    #[arg(long, value_name = "FILE")]
    pub expr: PathBuf,
    /// Samples per torus axis for the immersion check.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FigureEightArgs {
    #[arg(long)]
    pub delta: f64,
    /// Number of evenly spaced samples of t.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
}

/// Flag values read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub points: Option<PathBuf>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub grid: Option<String>,
    pub quick: Option<bool>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
    pub max_degree: Option<u32>,
    pub series: Option<String>,
    pub target_radius: Option<f64>,
    pub report: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub mesh_grid: Option<String>,
    pub gauss_cloud: Option<PathBuf>,
    pub cloud_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Construct,
    Verify,
    ExportMesh,
}

/// Fully resolved pipeline settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub points: PathBuf,
    pub params: Option<(f64, f64)>,
    pub grid: (usize, usize),
    pub seed: u64,
    pub margin: f64,
    pub max_degree: u32,
    pub series: Option<OddHarmonicSeries>,
    pub target_radius: f64,
    pub report: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub mesh_grid: (usize, usize),
    pub gauss_cloud: Option<PathBuf>,
    pub cloud_grid: (usize, usize),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// `NxM` or `N`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || usage(format!("grid must look like 512x256, got {s:?}"));
    let mut it = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()));
    let n = it.next().ok_or_else(bad)??;
    let m = it.next().transpose()?.unwrap_or(n);
    if it.next().is_some() || n < 2 || m < 2 {
        return Err(bad());
    }
    Ok((n, m))
}

/// `k:a:b,k:a:b,...`.
pub fn parse_series(s: &str) -> Result<OddHarmonicSeries> {
    let mut terms = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f: Vec<&str> = part.split(':').collect();
        let bad = || usage(format!("series term must be k:a:b, got {part:?}"));
        let [k, a, b] = f[..] else { return Err(bad()) };
        terms.push(HarmonicTerm {
            k: k.trim().parse().map_err(|_| bad())?,
            a: a.trim().parse().map_err(|_| bad())?,
            b: b.trim().parse().map_err(|_| bad())?,
        });
    }
    OddHarmonicSeries::new(terms)
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e
            .span()
            .map_or(0, |s| text[..s.start].lines().count().max(1)),
        message: e.message().to_string(),
    })
}

impl RunConfig {
    pub fn resolve(mode: Mode, a: &PipelineArgs, c: &ConfigFile) -> Result<Self> {
        let points = a
            .points
            .clone()
            .or_else(|| c.points.clone())
            .ok_or_else(|| usage("--points is required"))?;
        let params = match (a.epsilon.or(c.epsilon), a.delta.or(c.delta)) {
            (Some(e), Some(d)) => {
                ExtensionParams::new(e, d)?;
                Some((e, d))
            }
            (None, None) => None,
            _ => return Err(usage("give both --epsilon and --delta, or neither")),
        };
        let grid = match a.grid.as_ref().or(c.grid.as_ref()) {
            Some(g) => parse_grid(g)?,
            None if a.quick || c.quick == Some(true) => (QUICK_GRID, QUICK_GRID),
            None => (DEFAULT_GRID, DEFAULT_GRID),
        };
        let grid_or = |flag: &Option<String>, cfg: &Option<String>, default| {
            flag.as_ref()
                .or(cfg.as_ref())
                .map_or(Ok(default), |g| parse_grid(g))
        };
        let default_mesh =
            matches!(mode, Mode::Construct | Mode::ExportMesh).then(|| PathBuf::from("torus.obj"));
        let default_report = (mode == Mode::Construct).then(|| PathBuf::from("report.json"));
        let cfg = RunConfig {
            mode,
            points,
            params,
            grid,
            seed: a.seed.or(c.seed).unwrap_or(0),
            margin: a.margin.or(c.margin).unwrap_or(DEFAULT_MARGIN),
            max_degree: a.max_degree.or(c.max_degree).unwrap_or(DEFAULT_MAX_DEGREE),
            series: a
                .series
                .as_ref()
                .or(c.series.as_ref())
                .map(|s| parse_series(s))
                .transpose()?,
            target_radius: a
                .target_radius
                .or(c.target_radius)
                .unwrap_or(DEFAULT_TARGET_RADIUS),
            report: a
                .report
                .clone()
                .or_else(|| c.report.clone())
                .or(default_report),
            mesh: match mode {
                Mode::Verify => None,
                _ => a.mesh.clone().or_else(|| c.mesh.clone()).or(default_mesh),
            },
            mesh_grid: grid_or(&a.mesh_grid, &c.mesh_grid, DEFAULT_MESH_GRID)?,
            gauss_cloud: a.gauss_cloud.clone().or_else(|| c.gauss_cloud.clone()),
            cloud_grid: grid_or(&a.cloud_grid, &c.cloud_grid, DEFAULT_CLOUD_GRID)?,
        };
        if !(cfg.margin > 0.0) {
            return Err(usage(format!(
                "margin must be positive, got {}",
                cfg.margin
            )));
        }
        if !(cfg.target_radius >= 0.0) {
            return Err(usage("target radius must be non-negative"));
        }
        Ok(cfg)
    }

    fn outputs(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.report, &self.mesh, &self.gauss_cloud]
            .into_iter()
            .flatten()
    }
}

/// What a pipeline run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub separation: Separation,
    pub params: ExtensionParams,
    pub report: Option<VerificationReport>,
}

fn check_output_dirs(cfg: &RunConfig) -> Result<()> {
    for p in cfg.outputs() {
        let dir = p
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        if !dir.is_dir() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("output directory {} does not exist", dir.display()),
            )));
        }
    }
    Ok(())
}

fn torus_grid((n, m): (usize, usize)) -> Grid {
    Grid::new(vec![Axis::periodic(n), Axis::periodic(m)]).expect("grid sizes checked")
}

/// Runs pole search and fit (or choose_pole and check) → frame → tune or verify → exports.
/// Certification failures come back as `Ok` with `pass = false`; the
/// report is written either way.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Outcome> {
    check_output_dirs(cfg)?;
    let raw = read_obstacles(&cfg.points)?;
    let separation = match &cfg.series {
        Some(z) => {
            let set = choose_pole(&raw, cfg.seed)?;
            check_separation(&set, z)?;
            Separation {
                obstacles: set,
                series: z.clone(),
            }
        }
        None => separate(&raw, cfg.seed, cfg.margin, cfg.max_degree)?,
    };
    let frame = Arc::new(build_frame(separation.series.clone()));
    let grid = torus_grid(cfg.grid);

    let (params, report) = match (cfg.mode, cfg.params) {
        (Mode::ExportMesh, Some((e, d))) => (ExtensionParams::new(e, d)?, None),
        (_, Some((e, d))) => {
            let p = ExtensionParams::new(e, d)?;
            (
                p,
                Some(verify_extension(&separation.obstacles, &frame, p, &grid)?),
            )
        }
        (_, None) => match auto_tune(&separation.obstacles, &frame, cfg.target_radius, &grid) {
            Ok((p, r)) => (p, Some(r)),
            Err(Error::CannotCertify { report, .. }) => (
                ExtensionParams::new(report.epsilon, report.delta)?,
                Some(*report),
            ),
            Err(e) => return Err(e),
        },
    };

    let to_output = separation.obstacles.rotation().transpose();
    let torus = circle_torus(frame, params);
    if let (Some(path), Some(r)) = (&cfg.report, &report) {
        write_report(path, &ReportJson::new(r, &separation.series))?;
    }
    if let Some(path) = &cfg.mesh {
        let mut w = BufWriter::new(File::create(path)?);
        write_obj(&mut w, &torus, &torus_grid(cfg.mesh_grid), &to_output)?;
    }
    if let Some(path) = &cfg.gauss_cloud {
        let samples = gauss_samples(&torus, &torus_grid(cfg.cloud_grid), &to_output);
        let obstacles: Vec<_> = raw.iter().map(|x| x.vec3()).collect();
        write_ply(
            &mut BufWriter::new(File::create(path)?),
            &samples,
            &obstacles,
        )?;
    }
    Ok(Outcome {
        separation,
        params,
        report,
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::AntipodalPair(..) => EXIT_ANTIPODAL,
        Error::SeparationFailed { .. } | Error::NotSeparated { .. } | Error::NoPole { .. } => {
            EXIT_SEPARATION
        }
        Error::AlphaNonPositive(_) | Error::CannotCertify { .. } => EXIT_CERTIFICATION,
        _ => EXIT_IO,
    }
}

fn print_outcome(o: &Outcome) {
    println!("epsilon = {}", o.params.epsilon());
    println!("delta = {}", o.params.delta());
    let series: Vec<String> = o
        .separation
        .series
        .terms()
        .iter()
        .map(|t| format!("{}:{}:{}", t.k, t.a, t.b))
        .collect();
    println!("series = {}", series.join(","));
    if let Some(r) = &o.report {
        println!("grid = {}x{}", r.grid.0, r.grid.1);
        println!("sigma_min = {:e}", r.sigma_min);
        println!("alpha = {}", r.alpha);
        println!("ell_delta = {}", r.ell_delta);
        println!("avoidance_margin = {:e}", r.avoidance_margin);
        println!("lipschitz = {}", r.lipschitz_estimate);
        println!("certified_radius = {:e}", r.certified_radius);
        println!("degree = {:e}", r.degree_estimate);
        println!("pass = {}", r.pass);
    }
}

fn run_spin(a: &SpinArgs) -> Result<i32> {
    let path = a.expr.display().to_string();
    let f = parse_spin_expression(&std::fs::read_to_string(&a.expr)?, &path)?;
    let k = f.domain_dim();
    println!("domain_dim = {k}");
    println!("ambient_dim = {}", f.ambient_dim());
    if k == 0 {
        return Ok(EXIT_OK);
    }
    let sigma = immersion_check(f.as_ref(), &Grid::torus(&vec![a.grid; k]))?;
    println!("grid = {}^{k}", a.grid);
    println!("sigma_min = {sigma:e}");
    Ok(if sigma > 0.0 {
        EXIT_OK
    } else {
        EXIT_CERTIFICATION
    })
}

fn run_figure_eight(a: &FigureEightArgs) -> Result<i32> {
    let p = FigureEightParams::new(a.delta)?;
    if a.samples == 0 {
        return Err(usage("need at least one sample"));
    }
    println!("delta = {}", p.delta());
    println!("ell_delta = {}", p.spherical_image_length());
    println!("max_normal_angle = {}", p.max_normal_angle());
    println!("# t x y dx dy nu");
    for i in 0..a.samples {
        let t = std::f64::consts::TAU * i as f64 / a.samples as f64;
        let (x, y) = p.eval(t);
        let (dx, dy) = p.derivative(t);
        println!("{t} {x} {y} {dx} {dy} {}", p.normal_angle(t));
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let config = cli
        .config
        .as_deref()
        .map(load_config)
        .transpose()?
        .unwrap_or_default();
    let (mode, args) = match &cli.command {
        Command::Construct(a) => (Mode::Construct, a),
        Command::Verify(a) => (Mode::Verify, a),
        Command::ExportMesh(a) => (Mode::ExportMesh, a),
        Command::Spin(a) => return run_spin(a),
        Command::FigureEightInfo(a) => return run_figure_eight(a),
    };
    let cfg = RunConfig::resolve(mode, args, &config)?;
    let outcome = run_pipeline(&cfg)?;
    print_outcome(&outcome);
    Ok(match &outcome.report {
        Some(r) if !r.pass => EXIT_CERTIFICATION,
        _ => EXIT_OK,
    })
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
