//! The `lipseg` command line: lighting simulation, criterion evaluation, both
//! segmenters and the invariance experiment. Every command prints one JSON
//! report (or writes it to `--report`).
//!
//! Exit status: 0 success, 1 I/O or format error, 2 violated precondition,
//! 3 failed invariance check.

pub mod experiment;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::criteria::HomogeneityCriterion;
use crate::ctree::{build_max_tree, segment_ct, CostParams};
use crate::error::Error;
use crate::grow::{grow, GrowConfig};
use crate::lip::GreyScale;
use crate::raster::pgm::write_pgm;
use crate::raster::{
    dilate, lip_transform_image, lip_transform_saturating, quantize, read_image, read_mask,
    write_mask, Connectivity, LipOp, RegionMask, StructuringElement,
};

pub use experiment::{invariance_experiment, ExperimentParams, InvarianceMode, InvarianceResult};
pub use report::SegmentationReport;

pub const EXIT_IO: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_INVARIANCE: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_io() {
                EXIT_IO
            } else {
                EXIT_PRECONDITION
            },
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "lipseg",
    version,
    about = "LIP lighting simulation and region segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a LIP law with a constant to every pixel and write an 8-bit PGM.
    Transform(TransformArgs),
    /// Evaluate a homogeneity criterion on a region.
    Homogeneity(HomogeneityArgs),
    /// Grow a region from seed points.
    Grow(GrowArgs),
    /// Select the max-tree nodes closest to the 3x3-dilated seeds.
    SegmentCt(SegmentCtArgs),
    /// Compare a LIP criterion on an image and its darkened and brightened variants.
    ExperimentInvariance(ExperimentArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("law").required(true)))]
pub struct TransformArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Darken by LIP addition of K (exposure change).
    #[arg(long, value_name = "K", group = "law", num_args = 0..=1, default_missing_value = "120")]
    pub lip_add: Option<f64>,
    /// Brighten by LIP subtraction of K.
    #[arg(long, value_name = "K", group = "law", num_args = 0..=1, default_missing_value = "120")]
    pub lip_sub: Option<f64>,
    /// LIP multiplication by LAMBDA (opacity change): 4 darkens, 0.1 brightens.
    #[arg(long, value_name = "LAMBDA", group = "law")]
    pub lip_mul: Option<f64>,
    /// Apply the law to the complement, simulating lighting on a conventional image.
    #[arg(long)]
    pub complement: bool,
    /// Pin tones that brightening pushes past white instead of failing.
    #[arg(long)]
    pub saturate: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

impl TransformArgs {
    fn op(&self) -> LipOp {
        match (self.lip_add, self.lip_sub, self.lip_mul) {
            (Some(k), _, _) => LipOp::Add(k),
            (_, Some(k), _) => LipOp::Sub(k),
            (_, _, Some(l)) => LipOp::Mul(l),
            _ => unreachable!("clap enforces one law"),
        }
    }
}

#[derive(Debug, Args)]
pub struct HomogeneityArgs {
    pub image: PathBuf,
    pub mask: PathBuf,
    /// add, mul, variance or dynamic.
    #[arg(long, default_value = "add")]
    pub criterion: HomogeneityCriterion,
    /// Evaluate on the complement of the image.
    #[arg(long)]
    pub complement: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    pub image: PathBuf,
    /// Seed point `x,y`; repeat for several.
    #[arg(long = "seed", value_name = "X,Y", required = true, value_parser = parse_seed)]
    pub seeds: Vec<(usize, usize)>,
    #[arg(long, default_value = "add")]
    pub criterion: HomogeneityCriterion,
    /// Defaults to 200 for add and 2.7 for mul.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// `NxN` square (odd N) or `cross`.
    #[arg(long, default_value = "3x3")]
    pub se: String,
    #[arg(long, default_value = "4")]
    pub connectivity: Connectivity,
    /// Work on the complement of the image (the default).
    #[arg(long, overrides_with = "no_complement")]
    pub complement: bool,
    /// Work on the image as given.
    #[arg(long, overrides_with = "complement")]
    pub no_complement: bool,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Where to write the final mask (PGM, 255 inside).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SegmentCtArgs {
    pub image: PathBuf,
    #[arg(long = "seed", value_name = "X,Y", required = true, value_parser = parse_seed)]
    pub seeds: Vec<(usize, usize)>,
    /// Weight of false positives; false negatives weigh `1 - alpha`.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value = "4")]
    pub connectivity: Connectivity,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write a text listing of the tree nodes.
    #[arg(long)]
    pub dump_tree: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub image: PathBuf,
    pub mask: PathBuf,
    #[arg(long, value_enum)]
    pub mode: InvarianceMode,
    #[arg(long, default_value_t = 120.0)]
    pub k: f64,
    #[arg(long, default_value_t = 4.0)]
    pub lambda_dark: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_bright: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_seed(s: &str) -> std::result::Result<(usize, usize), String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    Ok((parse(x)?, parse(y)?))
}

fn seeds_field(seeds: &[(usize, usize)]) -> Vec<[usize; 2]> {
    seeds.iter().map(|&(x, y)| [x, y]).collect()
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub fn cmd_transform(args: &TransformArgs) -> CliResult<SegmentationReport> {
    let img = read_image(&args.input, GreyScale::default())?;
    let op = args.op();
    let out = if args.saturate {
        lip_transform_saturating(&img, op, args.complement)?.0
    } else {
        lip_transform_image(&img, op, args.complement)?
    };
    write_pgm(&quantize(&out), &args.output)?;
    let mut r = SegmentationReport::new("transform", &[&args.input]);
    r.outputs = vec![path_string(&args.output)];
    r.transform = Some(op);
    r.complement = Some(args.complement);
    Ok(r)
}

pub fn cmd_homogeneity(args: &HomogeneityArgs) -> CliResult<SegmentationReport> {
    let img = read_image(&args.image, GreyScale::default())?;
    let mask = read_mask(&args.mask)?;
    let work = if args.complement {
        img.complement()?
    } else {
        img
    };
    let value = args.criterion.evaluate(&work, &mask)?;
    let mut r = SegmentationReport::new("homogeneity", &[&args.image, &args.mask]);
    r.criterion = Some(args.criterion);
    r.complement = Some(args.complement);
    r.criterion_value = Some(value);
    r.region_pixels = Some(mask.count());
    Ok(r)
}

pub fn cmd_grow(args: &GrowArgs) -> CliResult<SegmentationReport> {
    let img = read_image(&args.image, GreyScale::default())?;
    let seed = RegionMask::from_points(img.width(), img.height(), &args.seeds)?;
    let threshold = match args.threshold {
        Some(t) => t,
        None => args.criterion.default_threshold().ok_or_else(|| {
            CliError::from(Error::InvalidParameter(format!(
                "--threshold is required for criterion {}",
                args.criterion
            )))
        })?,
    };
    let cfg = GrowConfig {
        criterion: args.criterion,
        threshold,
        se: args.se.parse::<StructuringElement>()?,
        connectivity: args.connectivity,
        max_iterations: args.max_iterations,
        work_in_complement: !args.no_complement,
    };
    let outcome = grow(&img, &seed, &cfg)?;
    let mut r = SegmentationReport::new("grow", &[&args.image]);
    if let Some(out) = &args.out {
        write_mask(&outcome.region, out)?;
        r.outputs = vec![path_string(out)];
    }
    r.criterion = Some(cfg.criterion);
    r.threshold = Some(threshold);
    r.seeds = seeds_field(&args.seeds);
    r.connectivity = Some(cfg.connectivity);
    r.structuring_element = Some(args.se.clone());
    r.complement = Some(cfg.work_in_complement);
    r.seed_criterion_value = Some(outcome.seed_criterion);
    r.criterion_value = Some(outcome.criterion);
    r.region_pixels = Some(outcome.region.count());
    r.iterations = Some(outcome.iterations());
    r.trace = outcome.trace.entries;
    Ok(r)
}

pub fn cmd_segment_ct(args: &SegmentCtArgs) -> CliResult<SegmentationReport> {
    let img = read_image(&args.image, GreyScale::default())?;
    let params = CostParams::new(args.alpha)?;
    let seed = RegionMask::from_points(img.width(), img.height(), &args.seeds)?;
    let g = dilate(&seed, &StructuringElement::default());
    let tree = build_max_tree(&img, args.connectivity)?;
    if let Some(path) = &args.dump_tree {
        std::fs::write(path, tree.dump()).map_err(|source| {
            CliError::from(Error::Io {
                path: path.clone(),
                source,
            })
        })?;
    }
    let seg = segment_ct(&tree, &g, params)?;
    let mut r = SegmentationReport::new("segment-ct", &[&args.image]);
    if let Some(out) = &args.out {
        write_mask(&seg.mask, out)?;
        r.outputs.push(path_string(out));
    }
    if let Some(path) = &args.dump_tree {
        r.outputs.push(path_string(path));
    }
    r.alpha = Some(args.alpha);
    r.seeds = seeds_field(&args.seeds);
    r.marker_pixels = Some(g.count());
    r.connectivity = Some(args.connectivity);
    r.structuring_element = Some("3x3".into());
    r.tree_nodes = Some(tree.len());
    r.region_pixels = Some(seg.mask.count());
    r.cost = Some(seg.cost);
    r.false_positives = Some(seg.false_positives);
    r.false_negatives = Some(seg.false_negatives);
    Ok(r)
}

pub fn cmd_experiment_invariance(args: &ExperimentArgs) -> CliResult<SegmentationReport> {
    let img = read_image(&args.image, GreyScale::default())?;
    let mask = read_mask(&args.mask)?;
    let params = ExperimentParams {
        k: args.k,
        lambda_dark: args.lambda_dark,
        lambda_bright: args.lambda_bright,
    };
    let result = invariance_experiment(&img, &mask, args.mode, params)?;
    let mut r = SegmentationReport::new("experiment-invariance", &[&args.image, &args.mask]);
    r.criterion = Some(result.criterion);
    r.complement = Some(true);
    r.criterion_value = Some(result.real[0].value);
    r.region_pixels = Some(mask.count());
    r.invariance = Some(result);
    Ok(r)
}

fn report_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Transform(a) => a.report.as_deref(),
        Command::Homogeneity(a) => a.report.as_deref(),
        Command::Grow(a) => a.report.as_deref(),
        Command::SegmentCt(a) => a.report.as_deref(),
        Command::ExperimentInvariance(a) => a.report.as_deref(),
    }
}

fn print_report(report: &SegmentationReport) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", report.to_json()).and_then(|_| out.flush()) {
        // a closed pipe (e.g. `| head`) is not a failure of the command
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError {
            code: EXIT_IO,
            message: format!("writing report: {e}"),
        }),
        _ => Ok(()),
    }
}

/// Runs one command and emits its report. Returns the report on success.
pub fn run(cli: &Cli) -> CliResult<SegmentationReport> {
    let report = match &cli.command {
        Command::Transform(a) => cmd_transform(a)?,
        Command::Homogeneity(a) => cmd_homogeneity(a)?,
        Command::Grow(a) => cmd_grow(a)?,
        Command::SegmentCt(a) => cmd_segment_ct(a)?,
        Command::ExperimentInvariance(a) => cmd_experiment_invariance(a)?,
    };
    match report_path(&cli.command) {
        Some(path) => report.write(path)?,
        None => print_report(&report)?,
    }
    if let Some(inv) = &report.invariance {
        if !inv.real_within_tolerance {
            return Err(CliError {
                code: EXIT_INVARIANCE,
                message: format!(
                    "criterion varies by {} across lighting variants (tolerance {})",
                    inv.real_max_deviation, inv.real_tolerance
                ),
            });
        }
    }
    Ok(report)
}

/// Entry point shared by the binary: parses `args`, runs, maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PRECONDITION } else { 0 });
        }
    };
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lipseg: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
