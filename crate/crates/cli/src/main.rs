mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use ted_core::synth::{
    apply_random_merges, apply_random_splits, apply_shift, make_boundary_shift_1d, voronoi_labeling,
};
use ted_core::{load_volume, save_volume, ted, Format, Label, LabelVolume, SolverLimits, TedConfig, TedError};

use report::{ConfigEcho, RelabeledMetrics, ReportJson};

const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "ted", version, about = "Tolerant edit distance between label volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a proposal against a ground truth at one threshold
    Compare(CompareArgs),
    /// Score a proposal at several thresholds, one CSV row each
    Sweep(SweepArgs),
    /// Write a synthetic ground truth and a modified proposal
    Synth(SynthArgs),
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "expected three comma-separated values".to_string())
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> =
        s.split(',').map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    match parts.len() {
        2 => Ok([parts[0], parts[1], 1]),
        3 => Ok([parts[0], parts[1], parts[2]]),
        _ => Err("expected nx,ny or nx,ny,nz".to_string()),
    }
}

#[derive(Args)]
struct InputArgs {
    /// Ground-truth volume
    #[arg(long)]
    gt: PathBuf,
    /// Proposal volume
    #[arg(long)]
    proposal: PathBuf,
    /// Input encoding: segv1 or text-grid
    #[arg(long, default_value = "segv1")]
    format: Format,
    /// Voxel size in nm (rx,ry,rz), overriding the files
    #[arg(long, value_parser = parse_triple)]
    resolution: Option<[f64; 3]>,
    /// Cost of a split
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Cost of a merge
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Background label of both volumes, overriding the files
    #[arg(long)]
    background: Option<Label>,
    /// Let the proposal background be relabeled like any other label
    #[arg(long)]
    allow_background_relabel: bool,
    /// Search node budget
    #[arg(long, default_value_t = SolverLimits::default().max_nodes)]
    max_nodes: u64,
    /// Search time budget
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl InputArgs {
    fn load(&self) -> ted_core::Result<(LabelVolume, LabelVolume)> {
        let mut gt = load(&self.gt, self.format)?;
        let mut proposal = load(&self.proposal, self.format)?;
        if let Some(r) = self.resolution {
            gt = gt.with_resolution(r)?;
            proposal = proposal.with_resolution(r)?;
        }
        if self.background.is_some() {
            gt = gt.with_background(self.background);
            proposal = proposal.with_background(self.background);
        }
        Ok((gt, proposal))
    }

    fn config(&self, threshold_nm: f64) -> TedConfig {
        let mut config = TedConfig::new(threshold_nm);
        config.tolerance.allow_background_relabel = self.allow_background_relabel;
        config.alpha = self.alpha;
        config.beta = self.beta;
        config.limits = SolverLimits { max_nodes: self.max_nodes, max_seconds: self.max_seconds };
        config
    }

    fn echo(&self, gt: &LabelVolume, threshold_nm: f64) -> ConfigEcho {
        ConfigEcho {
            gt: self.gt.display().to_string(),
            proposal: self.proposal.display().to_string(),
            format: self.format.to_string(),
            resolution: gt.resolution(),
            threshold_nm,
            alpha: self.alpha,
            beta: self.beta,
            background: gt.background(),
            allow_background_relabel: self.allow_background_relabel,
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Largest tolerated boundary shift in nm
    #[arg(long)]
    threshold_nm: f64,
    /// JSON report path (stdout if omitted)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the closest tolerable relabeling here (segv1)
    #[arg(long)]
    relabeled_out: Option<PathBuf>,
    /// Write per-location error tags here (segv1; 0 none, 1 split, 2 merge, 3 both)
    #[arg(long)]
    errors_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Thresholds in nm
    #[arg(long, value_delimiter = ',', required = true)]
    sweep: Vec<f64>,
    /// CSV output path (stdout if omitted)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// 1D two-region line with a moved boundary
    BoundaryShift,
    /// Boundaries moved by at most --shift nm
    Shift,
    /// --count random cuts
    Splits,
    /// --count merges of adjacent objects
    Merges,
}

#[derive(Args)]
struct SynthArgs {
    kind: SynthKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shift in nm (boundary-shift, shift)
    #[arg(long)]
    shift: Option<f64>,
    /// Number of modifications (splits, merges)
    #[arg(long)]
    count: Option<usize>,
    /// Length of the boundary-shift line
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Base ground truth; a Voronoi partition is generated if omitted
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value = "segv1")]
    format: Format,
    /// Generated ground-truth size (nx,ny[,nz])
    #[arg(long, value_parser = parse_dims, default_value = "64,64,1")]
    dims: [usize; 3],
    /// Voxel size in nm (rx,ry,rz); boundary-shift uses rx only
    #[arg(long, value_parser = parse_triple, default_value = "1,1,1")]
    resolution: [f64; 3],
    /// Objects in the generated ground truth
    #[arg(long, default_value_t = 8)]
    objects: usize,
    #[arg(long)]
    out_gt: PathBuf,
    #[arg(long)]
    out_proposal: PathBuf,
}

fn load(path: &Path, format: Format) -> ted_core::Result<LabelVolume> {
    load_volume(path, format).inspect_err(|_| eprintln!("cannot read {}", path.display()))
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn compare(args: &CompareArgs) -> ted_core::Result<u8> {
    let (gt, proposal) = args.input.load()?;
    let result = ted(&gt, &proposal, &args.input.config(args.threshold_nm))?;

    if let Some(path) = &args.relabeled_out {
        save_volume(&result.relabeled, path, Format::Segv1)?;
    }
    if let Some(path) = &args.errors_out {
        let codes = result.error_locations.iter().map(|t| t.code()).collect();
        save_volume(&gt.with_labels(codes)?.with_background(None), path, Format::Segv1)?;
    }

    let shown = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let json = ReportJson::new(
        args.input.echo(&gt, args.threshold_nm),
        &gt,
        &result,
        shown(&args.relabeled_out),
        shown(&args.errors_out),
    );
    let write = |w: &mut dyn Write| -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, &json)?;
        writeln!(w)?;
        w.flush()
    };
    match &args.report {
        Some(path) => write(&mut create(path)?)?,
        None => write(&mut io::stdout().lock())?,
    }

    if !result.solver.optimal {
        eprintln!("warning: solver limit reached; objective gap {}", result.solver.gap);
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

struct SweepRow {
    threshold_nm: f64,
    splits: u64,
    merges: u64,
    ted_value: f64,
    metrics: RelabeledMetrics,
    optimal: bool,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn sweep(args: &SweepArgs) -> ted_core::Result<u8> {
    let mut thresholds = args.sweep.clone();
    if let Some(bad) = thresholds.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(TedError::InvalidParameter(format!("threshold must be non-negative, got {bad}")));
    }
    thresholds.sort_by(f64::total_cmp);
    let (gt, proposal) = args.input.load()?;

    let rows: Vec<SweepRow> = thresholds
        .par_iter()
        .map(|&t| {
            let r = ted(&gt, &proposal, &args.input.config(t))?;
            Ok(SweepRow {
                threshold_nm: t,
                splits: r.splits,
                merges: r.merges,
                ted_value: r.ted_value,
                metrics: RelabeledMetrics::compute(&gt, &r.relabeled),
                optimal: r.solver.optimal,
            })
        })
        .collect::<ted_core::Result<_>>()?;

    let write = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "threshold_nm,splits,merges,ted_value,voi_relabeled,ri_relabeled,status")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.threshold_nm,
                r.splits,
                r.merges,
                r.ted_value,
                opt(r.metrics.voi.map(|v| v.total)),
                opt(r.metrics.rand_index),
                if r.optimal { "optimal" } else { "limit" }
            )?;
        }
        w.flush()
    };
    match &args.csv {
        Some(path) => write(&mut create(path)?)?,
        None => write(&mut io::stdout().lock())?,
    }

    if rows.iter().any(|r| !r.optimal) {
        eprintln!("warning: solver limit reached for some thresholds");
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

fn require<T>(value: Option<T>, flag: &str) -> ted_core::Result<T> {
    value.ok_or_else(|| TedError::InvalidParameter(format!("{flag} is required for this generator")))
}

fn synth(args: &SynthArgs) -> ted_core::Result<u8> {
    let (gt, proposal) = match args.kind {
        SynthKind::BoundaryShift => {
            make_boundary_shift_1d(args.n, args.resolution[0], require(args.shift, "--shift")?)?
        }
        kind => {
            let gt = match &args.base {
                Some(path) => load(path, args.format)?,
                None => voronoi_labeling(args.dims, args.resolution, args.objects, args.seed)?,
            };
            let proposal = match kind {
                SynthKind::Shift => apply_shift(&gt, require(args.shift, "--shift")?, args.seed)?,
                SynthKind::Splits => {
                    let out = apply_random_splits(&gt, require(args.count, "--count")?, args.seed)?;
                    if out.skipped > 0 {
                        eprintln!("note: {} cut attempts skipped (one side empty)", out.skipped);
                    }
                    out.volume
                }
                SynthKind::Merges => apply_random_merges(&gt, require(args.count, "--count")?, args.seed)?,
                SynthKind::BoundaryShift => unreachable!(),
            };
            (gt, proposal)
        }
    };
    save_volume(&gt, &args.out_gt, Format::Segv1)?;
    save_volume(&proposal, &args.out_proposal, Format::Segv1)?;
    println!("seed {}", args.seed);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compare(args) => compare(args),
        Command::Sweep(args) => sweep(args),
        Command::Synth(args) => synth(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
