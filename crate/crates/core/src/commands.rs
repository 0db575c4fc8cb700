//! Subcommands of the `evsce` binary. Each run writes its outputs plus one
//! JSON [`RunManifest`] describing how to reproduce them.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::distributions::{NoiseModel, VolatilityModel};
use crate::error::{Error, Result};
use crate::extremes::{
    frechet_band_test, max_eig_batch, offdiag_heuristic, solve_a_t, BandReport, FrechetBand, MaxEigSample,
    BAND_MIN_SAMPLES,
};
use crate::histogram::histogram;
use crate::io;
use crate::linalg::symmetric_eigenvalues;
use crate::market::{
    clear_market_mode, log_abs_quantiles, renormalise_dropping, row_volatility, spillover_pairs, split_blocks,
    tail_exponent, ReturnsPanel, TailMethod,
};
use crate::rng::DEFAULT_SEED;
use crate::simulator::{batch_spectra_of, generate_evm, EVMConfig, Ensemble};
use crate::spectral::{density_curve_with, linear_grid, AspectRatio, DensityMethod};

/// Exit status for invalid parameters or input.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for a failed numerical routine.
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "EVM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "evsce", version, about = "Elliptic volatility sample covariance ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limiting spectral density on a grid.
    Density(DensityArgs),
    /// Simulate spectra and histogram them.
    Simulate(SimulateArgs),
    /// Largest-eigenvalue statistics and the Fréchet band test.
    Maxeig(MaxeigArgs),
    /// Renormalise, clear and split a returns file.
    Ingest(IngestArgs),
    /// Fit a power-law tail exponent.
    Tail(TailArgs),
    /// Export paired returns of two tickers.
    Spillover(SpilloverArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Closed,
    Quartic,
    Stieltjes,
    Mp,
}

impl From<MethodArg> for DensityMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => DensityMethod::ClosedForm,
            MethodArg::Quartic => DensityMethod::QuarticOracle,
            MethodArg::Stieltjes => DensityMethod::StieltjesInversion,
            MethodArg::Mp => DensityMethod::MarchenkoPastur,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    /// Limit of T/S.
    #[arg(long)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0)]
    pub xmin: f64,
    /// Defaults to 10, or to the upper edge for `mp`.
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    pub method: MethodArg,
    /// Student degrees of freedom; values other than 3 need `stieltjes`.
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Volatility law as given on the command line:
/// `student3`, `student:<ν>`, `constant:<σ₀>` or `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolSpec(pub VolatilityModel);

impl FromStr for VolSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
        let model = match s.split_once(':') {
            None if s == "student3" => VolatilityModel::student(3.0),
            None if s == "normal" => Ok(VolatilityModel::StandardNormal),
            Some(("student", nu)) => VolatilityModel::student(num(nu)?),
            Some(("constant", sigma)) => VolatilityModel::constant(num(sigma)?),
            _ => return Err(format!("unknown volatility `{s}`")),
        };
        model.map(VolSpec).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseArg {
    Gaussian,
    Rademacher,
    Uniform,
}

impl From<NoiseArg> for NoiseModel {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Gaussian => NoiseModel::Gaussian,
            NoiseArg::Rademacher => NoiseModel::Rademacher,
            NoiseArg::Uniform => NoiseModel::UniformRenormalised,
        }
    }
}

/// `lo,hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range(pub f64, pub f64);

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or("range must be `lo,hi`")?;
        let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
        let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
        Ok(Range(lo, hi))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// T, the number of time rows.
    #[arg(long)]
    pub rows: usize,
    /// S, the number of columns.
    #[arg(long)]
    pub cols: usize,
    /// student3, student:<nu>, constant:<sigma0> or normal.
    #[arg(long, default_value = "student3")]
    pub vol: VolSpec,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    /// Histogram window `lo,hi`.
    #[arg(long, default_value = "0,10")]
    pub range: Range,
    /// Shuffle all entries of each replica before diagonalising.
    #[arg(long)]
    pub shuffle: bool,
    /// Also write replica 0's matrix (row-major, no header).
    #[arg(long)]
    pub dump_matrix: bool,
    /// Outputs are written to `<prefix>_*.csv` and `<prefix>.manifest.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MaxeigArgs {
    /// T, the number of time rows.
    #[arg(long)]
    pub rows: usize,
    /// S, the number of columns.
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 300)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also compute the dense off-diagonal diagnostic per replica.
    #[arg(long)]
    pub offdiag: bool,
    /// JSON report; per-replica samples go to `<stem>_samples.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Wide,
    Ohlc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Wide)]
    pub format: FormatArg,
    /// Remove the market mode after renormalising.
    #[arg(long)]
    pub clear: bool,
    #[arg(long, default_value_t = 1)]
    pub blocks: usize,
    /// Outputs are written to `<prefix>_*.csv` and `<prefix>.manifest.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailArg {
    Hill,
    Loglog,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TailArgs {
    /// One numeric column, header optional.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = TailArg::Hill)]
    pub method: TailArg,
    #[arg(long)]
    pub k: Option<usize>,
    /// Fit the tail of |value|.
    #[arg(long)]
    pub abs: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpilloverArgs {
    /// Wide panel CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance record written next to every output set.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_seconds: f64,
    pub notes: Vec<String>,
}

struct Recorder {
    command: &'static str,
    parameters: serde_json::Value,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
    start: Instant,
}

impl Recorder {
    fn new<P: Serialize>(command: &'static str, params: &P, seed: Option<u64>) -> Result<Self> {
        Ok(Recorder {
            command,
            parameters: serde_json::to_value(params)?,
            seed,
            outputs: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        })
    }

    fn output(&mut self, path: PathBuf) -> PathBuf {
        self.outputs.push(path.clone());
        path
    }

    fn finish(self, manifest_path: PathBuf) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: self.command.to_owned(),
            parameters: self.parameters,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: self.outputs,
            wall_time_seconds: self.start.elapsed().as_secs_f64(),
            notes: self.notes,
        };
        io::write_json(&manifest, &manifest_path)?;
        Ok(manifest)
    }
}

/// `dir/stem.ext` → `dir/stem<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// `dir/prefix` → `dir/prefix<suffix>`.
fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(cli: Cli) -> Result<RunManifest> {
    match cli.command {
        Command::Density(a) => density(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Maxeig(a) => maxeig(&a),
        Command::Ingest(a) => ingest(&a),
        Command::Tail(a) => tail(&a),
        Command::Spillover(a) => spillover(&a),
    }
}

pub fn density(args: &DensityArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("density", args, None)?;
    let y = AspectRatio::new(args.y)?;
    let method = DensityMethod::from(args.method);
    let xmax = args.xmax.unwrap_or(match method {
        DensityMethod::MarchenkoPastur => (1.0 + (1.0 / args.y).sqrt()).powi(2),
        _ => 10.0,
    });
    if !(args.xmin < xmax) || args.points < 2 {
        return Err(Error::domain("need xmin < xmax and at least two points"));
    }
    let vol = VolatilityModel::student(args.nu)?;
    if args.nu != 3.0 && matches!(method, DensityMethod::ClosedForm | DensityMethod::QuarticOracle) {
        return Err(Error::domain(
            "closed and quartic methods exist for ν = 3 only; use --method stieltjes",
        ));
    }
    let curve = density_curve_with(y, &linear_grid(args.xmin, xmax, args.points), method, &vol)?;
    io::write_density_csv(&curve, &rec.output(args.out.clone()))?;
    rec.finish(sibling(&args.out, ".manifest.json"))
}

pub fn simulate(args: &SimulateArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("simulate", args, Some(args.seed))?;
    let config = EVMConfig::new(args.rows, args.cols, args.vol.0, args.noise.into(), args.seed)?;
    let ensemble = if args.shuffle {
        Ensemble::Shuffled
    } else {
        Ensemble::Evm
    };
    if !(args.range.0 < args.range.1) || args.bins == 0 {
        return Err(Error::domain("need lo < hi and at least one bin"));
    }
    let batch = batch_spectra_of(&config, args.reps, ensemble)?;
    let hist = histogram(&batch.pooled.eigenvalues, args.bins, (args.range.0, args.range.1))?;
    io::write_histogram_csv(&hist, &rec.output(prefixed(&args.out_prefix, "_hist.csv")))?;
    let ev: Vec<Vec<f64>> = batch.pooled.eigenvalues.iter().map(|&v| vec![v]).collect();
    io::write_table_csv(
        &["eigenvalue"],
        &ev,
        &rec.output(prefixed(&args.out_prefix, "_eigenvalues.csv")),
    )?;
    let maxima: Vec<Vec<f64>> = batch
        .maxima
        .iter()
        .enumerate()
        .map(|(r, &m)| vec![r as f64, m])
        .collect();
    io::write_table_csv(
        &["replica", "lambda_max"],
        &maxima,
        &rec.output(prefixed(&args.out_prefix, "_maxeig.csv")),
    )?;
    if args.dump_matrix {
        let sample = generate_evm(&config)?;
        io::write_matrix_csv(&sample.x, &rec.output(prefixed(&args.out_prefix, "_matrix.csv")))?;
    }
    rec.notes.push(format!(
        "{} bins on [{}, {}]; {} eigenvalues below, {} above the range",
        args.bins, args.range.0, args.range.1, hist.below, hist.above
    ));
    rec.finish(prefixed(&args.out_prefix, ".manifest.json"))
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxeigReport {
    pub rows: usize,
    pub cols: usize,
    pub a_t: f64,
    pub offdiag_heuristic: f64,
    pub band: FrechetBand,
    pub band_test: BandReport,
    pub passed: bool,
    /// Samples violating `|rescaled − diag_proxy| ≤ offdiag_norm`, when computed.
    pub triangle_violations: Option<usize>,
}

pub fn maxeig(args: &MaxeigArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("maxeig", args, Some(args.seed))?;
    if args.reps < BAND_MIN_SAMPLES {
        return Err(Error::domain(format!(
            "the band test needs at least {BAND_MIN_SAMPLES} replicas, got {}",
            args.reps
        )));
    }
    let config = EVMConfig::new(
        args.rows,
        args.cols,
        VolatilityModel::student(3.0)?,
        NoiseModel::Gaussian,
        args.seed,
    )?;
    let a_t = solve_a_t(args.rows as f64)?;
    let samples = max_eig_batch(&config, args.reps, a_t, args.offdiag)?;
    let rescaled: Vec<f64> = samples.iter().map(|s| s.rescaled).collect();
    let band = FrechetBand::default();
    let band_test = frechet_band_test(&rescaled, band)?;
    let report = MaxeigReport {
        rows: args.rows,
        cols: args.cols,
        a_t,
        offdiag_heuristic: offdiag_heuristic(args.rows, args.cols, a_t),
        band,
        passed: band_test.passed(),
        band_test,
        triangle_violations: args.offdiag.then(|| {
            samples
                .iter()
                .filter(|s| s.satisfies_triangle(1e-9) == Some(false))
                .count()
        }),
    };
    io::write_json(&report, &rec.output(args.out.clone()))?;
    write_samples(&samples, &rec.output(sibling(&args.out, "_samples.csv")))?;
    rec.finish(sibling(&args.out, ".manifest.json"))
}

fn write_samples(samples: &[MaxEigSample], path: &Path) -> Result<()> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .enumerate()
        .map(|(r, s)| {
            vec![
                r as f64,
                s.lambda_max,
                s.rescaled,
                s.diag_proxy,
                s.offdiag_norm.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    io::write_table_csv(
        &["replica", "lambda_max", "rescaled", "diag_proxy", "offdiag_norm"],
        &rows,
        path,
    )
}

pub fn ingest(args: &IngestArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("ingest", args, None)?;
    let raw = match args.format {
        FormatArg::Wide => io::read_wide_csv(&args.input)?,
        FormatArg::Ohlc => io::read_ohlc_csv(&args.input)?.log_returns()?,
    };
    let probs = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];
    if let Ok(q) = log_abs_quantiles(raw.values.as_slice(), &probs) {
        let rows: Vec<Vec<f64>> = probs.iter().zip(q).map(|(&p, v)| vec![p, v]).collect();
        io::write_table_csv(
            &["p", "ln_abs_return"],
            &rows,
            &rec.output(prefixed(&args.out_prefix, "_logabs_quantiles.csv")),
        )?;
    }
    for (b, block) in split_blocks(&raw, args.blocks)?.iter().enumerate() {
        let (mut panel, dropped) = renormalise_dropping(block)?;
        for t in dropped {
            let note = format!("block {b}: dropped zero-variance column {t}");
            log::warn!("{note}");
            rec.notes.push(note);
        }
        if args.clear {
            panel = clear_market_mode(&panel)?;
        }
        write_block(&mut rec, &args.out_prefix, b, &panel)?;
    }
    rec.finish(prefixed(&args.out_prefix, ".manifest.json"))
}

fn write_block(rec: &mut Recorder, prefix: &Path, b: usize, panel: &ReturnsPanel) -> Result<()> {
    let tag = format!("_block{b:03}");
    io::write_panel_csv(panel, &rec.output(prefixed(prefix, &format!("{tag}.csv"))))?;
    let ev = symmetric_eigenvalues(&panel.gram())?;
    let rows: Vec<Vec<f64>> = ev.iter().map(|&v| vec![v]).collect();
    io::write_table_csv(
        &["eigenvalue"],
        &rows,
        &rec.output(prefixed(prefix, &format!("{tag}_spectrum.csv"))),
    )?;
    if panel.cols() >= 2 {
        let vol: Vec<Vec<f64>> = row_volatility(panel)?.into_iter().map(|v| vec![v]).collect();
        io::write_table_csv(
            &["row_std"],
            &vol,
            &rec.output(prefixed(prefix, &format!("{tag}_rowvol.csv"))),
        )?;
    }
    Ok(())
}

pub fn tail(args: &TailArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("tail", args, None)?;
    let mut values = io::read_column_csv(&args.input)?;
    if args.abs {
        values.iter_mut().for_each(|v| *v = v.abs());
    }
    let method = match args.method {
        TailArg::Hill => TailMethod::Hill,
        TailArg::Loglog => TailMethod::LogLogRegression,
    };
    let fit = tail_exponent(&values, method, args.k)?;
    io::write_json(&fit, &rec.output(args.out.clone()))?;
    rec.finish(sibling(&args.out, ".manifest.json"))
}

pub fn spillover(args: &SpilloverArgs) -> Result<RunManifest> {
    let mut rec = Recorder::new("spillover", args, None)?;
    let panel = io::read_wide_csv(&args.input)?;
    let pairs = spillover_pairs(&panel, &args.a, &args.b)?;
    io::write_xy_csv(&pairs, &rec.output(args.out.clone()))?;
    rec.finish(sibling(&args.out, ".manifest.json"))
}

/// Exit status for an error returned by [`run`].
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Caps the global worker pool at `EVM_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| Error::domain(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::domain(e.to_string()))
}
