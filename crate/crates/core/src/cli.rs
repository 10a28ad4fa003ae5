//! `dirloud` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{analyze, compare_files, load, AnalysisConfig};
use crate::batch::{run_batch, write_batch_csv, Manifest, DEFAULT_SCORE_COLUMN};
use crate::distortion::map_difference;
use crate::error::{Error, Result};
use crate::export::{report_json, write_map_csv, write_pgm};
use crate::loudness::{BandRange, DirectionalLoudnessMap};
use crate::signal_io::{write_stereo_wav, write_stereo_wav_pcm16, StereoBuffer};
use crate::synth::{crosstalk, pan_collapse, panned_source, MonoSource, PanLaw};

#[derive(Debug, Parser)]
#[command(
    name = "dirloud",
    version,
    about = "Directional loudness maps and stereo image distortion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the directional loudness map of one stereo file.
    Map(MapArgs),
    /// Compare a reference and a test file; prints a JSON report.
    Compare(CompareArgs),
    /// Compare every pair listed in a CSV manifest.
    Batch(BatchArgs),
    /// Generate a synthetic test signal.
    Synth(SynthArgs),
}

/// Analysis parameters shared by `map`, `compare` and `batch`.
#[derive(Debug, Clone, Default, Args)]
pub struct AnalysisArgs {
    /// Number of panning directions.
    #[arg(long = "directions", value_name = "J")]
    pub directions: Option<usize>,
    /// Width of the Gaussian direction window.
    #[arg(long = "xi", value_name = "XI")]
    pub xi: Option<f64>,
    /// Inclusive band subset averaged into the map, e.g. 7..19.
    #[arg(long = "bands", value_name = "LO..HI")]
    pub bands: Option<BandRange>,
    /// Lower frequency edge of the ERB band partition.
    #[arg(long = "fmin", value_name = "HZ")]
    pub f_min: Option<f64>,
    #[arg(long = "block", value_name = "N")]
    pub block: Option<usize>,
    #[arg(long = "hop", value_name = "N")]
    pub hop: Option<usize>,
    /// Accept sample rates other than 48 kHz.
    #[arg(long = "any-rate")]
    pub any_rate: bool,
    /// key=value file with defaults for the flags above.
    #[arg(long = "config", value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (1 = single-threaded).
    #[arg(long = "jobs", value_name = "N")]
    pub jobs: Option<usize>,
}

impl AnalysisArgs {
    /// Flags override the config file, which overrides built-in defaults.
    pub fn resolve(&self) -> Result<AnalysisConfig> {
        let mut cfg = match &self.config {
            Some(path) => AnalysisConfig::from_file(path, AnalysisConfig::default())?,
            None => AnalysisConfig::default(),
        };
        if let Some(v) = self.directions {
            cfg.directions = v;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.bands {
            cfg.bands = v;
        }
        if let Some(v) = self.f_min {
            cfg.f_min = v;
        }
        if let Some(v) = self.block {
            cfg.block = v;
        }
        if let Some(v) = self.hop {
            cfg.hop = v;
        }
        cfg.allow_any_rate |= self.any_rate;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parallel(&self) -> bool {
        self.jobs.is_some_and(|n| n > 1)
    }
}

#[derive(Debug, Args)]
pub struct MapArgs {
    pub input: PathBuf,
    /// Map CSV destination; standard output when omitted.
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also write a grayscale PGM image of the map.
    #[arg(long = "pgm", value_name = "PATH")]
    pub pgm: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub reference: PathBuf,
    pub test: PathBuf,
    /// Write the absolute difference map as CSV.
    #[arg(long = "diff-csv", value_name = "PATH")]
    pub diff_csv: Option<PathBuf>,
    /// Write the absolute difference map as a PGM image.
    #[arg(long = "pgm", value_name = "PATH")]
    pub pgm: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    pub manifest: PathBuf,
    /// Per-item CSV report destination.
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    pub output: PathBuf,
    /// Manifest column holding subjective scores to correlate with DLD.
    #[arg(long = "score-column", default_value = DEFAULT_SCORE_COLUMN)]
    pub score_column: String,
    /// Abort on the first failing item.
    #[arg(long = "strict")]
    pub strict: bool,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceKind {
    Noise,
    Sine,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    pub output: PathBuf,
    #[arg(long = "source", value_enum, default_value = "noise")]
    pub source: SourceKind,
    #[arg(long = "seed", default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "freq", value_name = "HZ", default_value_t = 1000.0)]
    pub freq: f64,
    #[arg(long = "amplitude", default_value_t = 0.5)]
    pub amplitude: f64,
    /// Left and right gains, e.g. 1,0 for hard left.
    #[arg(long = "gains", value_name = "GL,GR", default_value = "1,0")]
    pub gains: String,
    #[arg(long = "duration", value_name = "SECONDS", default_value_t = 5.0)]
    pub duration: f64,
    #[arg(long = "rate", value_name = "HZ", default_value_t = 48_000)]
    pub rate: u32,
    /// Pan collapse towards center, SEVERITY@T0-T1 in seconds; repeatable.
    #[arg(long = "collapse", value_name = "ALPHA@T0-T1")]
    pub collapse: Vec<String>,
    /// Symmetric channel crosstalk applied over the whole signal.
    #[arg(long = "crosstalk", value_name = "BETA")]
    pub crosstalk: Option<f64>,
    /// Write 16-bit PCM instead of 32-bit float.
    #[arg(long = "pcm16")]
    pub pcm16: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Output {
            path: path.to_path_buf(),
            source,
        })
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn save_csv(map: &DirectionalLoudnessMap, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_map_csv(&mut w, map)?;
    finish(w, path)
}

fn save_pgm(map: &DirectionalLoudnessMap, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_pgm(&mut w, map).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    finish(w, path)
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(0) => Err(Error::InvalidConfig("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn cmd_map(args: &MapArgs) -> Result<()> {
    let cfg = args.analysis.resolve()?;
    let parallel = args.analysis.parallel();
    let map = with_jobs(args.analysis.jobs, || {
        analyze(&load(&args.input, &cfg)?, &cfg, parallel)
    })??;
    match &args.output {
        Some(path) => save_csv(&map, path)?,
        None => {
            let stdout = io::stdout();
            write_map_csv(stdout.lock(), &map)?;
        }
    }
    if let Some(path) = &args.pgm {
        save_pgm(&map, path)?;
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let cfg = args.analysis.resolve()?;
    let parallel = args.analysis.parallel();
    let cmp = with_jobs(args.analysis.jobs, || {
        compare_files(&args.reference, &args.test, &cfg, parallel)
    })??;
    if let Some(w) = &cmp.warning {
        eprintln!("warning: {w}");
    }
    if args.diff_csv.is_some() || args.pgm.is_some() {
        let diff = map_difference(&cmp.reference, &cmp.test)?;
        if let Some(path) = &args.diff_csv {
            save_csv(&diff, path)?;
        }
        if let Some(path) = &args.pgm {
            save_pgm(&diff, path)?;
        }
    }
    println!("{}", report_json(&cmp.report));
    Ok(())
}

pub fn cmd_batch(args: &BatchArgs) -> Result<()> {
    let cfg = args.analysis.resolve()?;
    let manifest = Manifest::from_path(&args.manifest)?;
    let outcome = with_jobs(args.analysis.jobs, || {
        run_batch(&manifest, &cfg, &args.score_column, args.strict)
    })??;
    for row in &outcome.rows {
        if let Err(e) = &row.outcome {
            eprintln!("{}: {e}", row.item_id);
        }
    }
    let mut w = create(&args.output)?;
    write_batch_csv(&mut w, &outcome)?;
    finish(w, &args.output)?;
    println!(
        "{}",
        serde_json::to_string(&outcome.summary).expect("summary is serializable")
    );
    Ok(())
}

fn parse_gains(s: &str) -> Result<PanLaw> {
    let bad = || Error::InvalidConfig(format!("expected gains GL,GR, got {s:?}"));
    let (l, r) = s.split_once(',').ok_or_else(bad)?;
    PanLaw::new(
        l.trim().parse().map_err(|_| bad())?,
        r.trim().parse().map_err(|_| bad())?,
    )
}

fn parse_collapse(s: &str) -> Result<(f64, f64, f64)> {
    let bad = || Error::InvalidConfig(format!("expected ALPHA@T0-T1, got {s:?}"));
    let (alpha, span) = s.split_once('@').ok_or_else(bad)?;
    let (t0, t1) = span.split_once('-').ok_or_else(bad)?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    Ok((num(alpha)?, num(t0)?, num(t1)?))
}

pub fn synthesize(args: &SynthArgs) -> Result<StereoBuffer> {
    let source = match args.source {
        SourceKind::Noise => MonoSource::WhiteNoise {
            seed: args.seed,
            amplitude: args.amplitude,
        },
        SourceKind::Sine => MonoSource::Sine {
            freq_hz: args.freq,
            amplitude: args.amplitude,
        },
    };
    let mut buf = panned_source(source, parse_gains(&args.gains)?, args.duration, args.rate)?;
    for spec in &args.collapse {
        let (alpha, t0, t1) = parse_collapse(spec)?;
        buf = pan_collapse(&buf, alpha, (t0, t1))?;
    }
    if let Some(beta) = args.crosstalk {
        buf = crosstalk(&buf, beta)?;
    }
    Ok(buf)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let buf = synthesize(args)?;
    let written = if args.pcm16 {
        write_stereo_wav_pcm16(&args.output, &buf)
    } else {
        write_stereo_wav(&args.output, &buf)
    };
    written.map_err(|e| match e {
        Error::Io { path, source } => Error::Output { path, source },
        other => other,
    })
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Map(a) => cmd_map(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("dirloud: {e}");
            e.exit_code()
        }
    }
}
