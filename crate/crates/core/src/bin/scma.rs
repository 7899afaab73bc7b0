use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use scma_core::bounds::{
    abs_error_bound, abs_error_bound_complex, max_w_for, rel_error_bound, rel_error_bound_complex, suggest_w,
    BoundInputs, Field,
};
use scma_core::codebook::{generate_grid_codebook, generate_separable_codebook};
use scma_core::detector::DetectorKind;
use scma_core::dmpa::DmpaMode;
use scma_core::error::Error;
use scma_core::harness::{
    emit_results, parse_key_values, run_bler, run_divergence, run_timing, to_csv, CodebookSource, CsvRecord,
    DivergenceConfig, DivergencePath, SimConfig, TimingConfig,
};

#[derive(Parser)]
#[command(name = "scma", version, about = "SCMA detection experiments")]
struct Cli {
    /// File of key=value defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block error rate over an N0 sweep.
    Bler(BlerArgs),
    /// Mean detection time per resource degree.
    Timing(TimingArgs),
    /// Divergence between discretized and exhaustive resource updates.
    Compare(CompareArgs),
    /// Discretization error bounds.
    Bounds(BoundsArgs),
    /// Write a generated separable codebook.
    Codebook(CodebookArgs),
}

#[derive(Args)]
struct BlerArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// mpa, llr, split-mpa, split-llr, dmpa, dmpa-1d or dmpa-2d
    #[arg(long)]
    detector: Option<String>,
    /// Comma-separated N0 values.
    #[arg(long)]
    n0: Option<String>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    nwid: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    /// Transmissions per N0 point.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    codebook: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TimingArgs {
    /// Comma-separated resource degrees.
    #[arg(long)]
    df: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated detector names.
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    nwid: Option<f64>,
    #[arg(long)]
    n0: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also time the 2-D discretized detector.
    #[arg(long)]
    two_d: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    n0: Option<f64>,
    #[arg(long)]
    nwid: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// 1d (split real/imaginary) or 2d
    #[arg(long)]
    path: Option<String>,
    /// Use a grid-aligned codebook and quantized received samples.
    #[arg(long)]
    grid_aligned: bool,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    df: Option<usize>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    nwid: Option<f64>,
    /// Real-field noise variance (real bounds).
    #[arg(long, conflicts_with = "n0")]
    sigma2: Option<f64>,
    /// Complex noise variance (complex bounds).
    #[arg(long)]
    n0: Option<f64>,
    /// Largest grid-compatible w meeting this relative bound.
    #[arg(long)]
    suggest_w: Option<f64>,
    /// Codeword amplitude bound used when snapping the suggested w.
    #[arg(long)]
    wid: Option<f64>,
}

#[derive(Args)]
struct CodebookArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Place every component on multiples of this grid step.
    #[arg(long)]
    grid: Option<f64>,
    /// Component bound for --grid codebooks.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config-file values, consulted when a flag is absent.
struct Settings {
    origin: String,
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self, Error> {
        match path {
            None => Ok(Self {
                origin: String::new(),
                values: BTreeMap::new(),
            }),
            Some(p) => {
                let origin = p.display().to_string();
                let text = std::fs::read_to_string(p)?;
                Ok(Self {
                    values: parse_key_values(&text, &origin)?,
                    origin,
                })
            }
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, Error>
    where
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(s) => s
                .parse()
                .map_err(|e| Error::InvalidParameter(format!("{}: bad value '{s}' for {key}: {e}", self.origin))),
            None => Ok(default),
        }
    }

    fn opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Error>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|s| {
                s.parse()
                    .map_err(|e| Error::InvalidParameter(format!("{}: bad value '{s}' for {key}: {e}", self.origin)))
            })
            .transpose()
    }

    fn flag(&self, key: &str, flag: bool) -> Result<bool, Error> {
        self.get(key, flag.then_some(true), false)
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error>
where
    T::Err: Display,
{
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|e| Error::InvalidParameter(format!("bad {what} '{p}': {e}")))
        })
        .collect()
}

fn write_or_print<R: CsvRecord>(records: &[R], out: Option<&Path>, seed: u64, echo: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            emit_results(records, path, seed, echo)?;
            eprintln!("wrote {} rows to {}", records.len(), path.display());
        }
        None => print!("{}", to_csv(records)),
    }
    Ok(())
}

fn bler(s: &Settings, a: BlerArgs) -> Result<(), Error> {
    let defaults = SimConfig::default();
    let n0 = match s.opt::<String>("n0", a.n0)? {
        Some(list) => parse_list(&list, "N0")?,
        None => defaults.n0.clone(),
    };
    let codebook = match s.opt::<PathBuf>("codebook", a.codebook)? {
        Some(p) => CodebookSource::File(p),
        None => CodebookSource::Generated,
    };
    let cfg = SimConfig {
        resources: s.get("k", a.k, defaults.resources)?,
        codewords: s.get("m", a.m, defaults.codewords)?,
        detector: s.get("detector", a.detector, "mpa".into())?.parse()?,
        n0,
        w: s.get("w", a.w, defaults.w)?,
        nwid: s.get("nwid", a.nwid, defaults.nwid)?,
        iterations: s.get("iters", a.iters, defaults.iterations)?,
        blocks: s.get("blocks", a.blocks, defaults.blocks)?,
        seed: s.get("seed", a.seed, defaults.seed)?,
        codebook,
        threads: s.opt("threads", a.threads)?,
    };
    let records = run_bler(&cfg)?;
    write_or_print(&records, s.opt("out", a.out)?.as_deref(), cfg.seed, &cfg.echo())
}

fn timing(s: &Settings, a: TimingArgs) -> Result<(), Error> {
    let d = TimingConfig::default();
    let degrees = match s.opt::<String>("df", a.df)? {
        Some(list) => parse_list(&list, "d_f")?,
        None => d.degrees.clone(),
    };
    let mut detectors: Vec<DetectorKind> = match s.opt::<String>("detectors", a.detectors)? {
        Some(list) => parse_list(&list, "detector")?,
        None => d.detectors.clone(),
    };
    if s.flag("two-d", a.two_d)? && !detectors.contains(&DetectorKind::Dmpa(DmpaMode::Complex2d)) {
        detectors.push(DetectorKind::Dmpa(DmpaMode::Complex2d));
    }
    let cfg = TimingConfig {
        degrees,
        codewords: s.get("m", a.m, d.codewords)?,
        detectors,
        trials: s.get("trials", a.trials, d.trials)?,
        warmup: s.get("warmup", a.warmup, d.warmup)?,
        w: s.get("w", a.w, d.w)?,
        nwid: s.get("nwid", a.nwid, d.nwid)?,
        n0: s.get("n0", a.n0, d.n0)?,
        iterations: s.get("iters", a.iters, d.iterations)?,
        seed: s.get("seed", a.seed, d.seed)?,
    };
    let records = run_timing(&cfg)?;
    let echo = format!("{cfg:?}\n");
    write_or_print(&records, s.opt("out", a.out)?.as_deref(), cfg.seed, &echo)
}

fn compare(s: &Settings, a: CompareArgs) -> Result<(), Error> {
    let d = DivergenceConfig::default();
    let path = match s.get("path", a.path, "1d".into())?.as_str() {
        "1d" => DivergencePath::Split1d,
        "2d" => DivergencePath::Complex2d,
        other => return Err(Error::InvalidParameter(format!("path must be 1d or 2d, got '{other}'"))),
    };
    let cfg = DivergenceConfig {
        resources: s.get("k", a.k, d.resources)?,
        codewords: s.get("m", a.m, d.codewords)?,
        w: s.get("w", a.w, d.w)?,
        n0: s.get("n0", a.n0, d.n0)?,
        nwid: s.get("nwid", a.nwid, d.nwid)?,
        trials: s.get("trials", a.trials, d.trials)?,
        seed: s.get("seed", a.seed, d.seed)?,
        path,
        grid_aligned: s.flag("grid-aligned", a.grid_aligned)?,
        amplitude: s.get("amplitude", a.amplitude, d.amplitude)?,
    };
    let record = run_divergence(&cfg)?;
    let echo = format!("{cfg:?}\n");
    write_or_print(&[record], s.opt("out", a.out)?.as_deref(), cfg.seed, &echo)
}

fn bounds(s: &Settings, a: BoundsArgs) -> Result<(), Error> {
    let df = s.get("df", a.df, 3)?;
    let w = s.get("w", a.w, 0.05)?;
    let nwid = s.get("nwid", a.nwid, 5.0)?;
    let sigma2 = s.opt("sigma2", a.sigma2)?;
    let n0 = s.opt("n0", a.n0)?;
    let (inputs, field) = match (sigma2, n0) {
        (Some(s2), None) => (BoundInputs::real(df, w, nwid, s2)?, Field::Real),
        (None, Some(n0)) => (BoundInputs::complex(df, w, nwid, n0)?, Field::Complex),
        _ => return Err(Error::InvalidParameter("give exactly one of --sigma2 or --n0".into())),
    };
    let (abs, rel) = match field {
        Field::Real => (abs_error_bound(&inputs), rel_error_bound(&inputs)),
        Field::Complex => (abs_error_bound_complex(&inputs), rel_error_bound_complex(&inputs)),
    };
    println!("field={}", if field == Field::Real { "real" } else { "complex" });
    println!("abs_bound={abs}");
    println!("rel_bound={rel}");
    if let Some(target) = s.opt::<f64>("suggest-w", a.suggest_w)? {
        let wid = s.get("wid", a.wid, 1.0)?;
        println!("max_w={}", max_w_for(target, &inputs, field)?);
        println!("suggested_w={}", suggest_w(target, &inputs, field, wid)?);
    }
    Ok(())
}

fn codebook(s: &Settings, a: CodebookArgs) -> Result<(), Error> {
    let (k, m, seed) = (s.get("k", a.k, 4)?, s.get("m", a.m, 16)?, s.get("seed", a.seed, 1)?);
    let cb = match s.opt::<f64>("grid", a.grid)? {
        Some(w) => generate_grid_codebook(k, m, w, s.get("amplitude", a.amplitude, 1.0)?, seed)?,
        None => generate_separable_codebook(k, m, seed)?,
    };
    match s.opt::<PathBuf>("out", a.out)? {
        Some(p) => cb.save(p)?,
        None => print!("{}", cb.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Settings::load(cli.config.as_deref()).and_then(|s| match cli.command {
        Command::Bler(a) => bler(&s, a),
        Command::Timing(a) => timing(&s, a),
        Command::Compare(a) => compare(&s, a),
        Command::Bounds(a) => bounds(&s, a),
        Command::Codebook(a) => codebook(&s, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::FAILURE,
                _ => ExitCode::from(2),
            }
        }
    }
}
