//! Monte Carlo BLER runs, detection timing, DMPA-vs-exhaustive message
//! divergence and CSV emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{abs_error_bound, abs_error_bound_complex, rel_error_bound, rel_error_bound_complex, BoundInputs};
use crate::channel::{encode, random_bits, transmit, trial_rng, NoiseModel, DEFAULT_NOISE_WIDTH};
use crate::codebook::{generate_grid_codebook, generate_separable_codebook, load_codebook, Codebook};
use crate::detector::{Detector, DetectorKind};
use crate::dmpa::{grid_step, Discretized1d, Discretized2d};
use crate::error::{Error, Result};
use crate::graph::from_codebook;
use crate::model::{FieldModel, FieldValue, SplitModel};
use crate::mpa::{Diagnostics, Exhaustive, MessageSet, ResourceUpdate};

pub const DEFAULT_N0_SWEEP: [f64; 7] = [0.002, 0.004, 0.01, 0.02, 0.05, 0.1, 0.2];
pub const DEFAULT_ITERATIONS: usize = 5;
pub const DEFAULT_W: f64 = 0.05;
/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookSource {
    /// Random separable codebook seeded with the master seed.
    Generated,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub resources: usize,
    pub codewords: usize,
    pub detector: DetectorKind,
    pub n0: Vec<f64>,
    pub w: f64,
    pub nwid: f64,
    pub iterations: usize,
    /// Transmissions per N0 point; each carries one block per layer.
    pub blocks: usize,
    pub seed: u64,
    pub codebook: CodebookSource,
    /// Worker threads for trial parallelism; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            resources: 4,
            codewords: 16,
            detector: DetectorKind::Mpa,
            n0: DEFAULT_N0_SWEEP.to_vec(),
            w: DEFAULT_W,
            nwid: DEFAULT_NOISE_WIDTH,
            iterations: DEFAULT_ITERATIONS,
            blocks: 1000,
            seed: 1,
            codebook: CodebookSource::Generated,
            threads: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0.is_empty() {
            return Err(Error::InvalidParameter("empty N0 list".into()));
        }
        for &n0 in &self.n0 {
            NoiseModel::new(n0, self.nwid)?;
        }
        if self.iterations == 0 || self.blocks == 0 {
            return Err(Error::InvalidParameter("iterations and blocks must be positive".into()));
        }
        if !(self.w.is_finite() && self.w > 0.0) {
            return Err(Error::InvalidParameter(format!("w must be positive, got {}", self.w)));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn load_codebook(&self) -> Result<Codebook> {
        let cb = match &self.codebook {
            CodebookSource::Generated => generate_separable_codebook(self.resources, self.codewords, self.seed)?,
            CodebookSource::File(path) => load_codebook(path)?,
        };
        if cb.resources() != self.resources || cb.codewords() != self.codewords {
            return Err(Error::Dimension(format!(
                "codebook is K={} M={}, config says K={} M={}",
                cb.resources(),
                cb.codewords(),
                self.resources,
                self.codewords
            )));
        }
        Ok(cb)
    }

    /// `key=value` lines echoing the configuration.
    pub fn echo(&self) -> String {
        let n0: Vec<String> = self.n0.iter().map(f64::to_string).collect();
        let cb = match &self.codebook {
            CodebookSource::Generated => "generated".to_string(),
            CodebookSource::File(p) => p.display().to_string(),
        };
        format!(
            "k={}\nm={}\ndetector={}\nn0={}\nw={}\nnwid={}\niters={}\nblocks={}\nseed={}\ncodebook={cb}\n",
            self.resources,
            self.codewords,
            self.detector,
            n0.join(","),
            self.w,
            self.nwid,
            self.iterations,
            self.blocks,
            self.seed
        )
    }
}

/// Wilson score interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if errors == n {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (lo, hi)
}

pub trait CsvRecord {
    const HEADER: &'static str;
    fn row(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerRecord {
    pub detector: String,
    pub n0: f64,
    pub w: f64,
    /// Layer decisions scored: transmissions times layers.
    pub blocks: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl BlerRecord {
    pub fn new(detector: &str, n0: f64, w: f64, blocks: u64, block_errors: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(block_errors, blocks);
        Self {
            detector: detector.to_string(),
            n0,
            w,
            blocks,
            block_errors,
            bler: if blocks == 0 {
                0.0
            } else {
                block_errors as f64 / blocks as f64
            },
            ci_lo,
            ci_hi,
        }
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.ci_lo <= other.ci_hi && other.ci_lo <= self.ci_hi
    }
}

impl CsvRecord for BlerRecord {
    const HEADER: &'static str = "detector,N0,w,blocks,block_errors,bler,ci_lo,ci_hi";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.detector, self.n0, self.w, self.blocks, self.block_errors, self.bler, self.ci_lo, self.ci_hi
        )
    }
}

/// Outcome of one simulated transmission.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub errors: u64,
    pub diagnostics: Diagnostics,
}

/// Draws bits, transmits and detects trial `trial` of the seeded stream.
pub fn run_trial(det: &mut Detector, cb: &Codebook, noise: &NoiseModel, seed: u64, trial: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, trial);
    let bits = random_bits(cb.layers() * cb.bits_per_codeword(), &mut rng);
    let indices = encode(&bits, cb)?;
    let y = transmit(&indices, cb, noise, &mut rng)?;
    let res = det.detect(&y)?;
    let errors = res.decided.iter().zip(&indices).filter(|(a, b)| a != b).count() as u64;
    Ok(TrialOutcome {
        errors,
        diagnostics: res.diagnostics,
    })
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Block error rate per N0 point. Every N0 point (and every detector run
/// with the same seed) sees the same bits and noise draws per trial.
pub fn run_bler(cfg: &SimConfig) -> Result<Vec<BlerRecord>> {
    cfg.validate()?;
    let cb = cfg.load_codebook()?;
    let mut records = Vec::with_capacity(cfg.n0.len());
    for &n0 in &cfg.n0 {
        let noise = NoiseModel::new(n0, cfg.nwid)?;
        let template = Detector::new(cfg.detector, &cb, &noise, cfg.iterations, cfg.w)?;
        let errors = with_pool(cfg.threads, || {
            (0..cfg.blocks as u64)
                .into_par_iter()
                .map_init(
                    || template.clone(),
                    |det, t| run_trial(det, &cb, &noise, cfg.seed, t).map(|o| o.errors),
                )
                .try_reduce(|| 0, |a, b| Ok(a + b))
        })??;
        let blocks = cfg.blocks as u64 * cb.layers() as u64;
        records.push(BlerRecord::new(cfg.detector.name(), n0, cfg.w, blocks, errors));
    }
    records.sort_by(|a, b| a.detector.cmp(&b.detector).then(a.n0.total_cmp(&b.n0)));
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    pub degrees: Vec<usize>,
    pub codewords: usize,
    pub detectors: Vec<DetectorKind>,
    pub trials: usize,
    pub warmup: usize,
    pub w: f64,
    pub nwid: f64,
    pub n0: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            degrees: vec![2, 3, 4, 5],
            codewords: 16,
            detectors: vec![
                DetectorKind::SplitMpa,
                DetectorKind::Dmpa(crate::dmpa::DmpaMode::Split1d),
            ],
            trials: 100,
            warmup: 5,
            w: DEFAULT_W,
            nwid: DEFAULT_NOISE_WIDTH,
            n0: 0.1,
            iterations: DEFAULT_ITERATIONS,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub detector: String,
    pub degree: usize,
    pub trials: usize,
    pub mean_s: f64,
    pub std_s: f64,
}

impl CsvRecord for TimingRecord {
    const HEADER: &'static str = "detector,d_f,trials,mean_s,std_s";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.detector, self.degree, self.trials, self.mean_s, self.std_s
        )
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Times full detections on the calling thread. `d_f` is realized with the
/// `K = d_f + 1` pair graph; codebook, graph and detector construction and
/// signal generation happen before the clock starts.
pub fn run_timing(cfg: &TimingConfig) -> Result<Vec<TimingRecord>> {
    if cfg.trials == 0 || cfg.iterations == 0 {
        return Err(Error::InvalidParameter("trials and iterations must be positive".into()));
    }
    let noise = NoiseModel::new(cfg.n0, cfg.nwid)?;
    let mut records = Vec::new();
    for &degree in &cfg.degrees {
        if degree < 2 {
            return Err(Error::InvalidParameter(format!("timing needs d_f >= 2, got {degree}")));
        }
        let cb = generate_separable_codebook(degree + 1, cfg.codewords, cfg.seed)?;
        let signals = (0..(cfg.trials + cfg.warmup) as u64)
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                let idx: Vec<usize> = (0..cb.layers()).map(|_| rng.random_range(0..cb.codewords())).collect();
                transmit(&idx, &cb, &noise, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        for &kind in &cfg.detectors {
            let mut det = Detector::new(kind, &cb, &noise, cfg.iterations, cfg.w)?;
            for y in &signals[cfg.trials..] {
                det.detect(y)?;
            }
            let mut times = Vec::with_capacity(cfg.trials);
            for y in &signals[..cfg.trials] {
                let start = Instant::now();
                let res = det.detect(y)?;
                times.push(start.elapsed().as_secs_f64());
                std::hint::black_box(res);
            }
            let (mean_s, std_s) = mean_std(&times);
            records.push(TimingRecord {
                detector: kind.name().to_string(),
                degree,
                trials: cfg.trials,
                mean_s,
                std_s,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergencePath {
    /// Real and imaginary halves, real-field bounds with `sigma^2 = N0 / 2`.
    Split1d,
    Complex2d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceConfig {
    pub resources: usize,
    pub codewords: usize,
    pub w: f64,
    pub n0: f64,
    pub nwid: f64,
    pub trials: usize,
    pub seed: u64,
    pub path: DivergencePath,
    /// Grid-aligned codebook and received samples, so lookups are exact.
    pub grid_aligned: bool,
    /// Component range of generated grid-aligned codebooks.
    pub amplitude: f64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self {
            resources: 4,
            codewords: 16,
            w: DEFAULT_W,
            n0: 0.2,
            nwid: DEFAULT_NOISE_WIDTH,
            trials: 1000,
            seed: 1,
            path: DivergencePath::Split1d,
            grid_aligned: false,
            amplitude: 1.0,
        }
    }
}

/// Entries whose oracle value is below this are left out of relative stats.
pub const REL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRecord {
    pub path: String,
    pub n0: f64,
    pub w: f64,
    pub trials: usize,
    pub entries: u64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub abs_bound: f64,
    pub rel_bound: f64,
}

impl DivergenceRecord {
    pub fn within_bounds(&self) -> bool {
        self.max_abs <= self.abs_bound && self.max_rel <= self.rel_bound
    }
}

impl CsvRecord for DivergenceRecord {
    const HEADER: &'static str = "path,N0,w,trials,entries,max_abs,mean_abs,max_rel,mean_rel,abs_bound,rel_bound";

    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.path,
            self.n0,
            self.w,
            self.trials,
            self.entries,
            self.max_abs,
            self.mean_abs,
            self.max_rel,
            self.mean_rel,
            self.abs_bound,
            self.rel_bound
        )
    }
}

#[derive(Debug, Default)]
struct Stats {
    entries: u64,
    rel_entries: u64,
    max_abs: f64,
    sum_abs: f64,
    max_rel: f64,
    sum_rel: f64,
}

impl Stats {
    fn add(&mut self, approx: &[Vec<f64>], exact: &[Vec<f64>]) {
        for (a, e) in approx.iter().flatten().zip(exact.iter().flatten()) {
            let d = (a - e).abs();
            self.entries += 1;
            self.max_abs = self.max_abs.max(d);
            self.sum_abs += d;
            if *e >= REL_FLOOR {
                let r = d / e;
                self.rel_entries += 1;
                self.max_rel = self.max_rel.max(r);
                self.sum_rel += r;
            }
        }
    }
}

fn random_messages(rng: &mut impl Rng, msgs: &mut MessageSet) {
    for v in &mut msgs.v {
        let raw: Vec<f64> = v.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (x, r) in v.iter_mut().zip(raw) {
            *x = r / s;
        }
    }
}

/// One resource pass of both updaters on identical random `V` and `y`.
fn compare_pass<T: FieldValue, D: ResourceUpdate<T>>(
    model: &FieldModel<T>,
    y: &[T],
    dmpa: &mut D,
    exact: &mut Exhaustive,
    rng: &mut impl Rng,
    stats: &mut Stats,
) -> Result<()>
where
    Exhaustive: ResourceUpdate<T>,
{
    let mut a = MessageSet::uniform(model.graph(), model.sizes());
    random_messages(rng, &mut a);
    let mut b = a.clone();
    let mut diag = Diagnostics::default();
    for (k, &yk) in y.iter().enumerate() {
        dmpa.update_resource(model, k, yk, &mut a, &mut diag)?;
        exact.update_resource(model, k, yk, &mut b, &mut diag)?;
    }
    stats.add(&a.u, &b.u);
    Ok(())
}

/// Paired single-pass resource updates (discretized vs exhaustive) on
/// identical inputs, with the matching bound values.
pub fn run_divergence(cfg: &DivergenceConfig) -> Result<DivergenceRecord> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let noise = NoiseModel::new(cfg.n0, cfg.nwid)?;
    let cb = if cfg.grid_aligned {
        generate_grid_codebook(cfg.resources, cfg.codewords, cfg.w, cfg.amplitude, cfg.seed)?
    } else {
        generate_separable_codebook(cfg.resources, cfg.codewords, cfg.seed)?
    };
    let graph = from_codebook(&cb)?;
    let mut exact = Exhaustive { noise };
    let mut stats = Stats::default();
    let snap = |v: f64| {
        if cfg.grid_aligned {
            grid_step(v, cfg.w) as f64 * cfg.w
        } else {
            v
        }
    };
    let signal = |t: u64| -> Result<(Vec<Complex64>, rand_chacha::ChaCha8Rng)> {
        let mut rng = trial_rng(cfg.seed, t);
        let idx: Vec<usize> = (0..cb.layers()).map(|_| rng.random_range(0..cb.codewords())).collect();
        let y = transmit(&idx, &cb, &noise, &mut rng)?;
        Ok((
            y.0.iter().map(|c| Complex64::new(snap(c.re), snap(c.im))).collect(),
            rng,
        ))
    };
    let degree = graph.degree();
    let (path, abs_bound, rel_bound) = match cfg.path {
        DivergencePath::Split1d => {
            let split = SplitModel::new(&cb, &graph)?;
            let mut re = Discretized1d::new(&split.real, &noise, cfg.w)?;
            let mut im = Discretized1d::new(&split.imag, &noise, cfg.w)?;
            for t in 0..cfg.trials as u64 {
                let (y, mut rng) = signal(t)?;
                let (yr, yi) = SplitModel::split_signal(&y);
                compare_pass(&split.real, &yr, &mut re, &mut exact, &mut rng, &mut stats)?;
                compare_pass(&split.imag, &yi, &mut im, &mut exact, &mut rng, &mut stats)?;
            }
            let b = BoundInputs::real(degree, cfg.w, cfg.nwid, noise.sigma2())?;
            ("1d", abs_error_bound(&b), rel_error_bound(&b))
        }
        DivergencePath::Complex2d => {
            let model = FieldModel::complex(&cb, &graph)?;
            let mut up = Discretized2d::new(&model, &noise, cfg.w)?;
            for t in 0..cfg.trials as u64 {
                let (y, mut rng) = signal(t)?;
                compare_pass(&model, &y, &mut up, &mut exact, &mut rng, &mut stats)?;
            }
            let b = BoundInputs::complex(degree, cfg.w, cfg.nwid, cfg.n0)?;
            ("2d", abs_error_bound_complex(&b), rel_error_bound_complex(&b))
        }
    };
    Ok(DivergenceRecord {
        path: path.to_string(),
        n0: cfg.n0,
        w: cfg.w,
        trials: cfg.trials,
        entries: stats.entries,
        max_abs: stats.max_abs,
        mean_abs: stats.sum_abs / stats.entries.max(1) as f64,
        max_rel: stats.max_rel,
        mean_rel: stats.sum_rel / stats.rel_entries.max(1) as f64,
        abs_bound,
        rel_bound,
    })
}

/// CSV text: header plus one row per record.
pub fn to_csv<R: CsvRecord>(records: &[R]) -> String {
    let mut out = String::from(R::HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.row());
        out.push('\n');
    }
    out
}

/// Path of the reproducibility stanza written next to a result table.
pub fn repro_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".repro.txt");
    PathBuf::from(name)
}

/// Writes the table to `path` and a `key=value` stanza (seed, config echo,
/// version) to `<path>.repro.txt`.
pub fn emit_results<R: CsvRecord>(records: &[R], path: &Path, seed: u64, config_echo: &str) -> Result<()> {
    fs::write(path, to_csv(records))?;
    let mut stanza = String::new();
    let _ = writeln!(
        stanza,
        "artifact={} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(stanza, "seed={seed}");
    stanza.push_str(config_echo);
    fs::write(repro_path(path), stanza)?;
    Ok(())
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.into(),
            line: i + 1,
            msg: format!("expected key=value, got '{line}'"),
        })?;
        out.insert(k.trim().replace('_', "-").to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403832).abs() < 1e-5 && (hi - 0.596168).abs() < 1e-5);
        let (lo, hi) = wilson_interval(10, 10);
        assert!((lo - 0.722467).abs() < 1e-5 && hi == 1.0);
        for (e, n) in [(1, 7), (3, 1000), (999, 1000)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let r = BlerRecord::new("mpa", 0.1, 0.05, 60, 3);
        assert_eq!(r.bler, 0.05);
        let csv = to_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("detector,N0,w,blocks,block_errors,bler,ci_lo,ci_hi"));
        assert!(lines.next().unwrap().starts_with("mpa,0.1,0.05,60,3,0.05,"));
        assert_eq!(to_csv::<TimingRecord>(&[]), "detector,d_f,trials,mean_s,std_s\n");
    }

    #[test]
    fn key_value_parsing() {
        let kv = parse_key_values("# c\nk = 4\n\nn0=0.1,0.2 # sweep\nnum_iters=3\n", "cfg").unwrap();
        assert_eq!(kv["k"], "4");
        assert_eq!(kv["n0"], "0.1,0.2");
        assert_eq!(kv["num-iters"], "3");
        match parse_key_values("k=4\nbogus\n", "cfg").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        let bad = SimConfig {
            n0: vec![],
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            n0: vec![5.0],
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            codewords: 4,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_ok());
        assert!(bad.load_codebook().is_ok());
    }
}
