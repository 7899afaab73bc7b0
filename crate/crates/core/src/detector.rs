//! Reusable detectors that keep models, transform plans and noise spectra
//! between calls.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::{NoiseModel, ReceivedSignal};
use crate::codebook::Codebook;
use crate::dmpa::{Discretized1d, Discretized2d, DmpaMode};
use crate::error::{Error, Result};
use crate::graph::{from_codebook, FactorGraph};
use crate::model::{FieldModel, SplitModel};
use crate::mpa::{combine_split, run_log_message_passing, run_message_passing, DetectionResult, Exhaustive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DetectorKind {
    Mpa,
    Llr,
    SplitMpa,
    SplitLlr,
    Dmpa(DmpaMode),
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mpa => "mpa",
            Self::Llr => "llr",
            Self::SplitMpa => "split-mpa",
            Self::SplitLlr => "split-llr",
            Self::Dmpa(DmpaMode::Auto) => "dmpa",
            Self::Dmpa(DmpaMode::Split1d) => "dmpa-1d",
            Self::Dmpa(DmpaMode::Complex2d) => "dmpa-2d",
        }
    }

    pub fn uses_grid(&self) -> bool {
        matches!(self, Self::Dmpa(_))
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mpa" => Self::Mpa,
            "llr" | "llr-mpa" => Self::Llr,
            "split-mpa" | "mpa-split" => Self::SplitMpa,
            "split-llr" => Self::SplitLlr,
            "dmpa" => Self::Dmpa(DmpaMode::Auto),
            "dmpa-1d" | "dmpa-split" => Self::Dmpa(DmpaMode::Split1d),
            "dmpa-2d" => Self::Dmpa(DmpaMode::Complex2d),
            other => return Err(Error::InvalidParameter(format!("unknown detector '{other}'"))),
        })
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Joint(FieldModel<Complex64>, Exhaustive),
    JointLog(FieldModel<Complex64>),
    Split(SplitModel, Exhaustive),
    SplitLog(SplitModel),
    Split1d(SplitModel, Box<[Discretized1d; 2]>),
    Complex2d(FieldModel<Complex64>, Box<Discretized2d>),
}

/// A detector bound to one effective codebook and noise level.
#[derive(Debug, Clone)]
pub struct Detector {
    kind: DetectorKind,
    iterations: usize,
    noise: NoiseModel,
    graph: FactorGraph,
    engine: Engine,
}

impl Detector {
    /// `w` is only used by discretized detectors.
    pub fn new(kind: DetectorKind, cb: &Codebook, noise: &NoiseModel, iterations: usize, w: f64) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("need at least one iteration".into()));
        }
        let graph = from_codebook(cb)?;
        let engine = match kind {
            DetectorKind::Mpa => Engine::Joint(FieldModel::complex(cb, &graph)?, Exhaustive { noise: *noise }),
            DetectorKind::Llr => Engine::JointLog(FieldModel::complex(cb, &graph)?),
            DetectorKind::SplitMpa => Engine::Split(SplitModel::new(cb, &graph)?, Exhaustive { noise: *noise }),
            DetectorKind::SplitLlr => Engine::SplitLog(SplitModel::new(cb, &graph)?),
            DetectorKind::Dmpa(mode) => match mode.resolve(cb) {
                DmpaMode::Complex2d => {
                    let model = FieldModel::complex(cb, &graph)?;
                    let up = Discretized2d::new(&model, noise, w)?;
                    Engine::Complex2d(model, Box::new(up))
                }
                _ => {
                    let split = SplitModel::new(cb, &graph)?;
                    let re = Discretized1d::new(&split.real, noise, w)?;
                    let im = Discretized1d::new(&split.imag, noise, w)?;
                    Engine::Split1d(split, Box::new([re, im]))
                }
            },
        };
        Ok(Self {
            kind,
            iterations,
            noise: *noise,
            graph,
            engine,
        })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn detect(&mut self, y: &ReceivedSignal) -> Result<DetectionResult> {
        let it = self.iterations;
        let noise = self.noise;
        match &mut self.engine {
            Engine::Joint(model, up) => run_message_passing(model, &y.0, it, up),
            Engine::JointLog(model) => Ok(run_log_message_passing(model, &y.0, &noise, it)?.0),
            Engine::Split(split, up) => {
                let (re, im) = SplitModel::split_signal(&y.0);
                let a = run_message_passing(&split.real, &re, it, up)?;
                let b = run_message_passing(&split.imag, &im, it, up)?;
                Ok(combine_split(split, a, b))
            }
            Engine::SplitLog(split) => {
                let (re, im) = SplitModel::split_signal(&y.0);
                let a = run_log_message_passing(&split.real, &re, &noise, it)?.0;
                let b = run_log_message_passing(&split.imag, &im, &noise, it)?.0;
                Ok(combine_split(split, a, b))
            }
            Engine::Split1d(split, ups) => {
                let (re, im) = SplitModel::split_signal(&y.0);
                let [up_re, up_im] = &mut **ups;
                let a = run_message_passing(&split.real, &re, it, up_re)?;
                let b = run_message_passing(&split.imag, &im, it, up_im)?;
                Ok(combine_split(split, a, b))
            }
            Engine::Complex2d(model, up) => run_message_passing(model, &y.0, it, &mut **up),
        }
    }
}
