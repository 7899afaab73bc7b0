//! Reference message passing detector (exhaustive resource-node updates),
//! its exact log-domain counterpart and the real/imaginary split variant.
//!
//! One iteration updates every resource-to-layer message `U_{k->j}` from the
//! other layers' `V_{i->k}`, then rebuilds and normalizes every
//! layer-to-resource message `V_{j->k}` as the product of the other
//! resources' `U`. Decisions take the argmax of `prod_k U_{k->j}`.

use std::ops::AddAssign;

use crate::channel::{NoiseModel, ReceivedSignal};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::graph::FactorGraph;
use crate::model::{FieldModel, FieldValue, SplitModel};

/// V sums below this are treated as total underflow.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Messages per edge id: `v[e]` is `V_{j->k}`, `u[e]` is `U_{k->j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSet {
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

impl MessageSet {
    /// Uniform `V = 1/M_j`, zero `U`.
    pub fn uniform(graph: &FactorGraph, sizes: &[usize]) -> Self {
        let (v, u) = (0..graph.edge_count())
            .map(|e| {
                let m = sizes[graph.edge(e).0];
                (vec![1.0 / m as f64; m], vec![0.0; m])
            })
            .unzip();
        Self { v, u }
    }
}

/// `init_messages` with a common codebook size.
pub fn init_messages(graph: &FactorGraph, codewords: usize) -> MessageSet {
    MessageSet::uniform(graph, &vec![codewords; graph.layers()])
}

/// Numerical events counted during one detection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// V vectors that underflowed to zero and were reset to uniform.
    pub underflow_resets: usize,
    /// Discretized lookups that fell outside the modeled grid.
    pub out_of_grid: usize,
}

impl AddAssign for Diagnostics {
    fn add_assign(&mut self, rhs: Self) {
        self.underflow_resets += rhs.underflow_resets;
        self.out_of_grid += rhs.out_of_grid;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreScale {
    Linear,
    /// Scores are natural logarithms of the linear beliefs (up to a constant).
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub decided: Vec<usize>,
    pub scores: Vec<Vec<f64>>,
    pub scale: ScoreScale,
    pub diagnostics: Diagnostics,
}

/// Index of the largest score, lowest index on ties. NaN never wins.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (m, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] || (scores[best].is_nan() && !s.is_nan()) {
            best = m;
        }
    }
    best
}

/// Strategy for computing `U_{k->j}` at one resource node.
pub trait ResourceUpdate<T: FieldValue> {
    /// Overwrites `msgs.u[e]` for every edge `e` at `resource`.
    fn update_resource(
        &mut self,
        model: &FieldModel<T>,
        resource: usize,
        y: T,
        msgs: &mut MessageSet,
        diag: &mut Diagnostics,
    ) -> Result<()>;
}

/// Exhaustive traversal of the neighbours' Cartesian product.
#[derive(Debug, Clone, Copy)]
pub struct Exhaustive {
    pub noise: NoiseModel,
}

/// Mixed-radix counter over the other layers' alphabets, with running
/// prefix sums of components and prefix products of weights.
struct Odometer<T> {
    digits: Vec<usize>,
    sums: Vec<T>,
    prods: Vec<f64>,
}

impl<T: FieldValue> Odometer<T> {
    fn new(n: usize) -> Self {
        Self {
            digits: vec![0; n],
            sums: vec![T::ZERO; n + 1],
            prods: vec![1.0; n + 1],
        }
    }

    /// Recomputes prefixes from `level` using `value(i, digit)` and `weight(i, digit)`.
    #[inline]
    fn refresh(&mut self, level: usize, value: impl Fn(usize, usize) -> T, weight: impl Fn(usize, usize) -> f64) {
        for i in level..self.digits.len() {
            let d = self.digits[i];
            self.sums[i + 1] = self.sums[i] + value(i, d);
            self.prods[i + 1] = self.prods[i] * weight(i, d);
        }
    }

    /// Advances; returns the lowest changed level, or `None` after wrapping.
    #[inline]
    fn advance(&mut self, radix: impl Fn(usize) -> usize) -> Option<usize> {
        let mut level = self.digits.len();
        while level > 0 {
            level -= 1;
            self.digits[level] += 1;
            if self.digits[level] < radix(level) {
                return Some(level);
            }
            self.digits[level] = 0;
        }
        None
    }

    fn sum(&self) -> T {
        self.sums[self.digits.len()]
    }

    fn prod(&self) -> f64 {
        self.prods[self.digits.len()]
    }
}

impl<T: FieldValue> ResourceUpdate<T> for Exhaustive {
    fn update_resource(
        &mut self,
        model: &FieldModel<T>,
        resource: usize,
        y: T,
        msgs: &mut MessageSet,
        _diag: &mut Diagnostics,
    ) -> Result<()> {
        let scale = T::density_scale(&self.noise);
        let inv_n0 = 1.0 / self.noise.n0();
        let edges = model.graph().resource_edges(resource);
        for (pos, &target) in edges.iter().enumerate() {
            let others: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, &e)| e)
                .collect();
            let xs = model.values(target);
            let v = &msgs.v;
            let value = |i: usize, d: usize| model.values(others[i])[d];
            let weight = |i: usize, d: usize| v[others[i]][d];
            let mut acc = vec![0.0; xs.len()];
            let mut odo = Odometer::new(others.len());
            odo.refresh(0, value, weight);
            loop {
                let p = odo.prod();
                let base = y - odo.sum();
                for (a, &x) in acc.iter_mut().zip(xs) {
                    *a += p * (-(base - x).norm_sqr() * inv_n0).exp();
                }
                match odo.advance(|i| model.values(others[i]).len()) {
                    Some(level) => odo.refresh(level, value, weight),
                    None => break,
                }
            }
            for (u, a) in msgs.u[target].iter_mut().zip(acc) {
                *u = scale * a;
            }
        }
        Ok(())
    }
}

/// Rebuilds every `V_{j->k}` from the other resources' `U` and normalizes.
/// Returns the number of vectors reset to uniform after underflow.
pub fn update_layer_messages(msgs: &mut MessageSet, graph: &FactorGraph) -> usize {
    let mut resets = 0;
    for layer in 0..graph.layers() {
        let edges = graph.layer_edges(layer);
        for &target in edges {
            let size = msgs.v[target].len();
            let mut out = vec![1.0; size];
            for &e in edges.iter().filter(|&&e| e != target) {
                for (o, u) in out.iter_mut().zip(&msgs.u[e]) {
                    *o *= u;
                }
            }
            let total: f64 = out.iter().sum();
            if !(total >= UNDERFLOW_FLOOR && total.is_finite()) {
                out.fill(1.0 / size as f64);
                resets += 1;
            } else {
                for o in &mut out {
                    *o /= total;
                }
            }
            msgs.v[target] = out;
        }
    }
    resets
}

/// Final beliefs `prod_{k in ∂j} U_{k->j}` and their argmax.
pub fn decide(msgs: &MessageSet, graph: &FactorGraph) -> DetectionResult {
    let scores: Vec<Vec<f64>> = (0..graph.layers())
        .map(|layer| {
            let edges = graph.layer_edges(layer);
            let size = msgs.u[edges[0]].len();
            let mut s = vec![1.0; size];
            for &e in edges {
                for (a, u) in s.iter_mut().zip(&msgs.u[e]) {
                    *a *= u;
                }
            }
            s
        })
        .collect();
    DetectionResult {
        decided: scores.iter().map(|s| argmax(s)).collect(),
        scores,
        scale: ScoreScale::Linear,
        diagnostics: Diagnostics::default(),
    }
}

/// Runs `iterations` rounds of message passing with the given resource update.
pub fn run_message_passing<T: FieldValue, R: ResourceUpdate<T>>(
    model: &FieldModel<T>,
    y: &[T],
    iterations: usize,
    updater: &mut R,
) -> Result<DetectionResult> {
    let graph = model.graph();
    if iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    if y.len() != graph.resources() {
        return Err(Error::Dimension(format!(
            "received {} samples for {} resources",
            y.len(),
            graph.resources()
        )));
    }
    let mut msgs = MessageSet::uniform(graph, model.sizes());
    let mut diag = Diagnostics::default();
    for _ in 0..iterations {
        for (k, &yk) in y.iter().enumerate() {
            updater.update_resource(model, k, yk, &mut msgs, &mut diag)?;
        }
        diag.underflow_resets += update_layer_messages(&mut msgs, graph);
    }
    let mut result = decide(&msgs, graph);
    result.diagnostics = diag;
    Ok(result)
}

/// One exhaustive resource-node pass over a complex effective codebook.
pub fn update_resource_messages(
    msgs: &mut MessageSet,
    y: &ReceivedSignal,
    cb: &Codebook,
    noise: &NoiseModel,
    graph: &FactorGraph,
) -> Result<()> {
    let model = FieldModel::complex(cb, graph)?;
    let mut diag = Diagnostics::default();
    let mut updater = Exhaustive { noise: *noise };
    for (k, &yk) in y.0.iter().enumerate() {
        updater.update_resource(&model, k, yk, msgs, &mut diag)?;
    }
    Ok(())
}

pub fn detect_mpa(
    y: &ReceivedSignal,
    cb: &Codebook,
    graph: &FactorGraph,
    noise: &NoiseModel,
    iterations: usize,
) -> Result<DetectionResult> {
    let model = FieldModel::complex(cb, graph)?;
    run_message_passing(&model, &y.0, iterations, &mut Exhaustive { noise: *noise })
}

// ---------------------------------------------------------------------------
// Log domain
// ---------------------------------------------------------------------------

/// Messages stored as natural logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMessageSet {
    pub v: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

impl LogMessageSet {
    pub fn uniform(graph: &FactorGraph, sizes: &[usize]) -> Self {
        let (v, u) = (0..graph.edge_count())
            .map(|e| {
                let m = sizes[graph.edge(e).0];
                (vec![-(m as f64).ln(); m], vec![0.0; m])
            })
            .unzip();
        Self { v, u }
    }
}

/// Exact `ln(sum exp(x))` with max extraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Log-domain exhaustive update at one resource.
pub fn update_resource_log<T: FieldValue>(
    model: &FieldModel<T>,
    resource: usize,
    y: T,
    noise: &NoiseModel,
    msgs: &mut LogMessageSet,
) {
    let log_scale = T::density_scale(noise).ln();
    let inv_n0 = 1.0 / noise.n0();
    let edges = model.graph().resource_edges(resource);
    for (pos, &target) in edges.iter().enumerate() {
        let others: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &e)| e)
            .collect();
        let xs = model.values(target);
        let v = &msgs.v;
        let value = |i: usize, d: usize| model.values(others[i])[d];
        // prefix "products" hold sums of log weights
        let weight = |i: usize, d: usize| v[others[i]][d];
        let mut max = vec![f64::NEG_INFINITY; xs.len()];
        let mut acc = vec![0.0; xs.len()];
        let mut digits = vec![0usize; others.len()];
        let mut sums = vec![T::ZERO; others.len() + 1];
        let mut logs = vec![0.0; others.len() + 1];
        let refresh = |from: usize, digits: &[usize], sums: &mut [T], logs: &mut [f64]| {
            for i in from..digits.len() {
                sums[i + 1] = sums[i] + value(i, digits[i]);
                logs[i + 1] = logs[i] + weight(i, digits[i]);
            }
        };
        refresh(0, &digits, &mut sums, &mut logs);
        loop {
            let lp = logs[others.len()];
            let base = y - sums[others.len()];
            for ((mx, a), &x) in max.iter_mut().zip(acc.iter_mut()).zip(xs) {
                let t = lp - (base - x).norm_sqr() * inv_n0;
                if t > *mx {
                    *a = *a * (*mx - t).exp() + 1.0;
                    *mx = t;
                } else {
                    *a += (t - *mx).exp();
                }
            }
            let mut level = others.len();
            let mut wrapped = true;
            while level > 0 {
                level -= 1;
                digits[level] += 1;
                if digits[level] < model.values(others[level]).len() {
                    wrapped = false;
                    break;
                }
                digits[level] = 0;
            }
            if wrapped {
                break;
            }
            refresh(level, &digits, &mut sums, &mut logs);
        }
        for ((u, mx), a) in msgs.u[target].iter_mut().zip(&max).zip(&acc) {
            *u = log_scale + mx + a.ln();
        }
    }
}

/// Log-domain layer update followed by normalization.
pub fn update_layer_messages_log(msgs: &mut LogMessageSet, graph: &FactorGraph) {
    for layer in 0..graph.layers() {
        let edges = graph.layer_edges(layer);
        for &target in edges {
            let mut out = vec![0.0; msgs.v[target].len()];
            for &e in edges.iter().filter(|&&e| e != target) {
                for (o, u) in out.iter_mut().zip(&msgs.u[e]) {
                    *o += u;
                }
            }
            let norm = log_sum_exp(&out);
            for o in &mut out {
                *o -= norm;
            }
            msgs.v[target] = out;
        }
    }
}

pub fn decide_log(msgs: &LogMessageSet, graph: &FactorGraph) -> DetectionResult {
    let scores: Vec<Vec<f64>> = (0..graph.layers())
        .map(|layer| {
            let edges = graph.layer_edges(layer);
            let mut s = vec![0.0; msgs.u[edges[0]].len()];
            for &e in edges {
                for (a, u) in s.iter_mut().zip(&msgs.u[e]) {
                    *a += u;
                }
            }
            s
        })
        .collect();
    DetectionResult {
        decided: scores.iter().map(|s| argmax(s)).collect(),
        scores,
        scale: ScoreScale::Log,
        diagnostics: Diagnostics::default(),
    }
}

/// Log-domain run; also returns the final messages.
pub fn run_log_message_passing<T: FieldValue>(
    model: &FieldModel<T>,
    y: &[T],
    noise: &NoiseModel,
    iterations: usize,
) -> Result<(DetectionResult, LogMessageSet)> {
    let graph = model.graph();
    if iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    if y.len() != graph.resources() {
        return Err(Error::Dimension(format!(
            "received {} samples for {} resources",
            y.len(),
            graph.resources()
        )));
    }
    let mut msgs = LogMessageSet::uniform(graph, model.sizes());
    for _ in 0..iterations {
        for (k, &yk) in y.iter().enumerate() {
            update_resource_log(model, k, yk, noise, &mut msgs);
        }
        update_layer_messages_log(&mut msgs, graph);
    }
    Ok((decide_log(&msgs, graph), msgs))
}

pub fn detect_llr_mpa(
    y: &ReceivedSignal,
    cb: &Codebook,
    graph: &FactorGraph,
    noise: &NoiseModel,
    iterations: usize,
) -> Result<DetectionResult> {
    let model = FieldModel::complex(cb, graph)?;
    Ok(run_log_message_passing(&model, &y.0, noise, iterations)?.0)
}

// ---------------------------------------------------------------------------
// Real/imaginary split
// ---------------------------------------------------------------------------

/// Joins independent real and imaginary detections into codeword decisions.
/// Scores multiply (add in the log domain).
pub fn combine_split(split: &SplitModel, real: DetectionResult, imag: DetectionResult) -> DetectionResult {
    let scale = real.scale;
    let layers = split.parts().len();
    let mut scores = Vec::with_capacity(layers);
    for j in 0..layers {
        let parts = &split.parts()[j];
        let s: Vec<f64> = parts
            .index
            .iter()
            .map(|&(r, i)| match scale {
                ScoreScale::Linear => real.scores[j][r] * imag.scores[j][i],
                ScoreScale::Log => real.scores[j][r] + imag.scores[j][i],
            })
            .collect();
        scores.push(s);
    }
    let mut diagnostics = real.diagnostics;
    diagnostics += imag.diagnostics;
    DetectionResult {
        decided: scores.iter().map(|s| argmax(s)).collect(),
        scores,
        scale,
        diagnostics,
    }
}

/// Runs a real-field detector on both halves of a split model.
pub fn detect_split_with<F>(split: &SplitModel, y: &ReceivedSignal, mut run: F) -> Result<DetectionResult>
where
    F: FnMut(&FieldModel<f64>, &[f64], bool) -> Result<DetectionResult>,
{
    let (re, im) = SplitModel::split_signal(&y.0);
    let real = run(&split.real, &re, false)?;
    let imag = run(&split.imag, &im, true)?;
    Ok(combine_split(split, real, imag))
}

/// Independent real and imaginary MPA over a separable effective codebook.
pub fn detect_split_mpa(
    y: &ReceivedSignal,
    cb: &Codebook,
    graph: &FactorGraph,
    noise: &NoiseModel,
    iterations: usize,
) -> Result<DetectionResult> {
    let split = SplitModel::new(cb, graph)?;
    let mut updater = Exhaustive { noise: *noise };
    detect_split_with(&split, y, |model, y, _| {
        run_message_passing(model, y, iterations, &mut updater)
    })
}
