//! Discretized message passing: layer messages become point masses on a
//! uniform grid, and the resource-node update becomes one FFT convolution
//! per edge.
//!
//! Grid coordinates are integer multiples of `w`. A value `c` lands on step
//! `round(c / w)` (half away from zero), so layer pdfs, the noise pdf and the
//! convolved density all share one lattice and only their origins differ:
//! `-wid` for a layer, `-nWid` for the noise and the sum of those for `g`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::channel::{NoiseModel, ReceivedSignal};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::graph::FactorGraph;
use crate::model::{FieldModel, FieldValue, SplitModel};
use crate::mpa::{combine_split, run_message_passing, DetectionResult, Diagnostics, MessageSet, ResourceUpdate};
use crate::spectral::{next_pow2, FftPlan, RealFftPlan};

const SNAP_SLACK: f64 = 1e-9;

/// Number of `w` steps covering `x`, rounded up.
pub fn snap_up(x: f64, w: f64) -> i64 {
    (x / w - SNAP_SLACK).ceil().max(0.0) as i64
}

/// Grid step nearest to coordinate `c`.
#[inline]
pub fn grid_step(c: f64, w: f64) -> i64 {
    (c / w).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationParams {
    w: f64,
    wid_steps: i64,
    nwid_steps: i64,
    degree: usize,
}

impl DiscretizationParams {
    /// `wid` and `nwid` are rounded up to multiples of `w`.
    pub fn new(w: f64, wid: f64, nwid: f64, degree: usize) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling interval must be positive, got {w}"
            )));
        }
        if !(nwid.is_finite() && nwid > 0.0) {
            return Err(Error::InvalidParameter(format!("nWid must be positive, got {nwid}")));
        }
        if !(wid.is_finite() && wid >= 0.0) {
            return Err(Error::InvalidParameter(format!("wid must be non-negative, got {wid}")));
        }
        if degree == 0 {
            return Err(Error::InvalidParameter("resource degree must be at least 1".into()));
        }
        Ok(Self {
            w,
            wid_steps: snap_up(wid, w),
            nwid_steps: snap_up(nwid, w),
            degree,
        })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    /// Snapped codeword amplitude bound.
    pub fn wid(&self) -> f64 {
        self.wid_steps as f64 * self.w
    }

    /// Snapped noise half-width.
    pub fn nwid(&self) -> f64 {
        self.nwid_steps as f64 * self.w
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn wid_steps(&self) -> i64 {
        self.wid_steps
    }

    pub fn nwid_steps(&self) -> i64 {
        self.nwid_steps
    }

    /// Half-width of `g` in steps: `(d_f - 1) wid + nWid`.
    pub fn span_steps(&self) -> i64 {
        (self.degree as i64 - 1) * self.wid_steps + self.nwid_steps
    }

    pub fn padded_length(&self) -> usize {
        next_pow2((2 * self.span_steps() + 1) as usize)
    }
}

pub fn padded_length(params: &DiscretizationParams) -> usize {
    params.padded_length()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfKind {
    PointMass,
    Density,
}

/// Samples on a square grid with step `w`; index 0 sits at `origin_steps * w`
/// on every axis. 2-D values are row-major with rows along the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePdf {
    pub w: f64,
    pub origin_steps: i64,
    pub side: usize,
    pub dims: usize,
    pub values: Vec<f64>,
    pub kind: PdfKind,
}

impl DiscretePdf {
    pub fn origin(&self) -> f64 {
        self.origin_steps as f64 * self.w
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Riemann sum `sum(values) * w^dims`.
    pub fn integral(&self) -> f64 {
        self.total() * self.w.powi(self.dims as i32)
    }

    /// Flat index of a grid coordinate, if it lies on the grid.
    pub fn index_of<T: FieldValue>(&self, t: T) -> Option<usize> {
        let mut flat = 0usize;
        for axis in 0..self.dims {
            let i = grid_step(t.coord(axis), self.w) - self.origin_steps;
            if i < 0 || i >= self.side as i64 {
                return None;
            }
            flat = flat * self.side + i as usize;
        }
        Some(flat)
    }
}

/// Places each probability `msg[m]` on the grid point nearest `components[m]`.
pub fn discretize_layer_pdf<T: FieldValue>(
    msg: &[f64],
    components: &[T],
    params: &DiscretizationParams,
) -> Result<DiscretePdf> {
    if msg.len() != components.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} components",
            msg.len(),
            components.len()
        )));
    }
    let side = (2 * params.wid_steps + 1) as usize;
    let mut pdf = DiscretePdf {
        w: params.w,
        origin_steps: -params.wid_steps,
        side,
        dims: T::DIMS,
        values: vec![0.0; side.pow(T::DIMS as u32)],
        kind: PdfKind::PointMass,
    };
    for (&p, &c) in msg.iter().zip(components) {
        let idx = pdf.index_of(c).ok_or_else(|| Error::OutsideGrid {
            value: (0..T::DIMS).map(|a| c.coord(a).abs()).fold(0.0, f64::max),
            wid: params.wid(),
        })?;
        pdf.values[idx] += p;
    }
    Ok(pdf)
}

/// Noise density on `[-nWid, nWid]` per axis: real Gaussian with variance
/// `N0 / 2` (`dims == 1`) or circular complex `CN(0, N0)` (`dims == 2`).
pub fn sample_noise_pdf(noise: &NoiseModel, params: &DiscretizationParams, dims: usize) -> Result<DiscretePdf> {
    let side = (2 * params.nwid_steps + 1) as usize;
    let coord = |i: usize| (i as i64 - params.nwid_steps) as f64 * params.w;
    let values = match dims {
        1 => (0..side).map(|i| f64::density(coord(i), noise)).collect(),
        2 => {
            let mut v = Vec::with_capacity(side * side);
            for r in 0..side {
                for c in 0..side {
                    v.push(Complex64::density(Complex64::new(coord(r), coord(c)), noise));
                }
            }
            v
        }
        _ => return Err(Error::InvalidParameter(format!("grids are 1-D or 2-D, got {dims}"))),
    };
    Ok(DiscretePdf {
        w: params.w,
        origin_steps: -params.nwid_steps,
        side,
        dims,
        values,
        kind: PdfKind::Density,
    })
}

/// Linear convolution of the layer pdfs and the noise pdf through length-`n`
/// transforms. The result is trimmed to its linear support.
pub fn convolve_all(layer_pdfs: &[DiscretePdf], noise_pdf: &DiscretePdf, n: usize) -> Result<DiscretePdf> {
    let dims = noise_pdf.dims;
    let mut support = noise_pdf.side;
    let mut origin = noise_pdf.origin_steps;
    for pdf in layer_pdfs {
        if pdf.dims != dims || (pdf.w - noise_pdf.w).abs() > 1e-15 * noise_pdf.w {
            return Err(Error::InvalidParameter("pdfs must share w and dimensionality".into()));
        }
        support += pdf.side - 1;
        origin += pdf.origin_steps;
    }
    if support > n {
        return Err(Error::PaddingTooShort { len: n, support });
    }
    let plan = FftPlan::new(n)?;
    let size = n.pow(dims as u32);
    let spectrum = |pdf: &DiscretePdf| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (flat, &v) in pdf.values.iter().enumerate() {
            let (r, c) = if dims == 1 {
                (0, flat)
            } else {
                (flat / pdf.side, flat % pdf.side)
            };
            buf[r * n + c] = Complex64::new(v, 0.0);
        }
        if dims == 1 {
            plan.forward(&mut buf);
        } else {
            plan.forward_2d(&mut buf);
        }
        buf
    };
    let mut acc = spectrum(noise_pdf);
    for pdf in layer_pdfs {
        for (a, s) in acc.iter_mut().zip(spectrum(pdf)) {
            *a *= s;
        }
    }
    if dims == 1 {
        plan.inverse(&mut acc);
    } else {
        plan.inverse_2d(&mut acc);
    }
    let mut values = Vec::with_capacity(support.pow(dims as u32));
    for r in 0..if dims == 1 { 1 } else { support } {
        for c in 0..support {
            values.push(acc[r * n + c].re.max(0.0));
        }
    }
    Ok(DiscretePdf {
        w: noise_pdf.w,
        origin_steps: origin,
        side: support,
        dims,
        values,
        kind: PdfKind::Density,
    })
}

/// Value of `g` at the grid point nearest `t0`; zero off the grid.
pub fn evaluate_g<T: FieldValue>(g: &DiscretePdf, t0: T, diag: &mut Diagnostics) -> f64 {
    match g.index_of(t0) {
        Some(i) => g.values[i],
        None => {
            diag.out_of_grid += 1;
            0.0
        }
    }
}

/// Per-resource grid geometry and the padded position of every component.
#[derive(Debug, Clone)]
struct ResourceGrid {
    params: DiscretizationParams,
    len: usize,
    // [position in resource_edges][codeword] -> flat index into the padded buffer
    slots: Vec<Vec<usize>>,
}

fn resource_grids<T: FieldValue>(model: &FieldModel<T>, noise: &NoiseModel, w: f64) -> Result<Vec<ResourceGrid>> {
    let graph = model.graph();
    (0..graph.resources())
        .map(|k| {
            let params = DiscretizationParams::new(w, model.amplitude_at(k), noise.nwid(), graph.degree())?;
            let len = params.padded_length();
            let slots = graph
                .resource_edges(k)
                .iter()
                .map(|&e| {
                    model
                        .values(e)
                        .iter()
                        .map(|&c| {
                            let mut flat = 0usize;
                            for axis in 0..T::DIMS {
                                let i = grid_step(c.coord(axis), w) + params.wid_steps;
                                if i < 0 || i > 2 * params.wid_steps {
                                    return Err(Error::OutsideGrid {
                                        value: c.coord(axis),
                                        wid: params.wid(),
                                    });
                                }
                                flat = flat * len + i as usize;
                            }
                            Ok(flat)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ResourceGrid { params, len, slots })
        })
        .collect()
}

/// Noise samples placed at the start of a zero-padded buffer of side `len`.
fn padded_noise(noise: &NoiseModel, params: &DiscretizationParams, dims: usize, len: usize) -> Result<Vec<f64>> {
    let pdf = sample_noise_pdf(noise, params, dims)?;
    let mut buf = vec![0.0; len.pow(dims as u32)];
    for (flat, &v) in pdf.values.iter().enumerate() {
        let (r, c) = if dims == 1 {
            (0, flat)
        } else {
            (flat / pdf.side, flat % pdf.side)
        };
        buf[r * len + c] = v;
    }
    Ok(buf)
}

/// Reads `U(x_m) = g(y - x_m)` for one edge from a padded `g` buffer.
#[inline]
#[allow(clippy::too_many_arguments)]
fn read_messages<T: FieldValue>(
    g: impl Fn(usize) -> f64,
    len: usize,
    span: i64,
    w: f64,
    y: T,
    xs: &[T],
    out: &mut [f64],
    diag: &mut Diagnostics,
) {
    for (u, &x) in out.iter_mut().zip(xs) {
        let t = y - x;
        let mut flat = 0usize;
        let mut inside = true;
        for axis in 0..T::DIMS {
            let i = grid_step(t.coord(axis), w) + span;
            if i < 0 || i > 2 * span {
                inside = false;
                break;
            }
            flat = flat * len + i as usize;
        }
        *u = if inside {
            g(flat).max(0.0)
        } else {
            diag.out_of_grid += 1;
            0.0
        };
    }
}

/// Per-edge spectrum products at one resource. Edge `pos` gets
/// `(noise * s_0 * ... * s_{pos-1}) * (s_{pos+1} * (... * s_{d-1}))`.
#[derive(Debug, Clone, Default)]
struct EdgeProducts {
    prefix: Vec<Vec<Complex64>>,
    suffix: Vec<Vec<Complex64>>,
}

impl EdgeProducts {
    fn build(&mut self, noise: &[Complex64], spectra: &[Vec<Complex64>]) {
        let d = spectra.len();
        self.prefix.resize(d, Vec::new());
        self.suffix.resize(d, Vec::new());
        self.prefix[0].clear();
        self.prefix[0].extend_from_slice(noise);
        for i in 1..d {
            let (done, rest) = self.prefix.split_at_mut(i);
            mul_into(&mut rest[0], &done[i - 1], &spectra[i - 1]);
        }
        if d >= 2 {
            self.suffix[d - 2].clear();
            self.suffix[d - 2].extend_from_slice(&spectra[d - 1]);
            for i in (0..d.saturating_sub(2)).rev() {
                let (head, tail) = self.suffix.split_at_mut(i + 1);
                mul_into(&mut head[i], &spectra[i + 1], &tail[0]);
            }
        }
    }

    fn edge(&self, pos: usize, out: &mut [Complex64]) {
        if pos + 1 == self.prefix.len() {
            out.copy_from_slice(&self.prefix[pos]);
        } else {
            for ((o, a), b) in out.iter_mut().zip(&self.prefix[pos]).zip(&self.suffix[pos]) {
                *o = a * b;
            }
        }
    }
}

fn mul_into(out: &mut Vec<Complex64>, a: &[Complex64], b: &[Complex64]) {
    out.clear();
    out.extend(a.iter().zip(b).map(|(x, y)| x * y));
}

/// 1-D discretized resource update over a real-field model, using real FFTs.
#[derive(Debug, Clone)]
pub struct Discretized1d {
    w: f64,
    grids: Vec<ResourceGrid>,
    plans: BTreeMap<usize, RealFftPlan>,
    noise_spectra: BTreeMap<usize, Vec<Complex64>>,
    cache: bool,
    real: Vec<f64>,
    spectra: Vec<Vec<Complex64>>,
    acc: Vec<Complex64>,
    g: Vec<f64>,
    scratch: Vec<Complex64>,
    products: EdgeProducts,
}

impl Discretized1d {
    /// Builds grids, plans and noise spectra for `model`; the updater must
    /// only be used with that model.
    pub fn new(model: &FieldModel<f64>, noise: &NoiseModel, w: f64) -> Result<Self> {
        let grids = resource_grids(model, noise, w)?;
        let mut plans = BTreeMap::new();
        let mut noise_spectra = BTreeMap::new();
        for grid in &grids {
            if plans.contains_key(&grid.len) {
                continue;
            }
            let plan = RealFftPlan::new(grid.len)?;
            let mut buf = padded_noise(noise, &grid.params, 1, grid.len)?;
            let mut spec = vec![Complex64::new(0.0, 0.0); plan.bins()];
            plan.forward(&mut buf, &mut spec);
            noise_spectra.insert(grid.len, spec);
            plans.insert(grid.len, plan);
        }
        Ok(Self {
            w,
            grids,
            plans,
            noise_spectra,
            cache: true,
            real: Vec::new(),
            spectra: Vec::new(),
            acc: Vec::new(),
            g: Vec::new(),
            scratch: Vec::new(),
            products: EdgeProducts::default(),
        })
    }

    /// Recomputes every layer spectrum per edge instead of once per resource.
    pub fn without_spectrum_cache(mut self) -> Self {
        self.cache = false;
        self
    }

    /// Transform length used at a resource.
    pub fn padded_length(&self, resource: usize) -> usize {
        self.grids[resource].len
    }

    pub fn params(&self, resource: usize) -> &DiscretizationParams {
        &self.grids[resource].params
    }
}

impl ResourceUpdate<f64> for Discretized1d {
    fn update_resource(
        &mut self,
        model: &FieldModel<f64>,
        resource: usize,
        y: f64,
        msgs: &mut MessageSet,
        diag: &mut Diagnostics,
    ) -> Result<()> {
        let grid = &self.grids[resource];
        let len = grid.len;
        let plan = &self.plans[&len];
        let noise_spec = &self.noise_spectra[&len];
        let edges = model.graph().resource_edges(resource);
        let bins = plan.bins();
        self.real.resize(len, 0.0);
        self.g.resize(len, 0.0);
        self.acc.resize(bins, Complex64::new(0.0, 0.0));
        self.spectra.resize(edges.len(), Vec::new());
        self.scratch.resize(plan.scratch_len(), Complex64::new(0.0, 0.0));

        let scatter = |pos: usize, real: &mut [f64]| {
            real.fill(0.0);
            for (&slot, &p) in grid.slots[pos].iter().zip(&msgs.v[edges[pos]]) {
                real[slot] += p;
            }
        };
        let transform_all = |spectra: &mut [Vec<Complex64>], real: &mut Vec<f64>, scratch: &mut [Complex64]| {
            for (pos, spec) in spectra.iter_mut().enumerate() {
                scatter(pos, real);
                spec.resize(bins, Complex64::new(0.0, 0.0));
                plan.forward_with_scratch(real, spec, scratch);
            }
        };
        if self.cache {
            transform_all(&mut self.spectra, &mut self.real, &mut self.scratch);
            self.products.build(noise_spec, &self.spectra);
        }
        let span = grid.params.span_steps();
        for (pos, &target) in edges.iter().enumerate() {
            if !self.cache {
                transform_all(&mut self.spectra, &mut self.real, &mut self.scratch);
                self.products.build(noise_spec, &self.spectra);
            }
            self.products.edge(pos, &mut self.acc);
            plan.inverse_with_scratch(&mut self.acc, &mut self.g, &mut self.scratch);
            let g = &self.g;
            read_messages(
                |i| g[i],
                len,
                span,
                self.w,
                y,
                model.values(target),
                &mut msgs.u[target],
                diag,
            );
        }
        Ok(())
    }
}

/// 2-D discretized resource update over the complex model.
#[derive(Debug, Clone)]
pub struct Discretized2d {
    w: f64,
    grids: Vec<ResourceGrid>,
    plans: BTreeMap<usize, FftPlan>,
    noise_spectra: BTreeMap<usize, Vec<Complex64>>,
    cache: bool,
    spectra: Vec<Vec<Complex64>>,
    acc: Vec<Complex64>,
    products: EdgeProducts,
}

impl Discretized2d {
    pub fn new(model: &FieldModel<Complex64>, noise: &NoiseModel, w: f64) -> Result<Self> {
        let grids = resource_grids(model, noise, w)?;
        let mut plans = BTreeMap::new();
        let mut noise_spectra = BTreeMap::new();
        for grid in &grids {
            if plans.contains_key(&grid.len) {
                continue;
            }
            let plan = FftPlan::new(grid.len)?;
            let mut spec: Vec<Complex64> = padded_noise(noise, &grid.params, 2, grid.len)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            plan.forward_2d(&mut spec);
            noise_spectra.insert(grid.len, spec);
            plans.insert(grid.len, plan);
        }
        Ok(Self {
            w,
            grids,
            plans,
            noise_spectra,
            cache: true,
            spectra: Vec::new(),
            acc: Vec::new(),
            products: EdgeProducts::default(),
        })
    }

    pub fn without_spectrum_cache(mut self) -> Self {
        self.cache = false;
        self
    }

    pub fn padded_length(&self, resource: usize) -> usize {
        self.grids[resource].len
    }

    pub fn params(&self, resource: usize) -> &DiscretizationParams {
        &self.grids[resource].params
    }
}

impl ResourceUpdate<Complex64> for Discretized2d {
    fn update_resource(
        &mut self,
        model: &FieldModel<Complex64>,
        resource: usize,
        y: Complex64,
        msgs: &mut MessageSet,
        diag: &mut Diagnostics,
    ) -> Result<()> {
        let grid = &self.grids[resource];
        let len = grid.len;
        let plan = &self.plans[&len];
        let noise_spec = &self.noise_spectra[&len];
        let edges = model.graph().resource_edges(resource);
        let size = len * len;
        self.acc.resize(size, Complex64::new(0.0, 0.0));
        self.spectra.resize(edges.len(), Vec::new());

        let layer_spectrum = |pos: usize, out: &mut Vec<Complex64>| {
            out.clear();
            out.resize(size, Complex64::new(0.0, 0.0));
            for (&slot, &p) in grid.slots[pos].iter().zip(&msgs.v[edges[pos]]) {
                out[slot].re += p;
            }
            plan.forward_2d(out);
        };
        if self.cache {
            for (pos, spec) in self.spectra.iter_mut().enumerate() {
                layer_spectrum(pos, spec);
            }
            self.products.build(noise_spec, &self.spectra);
        }
        let span = grid.params.span_steps();
        for (pos, &target) in edges.iter().enumerate() {
            if !self.cache {
                for (p, spec) in self.spectra.iter_mut().enumerate() {
                    layer_spectrum(p, spec);
                }
                self.products.build(noise_spec, &self.spectra);
            }
            self.products.edge(pos, &mut self.acc);
            plan.inverse_2d(&mut self.acc);
            let g = &self.acc;
            read_messages(
                |i| g[i].re,
                len,
                span,
                self.w,
                y,
                model.values(target),
                &mut msgs.u[target],
                diag,
            );
        }
        Ok(())
    }
}

/// One discretized resource pass over a complex effective codebook (2-D grids).
pub fn update_resource_messages_dmpa(
    msgs: &mut MessageSet,
    y: &ReceivedSignal,
    cb: &Codebook,
    noise: &NoiseModel,
    graph: &FactorGraph,
    w: f64,
) -> Result<Diagnostics> {
    let model = FieldModel::complex(cb, graph)?;
    let mut updater = Discretized2d::new(&model, noise, w)?;
    let mut diag = Diagnostics::default();
    for (k, &yk) in y.0.iter().enumerate() {
        updater.update_resource(&model, k, yk, msgs, &mut diag)?;
    }
    Ok(diag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum DmpaMode {
    /// Split when the effective codebook is separable, 2-D otherwise.
    #[default]
    Auto,
    Split1d,
    Complex2d,
}

impl DmpaMode {
    /// Resolves `Auto` against a concrete codebook.
    pub fn resolve(self, cb: &Codebook) -> Self {
        match self {
            Self::Auto if cb.is_separable() => Self::Split1d,
            Self::Auto => Self::Complex2d,
            m => m,
        }
    }
}

pub fn detect_dmpa(
    y: &ReceivedSignal,
    cb: &Codebook,
    graph: &FactorGraph,
    noise: &NoiseModel,
    iterations: usize,
    w: f64,
    mode: DmpaMode,
) -> Result<DetectionResult> {
    match mode.resolve(cb) {
        DmpaMode::Complex2d => {
            let model = FieldModel::complex(cb, graph)?;
            let mut updater = Discretized2d::new(&model, noise, w)?;
            run_message_passing(&model, &y.0, iterations, &mut updater)
        }
        _ => {
            let split = SplitModel::new(cb, graph)?;
            let (re, im) = SplitModel::split_signal(&y.0);
            let mut up_re = Discretized1d::new(&split.real, noise, w)?;
            let mut up_im = Discretized1d::new(&split.imag, noise, w)?;
            let real = run_message_passing(&split.real, &re, iterations, &mut up_re)?;
            let imag = run_message_passing(&split.imag, &im, iterations, &mut up_im)?;
            Ok(combine_split(&split, real, imag))
        }
    }
}
