//! Per-edge constellations that the message-passing detectors run on.
//!
//! A [`FieldModel`] is a factor graph plus, for every edge `(j, k)`, the
//! values layer `j` can place on resource `k`. The complex model comes
//! straight from an effective codebook. A separable codebook also splits
//! into two real models (see [`SplitModel`]) that are detected independently.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_complex::Complex64;

use crate::channel::NoiseModel;
use crate::codebook::{Codebook, LayerParts};
use crate::error::{Error, Result};
use crate::graph::FactorGraph;

/// Scalar field a detector works in: `f64` for the real-split path,
/// `Complex64` for joint detection.
pub trait FieldValue:
    Copy + Debug + Send + Sync + PartialEq + Add<Output = Self> + Sub<Output = Self> + 'static
{
    const ZERO: Self;
    /// Grid dimensions of a discretized density over this field.
    const DIMS: usize;

    fn norm_sqr(self) -> f64;

    /// Coordinate along grid axis `axis` (`axis < DIMS`).
    fn coord(self, axis: usize) -> f64;

    /// Peak of the Gaussian noise density in this field.
    fn density_scale(noise: &NoiseModel) -> f64;

    /// Noise density at `residual`. Both fields share the exponent
    /// `-|r|^2 / N0`: the real split uses variance `N0 / 2` per dimension.
    #[inline]
    fn density(residual: Self, noise: &NoiseModel) -> f64 {
        Self::density_scale(noise) * (-residual.norm_sqr() / noise.n0()).exp()
    }

    #[inline]
    fn log_density(residual: Self, noise: &NoiseModel) -> f64 {
        Self::density_scale(noise).ln() - residual.norm_sqr() / noise.n0()
    }
}

impl FieldValue for f64 {
    const ZERO: Self = 0.0;
    const DIMS: usize = 1;

    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }

    #[inline]
    fn coord(self, _axis: usize) -> f64 {
        self
    }

    fn density_scale(noise: &NoiseModel) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * noise.sigma2()).sqrt()
    }
}

impl FieldValue for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    const DIMS: usize = 2;

    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }

    #[inline]
    fn coord(self, axis: usize) -> f64 {
        if axis == 0 {
            self.re
        } else {
            self.im
        }
    }

    fn density_scale(noise: &NoiseModel) -> f64 {
        1.0 / (std::f64::consts::PI * noise.n0())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldModel<T> {
    graph: FactorGraph,
    sizes: Vec<usize>,
    values: Vec<Vec<T>>,
}

impl<T: FieldValue> FieldModel<T> {
    /// `sizes[j]` is layer `j`'s alphabet size; `values[e]` lists that
    /// alphabet's components on edge `e`'s resource.
    pub fn new(graph: FactorGraph, sizes: Vec<usize>, values: Vec<Vec<T>>) -> Result<Self> {
        if sizes.len() != graph.layers() || values.len() != graph.edge_count() {
            return Err(Error::Dimension(format!(
                "model has {} layers and {} edges, graph has {} and {}",
                sizes.len(),
                values.len(),
                graph.layers(),
                graph.edge_count()
            )));
        }
        for (e, vals) in values.iter().enumerate() {
            let (layer, _) = graph.edge(e);
            if sizes[layer] == 0 || vals.len() != sizes[layer] {
                return Err(Error::Dimension(format!(
                    "edge {e} lists {} values for layer {layer} of size {}",
                    vals.len(),
                    sizes[layer]
                )));
            }
        }
        Ok(Self { graph, sizes, values })
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, layer: usize) -> usize {
        self.sizes[layer]
    }

    pub fn values(&self, edge: usize) -> &[T] {
        &self.values[edge]
    }

    /// Largest per-axis magnitude among the components on one resource.
    pub fn amplitude_at(&self, resource: usize) -> f64 {
        let mut wid = 0.0f64;
        for &e in self.graph.resource_edges(resource) {
            for v in &self.values[e] {
                for axis in 0..T::DIMS {
                    wid = wid.max(v.coord(axis).abs());
                }
            }
        }
        wid
    }
}

fn check_graph(cb: &Codebook, graph: &FactorGraph) -> Result<()> {
    if cb.layers() != graph.layers() || cb.resources() != graph.resources() {
        return Err(Error::Dimension(format!(
            "codebook is {}x{} (JxK), graph is {}x{}",
            cb.layers(),
            cb.resources(),
            graph.layers(),
            graph.resources()
        )));
    }
    for j in 0..cb.layers() {
        if !graph.resources_of(j).eq(cb.support(j).iter().copied()) {
            return Err(Error::Dimension(format!(
                "layer {j} support {:?} does not match the graph",
                cb.support(j)
            )));
        }
    }
    Ok(())
}

impl FieldModel<Complex64> {
    /// Joint complex model of an effective codebook.
    pub fn complex(cb: &Codebook, graph: &FactorGraph) -> Result<Self> {
        check_graph(cb, graph)?;
        let values = (0..graph.edge_count())
            .map(|e| {
                let (j, k) = graph.edge(e);
                (0..cb.codewords()).map(|m| cb.entry(j, m, k)).collect()
            })
            .collect();
        Self::new(graph.clone(), vec![cb.codewords(); cb.layers()], values)
    }
}

/// Real and imaginary sub-models of a separable effective codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitModel {
    pub real: FieldModel<f64>,
    pub imag: FieldModel<f64>,
    parts: Vec<LayerParts>,
    lookup: Vec<Vec<usize>>,
}

impl SplitModel {
    pub fn new(cb: &Codebook, graph: &FactorGraph) -> Result<Self> {
        check_graph(cb, graph)?;
        let parts = cb.separable_parts()?;
        let project = |pick: fn(&LayerParts) -> &Vec<Vec<f64>>| -> Result<FieldModel<f64>> {
            let sizes = parts.iter().map(|p| pick(p).len()).collect();
            let values = (0..graph.edge_count())
                .map(|e| {
                    let (j, k) = graph.edge(e);
                    let pos = cb.support(j).iter().position(|&s| s == k).unwrap_or(0);
                    pick(&parts[j]).iter().map(|v| v[pos]).collect()
                })
                .collect();
            FieldModel::new(graph.clone(), sizes, values)
        };
        let real = project(|p| &p.real)?;
        let imag = project(|p| &p.imag)?;
        let lookup = parts.iter().map(LayerParts::lookup).collect();
        Ok(Self {
            real,
            imag,
            parts,
            lookup,
        })
    }

    pub fn parts(&self) -> &[LayerParts] {
        &self.parts
    }

    /// Codeword index of layer `j` for a (real, imaginary) index pair.
    pub fn codeword(&self, layer: usize, real: usize, imag: usize) -> usize {
        self.lookup[layer][real * self.parts[layer].imag.len() + imag]
    }

    pub fn split_signal(y: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        (y.iter().map(|c| c.re).collect(), y.iter().map(|c| c.im).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::generate_separable_codebook;
    use crate::graph::{build_regular_graph, from_codebook};

    #[test]
    fn densities_integrate_to_one() {
        let noise = NoiseModel::with_n0(0.2).unwrap();
        let h = 1e-3;
        let real: f64 = (-4000..=4000).map(|i| f64::density(i as f64 * h, &noise) * h).sum();
        assert!((real - 1.0).abs() < 1e-9);
        let h = 1e-2;
        let mut cplx = 0.0;
        for a in -300..=300 {
            for b in -300..=300 {
                cplx += Complex64::density(Complex64::new(a as f64 * h, b as f64 * h), &noise) * h * h;
            }
        }
        assert!((cplx - 1.0).abs() < 1e-9);
        assert!((f64::log_density(0.3, &noise) - f64::density(0.3, &noise).ln()).abs() < 1e-12);
    }

    #[test]
    fn split_model_reconstructs_codewords() {
        let cb = generate_separable_codebook(4, 16, 2).unwrap();
        let graph = from_codebook(&cb).unwrap();
        let split = SplitModel::new(&cb, &graph).unwrap();
        for e in 0..graph.edge_count() {
            let (j, k) = graph.edge(e);
            for r in 0..4 {
                for i in 0..4 {
                    let m = split.codeword(j, r, i);
                    let x = cb.entry(j, m, k);
                    assert_eq!(x.re, split.real.values(e)[r]);
                    assert_eq!(x.im, split.imag.values(e)[i]);
                }
            }
        }
    }

    #[test]
    fn mismatched_graph_is_rejected() {
        let cb = generate_separable_codebook(4, 16, 2).unwrap();
        assert!(FieldModel::complex(&cb, &build_regular_graph(5).unwrap()).is_err());
        let g = build_regular_graph(4).unwrap();
        assert!(FieldModel::<f64>::new(g.clone(), vec![2; 5], vec![]).is_err());
        assert!(FieldModel::<f64>::new(g, vec![2; 6], vec![vec![0.0]; 12]).is_err());
    }
}
