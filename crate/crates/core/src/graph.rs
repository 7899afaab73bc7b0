//! Bipartite layer/resource factor graph.
//!
//! Every (layer, resource) connection gets an edge id. Messages in both
//! directions are stored per edge id, so `V_{j->k}` and `U_{k->j}` for the
//! same pair share an index.

use crate::codebook::Codebook;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    resources: usize,
    layers: usize,
    // (layer, resource), ordered by layer then resource
    edges: Vec<(usize, usize)>,
    by_resource: Vec<Vec<usize>>,
    by_layer: Vec<Vec<usize>>,
    degree: usize,
}

impl FactorGraph {
    /// Builds a graph from per-layer resource lists. All resources must share
    /// one degree; layer degrees may differ.
    pub fn from_supports(resources: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let layers = supports.len();
        let mut edges = Vec::new();
        let mut by_resource = vec![Vec::new(); resources];
        let mut by_layer = vec![Vec::new(); layers];
        for (layer, support) in supports.iter().enumerate() {
            let mut sorted = support.clone();
            sorted.sort_unstable();
            sorted.dedup();
            for k in sorted {
                if k >= resources {
                    return Err(Error::Dimension(format!(
                        "layer {layer} references resource {k}, but K={resources}"
                    )));
                }
                let id = edges.len();
                edges.push((layer, k));
                by_layer[layer].push(id);
                by_resource[k].push(id);
            }
        }
        let degrees: Vec<usize> = by_resource.iter().map(Vec::len).collect();
        let degree = degrees.first().copied().unwrap_or(0);
        let offending: Vec<usize> = (0..resources).filter(|&k| degrees[k] != degree).collect();
        if !offending.is_empty() {
            return Err(Error::IrregularGraph { degrees, offending });
        }
        if degree == 0 {
            return Err(Error::Dimension("resources have no connected layers".into()));
        }
        Ok(Self {
            resources,
            layers,
            edges,
            by_resource,
            by_layer,
            degree,
        })
    }

    /// K, the number of resource nodes.
    pub fn resources(&self) -> usize {
        self.resources
    }

    /// J, the number of layer nodes.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Common resource degree `d_f`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Overloading factor `J / K`.
    pub fn overloading(&self) -> f64 {
        self.layers as f64 / self.resources as f64
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// (layer, resource) of an edge.
    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn edge_id(&self, layer: usize, resource: usize) -> Option<usize> {
        self.by_layer[layer]
            .iter()
            .copied()
            .find(|&e| self.edges[e].1 == resource)
    }

    /// Edge ids at a resource, ordered by layer index.
    pub fn resource_edges(&self, resource: usize) -> &[usize] {
        &self.by_resource[resource]
    }

    /// Edge ids at a layer, ordered by resource index.
    pub fn layer_edges(&self, layer: usize) -> &[usize] {
        &self.by_layer[layer]
    }

    /// Layers connected to a resource (`∂k`).
    pub fn layers_at(&self, resource: usize) -> impl Iterator<Item = usize> + '_ {
        self.by_resource[resource].iter().map(|&e| self.edges[e].0)
    }

    /// Resources connected to a layer (`∂j`).
    pub fn resources_of(&self, layer: usize) -> impl Iterator<Item = usize> + '_ {
        self.by_layer[layer].iter().map(|&e| self.edges[e].1)
    }
}

/// Unordered resource pairs in lexicographic order.
pub(crate) fn resource_pairs(resources: usize) -> Vec<[usize; 2]> {
    let mut pairs = Vec::with_capacity(resources * resources.saturating_sub(1) / 2);
    for a in 0..resources {
        for b in a + 1..resources {
            pairs.push([a, b]);
        }
    }
    pairs
}

/// One layer per resource pair: `J = K(K-1)/2`, `d_f = K-1`.
pub fn build_regular_graph(resources: usize) -> Result<FactorGraph> {
    if resources < 3 {
        return Err(Error::InvalidParameter(format!(
            "regular pair graph needs K >= 3, got {resources}"
        )));
    }
    let supports: Vec<Vec<usize>> = resource_pairs(resources).iter().map(|p| p.to_vec()).collect();
    FactorGraph::from_supports(resources, &supports)
}

pub fn from_codebook(cb: &Codebook) -> Result<FactorGraph> {
    let supports: Vec<Vec<usize>> = (0..cb.layers()).map(|j| cb.support(j).to_vec()).collect();
    FactorGraph::from_supports(cb.resources(), &supports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::generate_separable_codebook;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn regular_graph_sizes() {
        for (k, j, df) in [(3, 3, 2), (4, 6, 3), (6, 15, 5)] {
            let g = build_regular_graph(k).unwrap();
            assert_eq!((g.layers(), g.degree()), (j, df), "K={k}");
        }
        assert!(build_regular_graph(2).is_err());
    }

    #[test]
    fn regular_graph_layer_order_is_lexicographic() {
        let g = build_regular_graph(4).unwrap();
        let pairs: Vec<Vec<usize>> = (0..6).map(|j| g.resources_of(j).collect()).collect();
        assert_eq!(
            pairs,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn graph_from_generated_codebook() {
        let cb = generate_separable_codebook(4, 16, 7).unwrap();
        assert_eq!(from_codebook(&cb).unwrap(), build_regular_graph(4).unwrap());
    }

    #[test]
    fn irregular_resource_degrees_are_rejected() {
        // layers on (0,1),(0,2),(1,2) plus one on (0,1,2,3) leaves resource 3 at degree 1
        let supports = vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2, 3]];
        match FactorGraph::from_supports(4, &supports).unwrap_err() {
            Error::IrregularGraph { degrees, offending } => {
                assert_eq!(degrees, vec![3, 3, 3, 1]);
                assert_eq!(offending, vec![3]);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn irregular_codebook_is_rejected() {
        // pair layers over resources 0..3 leave resource 3 unused
        let mut entries = Vec::new();
        for s in [[0, 1], [0, 2], [1, 2]] {
            for m in 0..2 {
                for k in 0..4 {
                    let v = if s.contains(&k) { 0.5 + m as f64 * 0.1 } else { 0.0 };
                    entries.push(Complex64::new(v, 0.0));
                }
            }
        }
        let cb = crate::codebook::Codebook::new(4, 3, 2, 2, entries).unwrap();
        match from_codebook(&cb).unwrap_err() {
            Error::IrregularGraph { offending, .. } => assert_eq!(offending, vec![3]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn minimal_graph() {
        let cb = crate::codebook::Codebook::new(
            2,
            1,
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        let g = from_codebook(&cb).unwrap();
        assert_eq!((g.resources(), g.layers(), g.degree()), (2, 1, 1));
    }

    proptest! {
        #[test]
        fn regular_graph_invariants(k in 3usize..12) {
            let g = build_regular_graph(k).unwrap();
            prop_assert_eq!(g.degree(), k - 1);
            prop_assert!((g.overloading() - (k as f64 - 1.0) / 2.0).abs() < 1e-12);
            let by_res: usize = (0..k).map(|r| g.resource_edges(r).len()).sum();
            let by_layer: usize = (0..g.layers()).map(|j| g.layer_edges(j).len()).sum();
            prop_assert_eq!(by_res, g.edge_count());
            prop_assert_eq!(by_layer, g.edge_count());
            for r in 0..k {
                for j in g.layers_at(r) {
                    prop_assert!(g.resources_of(j).any(|x| x == r));
                }
            }
        }
    }
}
