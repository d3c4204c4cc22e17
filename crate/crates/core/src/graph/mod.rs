//! Directed weighted graphs in compressed sparse row form.
//!
//! Every [`Graph`] carries both the out-adjacency (used by forward diffusion)
//! and its transpose (used by reverse-reachable sampling). The two views are
//! linked by an edge permutation so a weight change on one side is reflected
//! on the other without re-sorting.

mod load;
mod synth;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{load_edge_list, read_edge_list, write_edge_list};
pub use synth::{synth_graph, SynthKind};

/// Dense vertex identifier in `[0, n)`.
pub type VertexId = u32;

/// Diffusion model governing how activation spreads along edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionModel {
    /// Independent cascade: every edge fires independently with its weight.
    IC,
    /// Linear threshold: incoming weights are summed against a random threshold.
    LT,
}

impl DiffusionModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffusionModel::IC => "ic",
            DiffusionModel::LT => "lt",
        }
    }
}

impl fmt::Display for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DiffusionModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(DiffusionModel::IC),
            "lt" => Ok(DiffusionModel::LT),
            other => Err(Error::InvalidParameter(format!("unknown diffusion model `{other}` (expected `ic` or `lt`)"))),
        }
    }
}

/// Immutable directed graph with per-edge weights and a transpose view.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    num_vertices: usize,
    forward_offsets: Vec<usize>,
    forward_targets: Vec<VertexId>,
    forward_weights: Vec<f32>,
    reverse_offsets: Vec<usize>,
    reverse_sources: Vec<VertexId>,
    reverse_weights: Vec<f32>,
    /// `reverse_to_forward[j]` is the forward slot of reverse slot `j`.
    reverse_to_forward: Vec<usize>,
    original_ids: Vec<u64>,
}

/// Builds `offsets` for a stable counting sort of `keys` into `n` buckets and
/// returns the permutation mapping output slot to input position.
fn bucket_order(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut order = vec![0usize; offsets[n]];
    for (pos, k) in keys.enumerate() {
        order[cursor[k]] = pos;
        cursor[k] += 1;
    }
    (offsets, order)
}

impl Graph {
    /// Builds a graph from `(src, dst, weight)` triples over `n` vertices.
    ///
    /// Self-loops are dropped and parallel edges are kept. Out-edges of a
    /// vertex keep their input order; in-edges are ordered by source.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, f32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if n > VertexId::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} vertices exceed the 32-bit id space")));
        }
        let mut kept = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) references a vertex outside [0, {n})")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) has non-finite weight")));
            }
            if u != v {
                kept.push((u, v, w));
            }
        }

        let (forward_offsets, order) = bucket_order(n, kept.iter().map(|e| e.0 as usize));
        let forward_targets = order.iter().map(|&i| kept[i].1).collect();
        let forward_weights = order.iter().map(|&i| kept[i].2).collect();

        let mut g = Graph {
            num_vertices: n,
            forward_offsets,
            forward_targets,
            forward_weights,
            reverse_offsets: Vec::new(),
            reverse_sources: Vec::new(),
            reverse_weights: Vec::new(),
            reverse_to_forward: Vec::new(),
            original_ids: (0..n as u64).collect(),
        };
        g.build_transpose();
        Ok(g)
    }

    fn build_transpose(&mut self) {
        let n = self.num_vertices;
        let (reverse_offsets, order) = bucket_order(n, self.forward_targets.iter().map(|&v| v as usize));
        let mut source_of = vec![0 as VertexId; self.forward_targets.len()];
        for u in 0..n {
            source_of[self.forward_offsets[u]..self.forward_offsets[u + 1]].fill(u as VertexId);
        }
        self.reverse_sources = order.iter().map(|&slot| source_of[slot]).collect();
        self.reverse_weights = order.iter().map(|&slot| self.forward_weights[slot]).collect();
        self.reverse_offsets = reverse_offsets;
        self.reverse_to_forward = order;
    }

    /// Replaces the dense-to-original id table (one entry per vertex).
    pub fn with_original_ids(mut self, ids: Vec<u64>) -> Result<Self> {
        if ids.len() != self.num_vertices {
            return Err(Error::InvalidParameter(format!(
                "id table has {} entries for {} vertices",
                ids.len(),
                self.num_vertices
            )));
        }
        self.original_ids = ids;
        Ok(self)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.forward_targets.len()
    }

    /// Out-neighbours of `u` with the matching edge weights.
    #[inline]
    pub fn out_edges(&self, u: VertexId) -> (&[VertexId], &[f32]) {
        let r = self.forward_offsets[u as usize]..self.forward_offsets[u as usize + 1];
        (&self.forward_targets[r.clone()], &self.forward_weights[r])
    }

    /// In-neighbours of `v` (sources of edges into `v`) with the matching weights.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> (&[VertexId], &[f32]) {
        let r = self.reverse_offsets[v as usize]..self.reverse_offsets[v as usize + 1];
        (&self.reverse_sources[r.clone()], &self.reverse_weights[r])
    }

    pub fn out_degree(&self, u: VertexId) -> usize {
        self.forward_offsets[u as usize + 1] - self.forward_offsets[u as usize]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.reverse_offsets[v as usize + 1] - self.reverse_offsets[v as usize]
    }

    pub fn forward_offsets(&self) -> &[usize] {
        &self.forward_offsets
    }

    pub fn reverse_offsets(&self) -> &[usize] {
        &self.reverse_offsets
    }

    /// Forward weights in out-adjacency order.
    pub fn weights(&self) -> &[f32] {
        &self.forward_weights
    }

    /// Edge triples read from the out-adjacency.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f32)> + '_ {
        (0..self.num_vertices as VertexId).flat_map(move |u| {
            let (targets, weights) = self.out_edges(u);
            targets.iter().zip(weights).map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Edge triples read from the in-adjacency, reported as `(src, dst, w)`.
    pub fn reverse_edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f32)> + '_ {
        (0..self.num_vertices as VertexId).flat_map(move |v| {
            let (sources, weights) = self.in_edges(v);
            sources.iter().zip(weights).map(move |(&u, &w)| (u, v, w))
        })
    }

    /// The graph with every edge reversed.
    pub fn transpose(&self) -> Graph {
        let edges: Vec<_> = self.reverse_edges().map(|(u, v, w)| (v, u, w)).collect();
        let g = Graph::from_edges(self.num_vertices, &edges).expect("transpose of a valid graph");
        g.with_original_ids(self.original_ids.clone()).expect("same vertex count")
    }

    /// Original (file) id of dense vertex `v`.
    pub fn original_id(&self, v: VertexId) -> u64 {
        self.original_ids[v as usize]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// Sum of the weights on edges entering `v`, accumulated in `f64`.
    pub fn in_weight_sum(&self, v: VertexId) -> f64 {
        self.in_edges(v).1.iter().map(|&w| w as f64).sum()
    }

    /// Checks that the weights are usable as diffusion probabilities for `model`.
    pub fn check_weights(&self, model: DiffusionModel) -> Result<()> {
        if let Some(w) = self.forward_weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!("edge weight {w} is not a probability in [0, 1]")));
        }
        if model == DiffusionModel::LT {
            for v in 0..self.num_vertices as VertexId {
                let s = self.in_weight_sum(v);
                if s > 1.0 + 1e-6 {
                    return Err(Error::InvalidParameter(format!(
                        "vertex {} has incoming LT weight {s} > 1; normalize the weights first",
                        self.original_id(v)
                    )));
                }
            }
        }
        Ok(())
    }

    fn set_forward_weights(&mut self, weights: Vec<f32>) {
        debug_assert_eq!(weights.len(), self.forward_weights.len());
        self.reverse_weights = self.reverse_to_forward.iter().map(|&slot| weights[slot]).collect();
        self.forward_weights = weights;
    }

    fn set_reverse_weights(&mut self, weights: Vec<f32>) {
        debug_assert_eq!(weights.len(), self.reverse_weights.len());
        for (j, &slot) in self.reverse_to_forward.iter().enumerate() {
            self.forward_weights[slot] = weights[j];
        }
        self.reverse_weights = weights;
    }

    /// Independent-cascade weights: every forward edge gets an i.i.d.
    /// uniform `[0, 1)` probability drawn in out-adjacency order.
    pub fn generate_ic_weights(&self, rng_seed: u64) -> Graph {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);
        let weights = (0..self.num_edges()).map(|_| rng.random::<f32>()).collect();
        let mut g = self.clone();
        g.set_forward_weights(weights);
        g
    }

    /// Rescales in-weights so that every vertex's incoming sum is at most 1.
    ///
    /// A vertex whose sum `S` exceeds 1 has each in-weight divided by `S`;
    /// the quotient is rounded toward zero so the stored `f32` weights never
    /// sum above 1. Vertices already at or below 1 are left untouched and the
    /// residual `1 - S` is the probability that no in-neighbour is chosen.
    pub fn normalize_lt_weights(&self) -> Result<Graph> {
        let mut weights = self.reverse_weights.clone();
        for v in 0..self.num_vertices {
            let range = self.reverse_offsets[v]..self.reverse_offsets[v + 1];
            let slice = &mut weights[range];
            if slice.iter().any(|&w| w < 0.0) {
                return Err(Error::NegativeWeight { vertex: v as VertexId });
            }
            let sum: f64 = slice.iter().map(|&w| w as f64).sum();
            if sum > 1.0 {
                for w in slice.iter_mut() {
                    let exact = *w as f64 / sum;
                    let mut rounded = exact as f32;
                    if rounded as f64 > exact {
                        rounded = rounded.next_down();
                    }
                    *w = rounded;
                }
            }
        }
        let mut g = self.clone();
        g.set_reverse_weights(weights);
        Ok(g)
    }

    /// Linear-threshold weights: uniform random draws followed by
    /// [`Graph::normalize_lt_weights`].
    pub fn generate_lt_weights(&self, rng_seed: u64) -> Graph {
        self.generate_ic_weights(rng_seed).normalize_lt_weights().expect("uniform draws are nonnegative")
    }

    /// Model-appropriate random weights.
    pub fn generate_weights(&self, model: DiffusionModel, rng_seed: u64) -> Graph {
        match model {
            DiffusionModel::IC => self.generate_ic_weights(rng_seed),
            DiffusionModel::LT => self.generate_lt_weights(rng_seed),
        }
    }

    /// Same topology with every weight replaced by `w`.
    pub fn with_uniform_weight(&self, w: f32) -> Graph {
        let mut g = self.clone();
        g.set_forward_weights(vec![w; self.num_edges()]);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_triples(it: impl Iterator<Item = (VertexId, VertexId, f32)>) -> Vec<(u32, u32, u32)> {
        let mut v: Vec<_> = it.map(|(u, v, w)| (u, v, w.to_bits())).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn offsets_are_monotone_and_views_agree() {
        let g = Graph::from_edges(4, &[(0, 1, 0.5), (2, 1, 0.25), (1, 3, 1.0), (0, 3, 0.75), (3, 0, 0.1), (0, 1, 0.2)])
            .unwrap();
        for offs in [g.forward_offsets(), g.reverse_offsets()] {
            assert!(offs.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*offs.last().unwrap(), g.num_edges());
        }
        assert_eq!(sorted_triples(g.edges()), sorted_triples(g.reverse_edges()));
        assert_eq!(g.in_edges(1).0, &[0, 0, 2]);
    }

    #[test]
    fn self_loops_are_dropped_parallel_edges_kept() {
        let g = Graph::from_edges(2, &[(0, 0, 1.0), (0, 1, 1.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.out_edges(0).0, &[1, 1]);
    }

    #[test]
    fn transpose_round_trip_is_exact() {
        let g = Graph::from_edges(5, &[(0, 1, 0.5), (1, 2, 0.3), (4, 2, 0.9), (2, 0, 1.0), (3, 4, 0.0)]).unwrap();
        let tt = g.transpose().transpose();
        assert_eq!(sorted_triples(g.edges()), sorted_triples(tt.edges()));
    }

    #[test]
    fn ic_weights_are_deterministic_and_in_range() {
        let g = synth_graph(SynthKind::ErdosRenyi, 200, 0.05, 3).unwrap();
        let a = g.generate_ic_weights(11);
        let b = g.generate_ic_weights(11);
        assert_eq!(a, b);
        assert!(a.weights().iter().all(|w| (0.0..=1.0).contains(w)));
        assert_ne!(a, g.generate_ic_weights(12));
        assert_eq!(sorted_triples(a.edges()), sorted_triples(a.reverse_edges()));
    }

    #[test]
    fn ic_weight_mean_is_one_half() {
        // ~ 10^5 edges; std of the mean is sqrt(1/12 / m) ~ 9e-4.
        let g = synth_graph(SynthKind::ErdosRenyi, 1000, 0.1, 5).unwrap();
        assert!(g.num_edges() > 90_000);
        let w = g.generate_ic_weights(99);
        let mean = w.weights().iter().map(|&x| x as f64).sum::<f64>() / w.num_edges() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn lt_normalization_examples() {
        let g = Graph::from_edges(7, &[(1, 0, 1.0), (2, 0, 1.0), (3, 0, 1.0), (4, 0, 1.0), (1, 5, 0.2), (2, 5, 0.2)])
            .unwrap();
        let lt = g.normalize_lt_weights().unwrap();
        assert_eq!(lt.in_edges(0).1, &[0.25; 4]);
        assert_eq!(lt.in_weight_sum(0), 1.0);
        assert_eq!(lt.in_edges(5).1, &[0.2, 0.2]);
        assert_eq!(lt.in_degree(6), 0);
        assert_eq!(sorted_triples(lt.edges()), sorted_triples(lt.reverse_edges()));
    }

    #[test]
    fn lt_normalization_rejects_negative_weights() {
        let g = Graph::from_edges(2, &[(0, 1, -0.5)]).unwrap();
        assert!(matches!(g.normalize_lt_weights(), Err(Error::NegativeWeight { vertex: 1 })));
    }

    #[test]
    fn lt_feasibility_after_random_weights() {
        let g = synth_graph(SynthKind::ErdosRenyi, 300, 0.05, 8).unwrap();
        let lt = g.generate_lt_weights(1);
        for v in 0..300 {
            assert!(lt.in_weight_sum(v) <= 1.0 + 1e-12);
        }
        lt.check_weights(DiffusionModel::LT).unwrap();
    }

    #[test]
    fn model_parsing() {
        assert_eq!("IC".parse::<DiffusionModel>().unwrap(), DiffusionModel::IC);
        assert_eq!("lt".parse::<DiffusionModel>().unwrap(), DiffusionModel::LT);
        assert!("sir".parse::<DiffusionModel>().is_err());
    }

    #[test]
    fn empty_graph_is_rejected() {
        assert!(matches!(Graph::from_edges(0, &[]), Err(Error::EmptyGraph)));
    }
}
