//! Deterministic synthetic graphs for tests and benchmarks.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    /// Directed G(n, p): every ordered pair `u != v` is an edge with probability `param`.
    ErdosRenyi,
    /// A strongly connected core holding a `param` fraction of the vertices
    /// plus a sparse periphery fed by the core.
    SccCore,
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "erdos_renyi" | "er" => Ok(SynthKind::ErdosRenyi),
            "scc_core" => Ok(SynthKind::SccCore),
            other => Err(Error::InvalidParameter(format!("unknown graph kind `{other}`"))),
        }
    }
}

/// Generates a graph with unit weights; apply [`Graph::generate_weights`]
/// for diffusion probabilities.
pub fn synth_graph(kind: SynthKind, n: usize, param: f64, rng_seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);
    let edges = match kind {
        SynthKind::ErdosRenyi => {
            if !(0.0..=1.0).contains(&param) {
                return Err(Error::InvalidParameter(format!("edge probability {param} outside [0, 1]")));
            }
            erdos_renyi(n, param, &mut rng)
        }
        SynthKind::SccCore => {
            if !(param > 0.0 && param <= 1.0) {
                return Err(Error::InvalidParameter(format!("core fraction {param} outside (0, 1]")));
            }
            scc_core(n, param, &mut rng)
        }
    };
    Graph::from_edges(n, &edges)
}

/// Geometric skipping over the `n(n-1)` ordered pairs, so the cost is
/// proportional to the number of edges produced.
fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(VertexId, VertexId, f32)> {
    let pairs = n as u64 * (n as u64 - 1);
    let mut edges = Vec::new();
    if pairs == 0 || p == 0.0 {
        return edges;
    }
    let decode = |idx: u64| {
        let u = idx / (n as u64 - 1);
        let r = idx % (n as u64 - 1);
        let v = if r < u { r } else { r + 1 };
        (u as VertexId, v as VertexId, 1.0f32)
    };
    if p >= 1.0 {
        return (0..pairs).map(decode).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (pairs - idx) as f64 {
            break;
        }
        idx += skip as u64;
        edges.push(decode(idx));
        idx += 1;
        if idx >= pairs {
            break;
        }
    }
    edges
}

/// Core vertices `0..c` form a directed ring plus one random chord each, so
/// the core is strongly connected with in-degree about 2. Each periphery
/// vertex receives one edge from the core and one from a lower-numbered vertex.
fn scc_core(n: usize, fraction: f64, rng: &mut impl Rng) -> Vec<(VertexId, VertexId, f32)> {
    let core = ((fraction * n as f64).round() as usize).clamp(1, n);
    let mut edges = Vec::with_capacity(2 * n);
    if core > 1 {
        for u in 0..core {
            edges.push((u as VertexId, ((u + 1) % core) as VertexId, 1.0));
        }
    }
    if core > 2 {
        for u in 0..core {
            let mut v = rng.random_range(0..core - 1);
            if v >= u {
                v += 1;
            }
            edges.push((u as VertexId, v as VertexId, 1.0));
        }
    }
    for p in core..n {
        let from_core = rng.random_range(0..core);
        edges.push((from_core as VertexId, p as VertexId, 1.0));
        let from_any = rng.random_range(0..p);
        edges.push((from_any as VertexId, p as VertexId, 1.0));
    }
    edges
}
