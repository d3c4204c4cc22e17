use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use super::rrrset::{make_repr, RRRSet};
use crate::graph::{DiffusionModel, Graph, VertexId};

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Key of the random stream used for stream number `stream` under `seed`.
#[inline]
pub(crate) fn stream_key(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Scratch space owned by one sampling worker: a generator, a reusable
/// visited bitmap over all vertices and the BFS queue.
pub struct SamplerState {
    seed: u64,
    rng: Xoshiro256PlusPlus,
    visited: Vec<u64>,
    queue: Vec<VertexId>,
}

impl SamplerState {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerState {
            seed,
            rng: Xoshiro256PlusPlus::seed_from_u64(stream_key(seed, 0)),
            visited: vec![0; n.div_ceil(64)],
            queue: Vec::new(),
        }
    }

    /// Switches to the independent stream `stream` of this state's seed.
    pub fn reseed(&mut self, stream: u64) {
        self.rng = Xoshiro256PlusPlus::seed_from_u64(stream_key(self.seed, stream));
    }

    /// Uniform vertex in `[0, n)`.
    pub fn sample_root(&mut self, n: usize) -> VertexId {
        self.rng.random_range(0..n as VertexId)
    }

    /// True when no visited bit is set (full sweep; for tests).
    pub fn visited_is_clear(&self) -> bool {
        self.visited.iter().all(|&w| w == 0)
    }

    #[inline]
    fn test_and_mark(&mut self, v: VertexId) -> bool {
        let (w, bit) = (v as usize / 64, 1u64 << (v % 64));
        let seen = self.visited[w] & bit != 0;
        self.visited[w] |= bit;
        seen
    }

    /// Clears exactly the bits of the vertices just collected.
    fn clear_visited(&mut self) {
        for &v in &self.queue {
            self.visited[v as usize / 64] &= !(1u64 << (v % 64));
        }
        debug_assert!(self.queue.iter().all(|&v| self.visited[v as usize / 64] & (1 << (v % 64)) == 0));
    }

    /// Vertices reverse-reachable from `root` under one random outcome of
    /// `model`; the root comes first. The slice is valid until the next call.
    pub(crate) fn collect(&mut self, g: &Graph, model: DiffusionModel, root: VertexId) -> &[VertexId] {
        self.queue.clear();
        self.test_and_mark(root);
        self.queue.push(root);
        match model {
            DiffusionModel::IC => self.collect_ic(g),
            DiffusionModel::LT => self.collect_lt(g, root),
        }
        self.clear_visited();
        &self.queue
    }

    /// Probabilistic BFS over in-edges: each in-edge of a dequeued vertex is
    /// flipped once, and only while its source is still unvisited.
    fn collect_ic(&mut self, g: &Graph) {
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            let (sources, weights) = g.in_edges(u);
            for (&v, &p) in sources.iter().zip(weights) {
                let (w, bit) = (v as usize / 64, 1u64 << (v % 64));
                if self.visited[w] & bit == 0 && self.rng.random::<f32>() < p {
                    self.visited[w] |= bit;
                    self.queue.push(v);
                }
            }
        }
    }

    /// Live-edge walk: every vertex picks at most one in-edge, edge `(v, u)`
    /// with probability `w_vu` and none with the residual probability. The
    /// walk stops at "none" or on reaching a vertex already in the set.
    fn collect_lt(&mut self, g: &Graph, root: VertexId) {
        let mut u = root;
        loop {
            let (sources, weights) = g.in_edges(u);
            if sources.is_empty() {
                break;
            }
            let r: f64 = self.rng.random();
            let mut acc = 0.0f64;
            let mut chosen = None;
            for (&v, &w) in sources.iter().zip(weights) {
                acc += w as f64;
                if r < acc {
                    chosen = Some(v);
                    break;
                }
            }
            match chosen {
                Some(v) if !self.test_and_mark(v) => {
                    self.queue.push(v);
                    u = v;
                }
                _ => break,
            }
        }
    }
}

/// Uniform root in `[0, n)` drawn from `state`'s generator.
pub fn sample_root(state: &mut SamplerState, n: usize) -> VertexId {
    state.sample_root(n)
}

/// One RRR set rooted at `root` under the independent cascade model.
pub fn generate_rrr_ic(g: &Graph, root: VertexId, state: &mut SamplerState) -> RRRSet {
    make_repr(state.collect(g, DiffusionModel::IC, root).to_vec(), g.num_vertices())
}

/// One RRR set rooted at `root` under the linear threshold model.
pub fn generate_rrr_lt(g: &Graph, root: VertexId, state: &mut SamplerState) -> RRRSet {
    make_repr(state.collect(g, DiffusionModel::LT, root).to_vec(), g.num_vertices())
}

/// Dispatches to [`generate_rrr_ic`] or [`generate_rrr_lt`].
pub fn generate_rrr(g: &Graph, model: DiffusionModel, root: VertexId, state: &mut SamplerState) -> RRRSet {
    make_repr(state.collect(g, model, root).to_vec(), g.num_vertices())
}
