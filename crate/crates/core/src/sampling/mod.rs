//! Random reverse-reachable (RRR) set generation.
//!
//! Sets are sampled by probabilistic traversal of the transpose graph. The
//! batch generator fuses sampling with occurrence counting: the worker that
//! builds a set increments the shared counter for its members right away, so
//! the selection phase starts from a ready counter.
//!
//! Set `i` of a store is always drawn from random stream `i` of the run seed,
//! which makes the generated sets independent of the worker count and of how
//! jobs were balanced.

mod rrrset;
mod sampler;

use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::graph::{DiffusionModel, Graph, VertexId};
use crate::pool::WorkPool;
use crate::selection::Counter;

pub use rrrset::{make_repr, make_repr_with, Members, RRRSet, ReprPolicy, DEFAULT_BITMAP_DENSITY};
pub use sampler::{generate_rrr, generate_rrr_ic, generate_rrr_lt, sample_root, SamplerState};

/// Append-only collection of RRR sets over a fixed vertex count.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RRRStore {
    num_vertices: usize,
    sets: Vec<RRRSet>,
}

impl RRRStore {
    pub fn new(num_vertices: usize) -> Self {
        RRRStore { num_vertices, sets: Vec::new() }
    }

    /// Store built from explicit member lists (first element of each is its root).
    pub fn from_member_lists(num_vertices: usize, lists: Vec<Vec<VertexId>>, policy: ReprPolicy) -> Self {
        let sets = lists.into_iter().map(|m| make_repr_with(m, num_vertices, policy)).collect();
        RRRStore { num_vertices, sets }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, i: usize) -> &RRRSet {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[RRRSet] {
        &self.sets
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RRRSet> {
        self.sets.iter()
    }

    pub fn push(&mut self, set: RRRSet) {
        self.sets.push(set);
    }

    /// Sum of set sizes.
    pub fn total_members(&self) -> u64 {
        self.sets.iter().map(|s| s.len() as u64).sum()
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(RRRSet::len).max().unwrap_or(0)
    }

    pub fn bitmap_count(&self) -> usize {
        self.sets.iter().filter(|s| s.is_bitmap()).count()
    }
}

/// Parameters shared by every set of a sampling run.
#[derive(Clone, Copy, Debug)]
pub struct SamplingConfig {
    pub model: DiffusionModel,
    pub rng_seed: u64,
    pub repr: ReprPolicy,
}

impl SamplingConfig {
    pub fn new(model: DiffusionModel, rng_seed: u64) -> Self {
        SamplingConfig { model, rng_seed, repr: ReprPolicy::default() }
    }
}

/// Appends `count` new sets to `store`.
///
/// With a `counter`, each worker increments `counter[v]` for every member `v`
/// of a set as soon as that set is built (kernel fusion). Without one the
/// sets are only stored.
///
/// If memory for the new sets cannot be reserved, the sets generated so far
/// are kept (and counted) and [`Error::OutOfMemory`] reports how many there are.
pub fn generate_batch_fused(
    g: &Graph,
    cfg: &SamplingConfig,
    count: usize,
    counter: Option<&Counter>,
    pool: &WorkPool,
    store: &mut RRRStore,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let n = g.num_vertices();
    assert_eq!(store.num_vertices, n, "store and graph disagree on the vertex count");
    if let Some(c) = counter {
        assert_eq!(c.len(), n, "counter and graph disagree on the vertex count");
    }
    if store.sets.try_reserve(count).is_err() {
        return Err(Error::OutOfMemory { generated: 0 });
    }

    let base = store.len() as u64;
    let out_of_memory = AtomicBool::new(false);

    struct Worker {
        sampler: SamplerState,
        chunks: Vec<(usize, Vec<RRRSet>)>,
    }

    let workers = pool.run_range(
        count,
        |_| Worker { sampler: SamplerState::new(n, cfg.rng_seed), chunks: Vec::new() },
        |w, range| {
            if out_of_memory.load(Ordering::Relaxed) {
                return;
            }
            let mut chunk = Vec::new();
            if chunk.try_reserve_exact(range.len()).is_err() {
                out_of_memory.store(true, Ordering::Relaxed);
                return;
            }
            let start = range.start;
            for i in range {
                w.sampler.reseed(base + i as u64);
                let root = w.sampler.sample_root(n);
                let members = w.sampler.collect(g, cfg.model, root);
                if let Some(c) = counter {
                    for &v in members {
                        c.increment(v);
                    }
                }
                chunk.push(make_repr_with(members.to_vec(), n, cfg.repr));
            }
            w.chunks.push((start, chunk));
        },
    );

    let mut chunks: Vec<(usize, Vec<RRRSet>)> = workers.into_iter().flat_map(|w| w.chunks).collect();
    chunks.sort_unstable_by_key(|c| c.0);
    let before = store.len();
    for (_, chunk) in chunks {
        store.sets.extend(chunk);
    }
    if out_of_memory.into_inner() {
        return Err(Error::OutOfMemory { generated: store.len() - before });
    }
    Ok(())
}
