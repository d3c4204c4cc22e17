//! Greedy max-coverage seed selection over a store of RRR sets.
//!
//! The main strategy partitions the *sets* across workers. Every worker
//! updates one shared array of 64-bit atomic occurrence counters, so each set
//! is read by exactly one worker per pass. After a seed is picked, the sets
//! it covers are retired. Either their members are decremented, or the
//! counter is rebuilt from the surviving sets when the seed covers a large
//! share of them. Both paths produce the same counter.
//!
//! [`baseline_select`] is the vertex-partitioned reference strategy, in
//! which every worker scans every set. It exists for comparison.
//!
//! Ties in every argmax go to the lowest vertex id, so all strategies and
//! worker counts pick the same seeds.

mod baseline;

use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::pool::WorkPool;
use crate::sampling::RRRStore;

pub use baseline::baseline_select;

/// Default share of live sets a seed must cover before the counter is
/// rebuilt instead of decremented.
pub const DEFAULT_ADAPTIVE_THRESHOLD: f64 = 0.25;

/// Per-vertex occurrence counts with lock-free increments and decrements.
pub struct Counter {
    counts: Box<[AtomicU64]>,
}

impl Counter {
    pub fn new(n: usize) -> Self {
        Counter { counts: (0..n).map(|_| AtomicU64::new(0)).collect() }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        Counter { counts: counts.iter().map(|&c| AtomicU64::new(c)).collect() }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    #[inline]
    pub fn increment(&self, v: VertexId) {
        self.counts[v as usize].fetch_add(1, Ordering::Relaxed);
    }

    #[inline]
    pub fn decrement(&self, v: VertexId) {
        let prev = self.counts[v as usize].fetch_sub(1, Ordering::Relaxed);
        debug_assert!(prev > 0, "counter underflow at vertex {v}");
    }

    /// Plain read; only meaningful between parallel phases.
    #[inline]
    pub fn get(&self, v: VertexId) -> u64 {
        self.counts[v as usize].load(Ordering::Relaxed)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn reset(&self) {
        for c in self.counts.iter() {
            c.store(0, Ordering::Relaxed);
        }
    }

    fn slice(&self, r: Range<usize>) -> &[AtomicU64] {
        &self.counts[r]
    }
}

impl Clone for Counter {
    fn clone(&self) -> Self {
        Counter::from_counts(&self.to_vec())
    }
}

impl PartialEq for Counter {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .counts
                .iter()
                .zip(other.counts.iter())
                .all(|(a, b)| a.load(Ordering::Relaxed) == b.load(Ordering::Relaxed))
    }
}

impl Eq for Counter {}

impl fmt::Debug for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Counter").field(&self.to_vec()).finish()
    }
}

/// Selected seeds in pick order with the number of sets each newly covered.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedSet {
    pub seeds: Vec<VertexId>,
    pub marginal_counts: Vec<u64>,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Total number of sets covered by all seeds.
    pub fn covered(&self) -> u64 {
        self.marginal_counts.iter().sum()
    }
}

/// Output of a selection run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSelection {
    pub seeds: SeedSet,
    /// Counter over the sets still uncovered after the last pick.
    pub counter: Counter,
    /// Reads of set storage (list elements, bitmap words, search probes).
    pub touches: u64,
    pub rebuild_rounds: usize,
    pub decrement_rounds: usize,
}

/// Which sets are still uncovered. Retired sets are tombstoned in place; the
/// index list is compacted only by [`rebuild_update`].
pub struct LiveSets {
    alive: Vec<AtomicBool>,
    live: Vec<usize>,
    live_count: usize,
    touches: u64,
}

impl LiveSets {
    pub fn all(store: &RRRStore) -> Self {
        LiveSets {
            alive: (0..store.len()).map(|_| AtomicBool::new(true)).collect(),
            live: (0..store.len()).collect(),
            live_count: store.len(),
            touches: 0,
        }
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn is_alive(&self, i: usize) -> bool {
        self.alive[i].load(Ordering::Relaxed)
    }

    /// Set-storage reads performed by updates on these sets so far.
    pub fn touches(&self) -> u64 {
        self.touches
    }
}

fn check_selection_args(n: usize, k: usize, store: &RRRStore) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("seed budget k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::KExceedsN { k, n });
    }
    if store.num_vertices() != n {
        return Err(Error::InvalidParameter(format!("store covers {} vertices, expected {n}", store.num_vertices())));
    }
    Ok(())
}

/// Adds every member of `store[indices[p]]` to `counter`, partitioning the
/// positions `p` across workers. Returns the storage reads.
fn accumulate(counter: &Counter, store: &RRRStore, indices: Option<&[usize]>, pool: &WorkPool) -> u64 {
    let total = indices.map_or(store.len(), <[usize]>::len);
    pool.run_range(
        total,
        |_| 0u64,
        |touches, range| {
            for p in range {
                let i = indices.map_or(p, |ix| ix[p]);
                store.get(i).for_each_counted(|v| counter.increment(v), touches);
            }
        },
    )
    .into_iter()
    .sum()
}

/// Occurrence counts of every vertex over all sets of `store`.
pub fn build_counter(store: &RRRStore, n: usize, pool: &WorkPool) -> Counter {
    build_counter_counted(store, n, pool).0
}

fn build_counter_counted(store: &RRRStore, n: usize, pool: &WorkPool) -> (Counter, u64) {
    assert_eq!(store.num_vertices(), n, "store and counter disagree on the vertex count");
    let counter = Counter::new(n);
    let touches = accumulate(&counter, store, None, pool);
    (counter, touches)
}

/// `(count, vertex)` ordered so that the larger count wins and the lower id
/// breaks ties.
#[inline]
pub(crate) fn beats(a: (u64, VertexId), b: (u64, VertexId)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Vertex with the highest count (lowest id on ties) and its count.
///
/// Each job reduces a contiguous vertex range to its regional maximum; the
/// regional maxima are then reduced to the global one.
pub fn argmax_with_count(counter: &Counter, pool: &WorkPool) -> (VertexId, u64) {
    assert!(!counter.is_empty(), "argmax of an empty counter");
    let regional: Vec<(u64, VertexId)> = pool
        .run_range(
            counter.len(),
            |_| Vec::new(),
            |maxima: &mut Vec<(u64, VertexId)>, range| {
                let lo = range.start;
                let mut best = (0u64, lo as VertexId);
                for (off, c) in counter.slice(range).iter().enumerate() {
                    let cand = (c.load(Ordering::Relaxed), (lo + off) as VertexId);
                    if beats(cand, best) {
                        best = cand;
                    }
                }
                maxima.push(best);
            },
        )
        .into_iter()
        .flatten()
        .collect();
    let mut global = regional[0];
    for &r in &regional[1..] {
        if beats(r, global) {
            global = r;
        }
    }
    (global.1, global.0)
}

/// Vertex with the highest count; ties go to the lowest id.
pub fn parallel_argmax(counter: &Counter, pool: &WorkPool) -> VertexId {
    argmax_with_count(counter, pool).0
}

/// Retires every live set containing `v` and decrements the counts of its
/// members. Returns the number of sets retired.
pub fn decrement_update(counter: &Counter, store: &RRRStore, live: &mut LiveSets, v: VertexId, pool: &WorkPool) -> u64 {
    let indices = &live.live;
    let alive = &live.alive;
    let (covered, touches) = pool
        .run_range(
            indices.len(),
            |_| (0u64, 0u64),
            |(covered, touches), range| {
                for &i in &indices[range] {
                    if !alive[i].load(Ordering::Relaxed) {
                        continue;
                    }
                    let set = store.get(i);
                    if set.probe(v, touches) {
                        alive[i].store(false, Ordering::Relaxed);
                        set.for_each_counted(|m| counter.decrement(m), touches);
                        *covered += 1;
                    }
                }
            },
        )
        .into_iter()
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    live.live_count -= covered as usize;
    live.touches += touches;
    covered
}

/// Retires every live set containing `v`, compacts the live list, and
/// rebuilds the counter from the surviving sets. Observably identical to
/// [`decrement_update`].
pub fn rebuild_update(counter: &Counter, store: &RRRStore, live: &mut LiveSets, v: VertexId, pool: &WorkPool) -> u64 {
    let alive = &live.alive;
    let (covered, mut touches) = {
        let indices = &live.live;
        pool.run_range(
            indices.len(),
            |_| (0u64, 0u64),
            |(covered, touches), range| {
                for &i in &indices[range] {
                    if alive[i].load(Ordering::Relaxed) && store.get(i).probe(v, touches) {
                        alive[i].store(false, Ordering::Relaxed);
                        *covered += 1;
                    }
                }
            },
        )
        .into_iter()
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    live.live.retain(|&i| alive[i].load(Ordering::Relaxed));
    pool.run_range(
        counter.len(),
        |_| (),
        |_, range| {
            for c in counter.slice(range) {
                c.store(0, Ordering::Relaxed);
            }
        },
    );
    touches += accumulate(counter, store, Some(&live.live), pool);
    live.live_count -= covered as usize;
    live.touches += touches;
    covered
}

/// Greedy selection of `k` seeds over `store` with the set-partitioned
/// strategy. `adaptive_threshold` picks the update path per round: rebuild
/// when the seed's count exceeds that share of the live sets.
pub fn select_seeds(
    store: &RRRStore,
    n: usize,
    k: usize,
    pool: &WorkPool,
    adaptive_threshold: f64,
) -> Result<SeedSelection> {
    check_selection_args(n, k, store)?;
    let (counter, touches) = build_counter_counted(store, n, pool);
    let mut out = select_seeds_with_counter(store, counter, k, pool, adaptive_threshold)?;
    out.touches += touches;
    Ok(out)
}

/// [`select_seeds`] starting from an existing counter over all of `store`,
/// such as the one produced by fused sampling.
pub fn select_seeds_with_counter(
    store: &RRRStore,
    counter: Counter,
    k: usize,
    pool: &WorkPool,
    adaptive_threshold: f64,
) -> Result<SeedSelection> {
    let n = counter.len();
    check_selection_args(n, k, store)?;
    if adaptive_threshold.is_nan() || adaptive_threshold < 0.0 {
        return Err(Error::InvalidParameter(format!("adaptive threshold {adaptive_threshold} must be nonnegative")));
    }

    let mut live = LiveSets::all(store);
    let mut selected = vec![false; n];
    let mut seeds = SeedSet::default();
    let (mut rebuild_rounds, mut decrement_rounds) = (0, 0);

    while seeds.len() < k {
        let (mut v, count) = argmax_with_count(&counter, pool);
        let covered = if count == 0 {
            // Every set is covered: fill with the lowest unselected ids.
            v = selected.iter().position(|&s| !s).expect("k <= n") as VertexId;
            0
        } else if count as f64 > adaptive_threshold * live.live_count() as f64 {
            rebuild_rounds += 1;
            rebuild_update(&counter, store, &mut live, v, pool)
        } else {
            decrement_rounds += 1;
            decrement_update(&counter, store, &mut live, v, pool)
        };
        debug_assert_eq!(covered, count);
        selected[v as usize] = true;
        seeds.seeds.push(v);
        seeds.marginal_counts.push(covered);
    }

    Ok(SeedSelection { seeds, counter, touches: live.touches(), rebuild_rounds, decrement_rounds })
}

/// Share of sets in `store` that contain at least one of `seeds`.
pub fn fraction_covered(store: &RRRStore, seeds: &[VertexId]) -> f64 {
    if store.is_empty() {
        return 0.0;
    }
    let covered = store.iter().filter(|s| seeds.iter().any(|&v| s.contains(v))).count();
    covered as f64 / store.len() as f64
}
