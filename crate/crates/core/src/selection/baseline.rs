//! Vertex-partitioned reference selection.
//!
//! Worker `t` owns the vertex range `[lo_t, hi_t)` and a private counter for
//! it. To count or to retire sets, every worker walks *all* sets: it
//! binary-searches its range inside each sorted set and probes each set for
//! the picked seed. This makes the number of set reads grow with the worker
//! count, which is the behaviour the set-partitioned strategy avoids.

use std::sync::Mutex;

use super::{beats, check_selection_args, Counter, SeedSelection, SeedSet};
use crate::error::Result;
use crate::graph::VertexId;
use crate::pool::WorkPool;
use crate::sampling::RRRStore;

struct Partition {
    lo: VertexId,
    hi: VertexId,
    counts: Vec<u64>,
    /// This worker's private view of which sets are still uncovered.
    alive: Vec<bool>,
    touches: u64,
    covered: u64,
    best: (u64, VertexId),
}

impl Partition {
    fn regional_max(&self) -> (u64, VertexId) {
        let mut best = (0, self.lo);
        for (off, &c) in self.counts.iter().enumerate() {
            let cand = (c, self.lo + off as VertexId);
            if beats(cand, best) {
                best = cand;
            }
        }
        best
    }
}

/// Greedy selection with per-vertex partitioning. Picks the same seeds as
/// [`super::select_seeds`].
pub fn baseline_select(store: &RRRStore, n: usize, k: usize, pool: &WorkPool) -> Result<SeedSelection> {
    check_selection_args(n, k, store)?;
    let parts = pool.workers().min(n);
    let partitions: Vec<Mutex<Partition>> = (0..parts)
        .map(|t| {
            let lo = (t * n / parts) as VertexId;
            let hi = ((t + 1) * n / parts) as VertexId;
            Mutex::new(Partition {
                lo,
                hi,
                counts: vec![0; (hi - lo) as usize],
                alive: vec![true; store.len()],
                touches: 0,
                covered: 0,
                best: (0, lo),
            })
        })
        .collect();
    // One job per partition: the partitions are the unit of work.
    let jobs: Vec<_> = (0..parts).map(|t| t..t + 1).collect();
    let for_each_partition = |f: &(dyn Fn(&mut Partition) + Sync)| {
        pool.run(
            &jobs,
            |_| (),
            |_, r| {
                let mut p = partitions[r.start].lock().expect("partition lock");
                f(&mut p);
            },
        );
    };

    for_each_partition(&|p| {
        let (lo, hi) = (p.lo, p.hi);
        let Partition { counts, touches, .. } = p;
        for set in store.iter() {
            set.for_each_in_range(lo, hi, |v| counts[(v - lo) as usize] += 1, touches);
        }
        p.best = p.regional_max();
    });

    let mut selected = vec![false; n];
    let mut seeds = SeedSet::default();
    while seeds.len() < k {
        let mut best = (0u64, 0 as VertexId);
        for p in &partitions {
            let r = p.lock().expect("partition lock").best;
            if beats(r, best) {
                best = r;
            }
        }
        let (count, mut v) = best;
        let covered = if count == 0 {
            v = selected.iter().position(|&s| !s).expect("k <= n") as VertexId;
            0
        } else {
            for_each_partition(&|p| {
                let (lo, hi) = (p.lo, p.hi);
                let Partition { counts, alive, touches, covered, .. } = p;
                *covered = 0;
                for (i, set) in store.iter().enumerate() {
                    if alive[i] && set.probe(v, touches) {
                        alive[i] = false;
                        *covered += 1;
                        set.for_each_in_range(lo, hi, |m| counts[(m - lo) as usize] -= 1, touches);
                    }
                }
                p.best = p.regional_max();
            });
            partitions[0].lock().expect("partition lock").covered
        };
        debug_assert_eq!(covered, count);
        selected[v as usize] = true;
        seeds.seeds.push(v);
        seeds.marginal_counts.push(covered);
    }

    let mut counts = Vec::with_capacity(n);
    let mut touches = 0;
    for p in partitions {
        let p = p.into_inner().expect("partition lock");
        counts.extend_from_slice(&p.counts);
        touches += p.touches;
    }
    Ok(SeedSelection { seeds, counter: Counter::from_counts(&counts), touches, rebuild_rounds: 0, decrement_rounds: k })
}
