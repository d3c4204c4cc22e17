//! Dynamic job balancing for data-parallel phases.
//!
//! A phase is a list of index ranges (jobs). Jobs are dealt out to per-worker
//! queues in contiguous blocks, which keeps neighbouring ranges on the same
//! worker. A worker drains its own queue first and then claims jobs from the
//! other queues. Every claim is a single `fetch_add` on the queue cursor, so a
//! job is executed exactly once no matter who claims it.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

#[derive(Clone, Debug)]
pub struct WorkPool {
    workers: usize,
}

/// Per-worker accounting for one [`WorkPool::run`] call.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoolStats {
    pub submitted: usize,
    /// Jobs executed by each participating worker.
    pub executed: Vec<usize>,
    /// Sum of job range lengths processed by each participating worker.
    pub items: Vec<usize>,
}

impl PoolStats {
    pub fn total_executed(&self) -> usize {
        self.executed.iter().sum()
    }

    pub fn total_items(&self) -> usize {
        self.items.iter().sum()
    }
}

struct Queue {
    cursor: AtomicUsize,
    end: usize,
}

impl Queue {
    #[inline]
    fn claim(&self) -> Option<usize> {
        if self.cursor.load(Ordering::Relaxed) >= self.end {
            return None;
        }
        let i = self.cursor.fetch_add(1, Ordering::Relaxed);
        (i < self.end).then_some(i)
    }
}

impl WorkPool {
    /// A pool running phases on `workers` threads (at least one).
    pub fn new(workers: usize) -> Self {
        WorkPool { workers: workers.max(1) }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Splits `0..total` into jobs: batches of `max(1, total / (8 * workers))`
    /// items, halving the batch size whenever fewer than `workers` full
    /// batches remain so the tail is spread evenly.
    pub fn plan(&self, total: usize) -> Vec<Range<usize>> {
        let w = self.workers;
        let mut size = (total / (8 * w)).max(1);
        let mut jobs = Vec::new();
        let mut start = 0;
        while start < total {
            let remaining = total - start;
            while size > 1 && remaining < size * w {
                size /= 2;
            }
            let end = (start + size).min(total);
            jobs.push(start..end);
            start = end;
        }
        jobs
    }

    /// Runs `work` over every job. Each worker owns a state built by `init`
    /// (called with the worker index); the states are returned in worker order.
    pub fn run<S, I, F>(&self, jobs: &[Range<usize>], init: I, work: F) -> (Vec<S>, PoolStats)
    where
        S: Send,
        I: Fn(usize) -> S + Sync,
        F: Fn(&mut S, Range<usize>) + Sync,
    {
        let workers = self.workers.min(jobs.len()).max(1);
        let mut stats = PoolStats { submitted: jobs.len(), ..PoolStats::default() };

        if workers == 1 {
            let mut state = init(0);
            let mut items = 0;
            for job in jobs {
                items += job.len();
                work(&mut state, job.clone());
            }
            stats.executed.push(jobs.len());
            stats.items.push(items);
            return (vec![state], stats);
        }

        let queues: Vec<Queue> = (0..workers)
            .map(|t| Queue { cursor: AtomicUsize::new(t * jobs.len() / workers), end: (t + 1) * jobs.len() / workers })
            .collect();

        let drain = |t: usize| {
            let mut state = init(t);
            let (mut executed, mut items) = (0, 0);
            let mut victim = t;
            loop {
                let claimed = (0..workers).find_map(|step| {
                    let q = (victim + step) % workers;
                    queues[q].claim().map(|i| (q, i))
                });
                let Some((q, i)) = claimed else { break };
                victim = q;
                executed += 1;
                items += jobs[i].len();
                work(&mut state, jobs[i].clone());
            }
            (state, executed, items)
        };

        let results: Vec<(S, usize, usize)> = thread::scope(|scope| {
            let handles: Vec<_> = (1..workers).map(|t| scope.spawn(move || drain(t))).collect();
            let mut out = vec![drain(0)];
            out.extend(handles.into_iter().map(|h| h.join().expect("pool worker panicked")));
            out
        });

        let mut states = Vec::with_capacity(workers);
        for (state, executed, items) in results {
            states.push(state);
            stats.executed.push(executed);
            stats.items.push(items);
        }
        (states, stats)
    }

    /// [`WorkPool::run`] over the default plan for `0..total`.
    pub fn run_range<S, I, F>(&self, total: usize, init: I, work: F) -> Vec<S>
    where
        S: Send,
        I: Fn(usize) -> S + Sync,
        F: Fn(&mut S, Range<usize>) + Sync,
    {
        self.run(&self.plan(total), init, work).0
    }
}
