//! Ground-truth spread computations for small graphs.
//!
//! Exact spreads enumerate every live-edge world of the model. Under IC each
//! edge is live independently with its weight. Under LT each vertex keeps at
//! most one in-edge, chosen with probability equal to its weight, and none
//! with the residual. The expected spread is the probability-weighted number
//! of vertices reachable from the seeds. Monte-Carlo estimates simulate the
//! diffusion forward.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiffusionModel, Graph, VertexId};

/// Largest edge count accepted by [`exact_spread_ic`].
pub const IC_EDGE_LIMIT: usize = 20;
/// Largest `prod_v (indeg(v) + 1)` accepted by [`exact_spread_lt`].
pub const LT_WORLD_LIMIT: u128 = 1 << 20;
/// Largest number of candidate subsets examined by [`brute_force_opt`].
pub const BRUTE_FORCE_LIMIT: u128 = 100_000;
/// Largest vertex count for [`exact_spread_table`].
pub const TABLE_VERTEX_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub value: f64,
    pub method: SpreadMethod,
    /// Number of simulations (0 for exact values).
    pub trials: u64,
    /// Standard error of `value` (0 for exact values).
    pub stderr: f64,
}

fn check_seeds(g: &Graph, seeds: &[VertexId]) -> Result<()> {
    match seeds.iter().find(|&&s| s as usize >= g.num_vertices()) {
        Some(s) => Err(Error::InvalidParameter(format!("seed {s} is not a vertex"))),
        None => Ok(()),
    }
}

/// Number of live-edge worlds of `g` under `model`, saturating at `u128::MAX`.
pub fn world_count(g: &Graph, model: DiffusionModel) -> u128 {
    match model {
        DiffusionModel::IC => 1u128.checked_shl(g.num_edges() as u32).unwrap_or(u128::MAX),
        DiffusionModel::LT => (0..g.num_vertices() as VertexId)
            .map(|v| g.in_degree(v) as u128 + 1)
            .fold(1u128, |acc, d| acc.saturating_mul(d)),
    }
}

/// Fails unless exact enumeration of `g` under `model` is within the guards.
pub fn check_enumerable(g: &Graph, model: DiffusionModel) -> Result<()> {
    match model {
        DiffusionModel::IC if g.num_edges() > IC_EDGE_LIMIT => {
            Err(Error::EnumerationTooLarge { required: world_count(g, model), limit: 1 << IC_EDGE_LIMIT })
        }
        DiffusionModel::LT if world_count(g, model) > LT_WORLD_LIMIT => {
            Err(Error::EnumerationTooLarge { required: world_count(g, model), limit: LT_WORLD_LIMIT })
        }
        _ => Ok(()),
    }
}

/// Calls `f(probability, live_edges)` for every world with nonzero probability.
fn for_each_world(g: &Graph, model: DiffusionModel, mut f: impl FnMut(f64, &[(VertexId, VertexId)])) -> Result<()> {
    check_enumerable(g, model)?;
    let mut live = Vec::new();
    match model {
        DiffusionModel::IC => {
            let edges: Vec<_> = g.edges().collect();
            for mask in 0u32..(1u32 << edges.len()) {
                live.clear();
                let mut prob = 1.0f64;
                for (i, &(u, v, p)) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        prob *= p as f64;
                        live.push((u, v));
                    } else {
                        prob *= 1.0 - p as f64;
                    }
                }
                if prob > 0.0 {
                    f(prob, &live);
                }
            }
        }
        DiffusionModel::LT => {
            // Mixed-radix counter over the vertices with in-edges; digit
            // `indeg` means "no in-edge".
            let vs: Vec<VertexId> = (0..g.num_vertices() as VertexId).filter(|&v| g.in_degree(v) > 0).collect();
            let residual: Vec<f64> = vs.iter().map(|&v| (1.0 - g.in_weight_sum(v)).max(0.0)).collect();
            let mut digits = vec![0usize; vs.len()];
            loop {
                live.clear();
                let mut prob = 1.0f64;
                for (j, &v) in vs.iter().enumerate() {
                    let (sources, weights) = g.in_edges(v);
                    match sources.get(digits[j]) {
                        Some(&u) => {
                            prob *= weights[digits[j]] as f64;
                            live.push((u, v));
                        }
                        None => prob *= residual[j],
                    }
                }
                if prob > 0.0 {
                    f(prob, &live);
                }
                let mut j = 0;
                loop {
                    if j == vs.len() {
                        return Ok(());
                    }
                    digits[j] += 1;
                    if digits[j] <= g.in_degree(vs[j]) {
                        break;
                    }
                    digits[j] = 0;
                    j += 1;
                }
            }
        }
    }
    Ok(())
}

/// Marks everything reachable from the already-marked vertices over `live`.
fn close_over(active: &mut [bool], live: &[(VertexId, VertexId)]) {
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in live {
            if active[u as usize] && !active[v as usize] {
                active[v as usize] = true;
                changed = true;
            }
        }
    }
}

fn exact_spread(g: &Graph, seeds: &[VertexId], model: DiffusionModel) -> Result<SpreadEstimate> {
    check_seeds(g, seeds)?;
    let mut base = vec![false; g.num_vertices()];
    for &s in seeds {
        base[s as usize] = true;
    }
    let mut active = base.clone();
    let mut value = 0.0;
    for_each_world(g, model, |prob, live| {
        active.copy_from_slice(&base);
        close_over(&mut active, live);
        value += prob * active.iter().filter(|&&a| a).count() as f64;
    })?;
    Ok(SpreadEstimate { value, method: SpreadMethod::ExactEnumeration, trials: 0, stderr: 0.0 })
}

/// Exact IC spread of `seeds` by enumerating all `2^|E|` edge outcomes.
pub fn exact_spread_ic(g: &Graph, seeds: &[VertexId]) -> Result<SpreadEstimate> {
    exact_spread(g, seeds, DiffusionModel::IC)
}

/// Exact LT spread of `seeds` by enumerating every per-vertex in-edge choice.
pub fn exact_spread_lt(g: &Graph, seeds: &[VertexId]) -> Result<SpreadEstimate> {
    exact_spread(g, seeds, DiffusionModel::LT)
}

/// Dispatches to [`exact_spread_ic`] or [`exact_spread_lt`].
pub fn exact_spread_model(g: &Graph, seeds: &[VertexId], model: DiffusionModel) -> Result<SpreadEstimate> {
    exact_spread(g, seeds, model)
}

/// Exact spread of every vertex subset, indexed by bitmask (`n <= 16`).
pub fn exact_spread_table(g: &Graph, model: DiffusionModel) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    if n > TABLE_VERTEX_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "spread table needs at most {TABLE_VERTEX_LIMIT} vertices, got {n}"
        )));
    }
    let mut table = vec![0.0; 1 << n];
    let mut reach = vec![0u32; n];
    let mut union = vec![0u32; 1 << n];
    for_each_world(g, model, |prob, live| {
        for (v, r) in reach.iter_mut().enumerate() {
            *r = 1 << v;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for &(u, v) in live {
                let merged = reach[u as usize] | reach[v as usize];
                if merged != reach[u as usize] {
                    reach[u as usize] = merged;
                    changed = true;
                }
            }
        }
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            union[mask] = union[mask & (mask - 1)] | reach[low];
            table[mask] += prob * union[mask].count_ones() as f64;
        }
    })?;
    Ok(table)
}

/// One forward diffusion from `seeds`. Leaves the active flags in `active`
/// and returns the number of active vertices.
fn simulate(
    g: &Graph,
    model: DiffusionModel,
    seeds: &[VertexId],
    rng: &mut Xoshiro256PlusPlus,
    active: &mut [bool],
    scratch: &mut Scratch,
) -> usize {
    active.fill(false);
    scratch.frontier.clear();
    for &s in seeds {
        if !active[s as usize] {
            active[s as usize] = true;
            scratch.frontier.push(s);
        }
    }
    if model == DiffusionModel::LT {
        // Thresholds in (0, 1] so that a vertex with no active in-neighbour stays inactive.
        for t in scratch.threshold.iter_mut() {
            *t = 1.0 - rng.random::<f64>();
        }
        scratch.incoming.fill(0.0);
    }
    let mut head = 0;
    while head < scratch.frontier.len() {
        let u = scratch.frontier[head];
        head += 1;
        let (targets, weights) = g.out_edges(u);
        for (&v, &w) in targets.iter().zip(weights) {
            if active[v as usize] {
                continue;
            }
            let fires = match model {
                DiffusionModel::IC => rng.random::<f32>() < w,
                DiffusionModel::LT => {
                    scratch.incoming[v as usize] += w as f64;
                    scratch.incoming[v as usize] >= scratch.threshold[v as usize]
                }
            };
            if fires {
                active[v as usize] = true;
                scratch.frontier.push(v);
            }
        }
    }
    scratch.frontier.len()
}

struct Scratch {
    frontier: Vec<VertexId>,
    threshold: Vec<f64>,
    incoming: Vec<f64>,
}

impl Scratch {
    fn new(g: &Graph, model: DiffusionModel) -> Self {
        let n = if model == DiffusionModel::LT { g.num_vertices() } else { 0 };
        Scratch { frontier: Vec::new(), threshold: vec![0.0; n], incoming: vec![0.0; n] }
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    Ok(())
}

/// Monte-Carlo spread estimate from `trials` forward simulations.
pub fn mc_spread(
    g: &Graph,
    seeds: &[VertexId],
    model: DiffusionModel,
    trials: u64,
    rng_seed: u64,
) -> Result<SpreadEstimate> {
    check_seeds(g, seeds)?;
    check_trials(trials)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);
    let mut active = vec![false; g.num_vertices()];
    let mut scratch = Scratch::new(g, model);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let c = simulate(g, model, seeds, &mut rng, &mut active, &mut scratch) as f64;
        sum += c;
        sum_sq += c * c;
    }
    let t = trials as f64;
    let mean = sum / t;
    let stderr = if trials > 1 {
        let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    Ok(SpreadEstimate { value: mean, method: SpreadMethod::MonteCarlo, trials, stderr })
}

/// Fraction of `trials` forward simulations from `sources` that activate `target`.
pub fn activation_probability(
    g: &Graph,
    sources: &[VertexId],
    target: VertexId,
    model: DiffusionModel,
    trials: u64,
    rng_seed: u64,
) -> Result<f64> {
    check_seeds(g, sources)?;
    check_seeds(g, &[target])?;
    check_trials(trials)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);
    let mut active = vec![false; g.num_vertices()];
    let mut scratch = Scratch::new(g, model);
    let mut hits = 0u64;
    for _ in 0..trials {
        simulate(g, model, sources, &mut rng, &mut active, &mut scratch);
        hits += active[target as usize] as u64;
    }
    Ok(hits as f64 / trials as f64)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c = 1u128;
    for i in 0..k {
        // c * (n - i) / (i + 1) stays integral at every step.
        c = match c.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// The exact-spread-maximizing `k`-subset and its spread. Among subsets whose
/// spreads agree within `1e-12` the lexicographically smallest wins.
pub fn brute_force_opt(g: &Graph, k: usize, model: DiffusionModel) -> Result<(Vec<VertexId>, f64)> {
    let n = g.num_vertices();
    if k == 0 || k > n {
        return Err(Error::KExceedsN { k, n });
    }
    let subsets = binomial(n, k);
    if subsets > BRUTE_FORCE_LIMIT {
        return Err(Error::EnumerationTooLarge { required: subsets, limit: BRUTE_FORCE_LIMIT });
    }
    check_enumerable(g, model)?;

    let mut best: Option<(Vec<VertexId>, f64)> = None;
    let mut comb: Vec<VertexId> = (0..k as VertexId).collect();
    loop {
        let value = exact_spread(g, &comb, model)?.value;
        if best.as_ref().is_none_or(|(_, b)| value > b + 1e-12) {
            best = Some((comb.clone(), value));
        }
        // Next combination in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| (comb[i] as usize) < n - k + i) else {
            break;
        };
        comb[i] += 1;
        for j in i + 1..k {
            comb[j] = comb[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one subset"))
}
