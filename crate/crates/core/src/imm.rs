//! The two-phase IMM workflow.
//!
//! The sampling phase doubles the number of RRR sets round by round until
//! the greedy seeds cover enough sets to certify a lower bound on the optimal
//! spread. That bound fixes the final number of sets θ. The store is topped
//! up to θ and the seeds are selected once more. Sets and (for the fused
//! strategy) the occurrence counter carry over between rounds and are never
//! regenerated.

use std::f64::consts::{E, LN_2, SQRT_2};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiffusionModel, Graph};
use crate::pool::WorkPool;
use crate::sampling::{generate_batch_fused, RRRStore, ReprPolicy, SamplingConfig};
use crate::selection::{
    baseline_select, select_seeds_with_counter, Counter, SeedSelection, SeedSet, DEFAULT_ADAPTIVE_THRESHOLD,
};

/// How sets are generated and seeds selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Fused sampling and counting with set-partitioned selection.
    Fused,
    /// Separate sampling and vertex-partitioned selection.
    Baseline,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Fused => "fused",
            Strategy::Baseline => "baseline",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fused" => Ok(Strategy::Fused),
            "baseline" => Ok(Strategy::Baseline),
            other => Err(Error::InvalidParameter(format!("unknown strategy `{other}`"))),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImmConfig {
    pub k: usize,
    pub epsilon: f64,
    pub model: DiffusionModel,
    pub workers: usize,
    pub rng_seed: u64,
    /// Confidence exponent before the two-phase adjustment (see [`adjusted_ell`]).
    pub ell: f64,
    pub adaptive_threshold: f64,
    pub strategy: Strategy,
    pub repr: ReprPolicy,
}

impl ImmConfig {
    pub fn new(k: usize, epsilon: f64, model: DiffusionModel) -> Self {
        ImmConfig {
            k,
            epsilon,
            model,
            workers: 1,
            rng_seed: 0,
            ell: 1.0,
            adaptive_threshold: DEFAULT_ADAPTIVE_THRESHOLD,
            strategy: Strategy::Fused,
            repr: ReprPolicy::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon {} must lie in (0, 1)", self.epsilon)));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("seed budget k must be at least 1".into()));
        }
        if self.k > n {
            return Err(Error::KExceedsN { k: self.k, n });
        }
        if self.workers == 0 {
            return Err(Error::InvalidParameter("at least one worker is required".into()));
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(Error::InvalidParameter(format!("ell {} must be positive", self.ell)));
        }
        if !(self.adaptive_threshold >= 0.0 && self.adaptive_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "adaptive threshold {} must be a nonnegative fraction",
                self.adaptive_threshold
            )));
        }
        Ok(())
    }
}

/// Wall-clock seconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub generate_rrrsets: f64,
    pub find_most_influential: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImmResult {
    pub seeds: SeedSet,
    pub theta: u64,
    pub theta_prime: u64,
    pub lb: f64,
    /// Confidence exponent actually used.
    pub ell: f64,
    pub rounds: usize,
    pub timings: Timings,
    pub sets_generated: usize,
    pub mean_set_size: f64,
    pub max_set_size: usize,
    pub mean_coverage_fraction: f64,
    /// Estimated spread `n * F(S)` of the returned seeds over the final sets.
    pub estimated_spread: f64,
    pub selection_touches: u64,
}

/// `ln C(n, k)` as `sum_{j=n-k+1..n} ln j - sum_{j=1..k} ln j`.
pub fn log_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    let top: f64 = ((n - k + 1)..=n).map(|j| (j as f64).ln()).sum();
    let bottom: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    top - bottom
}

/// `l * (1 + ln 2 / ln n)`, so the two phases together fail with
/// probability at most `n^-l`. Unchanged for `n <= 1`.
pub fn adjusted_ell(ell: f64, n: usize) -> f64 {
    if n <= 1 {
        ell
    } else {
        ell * (1.0 + LN_2 / (n as f64).ln())
    }
}

/// Number of sampling rounds: `floor(log2 n) - 1`, and exactly one for `n <= 4`.
pub fn sampling_rounds(n: usize) -> usize {
    if n <= 4 {
        1
    } else {
        (n.ilog2() as usize - 1).max(1)
    }
}

/// Guessed spread for round `i`: `n / 2^i`, or `max(1, n/2)` for `n <= 4`.
pub fn round_target(n: usize, i: usize) -> f64 {
    if n <= 4 {
        (n as f64 / 2.0).max(1.0)
    } else {
        n as f64 / 2f64.powi(i as i32)
    }
}

fn ln_log2(n: usize) -> f64 {
    (n as f64).log2().max(1.0).ln()
}

/// `λ' = (2 + 2ε'/3)(ln C(n,k) + l ln n + ln log2 n) n / ε'²` with `ε' = √2 ε`.
pub fn lambda_prime(n: usize, k: usize, epsilon: f64, ell: f64) -> f64 {
    let eps_p = SQRT_2 * epsilon;
    let nf = n as f64;
    (2.0 + 2.0 * eps_p / 3.0) * (log_binomial(n, k) + ell * nf.ln() + ln_log2(n)) * nf / (eps_p * eps_p)
}

/// Unrounded θ_i = λ' / x_i.
pub fn theta_for_round_real(n: usize, k: usize, epsilon: f64, ell: f64, i: usize) -> f64 {
    lambda_prime(n, k, epsilon, ell) / round_target(n, i)
}

/// Number of sets required in sampling round `i` (1-based).
pub fn theta_for_round(n: usize, k: usize, epsilon: f64, ell: f64, i: usize) -> Result<u64> {
    if k > n {
        return Err(Error::KExceedsN { k, n });
    }
    if i == 0 || i > sampling_rounds(n) {
        return Err(Error::InvalidParameter(format!("round {i} outside 1..={} for n = {n}", sampling_rounds(n))));
    }
    Ok((theta_for_round_real(n, k, epsilon, ell, i).ceil() as u64).max(1))
}

/// `λ* = 2n((1 - 1/e)α + β)² / ε²` with `α = √(l ln n + ln 2)` and
/// `β = √((1 - 1/e)(ln C(n,k) + l ln n + ln 2))`.
pub fn lambda_star(n: usize, k: usize, epsilon: f64, ell: f64) -> f64 {
    let nf = n as f64;
    let c = 1.0 - 1.0 / E;
    let alpha = (ell * nf.ln() + LN_2).sqrt();
    let beta = (c * (log_binomial(n, k) + ell * nf.ln() + LN_2)).sqrt();
    2.0 * nf * (c * alpha + beta).powi(2) / (epsilon * epsilon)
}

/// Final number of sets, `ceil(λ* / lb)`.
pub fn set_theta(n: usize, k: usize, epsilon: f64, ell: f64, lb: f64) -> u64 {
    assert!(lb >= 1.0, "lower bound must be at least 1");
    ((lambda_star(n, k, epsilon, ell) / lb).ceil() as u64).max(1)
}

/// State carried from the sampling phase into the final selection.
pub struct SamplingOutcome {
    pub store: RRRStore,
    /// Occurrence counter over `store` (fused strategy only).
    pub counter: Option<Counter>,
    pub lb: f64,
    pub theta_prime: u64,
    pub rounds: usize,
    pub timings: Timings,
}

struct Engine<'a> {
    g: &'a Graph,
    cfg: &'a ImmConfig,
    pool: WorkPool,
    sampling: SamplingConfig,
    timings: Timings,
}

impl Engine<'_> {
    fn top_up(&mut self, store: &mut RRRStore, counter: Option<&Counter>, target: u64) -> Result<()> {
        let missing = (target as usize).saturating_sub(store.len());
        let t = Instant::now();
        let r = generate_batch_fused(self.g, &self.sampling, missing, counter, &self.pool, store);
        self.timings.generate_rrrsets += t.elapsed().as_secs_f64();
        r
    }

    fn select(&mut self, store: &RRRStore, counter: Option<Counter>) -> Result<SeedSelection> {
        let t = Instant::now();
        let n = self.g.num_vertices();
        let out = match counter {
            Some(c) => select_seeds_with_counter(store, c, self.cfg.k, &self.pool, self.cfg.adaptive_threshold),
            None => baseline_select(store, n, self.cfg.k, &self.pool),
        };
        self.timings.find_most_influential += t.elapsed().as_secs_f64();
        out
    }

    fn sampling_phase(&mut self, ell: f64) -> Result<SamplingOutcome> {
        let n = self.g.num_vertices();
        let (k, eps) = (self.cfg.k, self.cfg.epsilon);
        let eps_p = SQRT_2 * eps;
        let mut store = RRRStore::new(n);
        let counter = (self.cfg.strategy == Strategy::Fused).then(|| Counter::new(n));

        let rounds = sampling_rounds(n);
        let mut theta_prime = 0;
        let mut last_fraction = 0.0;
        for i in 1..=rounds {
            theta_prime = theta_for_round(n, k, eps, ell, i)?;
            self.top_up(&mut store, counter.as_ref(), theta_prime)?;
            let sel = self.select(&store, counter.clone())?;
            last_fraction = sel.seeds.covered() as f64 / store.len() as f64;
            let estimate = n as f64 * last_fraction;
            if estimate >= (1.0 + eps_p) * round_target(n, i) {
                return Ok(SamplingOutcome {
                    store,
                    counter,
                    lb: estimate / (1.0 + eps_p),
                    theta_prime,
                    rounds: i,
                    timings: self.timings,
                });
            }
        }
        let lb = (n as f64 * last_fraction / (1.0 + eps_p)).max(k as f64);
        Ok(SamplingOutcome { store, counter, lb, theta_prime, rounds, timings: self.timings })
    }
}

fn engine<'a>(g: &'a Graph, cfg: &'a ImmConfig) -> Result<Engine<'a>> {
    cfg.validate(g.num_vertices())?;
    g.check_weights(cfg.model)?;
    Ok(Engine {
        g,
        cfg,
        pool: WorkPool::new(cfg.workers),
        sampling: SamplingConfig { model: cfg.model, rng_seed: cfg.rng_seed, repr: cfg.repr },
        timings: Timings::default(),
    })
}

/// Runs only the sampling phase and returns the certified lower bound with
/// the sets gathered so far.
pub fn sampling_phase(g: &Graph, cfg: &ImmConfig) -> Result<SamplingOutcome> {
    let mut e = engine(g, cfg)?;
    e.sampling_phase(adjusted_ell(cfg.ell, g.num_vertices()))
}

/// Full IMM: sampling phase, top-up to θ, final seed selection.
pub fn run_imm(g: &Graph, cfg: &ImmConfig) -> Result<ImmResult> {
    let start = Instant::now();
    let n = g.num_vertices();
    let mut e = engine(g, cfg)?;
    let ell = adjusted_ell(cfg.ell, n);

    let SamplingOutcome { mut store, counter, lb, theta_prime, rounds, .. } = e.sampling_phase(ell)?;
    let theta = set_theta(n, cfg.k, cfg.epsilon, ell, lb);
    if (store.len() as u64) < theta {
        e.top_up(&mut store, counter.as_ref(), theta)?;
    }
    let selection = e.select(&store, counter)?;

    let mut timings = e.timings;
    timings.total = start.elapsed().as_secs_f64();
    let sets = store.len();
    let mean_set_size = if sets == 0 { 0.0 } else { store.total_members() as f64 / sets as f64 };
    Ok(ImmResult {
        estimated_spread: n as f64 * selection.seeds.covered() as f64 / sets.max(1) as f64,
        seeds: selection.seeds,
        theta,
        theta_prime,
        lb,
        ell,
        rounds,
        timings,
        sets_generated: sets,
        mean_set_size,
        max_set_size: store.max_set_size(),
        mean_coverage_fraction: mean_set_size / n as f64,
        selection_touches: selection.touches,
    })
}
