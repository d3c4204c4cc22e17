use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::{DiffusionModel, Graph};
use crate::imm::{ImmConfig, ImmResult, Strategy};

/// Wall-clock seconds. These are the only fields that differ between two
/// runs with the same flags and seed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LogTimings {
    pub load_graph: f64,
    pub generate_rrrsets: f64,
    pub find_most_influential: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetStats {
    pub count: usize,
    pub mean_size: f64,
    pub max_size: usize,
    pub mean_coverage_fraction: f64,
}

/// One JSON document per IMM run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub dataset: String,
    pub model: DiffusionModel,
    pub strategy: Strategy,
    pub k: usize,
    pub epsilon: f64,
    pub ell: f64,
    pub ell_adjusted: f64,
    pub workers: usize,
    pub rng_seed: u64,
    pub adaptive_threshold: f64,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub theta: u64,
    pub theta_prime: u64,
    pub lower_bound: f64,
    pub rounds: usize,
    /// Selected seeds as vertex ids of the input file, in selection order.
    pub seeds: Vec<u64>,
    /// Sets newly covered by each seed.
    pub marginal_coverage: Vec<u64>,
    pub estimated_spread: f64,
    pub rrr_sets: SetStats,
    pub timings: LogTimings,
}

/// File name without directories or extension.
pub fn dataset_name(input: &Path) -> String {
    input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

impl RunLog {
    pub fn new(input: &Path, g: &Graph, cfg: &ImmConfig, r: &ImmResult, load_seconds: f64) -> Self {
        RunLog {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            input: input.display().to_string(),
            dataset: dataset_name(input),
            model: cfg.model,
            strategy: cfg.strategy,
            k: cfg.k,
            epsilon: cfg.epsilon,
            ell: cfg.ell,
            ell_adjusted: r.ell,
            workers: cfg.workers,
            rng_seed: cfg.rng_seed,
            adaptive_threshold: cfg.adaptive_threshold,
            num_vertices: g.num_vertices(),
            num_edges: g.num_edges(),
            theta: r.theta,
            theta_prime: r.theta_prime,
            lower_bound: r.lb,
            rounds: r.rounds,
            seeds: r.seeds.seeds.iter().map(|&v| g.original_id(v)).collect(),
            marginal_coverage: r.seeds.marginal_counts.clone(),
            estimated_spread: r.estimated_spread,
            rrr_sets: SetStats {
                count: r.sets_generated,
                mean_size: r.mean_set_size,
                max_size: r.max_set_size,
                mean_coverage_fraction: r.mean_coverage_fraction,
            },
            timings: LogTimings {
                load_graph: load_seconds,
                generate_rrrsets: r.timings.generate_rrrsets,
                find_most_influential: r.timings.find_most_influential,
                total: r.timings.total,
            },
        }
    }

    /// The log with every timing zeroed, for comparing runs.
    pub fn without_timings(&self) -> RunLog {
        RunLog { timings: LogTimings::default(), ..self.clone() }
    }
}
