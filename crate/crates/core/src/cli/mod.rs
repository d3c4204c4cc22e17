//! The `rrflow` command-line tool.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.

mod log;
mod summary;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::graph::{load_edge_list, synth_graph, write_edge_list, DiffusionModel, Graph, SynthKind};
use crate::imm::{run_imm, ImmConfig, Strategy};
use crate::pool::WorkPool;
use crate::sampling::{generate_batch_fused, RRRStore, SamplingConfig};
use crate::selection::DEFAULT_ADAPTIVE_THRESHOLD;

pub use log::{dataset_name, LogTimings, RunLog, SetStats};
pub use summary::{speedup_rows, write_csv, SpeedupRow, CSV_HEADER};

#[derive(Parser, Debug)]
#[command(name = "rrflow", version, about = "Parallel influence maximization with IMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Select k seeds on one graph and write a JSON run log.
    Run(RunArgs),
    /// Write a copy of a graph with random IC or LT weights.
    GenWeights(GenWeightsArgs),
    /// Run IMM for each strategy at doubling worker counts.
    Bench(BenchArgs),
    /// Turn benchmark logs into speedup_{model}.csv tables.
    Summarize(SummarizeArgs),
    /// Print graph size and RRR set coverage statistics.
    Stats(StatsArgs),
    /// Write a synthetic graph as an edge list.
    Synth(SynthArgs),
}

fn parse_model(s: &str) -> Result<DiffusionModel, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let e: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if e > 0.0 && e < 1.0 {
        Ok(e)
    } else {
        Err(format!("epsilon must lie in (0, 1), got {e}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(format!("expected a nonnegative number, got {t}"))
    }
}

fn parse_positive_real(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {x}"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Edge list: `src dst [weight]` per line, `#` comments.
    #[arg(long)]
    pub input: PathBuf,
    /// Diffusion model (ic or lt).
    #[arg(long, value_parser = parse_model)]
    pub model: DiffusionModel,
    /// Treat every line as two directed edges.
    #[arg(long)]
    pub undirected: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ImmArgs {
    /// Seed set size.
    #[arg(long, default_value_t = 50, value_parser = parse_positive)]
    pub k: usize,
    /// Approximation parameter in (0, 1).
    #[arg(long, default_value_t = 0.5, value_parser = parse_epsilon)]
    pub epsilon: f64,
    /// Confidence exponent: success probability at least 1 - n^-ell.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive_real)]
    pub ell: f64,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of live sets above which the counter is rebuilt instead of decremented.
    #[arg(long, default_value_t = DEFAULT_ADAPTIVE_THRESHOLD, value_parser = parse_fraction)]
    pub adaptive_threshold: f64,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub imm: ImmArgs,
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "RRFLOW_WORKERS", value_parser = parse_positive)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "fused", value_parser = parse_strategy)]
    pub strategy: Strategy,
    /// Where to write the JSON run log.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenWeightsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub imm: ImmArgs,
    #[arg(long, value_parser = parse_positive)]
    pub min_workers: usize,
    #[arg(long, value_parser = parse_positive)]
    pub max_workers: usize,
    /// Comma-separated strategies to run.
    #[arg(long, value_delimiter = ',', default_value = "fused,baseline", value_parser = parse_strategy)]
    pub strategies: Vec<Strategy>,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    /// Directory holding run logs (`*.json`).
    #[arg(long)]
    pub indir: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Number of RRR sets to sample.
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "RRFLOW_WORKERS", value_parser = parse_positive)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// erdos_renyi or scc_core.
    #[arg(long)]
    pub kind: SynthKind,
    #[arg(long, value_parser = parse_positive)]
    pub n: usize,
    /// Edge probability (erdos_renyi) or core fraction (scc_core).
    #[arg(long)]
    pub param: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(clap::Error),
    Runtime(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(Cli::command().error(kind, msg))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn load(graph: &GraphArgs) -> Result<(Graph, f64), Failure> {
    let t = Instant::now();
    let g = load_edge_list(&graph.input, !graph.undirected)?;
    Ok((g, t.elapsed().as_secs_f64()))
}

fn imm_config(imm: &ImmArgs, model: DiffusionModel, workers: usize, strategy: Strategy) -> ImmConfig {
    let mut cfg = ImmConfig::new(imm.k, imm.epsilon, model);
    cfg.ell = imm.ell;
    cfg.rng_seed = imm.seed;
    cfg.adaptive_threshold = imm.adaptive_threshold;
    cfg.workers = workers;
    cfg.strategy = strategy;
    cfg
}

fn write_json(path: &Path, log: &RunLog) -> Outcome {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?);
    serde_json::to_writer_pretty(&mut out, log)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Outcome {
    let (g, load_seconds) = load(&args.graph)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let cfg = imm_config(&args.imm, args.graph.model, workers, args.strategy);
    let result = run_imm(&g, &cfg)?;
    let log = RunLog::new(&args.graph.input, &g, &cfg, &result, load_seconds);
    write_json(&args.output, &log)?;
    let seeds: Vec<String> = log.seeds.iter().map(u64::to_string).collect();
    println!("seeds: {}", seeds.join(" "));
    println!("total_time_s: {}", log.timings.total);
    Ok(())
}

fn cmd_gen_weights(args: GenWeightsArgs) -> Outcome {
    let (g, _) = load(&args.graph)?;
    let weighted = match args.graph.model {
        DiffusionModel::IC => g.generate_ic_weights(args.seed),
        DiffusionModel::LT => g.generate_lt_weights(args.seed),
    };
    let mut out = BufWriter::new(File::create(&args.output)?);
    write_edge_list(&weighted, &mut out)?;
    out.flush()?;
    Ok(())
}

/// `min, 2 min, 4 min, ...` up to `max`.
pub fn worker_counts(min: usize, max: usize) -> Vec<usize> {
    std::iter::successors(Some(min), |&w| w.checked_mul(2)).take_while(|&w| w <= max).collect()
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    if args.max_workers < args.min_workers {
        return Err(usage(
            ErrorKind::ValueValidation,
            format!("--max-workers ({}) is below --min-workers ({})", args.max_workers, args.min_workers),
        ));
    }
    if args.strategies.is_empty() {
        return Err(usage(ErrorKind::ValueValidation, "no strategies given"));
    }
    let (g, load_seconds) = load(&args.graph)?;
    fs::create_dir_all(&args.outdir)?;
    let model = args.graph.model;
    for &strategy in &args.strategies {
        for workers in worker_counts(args.min_workers, args.max_workers) {
            let cfg = imm_config(&args.imm, model, workers, strategy);
            let result = run_imm(&g, &cfg)?;
            let log = RunLog::new(&args.graph.input, &g, &cfg, &result, load_seconds);
            let path = args.outdir.join(format!("{strategy}-{model}-w{workers}.json"));
            write_json(&path, &log)?;
            println!("{} {:.6}s", path.display(), log.timings.total);
        }
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> Outcome {
    let mut logs = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(&args.indir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.indir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    entries.sort();
    for path in entries {
        let text = fs::read_to_string(&path)?;
        match serde_json::from_str::<RunLog>(&text) {
            Ok(log) => logs.push(log),
            Err(e) => eprintln!("skipping {}: {e}", path.display()),
        }
    }
    if logs.is_empty() {
        return Err(Failure::Runtime(format!("no run logs found in {}", args.indir.display())));
    }
    let (rows, incomplete) = speedup_rows(&logs);
    for d in incomplete {
        eprintln!("skipping {d}: needs both fused and baseline logs");
    }
    if rows.is_empty() {
        return Err(Failure::Runtime("no dataset has logs for both strategies".into()));
    }
    fs::create_dir_all(&args.outdir)?;
    for (model, rows) in rows {
        let path = args.outdir.join(format!("speedup_{model}.csv"));
        write_csv(&path, &rows)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Outcome {
    let (g, _) = load(&args.graph)?;
    g.check_weights(args.graph.model)?;
    let n = g.num_vertices();
    let pool = WorkPool::new(args.workers.unwrap_or_else(default_workers));
    let mut store = RRRStore::new(n);
    let cfg = SamplingConfig::new(args.graph.model, args.seed);
    generate_batch_fused(&g, &cfg, args.samples, None, &pool, &mut store)?;
    let mean = store.total_members() as f64 / store.len() as f64 / n as f64;
    let max = store.max_set_size() as f64 / n as f64;
    println!("nodes: {n}");
    println!("edges: {}", g.num_edges());
    println!("samples: {}", store.len());
    println!("mean_coverage: {:.4}%", 100.0 * mean);
    println!("max_coverage: {:.4}%", 100.0 * max);
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Outcome {
    let g = synth_graph(args.kind, args.n, args.param, args.seed)?;
    let mut out = BufWriter::new(File::create(&args.output)?);
    write_edge_list(&g, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = match Cli::try_parse_from(args) {
        Ok(cli) => match cli.command {
            Command::Run(a) => cmd_run(a),
            Command::GenWeights(a) => cmd_gen_weights(a),
            Command::Bench(a) => cmd_bench(a),
            Command::Summarize(a) => cmd_summarize(a),
            Command::Stats(a) => cmd_stats(a),
            Command::Synth(a) => cmd_synth(a),
        },
        Err(e) => Err(Failure::Usage(e)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn main() -> ExitCode {
    run(std::env::args_os())
}
