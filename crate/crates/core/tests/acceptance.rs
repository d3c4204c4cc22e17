//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 7 8`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;

use common::{random_store, recount, rng, tiny_graph};
use rrflow::cli::RunLog;
use rrflow::graph::{synth_graph, DiffusionModel, Graph, SynthKind, VertexId};
use rrflow::imm::{run_imm, ImmConfig, Strategy};
use rrflow::oracle::{activation_probability, brute_force_opt, exact_spread_model, exact_spread_table};
use rrflow::pool::WorkPool;
use rrflow::sampling::{
    generate_batch_fused, generate_rrr, make_repr_with, RRRStore, ReprPolicy, SamplerState, SamplingConfig,
};
use rrflow::selection::{baseline_select, build_counter, fraction_covered, select_seeds, select_seeds_with_counter};

const MODELS: [DiffusionModel; 2] = [DiffusionModel::IC, DiffusionModel::LT];

enum Status {
    Pass,
    Fail,
    NotRun,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { status: Status::Pass, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { status: Status::Fail, detail: detail.into() }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn within_budget(start: Instant, budget: Duration, out: Outcome) -> Outcome {
    let took = start.elapsed();
    let detail = format!("{} [{:.1}s, budget {}s]", out.detail, took.as_secs_f64(), budget.as_secs());
    match out.status {
        Status::Pass if took > budget => fail(detail),
        status => Outcome { status, detail },
    }
}

struct Fixture {
    store: RRRStore,
    n: usize,
    k: usize,
}

fn fixtures(count: usize, seed: u64) -> Vec<Fixture> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=1000);
            let theta = r.random_range(1..=10_000);
            let store = random_store(&mut r, n, theta);
            let k = r.random_range(1..=n.min(64));
            Fixture { store, n, k }
        })
        .collect()
}

/// Counter exactness.
fn c1() -> Outcome {
    let start = Instant::now();
    let fx = fixtures(50, 1);
    for (i, f) in fx.iter().enumerate() {
        let expected = recount(&f.store);
        for w in [1, 2, 4, 8] {
            if build_counter(&f.store, f.n, &WorkPool::new(w)).to_vec() != expected {
                return fail(format!("fixture {i} differs from the serial recount at {w} workers"));
            }
        }
    }
    within_budget(start, Duration::from_secs(30), pass("50 fixtures, workers 1/2/4/8 equal the serial recount"))
}

/// Update-strategy equivalence.
fn c2() -> Outcome {
    for (i, f) in fixtures(50, 1).iter().enumerate() {
        let pool = WorkPool::new(4);
        let runs: Vec<_> =
            [0.0, 0.25, 1.0].iter().map(|&t| select_seeds(&f.store, f.n, f.k, &pool, t).unwrap()).collect();
        for r in &runs[1..] {
            if r.seeds != runs[0].seeds || r.counter != runs[0].counter {
                return fail(format!("fixture {i}: thresholds disagree"));
            }
        }
    }
    pass("50 fixtures, thresholds 0/0.25/1 give identical seed sets and counters")
}

/// Cross-strategy greedy equivalence.
fn c3() -> Outcome {
    let mut r = rng(3);
    for (i, f) in fixtures(100, 2).iter().enumerate() {
        let w = [1, 2, 3, 4, 8][r.random_range(0..5)];
        let a = baseline_select(&f.store, f.n, f.k, &WorkPool::new(w)).unwrap();
        let b = select_seeds(&f.store, f.n, f.k, &WorkPool::new(w), 0.25).unwrap();
        if a.seeds != b.seeds {
            return fail(format!("fixture {i} ({w} workers): seed sets differ"));
        }
    }
    pass("100 fixtures, baseline and set-partitioned selection agree")
}

/// Five hand-built graphs on at most five vertices.
fn ris_graphs() -> Vec<Graph> {
    let g = |n, e: &[(u32, u32, f32)]| Graph::from_edges(n, e).unwrap();
    vec![
        g(2, &[(0, 1, 0.5)]),
        g(3, &[(0, 1, 0.6), (1, 2, 0.7)]),
        g(3, &[(0, 2, 0.3), (1, 2, 0.4), (2, 0, 0.5)]),
        g(4, &[(0, 1, 0.5), (0, 2, 0.4), (1, 3, 0.45), (2, 3, 0.35), (3, 0, 0.2)]),
        g(5, &[(0, 1, 0.7), (1, 2, 0.5), (2, 3, 0.6), (3, 4, 0.4), (4, 0, 0.3), (0, 3, 0.2), (2, 4, 0.25)]),
    ]
}

/// RIS lemma.
fn c4() -> Outcome {
    const N: u64 = 100_000;
    let start = Instant::now();
    let (mut compared, mut worst) = (0, 0.0f64);
    for (gi, g) in ris_graphs().iter().enumerate() {
        let n = g.num_vertices();
        for model in MODELS {
            g.check_weights(model).unwrap();
            let mut st = SamplerState::new(n, 100 + gi as u64);
            for u in 0..n as VertexId {
                let mut hits = vec![0u64; n];
                st.reseed(u as u64);
                for _ in 0..N {
                    generate_rrr(g, model, u, &mut st).for_each(|v| hits[v as usize] += 1);
                }
                for v in 0..n as VertexId {
                    let p1 = hits[v as usize] as f64 / N as f64;
                    let seed = 1000 * gi as u64 + 10 * u as u64 + v as u64;
                    let p2 = activation_probability(g, &[v], u, model, N, seed).unwrap();
                    let se = (p1 * (1.0 - p1) / N as f64 + p2 * (1.0 - p2) / N as f64).sqrt();
                    let gap = (p1 - p2).abs();
                    if se == 0.0 {
                        if gap != 0.0 {
                            return fail(format!("graph {gi} {model} u={u} v={v}: {p1} vs {p2} with zero variance"));
                        }
                        continue;
                    }
                    compared += 1;
                    worst = worst.max(gap / se);
                    if gap > 3.0 * se {
                        return fail(format!("graph {gi} {model} u={u} v={v}: {p1} vs {p2}, {:.2} stderr", gap / se));
                    }
                }
            }
        }
    }
    let out = pass(format!("{compared} random pairs within 3 stderr (worst {worst:.2}), deterministic pairs exact"));
    within_budget(start, Duration::from_secs(120), out)
}

/// Approximation quality.
fn c5() -> Outcome {
    let start = Instant::now();
    let eps = 0.1;
    let ratio = 1.0 - 1.0 / std::f64::consts::E - eps;
    let mut r = rng(5);
    let (mut good, mut worst) = (0, f64::INFINITY);
    for run in 0..100 {
        let model = MODELS[run % 2];
        let n = r.random_range(3..=7);
        let g = tiny_graph(&mut r, n, 0.35, model);
        let mut cfg = ImmConfig::new(2, eps, model);
        cfg.rng_seed = run as u64;
        cfg.workers = 2;
        let seeds = run_imm(&g, &cfg).unwrap().seeds.seeds;
        let got = exact_spread_model(&g, &seeds, model).unwrap().value;
        let (_, opt) = brute_force_opt(&g, 2, model).unwrap();
        worst = worst.min(got / opt);
        if got >= ratio * opt - 1e-9 {
            good += 1;
        }
    }
    let out = check(good >= 95, format!("{good}/100 runs reach (1-1/e-0.1) OPT, worst ratio {worst:.4} (need 95)"));
    within_budget(start, Duration::from_secs(300), out)
}

/// Unbiased coverage estimator.
fn c6() -> Outcome {
    const N: usize = 10_000;
    let mut r = rng(6);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (gi, g) in ris_graphs().iter().enumerate() {
        let n = g.num_vertices();
        for model in MODELS {
            let size = r.random_range(1..n.max(2)).min(n);
            let seeds: Vec<VertexId> = index::sample(&mut r, n, size).into_iter().map(|v| v as VertexId).collect();
            let sigma = exact_spread_model(g, &seeds, model).unwrap().value;
            let mut store = RRRStore::new(n);
            let cfg = SamplingConfig::new(model, 60 + gi as u64);
            generate_batch_fused(g, &cfg, N, None, &WorkPool::new(2), &mut store).unwrap();
            let estimate = n as f64 * fraction_covered(&store, &seeds);
            let p = sigma / n as f64;
            let tol = 3.0 * n as f64 * (p * (1.0 - p) / N as f64).sqrt();
            cases += 1;
            if tol > 0.0 {
                worst = worst.max((estimate - sigma).abs() / (tol / 3.0));
            }
            if (estimate - sigma).abs() > tol + 1e-9 {
                return fail(format!("graph {gi} {model} S={seeds:?}: n F = {estimate}, sigma = {sigma}, tol {tol}"));
            }
        }
    }
    pass(format!("{cases} fixtures within 3 binomial sd (worst {worst:.2} sd)"))
}

fn scc_core_graph() -> Graph {
    synth_graph(SynthKind::SccCore, 100_000, 0.3, 7).unwrap().generate_ic_weights(7)
}

/// Memory-touch reduction.
fn c7() -> Outcome {
    let g = scc_core_graph();
    let n = g.num_vertices();
    let pool = WorkPool::new(8);
    let mut store = RRRStore::new(n);
    let cfg = SamplingConfig::new(DiffusionModel::IC, 7);
    generate_batch_fused(&g, &cfg, 50_000, None, &pool, &mut store).unwrap();
    let counter = build_counter(&store, n, &pool);
    let fused = select_seeds_with_counter(&store, counter, 50, &pool, 0.25).unwrap();
    let baseline = baseline_select(&store, n, 50, &pool).unwrap();
    if fused.seeds != baseline.seeds {
        return fail("strategies picked different seeds");
    }
    let ratio = baseline.touches as f64 / fused.touches as f64;
    check(
        ratio >= 5.0,
        format!(
            "touches baseline {} / fused {} = {ratio:.2}x at 8 workers, k = 50, mean set size {:.1} (need 5x)",
            baseline.touches,
            fused.touches,
            store.total_members() as f64 / store.len() as f64
        ),
    )
}

fn best_total(g: &Graph, strategy: Strategy, workers: usize) -> f64 {
    (0..2)
        .map(|rep| {
            let mut cfg = ImmConfig::new(50, 0.5, DiffusionModel::IC);
            cfg.workers = workers;
            cfg.strategy = strategy;
            cfg.rng_seed = rep;
            run_imm(g, &cfg).unwrap().timings.total
        })
        .fold(f64::INFINITY, f64::min)
}

/// Scaling smoke: 8a (fused at 8 vs 1 worker) and 8b (fused vs baseline at 8).
fn c8() -> Vec<(&'static str, Outcome)> {
    let g = scc_core_graph();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let fused8 = best_total(&g, Strategy::Fused, 8);
    let a = if cores >= 8 {
        let fused1 = best_total(&g, Strategy::Fused, 1);
        let s = fused1 / fused8;
        check(s >= 2.0, format!("fused 1 worker {fused1:.3}s / 8 workers {fused8:.3}s = {s:.2}x (need 2x)"))
    } else {
        Outcome {
            status: Status::NotRun,
            detail: format!("host exposes {cores} hardware thread(s); 8-worker scaling needs at least 8"),
        }
    };
    let base8 = best_total(&g, Strategy::Baseline, 8);
    let s = base8 / fused8;
    let b = check(s >= 1.5, format!("baseline {base8:.3}s / fused {fused8:.3}s = {s:.2}x at 8 workers (need 1.5x)"));
    vec![("8a", a), ("8b", b)]
}

fn rrflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rrflow")).args(args).env_remove("RRFLOW_WORKERS").output().unwrap()
}

fn write_graph(dir: &Path) -> String {
    let g = synth_graph(SynthKind::SccCore, 2_000, 0.3, 3).unwrap();
    let path = dir.join("scc2k.txt");
    rrflow::graph::write_edge_list(&g, fs::File::create(&path).unwrap()).unwrap();
    let weighted = dir.join("scc2k-ic.txt");
    let out = rrflow(&[
        "gen-weights",
        "--input",
        path.to_str().unwrap(),
        "--model",
        "ic",
        "--seed",
        "1",
        "--output",
        weighted.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    weighted.to_str().unwrap().to_string()
}

/// Determinism of the run command.
fn c9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let mut logs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        let o = rrflow(&[
            "run",
            "--input",
            &input,
            "--model",
            "ic",
            "--workers",
            "1",
            "--seed",
            "42",
            "--output",
            out.to_str().unwrap(),
        ]);
        if !o.status.success() {
            return fail(format!("run exited with {:?}", o.status.code()));
        }
        let log: RunLog = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
        logs.push(log);
    }
    check(
        logs[0].without_timings() == logs[1].without_timings(),
        format!("two runs with seed 42, 1 worker: identical apart from timings (theta {})", logs[0].theta),
    )
}

/// Representation equivalence.
fn c10() -> Outcome {
    let mut r = rng(10);
    for case in 0..10_000 {
        let n = r.random_range(1..=2_000);
        let size = r.random_range(1..=n);
        let members: Vec<VertexId> = index::sample(&mut r, n, size).into_iter().map(|v| v as VertexId).collect();
        let bitmap = make_repr_with(members.clone(), n, ReprPolicy::always_bitmap());
        let list = make_repr_with(members, n, ReprPolicy::always_list());
        let q = r.random_range(0..n as VertexId);
        if !bitmap.is_bitmap()
            || list.is_bitmap()
            || bitmap.len() != list.len()
            || bitmap.contains(q) != list.contains(q)
        {
            return fail(format!("case {case} disagrees (n {n}, size {size}, query {q})"));
        }
    }
    pass("10^4 random cases agree on contains and size")
}

/// Submodularity and monotonicity.
fn c11() -> Outcome {
    let mut r = rng(11);
    let mut checks = 0u64;
    for model in MODELS {
        for gi in 0..40 {
            let n = 1 + gi % 5;
            let g = tiny_graph(&mut r, n, 0.5, model);
            let t = exact_spread_table(&g, model).unwrap();
            let full = (1usize << n) - 1;
            for v in 0..n {
                let bit = 1 << v;
                for big in 0..=full {
                    if big & bit != 0 {
                        continue;
                    }
                    if t[big | bit] < t[big] - 1e-9 {
                        return fail(format!("{model} graph {gi}: not monotone at T={big:b}, v={v}"));
                    }
                    // Every subset S of T.
                    let mut small = big;
                    loop {
                        checks += 1;
                        if t[small | bit] - t[small] < t[big | bit] - t[big] - 1e-9 {
                            return fail(format!("{model} graph {gi}: not submodular at S={small:b} T={big:b} v={v}"));
                        }
                        if small == 0 {
                            break;
                        }
                        small = (small - 1) & big;
                    }
                }
            }
        }
    }
    pass(format!("80 graphs with n <= 5, {checks} submodularity checks, both models"))
}

/// CLI bench and summarize round trip.
fn c12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = write_graph(dir.path());
    let logs = dir.path().join("logs");
    let csv_dir = dir.path().join("csv");
    let o = rrflow(&[
        "bench",
        "--input",
        &input,
        "--model",
        "ic",
        "--k",
        "10",
        "--min-workers",
        "1",
        "--max-workers",
        "4",
        "--strategies",
        "fused,baseline",
        "--outdir",
        logs.to_str().unwrap(),
    ]);
    if !o.status.success() {
        return fail(format!("bench failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let o = rrflow(&["summarize", "--indir", logs.to_str().unwrap(), "--outdir", csv_dir.to_str().unwrap()]);
    if !o.status.success() {
        return fail(format!("summarize failed: {}", String::from_utf8_lossy(&o.stderr)));
    }

    let mut best: BTreeMap<String, f64> = BTreeMap::new();
    let mut files = 0;
    for e in fs::read_dir(&logs).unwrap() {
        let log: RunLog = serde_json::from_str(&fs::read_to_string(e.unwrap().path()).unwrap()).unwrap();
        files += 1;
        let t = best.entry(log.strategy.to_string()).or_insert(f64::INFINITY);
        *t = t.min(log.timings.total);
    }
    let expected = best["baseline"] / best["fused"];

    let mut reader = csv::Reader::from_path(csv_dir.join("speedup_ic.csv")).unwrap();
    let header_len = reader.headers().unwrap().len();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    if files != 6 || header_len != 6 || rows.len() != 1 || rows[0].len() != 6 {
        return fail(format!("{files} logs, header {header_len} columns, {} rows", rows.len()));
    }
    let speedup: f64 = rows[0][1].parse().unwrap();
    check(
        (speedup - expected).abs() <= 1e-6,
        format!("6 logs, 6-column CSV, speedup {speedup:.6} vs log-derived {expected:.6}"),
    )
}

fn main() -> ExitCode {
    fn one(f: fn() -> Outcome) -> impl Fn(&'static str) -> Vec<(&'static str, Outcome)> {
        move |id| vec![(id, f())]
    }
    type Run = Box<dyn Fn(&'static str) -> Vec<(&'static str, Outcome)>>;
    let criteria: Vec<(&'static str, &str, Run)> = vec![
        ("1", "counter exactness", Box::new(one(c1))),
        ("2", "update-strategy equivalence", Box::new(one(c2))),
        ("3", "cross-strategy greedy equivalence", Box::new(one(c3))),
        ("4", "RIS lemma", Box::new(one(c4))),
        ("5", "approximation quality", Box::new(one(c5))),
        ("6", "unbiased coverage estimator", Box::new(one(c6))),
        ("7", "memory-touch reduction", Box::new(one(c7))),
        ("8", "scaling smoke", Box::new(|_| c8())),
        ("9", "run determinism", Box::new(one(c9))),
        ("10", "representation equivalence", Box::new(one(c10))),
        ("11", "submodularity and monotonicity", Box::new(one(c11))),
        ("12", "CLI pipeline round trip", Box::new(one(c12))),
    ];
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();

    let mut failed = 0;
    for (id, name, run) in &criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        for (sub, out) in run(id) {
            let tag = match out.status {
                Status::Pass => "PASS",
                Status::Fail => {
                    failed += 1;
                    "FAIL"
                }
                Status::NotRun => "NOT RUN",
            };
            println!("{tag:<7} {sub:>3}  {name}: {}", out.detail);
        }
    }
    if failed > 0 {
        println!("{failed} criterion check(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
