//! Command-line front end: simulate datasets, learn graph structures, score
//! snapshot streams, and run end-to-end benchmarks. Every subcommand is
//! deterministic given its --seed.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scanlearn::evaluate::{run_benchmark, BenchConfig};
use scanlearn::graph::{read_edge_list_file, write_edge_list_file};
use scanlearn::learn::{
    learn_sequence, most_significant, randomization_stats, write_significance_csv, EdgeSelector,
    TrainingSet,
};
use scanlearn::search::{best_subgraph, SearchMethod, DEFAULT_MAX_EXPANSIONS};
use scanlearn::simulate::{
    add_travel_edges, gen_baselines, gen_erdos_renyi, gen_pref_attachment, make_training_set,
    read_baselines_csv, read_counts_csv, read_dataset, write_dataset, Dataset, DatasetMeta,
    InjectConfig,
};
use scanlearn::{Distribution, Error, Result, SearchEngine, Snapshot};

#[derive(Parser)]
#[command(
    name = "scanlearn",
    about = "Learn latent graph structure from unlabeled count snapshots and detect events with it",
    version
)]
struct Cli {
    /// Worker threads (default: all cores; env SCANLEARN_THREADS overrides).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Er,
    Pa,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectorArg {
    Corr,
    #[value(name = "pscorr")]
    PsCorr,
    #[value(name = "grcorr")]
    GrCorr,
}

impl From<SelectorArg> for EdgeSelector {
    fn from(s: SelectorArg) -> Self {
        match s {
            SelectorArg::Corr => EdgeSelector::Corr,
            SelectorArg::PsCorr => EdgeSelector::PsCorr,
            SelectorArg::GrCorr => EdgeSelector::GrCorr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Uls,
    Exact,
}

impl From<EngineArg> for SearchMethod {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Uls => SearchMethod::Uls,
            EngineArg::Exact => SearchMethod::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Poisson,
    Gaussian,
    Exponential,
}

impl From<DistArg> for Distribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Poisson => Distribution::Poisson,
            DistArg::Gaussian => Distribution::Gaussian,
            DistArg::Exponential => Distribution::Exponential,
        }
    }
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(format!("must lie strictly between 0 and 1, got {p}"))
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Random graph family for the true structure.
    #[arg(long, value_enum)]
    graph: FamilyArg,
    #[arg(long)]
    n: usize,
    /// Edge probability (er only).
    #[arg(long, value_parser = parse_probability)]
    p: Option<f64>,
    /// Extra random (travel) edges added after generation.
    #[arg(long, default_value_t = 0)]
    travel: usize,
    /// Number of training examples.
    #[arg(long)]
    j: usize,
    /// Fraction of examples carrying an outbreak day (the rest are null).
    #[arg(long, default_value_t = 1.0)]
    inject_fraction: f64,
    #[arg(long, default_value_t = 2)]
    spread_rate: usize,
    #[arg(long, default_value_t = 2.0)]
    spread_factor: f64,
    #[arg(long, default_value_t = 14)]
    duration: usize,
    #[arg(long, default_value_t = 1.0)]
    mean_low: f64,
    #[arg(long, default_value_t = 10.0)]
    mean_high: f64,
    #[arg(long)]
    seed: u64,
    /// Output dataset directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    /// Dataset directory produced by `simulate`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    selector: SelectorArg,
    #[arg(long, value_enum, default_value = "uls")]
    engine: EngineArg,
    /// Randomization replicates for the significance test.
    #[arg(long, default_value_t = 100)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "poisson")]
    dist: DistArg,
    /// Node-expansion cap for the exact engine.
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS)]
    budget: u64,
    /// Output directory (default: the dataset directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Edge-list file of the graph to scan with.
    #[arg(long)]
    graph: PathBuf,
    /// baselines.csv ("node,mu").
    #[arg(long)]
    baselines: PathBuf,
    /// Snapshot stream ("example,node,count"), one example per day.
    #[arg(long)]
    snapshots: PathBuf,
    #[arg(long, value_enum, default_value = "uls")]
    engine: EngineArg,
    /// Proximity constraint: search each node's k-nearest neighborhood.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "poisson")]
    dist: DistArg,
    #[arg(long, default_value_t = DEFAULT_MAX_EXPANSIONS)]
    budget: u64,
    /// Output CSV ("day,score,subset"); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the configured method list, e.g. "grcorr,pscorr,corr".
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Output directory for edges.csv, detection.csv, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (graph, baselines, snapshots, labels).
    Simulate(SimulateArgs),
    /// Learn a graph structure from a dataset and pick the most significant
    /// graph by randomization testing.
    Learn(LearnArgs),
    /// Score a stream of daily snapshots against a graph.
    Detect(DetectArgs),
    /// End-to-end benchmark from a config file.
    Bench(BenchArgs),
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let (family, graph) = match a.graph {
        FamilyArg::Er => {
            let p = a
                .p
                .ok_or_else(|| Error::invalid("--p is required for --graph er"))?;
            ("er", gen_erdos_renyi(a.n, p, seed_for(a.seed, 0))?)
        }
        FamilyArg::Pa => ("pa", gen_pref_attachment(a.n, seed_for(a.seed, 0))?),
    };
    let graph = if a.travel > 0 {
        add_travel_edges(&graph, a.travel, seed_for(a.seed, 1))?
    } else {
        graph
    };
    let (baselines, _) = gen_baselines(a.n, 0, a.mean_low, a.mean_high, seed_for(a.seed, 2))?;
    let inject = InjectConfig {
        spread_rate: a.spread_rate,
        spread_factor: a.spread_factor,
        duration: a.duration,
    };
    let (ts, labels) = make_training_set(
        &graph,
        &baselines,
        &inject,
        a.j,
        a.inject_fraction,
        Distribution::Poisson,
        a.seed,
    )?;
    let ds = Dataset {
        baselines,
        snapshots: ts.snapshots().to_vec(),
        labels,
        meta: DatasetMeta {
            seed: a.seed,
            n: a.n,
            j: a.j,
            graph_family: family.into(),
            edge_probability: a.p,
            travel_edges: a.travel,
            mean_low: a.mean_low,
            mean_high: a.mean_high,
            inject_fraction: a.inject_fraction,
            inject,
        },
        graph,
    };
    write_dataset(&a.out, &ds)?;
    println!(
        "simulate: N={} m={} J={} seed={} -> {}",
        ds.meta.n,
        ds.graph.edge_count(),
        ds.meta.j,
        ds.meta.seed,
        a.out.display()
    );
    Ok(())
}

fn seed_for(master: u64, index: u64) -> u64 {
    // Stage tag 0 is reserved for CLI-level derivations.
    scanlearn::seeds::derive(master, 0, index)
}

#[derive(Serialize)]
struct LearnRunRecord {
    dataset: String,
    selector: &'static str,
    engine: &'static str,
    dist: &'static str,
    r: usize,
    seed: u64,
    budget: u64,
    n: usize,
    j: usize,
    active_examples: usize,
    m_star: usize,
    learned_edges: usize,
    best_subgraph_calls: u64,
    mean_replay_calls_per_example: f64,
    wall_time_ms: u128,
}

fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let started = Instant::now();
    let ds = read_dataset(&a.input).map_err(|e| Error::in_stage("read-dataset", e))?;
    let dist: Distribution = a.dist.into();
    let ts = TrainingSet::new(ds.snapshots, dist).map_err(|e| Error::in_stage("scan", e))?;
    let selector: EdgeSelector = a.selector.into();
    let engine = SearchEngine::new(a.engine.into()).with_budget(a.budget);
    let seq =
        learn_sequence(&ts, selector, &engine, dist).map_err(|e| Error::in_stage("learn", e))?;
    let stats = randomization_stats(&ts, &engine, dist, a.r, a.seed)
        .map_err(|e| Error::in_stage("significance", e))?;
    let curve =
        most_significant(&seq, &stats).map_err(|e| Error::in_stage("significance", e))?;

    let out = a.out.clone().unwrap_or_else(|| a.input.clone());
    std::fs::create_dir_all(&out)?;
    write_edge_list_file(&curve.graph, out.join("learned.edges"))?;
    let f = std::fs::File::create(out.join("significance.csv"))?;
    write_significance_csv(&curve, std::io::BufWriter::new(f))?;
    let record = LearnRunRecord {
        dataset: a.input.display().to_string(),
        selector: selector.name(),
        engine: engine.method.name(),
        dist: dist.name(),
        r: a.r,
        seed: a.seed,
        budget: a.budget,
        n: ts.n(),
        j: ts.len(),
        active_examples: ts.active().len(),
        m_star: curve.m_star,
        learned_edges: curve.graph.edge_count(),
        best_subgraph_calls: seq.best_subgraph_calls,
        mean_replay_calls_per_example: stats.mean_calls_per_example,
        wall_time_ms: started.elapsed().as_millis(),
    };
    std::fs::write(
        out.join("run.json"),
        serde_json::to_string_pretty(&record)? + "\n",
    )?;
    println!(
        "learn: {}-{} m*={} edges={} calls={} -> {}",
        engine.method.name(),
        selector.name(),
        curve.m_star,
        curve.graph.edge_count(),
        seq.best_subgraph_calls,
        out.display()
    );
    Ok(())
}

fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let baselines = read_baselines_csv(&a.baselines)?;
    let n = baselines.len();
    let graph = read_edge_list_file(&a.graph, Some(n)).map_err(|e| match e {
        Error::InvalidArgument(msg) => {
            Error::invalid(format!("graph does not fit the {n}-node snapshot stream: {msg}"))
        }
        other => other,
    })?;
    let count_rows = read_counts_csv(&a.snapshots, n)?;
    if count_rows.is_empty() {
        return Err(Error::invalid("snapshot stream is empty"));
    }
    let dist: Distribution = a.dist.into();
    let mut engine = SearchEngine::new(a.engine.into()).with_budget(a.budget);
    if let Some(k) = a.k {
        engine = engine.with_neighborhood(k);
    }
    let mut lines = String::from("day,score,subset\n");
    for (day, counts) in count_rows.into_iter().enumerate() {
        let snap = Snapshot::new(counts, baselines.clone())?;
        let res = best_subgraph(&engine, &graph, &snap, dist)?;
        let subset = res
            .nodes
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        lines.push_str(&format!("{},{},{}\n", day + 1, res.score, subset));
    }
    match &a.out {
        Some(path) => std::fs::write(path, lines)?,
        None => {
            std::io::stdout().write_all(lines.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let raw = std::fs::read_to_string(&a.config)?;
    let mut cfg: BenchConfig = serde_json::from_str(&raw)?;
    if let Some(methods) = &a.methods {
        cfg.methods = methods.clone();
    }
    let bundle = run_benchmark(&cfg)?;
    bundle.write_to_dir(&a.out)?;
    for row in &bundle.edge_rows {
        println!(
            "bench: {} edges={} precision={:.3} recall={:.3}",
            row.method, row.learned_edges, row.precision, row.recall
        );
    }
    println!("bench: report bundle -> {}", a.out.display());
    Ok(())
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("SCANLEARN_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0); // 0 = rayon default (all cores)
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }

    // Missing input files are usage errors, not runtime failures.
    match &cli.command {
        Command::Learn(a) if !a.input.exists() => {
            return usage_error(&format!("dataset directory {} not found", a.input.display()));
        }
        Command::Bench(a) if !a.config.exists() => {
            return usage_error(&format!("config file {} not found", a.config.display()));
        }
        Command::Detect(a) => {
            for (what, path) in [
                ("graph", &a.graph),
                ("baselines", &a.baselines),
                ("snapshots", &a.snapshots),
            ] {
                if !path.exists() {
                    return usage_error(&format!("{what} file {} not found", path.display()));
                }
            }
        }
        _ => {}
    }

    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::InvalidArgument(msg)) => usage_error(&msg),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
