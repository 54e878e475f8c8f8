//! `gmec`: command-line front end for the GMEC solver.
//!
//! Pipeline per invocation: parse instance, optional dead-end elimination,
//! optional lambda sparsification, min-fill ordering and pseudo-tree,
//! mini-bucket heuristic, then AND/OR branch-and-bound (`solve`), k-best
//! enumeration (`kbest`), or brute force (`oracle`). Results go to standard
//! output as one JSON record; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 resource limit.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gmec_core::{
    auto_i_bound, brute_force_topk, build_interaction_graph, build_pseudo_tree, goldstein_singles,
    kbest_solve, min_fill_ordering, mini_bucket_elimination, parse_instance, random_instance,
    solve, Error, SearchStats, SolveOptions, DEFAULT_MEM_CAP,
};

const FORMAT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "gmec", version, about = "Exact GMEC solver over pairwise energy models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the global minimum energy conformation.
    Solve(SolveArgs),
    /// Enumerate the k best conformations within an energy cutoff.
    Kbest(KbestArgs),
    /// Print interaction-network statistics.
    Stats(PipelineArgs),
    /// Brute-force baseline with the same output schema as solve/kbest.
    Oracle(KbestArgs),
    /// Generate a random instance and print it.
    Gen(GenArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Instance file in GMEC 1 format.
    #[arg(long)]
    input: std::path::PathBuf,
    /// Dead-end elimination preprocessing (Goldstein singles).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    dee: bool,
    /// Sparsification threshold; pairs with range <= lambda are dropped
    /// (0 keeps every interaction, bar constant tables).
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Mini-bucket i-bound, or "auto" for the largest within the memory cap.
    #[arg(long, default_value = "auto")]
    ibound: String,
    /// Memory cap in bytes for mini-bucket tables.
    #[arg(long, default_value_t = DEFAULT_MEM_CAP)]
    mbe_mem_cap: u64,
    /// Disable pruning (debug; exhaustive AND/OR traversal).
    #[arg(long)]
    no_prune: bool,
    /// Build the pipeline and report stats without searching.
    #[arg(long)]
    stats_only: bool,
    /// Recorded in provenance only.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct KbestArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Number of conformations to return.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Energy window above the minimum; "inf" for no cutoff.
    #[arg(long, default_value = "inf")]
    delta: String,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    max_domain: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Serialize)]
struct Record {
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
    assignment: Vec<usize>,
    k_best: Vec<KBestEntry>,
    stats: StatsRecord,
    graph: GraphRecord,
    provenance: Provenance,
}

#[derive(Serialize)]
struct KBestEntry {
    energy: f64,
    assignment: Vec<usize>,
}

#[derive(Serialize, Default)]
struct StatsRecord {
    expanded_or: u64,
    expanded_and: u64,
    pruned: u64,
    heuristic_evals: u64,
    init_ms: u64,
    search_ms: u64,
}

#[derive(Serialize)]
struct GraphRecord {
    n: usize,
    edges: usize,
    induced_width: usize,
    tree_depth: usize,
    dropped_error_bound: f64,
}

#[derive(Serialize)]
struct Provenance {
    flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    format_version: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gmec: {}", e.1);
            ExitCode::from(e.0)
        }
    }
}

struct CliError(u8, String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resource { .. } => 3,
            _ => 2,
        };
        CliError(code, e.to_string())
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve(args) => run_solve(args.pipeline),
        Command::Kbest(args) => run_kbest(args, false),
        Command::Stats(args) => run_stats(args),
        Command::Oracle(args) => run_kbest(args, true),
        Command::Gen(args) => run_gen(args),
    }
}

/// Everything built up-front: DEE result, sparsified model, tree, heuristic.
struct Pipeline {
    original: gmec_core::EnergyModel,
    dee: Option<gmec_core::PruneResult>,
    model: gmec_core::EnergyModel,
    tree: gmec_core::PseudoTree,
    heuristic: gmec_core::MiniBucketHeuristic,
    graph: GraphRecord,
    init_ms: u64,
    flags: Vec<String>,
    seed: Option<u64>,
}

fn read_model(path: &std::path::Path) -> Result<gmec_core::EnergyModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError(2, format!("{}: {e}", path.display())))?;
    Ok(parse_instance(&text)?)
}

fn build_pipeline(args: &PipelineArgs, apply_dee: bool) -> Result<Pipeline, CliError> {
    let start = Instant::now();
    let original = read_model(&args.input)?;
    let (dee, working) = if apply_dee {
        let r = goldstein_singles(&original);
        let reduced = r.reduced.clone();
        (Some(r), reduced)
    } else {
        (None, original.clone())
    };
    let (graph, model) = build_interaction_graph(&working, args.lambda)?;
    let ordering = min_fill_ordering(&graph);
    let tree = build_pseudo_tree(&graph, &ordering);
    let i_bound = match args.ibound.as_str() {
        "auto" => auto_i_bound(&model, &tree, args.mbe_mem_cap),
        s => s
            .parse::<usize>()
            .map_err(|_| CliError(2, format!("invalid --ibound: {s}")))?,
    };
    let heuristic = mini_bucket_elimination(&model, &tree, i_bound, args.mbe_mem_cap)?;
    let graph = GraphRecord {
        n: graph.n(),
        edges: graph.edge_count(),
        induced_width: ordering.induced_width,
        tree_depth: tree.depth,
        dropped_error_bound: graph.dropped_error_bound,
    };
    let mut flags = vec![
        format!("--input {}", args.input.display()),
        format!("--dee {}", apply_dee),
        format!("--lambda {}", args.lambda),
        format!("--ibound {i_bound}"),
        format!("--mbe-mem-cap {}", args.mbe_mem_cap),
    ];
    if args.no_prune {
        flags.push("--no-prune".into());
    }
    if args.stats_only {
        flags.push("--stats-only".into());
    }
    Ok(Pipeline {
        original,
        dee,
        model,
        tree,
        heuristic,
        graph,
        init_ms: start.elapsed().as_millis() as u64,
        flags,
        seed: args.seed,
    })
}

fn stats_record(p: &Pipeline, s: &SearchStats, search_ms: u64) -> StatsRecord {
    StatsRecord {
        expanded_or: s.expanded_or,
        expanded_and: s.expanded_and,
        pruned: s.pruned,
        heuristic_evals: s.heuristic_evals,
        init_ms: p.init_ms,
        search_ms,
    }
}

/// Maps a working-model assignment back to original rotamer indices.
fn to_original(p: &Pipeline, assignment: &[usize]) -> Vec<usize> {
    match &p.dee {
        Some(r) => r.to_original(assignment),
        None => assignment.to_vec(),
    }
}

fn emit(record: &Record) {
    println!("{}", serde_json::to_string_pretty(record).expect("record serializes"));
}

fn stats_only_record(p: Pipeline) -> Record {
    Record {
        energy: None,
        assignment: vec![],
        k_best: vec![],
        stats: StatsRecord { init_ms: p.init_ms, ..Default::default() },
        graph: p.graph,
        provenance: Provenance { flags: p.flags, seed: p.seed, format_version: FORMAT_VERSION },
    }
}

fn run_solve(args: PipelineArgs) -> Result<(), CliError> {
    let no_prune = args.no_prune;
    let p = build_pipeline(&args, args.dee)?;
    if args.stats_only {
        emit(&stats_only_record(p));
        return Ok(());
    }
    let start = Instant::now();
    let mut opts = SolveOptions::new();
    opts.no_prune = no_prune;
    let sol = solve(&p.model, &p.tree, Some(&p.heuristic), &opts)?;
    let search_ms = start.elapsed().as_millis() as u64;
    let assignment = to_original(&p, &sol.conformation.assignment);
    // Reported energy is evaluated on the original model; with lambda > 0 the
    // search may be optimal only up to dropped_error_bound.
    let energy = p.original.total_energy(&assignment)?;
    emit(&Record {
        energy: Some(energy),
        assignment,
        k_best: vec![],
        stats: stats_record(&p, &sol.stats, search_ms),
        graph: p.graph,
        provenance: Provenance { flags: p.flags, seed: p.seed, format_version: FORMAT_VERSION },
    });
    Ok(())
}

fn parse_delta(s: &str) -> Result<f64, CliError> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|_| CliError(2, format!("invalid --delta: {s}")))
}

fn run_kbest(args: KbestArgs, oracle: bool) -> Result<(), CliError> {
    let delta = parse_delta(&args.delta)?;
    // Goldstein singles can remove rotamers that occur only in sub-optimal
    // conformations, so enumeration always runs without DEE.
    let p = build_pipeline(&args.pipeline, false)?;
    if args.pipeline.stats_only {
        emit(&stats_only_record(p));
        return Ok(());
    }
    let mut flags = p.flags.clone();
    flags.push(format!("--k {}", args.k));
    flags.push(format!("--delta {}", args.delta));
    let start = Instant::now();
    let (list, stats) = if oracle {
        let list = brute_force_topk(&p.model, args.k, delta, None)?;
        (list, SearchStats::default())
    } else {
        kbest_solve(&p.model, &p.tree, Some(&p.heuristic), args.k, delta)?
    };
    let search_ms = start.elapsed().as_millis() as u64;
    let k_best: Vec<KBestEntry> = list
        .conformations
        .iter()
        .map(|c| {
            let assignment = to_original(&p, &c.assignment);
            let energy = p.original.total_energy(&assignment)?;
            Ok(KBestEntry { energy, assignment })
        })
        .collect::<Result<_, Error>>()?;
    let best = k_best.first();
    emit(&Record {
        energy: best.map(|e| e.energy),
        assignment: best.map(|e| e.assignment.clone()).unwrap_or_default(),
        k_best,
        stats: stats_record(&p, &stats, search_ms),
        graph: p.graph,
        provenance: Provenance { flags, seed: p.seed, format_version: FORMAT_VERSION },
    });
    Ok(())
}

fn run_stats(args: PipelineArgs) -> Result<(), CliError> {
    let p = build_pipeline(&args, args.dee)?;
    let mut out = String::new();
    let _ = writeln!(out, "n: {}", p.graph.n);
    let _ = writeln!(out, "edges: {}", p.graph.edges);
    let _ = writeln!(out, "induced_width: {}", p.graph.induced_width);
    let _ = writeln!(out, "tree_depth: {}", p.graph.tree_depth);
    let _ = writeln!(out, "dropped_error_bound: {}", p.graph.dropped_error_bound);
    print!("{out}");
    Ok(())
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let model = random_instance(args.seed, args.n, args.max_domain, args.density, args.scale)?;
    print!("{}", model.serialize());
    Ok(())
}
