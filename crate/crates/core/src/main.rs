//! `tgsched` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error (bad flags or out-of-range values),
//! 3 input error (missing or unparsable graph/report), 1 output failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tgsched::gantt::{render_svg, render_text};
use tgsched::graph::{augment_comm, parse_native, parse_stg, CommAugmentSpec, TaskGraph};
use tgsched::hybrid::{compare, run, HybridConfig, Mode, PhaseSwitch, RunReport};
use tgsched::oracle::brute_force_optimum;
use tgsched::schedule::{decode, Chromosome, Schedule};
use tgsched::GaConfig;

#[derive(Parser)]
#[command(name = "tgsched", version, about = "Hybrid GA / learning-automata task-graph scheduler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search and write a JSON report.
    Run(RunArgs),
    /// Run several modes over a seed range and write a CSV table.
    Compare(CompareArgs),
    /// Exact optimum by exhaustive search (at most 12 tasks).
    Oracle(OracleArgs),
    /// Render a Gantt chart (SVG at 4 px per time unit, or text lanes).
    Gantt(GanttArgs),
    /// Replace communication costs with seeded uniform draws; writes native JSON.
    Augment(AugmentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Stg,
    Native,
}

#[derive(Args)]
struct GraphArgs {
    /// Task graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Input format; inferred from the extension when omitted (`.stg` → stg, otherwise native).
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    augment: AugmentFlags,
}

#[derive(Args, Clone)]
struct AugmentFlags {
    /// Seed for replacing communication costs before scheduling (off when omitted).
    #[arg(long)]
    augment_seed: Option<u64>,
    /// Smallest communication cost drawn by augmentation.
    #[arg(long, default_value_t = CommAugmentSpec::DEFAULT_MIN)]
    comm_min: u64,
    /// Largest communication cost drawn by augmentation.
    #[arg(long, default_value_t = CommAugmentSpec::DEFAULT_MAX)]
    comm_max: u64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(short = 'p', long, default_value_t = 2)]
    processors: usize,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    #[arg(long, default_value_t = 0.7)]
    crossover: f64,
    #[arg(long, default_value_t = 0.3)]
    mutation: f64,
    /// Fraction of the population copied unchanged into the next generation.
    #[arg(long, default_value_t = 0.1)]
    elite: f64,
    #[arg(long, default_value_t = 5)]
    memory_depth: u32,
    /// Generations without a new best before the genetic phase hands over.
    #[arg(long, default_value_t = 5)]
    switch_stagnation: u32,
    /// Hand over after exactly this many generations instead.
    #[arg(long)]
    switch_after: Option<u32>,
    /// Iterations with an unchanged best before the run stops.
    #[arg(long, default_value_t = 10)]
    term_stagnation: u32,
    #[arg(long, default_value_t = 10_000)]
    max_iters: u32,
}

impl SearchArgs {
    fn config(&self, mode: Mode, seed: u64) -> HybridConfig {
        HybridConfig {
            ga: GaConfig {
                popsize: self.pop,
                crossover_rate: self.crossover,
                mutation_rate: self.mutation,
                elite_fraction: self.elite,
                seed,
            },
            memory_depth: self.memory_depth,
            processors: self.processors,
            phase_switch: match self.switch_after {
                Some(n) => PhaseSwitch::AfterGenerations(n),
                None => PhaseSwitch::Stagnation(self.switch_stagnation),
            },
            term_stagnation: self.term_stagnation,
            max_iterations: self.max_iters,
            mode,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value = "hybrid")]
    mode: Mode,
    #[arg(long, env = "TGSCHED_SEED", default_value_t = 1)]
    seed: u64,
    /// Report path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Also write a Gantt chart (`.svg` → SVG, anything else → text).
    #[arg(long)]
    gantt: Option<PathBuf>,
    /// Include wall-clock time in the report (makes reports non-reproducible).
    #[arg(long)]
    record_timing: bool,
    /// Include the final automata (genes and depths) in the report.
    #[arg(long)]
    dump_automata: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Task graph files (repeatable).
    #[arg(long, required = true)]
    graph: Vec<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    augment: AugmentFlags,
    #[command(flatten)]
    search: SearchArgs,
    /// Comma-separated modes.
    #[arg(long, value_delimiter = ',', default_value = "hybrid,ga-only")]
    modes: Vec<Mode>,
    /// Seeds as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..10")]
    seeds: String,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV path (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(short = 'p', long, default_value_t = 2)]
    processors: usize,
    /// JSON result path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GanttArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Render the best schedule of this run report.
    #[arg(long, conflicts_with = "chromosome", required_unless_present = "chromosome")]
    report: Option<PathBuf>,
    /// Render the decoding of this comma-separated gene vector.
    #[arg(long, value_delimiter = ',')]
    chromosome: Option<Vec<u64>>,
    #[arg(short = 'p', long, default_value_t = 2)]
    processors: usize,
    /// Output path (`.svg` → SVG, anything else → text).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, env = "TGSCHED_SEED", default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = CommAugmentSpec::DEFAULT_MIN)]
    comm_min: u64,
    #[arg(long, default_value_t = CommAugmentSpec::DEFAULT_MAX)]
    comm_max: u64,
    /// Output path (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Input(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Output(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Output(m) => m,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_graph(path: &Path, format: Option<Format>) -> CliResult<TaskGraph> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("stg") => Format::Stg,
        _ => Format::Native,
    });
    let parsed = match format {
        Format::Stg => parse_stg(&text),
        Format::Native => parse_native(&text),
    };
    parsed.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn augment_spec(flags: &AugmentFlags) -> CliResult<Option<CommAugmentSpec>> {
    flags
        .augment_seed
        .map(|seed| CommAugmentSpec::new(seed, flags.comm_min, flags.comm_max))
        .transpose()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn prepare(path: &Path, format: Option<Format>, flags: &AugmentFlags) -> CliResult<(TaskGraph, Option<CommAugmentSpec>)> {
    let spec = augment_spec(flags)?;
    let g = load_graph(path, format)?;
    Ok(match spec {
        Some(spec) => (augment_comm(&g, &spec), Some(spec)),
        None => (g, None),
    })
}

fn graph_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Output(format!("cannot write {}: {e}", path.display())))
}

fn render_chart(path: &Path, s: &Schedule) -> String {
    match path.extension().and_then(|e| e.to_str()) {
        Some("svg") => render_svg(s),
        _ => render_text(s),
    }
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let cfg = args.search.config(args.mode, args.seed);
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (g, augmentation) = prepare(&args.graph.graph, args.graph.format, &args.graph.augment)?;

    let mut report = run(&g, &cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    report.graph = Some(graph_name(&args.graph.graph));
    report.comm_augmentation = augmentation;
    let wall_ms = report.wall_ms;
    if !args.record_timing {
        report.wall_ms = None;
    }
    if !args.dump_automata {
        report.automata = None;
    }
    report
        .best_schedule
        .validate(&g)
        .map_err(|e| Failure::Output(format!("internal error: invalid schedule: {e}")))?;

    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_file(&args.out, &json)?;
    if let Some(path) = &args.gantt {
        write_file(path, &render_chart(path, &report.best_schedule))?;
    }
    println!("makespan: {}", report.best_makespan);
    println!("iterations: {}", report.split());
    println!("evaluations: {}", report.evaluations);
    if let Some(ms) = wall_ms {
        eprintln!("wall time: {ms} ms");
    }
    Ok(())
}

fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let bad = || Failure::Usage(format!("invalid --seeds {text:?}: expected `a..b` or a comma list"));
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn cmd_compare(args: CompareArgs) -> CliResult<()> {
    let seeds = parse_seeds(&args.seeds)?;
    if args.modes.is_empty() {
        return Err(Failure::Usage("at least one mode is required".into()));
    }
    let base = args.search.config(Mode::Hybrid, seeds[0]);
    base.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let graphs = args
        .graph
        .iter()
        .map(|path| {
            prepare(path, args.format, &args.augment).map(|(g, _)| (graph_name(path), g))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let work = || compare(&graphs, &base, &args.modes, &seeds);
    let table = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Failure::Usage(format!("cannot start {n} workers: {e}")))?
            .install(work),
        None => work(),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;

    let csv = table.to_csv();
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    for s in &table.summaries {
        eprintln!(
            "{} {}: mean makespan {:.2}, min {}, mean iterations {:.1}+{:.1} over {} runs",
            s.graph, s.mode, s.mean_makespan, s.min_makespan, s.mean_ga_gens, s.mean_la_iters, s.runs
        );
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    if args.processors == 0 {
        return Err(Failure::Usage("processors must be at least 1".into()));
    }
    let (g, _) = prepare(&args.graph.graph, args.graph.format, &args.graph.augment)?;
    let result = brute_force_optimum(&g, args.processors).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(path) = &args.out {
        let mut json = serde_json::to_string_pretty(&result).expect("oracle result serializes");
        json.push('\n');
        write_file(path, &json)?;
    }
    println!("optimum: {}", result.optimum_makespan);
    println!("nodes explored: {}", result.nodes_explored);
    print!("{}", render_text(&result.witness));
    Ok(())
}

fn cmd_gantt(args: GanttArgs) -> CliResult<()> {
    let schedule = if let Some(path) = &args.report {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        let report: RunReport = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: invalid run report: {e}", path.display())))?;
        // Reapply the report's augmentation unless the caller overrides it.
        let mut flags = args.graph.augment.clone();
        if flags.augment_seed.is_none() {
            if let Some(spec) = report.comm_augmentation {
                flags = AugmentFlags {
                    augment_seed: Some(spec.seed()),
                    comm_min: spec.min_cost(),
                    comm_max: spec.max_cost(),
                };
            }
        }
        let (g, _) = prepare(&args.graph.graph, args.graph.format, &flags)?;
        report
            .best_schedule
            .validate(&g)
            .map_err(|e| Failure::Input(format!("report schedule does not fit the graph: {e}")))?;
        report.best_schedule
    } else {
        let genes = args.chromosome.clone().unwrap_or_default();
        let (g, _) = prepare(&args.graph.graph, args.graph.format, &args.graph.augment)?;
        let s = decode(&Chromosome::new(genes), &g, args.processors)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        s.validate(&g)
            .map_err(|e| Failure::Output(format!("internal error: invalid schedule: {e}")))?;
        s
    };
    write_file(&args.out, &render_chart(&args.out, &schedule))?;
    println!("makespan: {}", schedule.makespan);
    Ok(())
}

fn cmd_augment(args: AugmentArgs) -> CliResult<()> {
    let spec = CommAugmentSpec::new(args.seed, args.comm_min, args.comm_max)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let g = load_graph(&args.graph, args.format)?;
    let out = augment_comm(&g, &spec).to_native_json();
    match &args.out {
        Some(path) => write_file(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Gantt(a) => cmd_gantt(a),
        Command::Augment(a) => cmd_augment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
