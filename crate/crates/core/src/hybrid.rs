//! Two-phase search driver.
//!
//! The genetic phase runs until the best makespan has stalled for a number of
//! generations (or for a fixed number of generations), then every chromosome
//! of the population becomes an automaton and the search continues with
//! learning sweeps. The run ends once the best makespan has been unchanged for
//! `term_stagnation` consecutive iterations, counted continuously across both
//! phases, or when `max_iterations` is reached.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ga::{next_generation, GaConfig, GaError, Population};
use crate::graph::{CommAugmentSpec, TaskGraph};
use crate::oma::{la_sweep, Automaton};
use crate::rng::SeededRng;
use crate::schedule::{decode, Chromosome, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Hybrid,
    GaOnly,
    LaOnly,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Hybrid, Mode::GaOnly, Mode::LaOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Hybrid => "hybrid",
            Mode::GaOnly => "ga-only",
            Mode::LaOnly => "la-only",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?} (expected hybrid, ga-only or la-only)"))
    }
}

/// When the hybrid run leaves the genetic phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSwitch {
    /// After this many consecutive generations without a new best.
    Stagnation(u32),
    /// After exactly this many generations.
    AfterGenerations(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridConfig {
    pub ga: GaConfig,
    pub memory_depth: u32,
    pub processors: usize,
    pub phase_switch: PhaseSwitch,
    pub term_stagnation: u32,
    pub max_iterations: u32,
    pub mode: Mode,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            ga: GaConfig::default(),
            memory_depth: 5,
            processors: 2,
            phase_switch: PhaseSwitch::Stagnation(5),
            term_stagnation: 10,
            max_iterations: 10_000,
            mode: Mode::Hybrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error("{0} must be at least 1")]
    TooSmall(&'static str),
}

impl HybridConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ga.validate()?;
        if self.memory_depth < 1 {
            return Err(ConfigError::TooSmall("memory_depth"));
        }
        if self.processors < 1 {
            return Err(ConfigError::TooSmall("processors"));
        }
        match self.phase_switch {
            PhaseSwitch::Stagnation(0) => return Err(ConfigError::TooSmall("phase-switch stagnation")),
            PhaseSwitch::AfterGenerations(0) => {
                return Err(ConfigError::TooSmall("phase-switch generations"))
            }
            _ => {}
        }
        if self.term_stagnation < 1 {
            return Err(ConfigError::TooSmall("term_stagnation"));
        }
        if self.max_iterations < 1 {
            return Err(ConfigError::TooSmall("max_iterations"));
        }
        Ok(())
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.ga.seed = seed;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: HybridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comm_augmentation: Option<CommAugmentSpec>,
    pub task_count: usize,
    pub best_makespan: u64,
    pub best_chromosome: Chromosome,
    pub best_schedule: Schedule,
    pub ga_generations: u32,
    pub la_iterations: u32,
    /// First iteration at which `best_makespan` was reached (0 = initial population).
    pub iterations_to_best: u32,
    /// Best makespan so far: entry 0 is the initial population, then one per iteration.
    pub trace: Vec<u64>,
    pub evaluations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
    /// Final automata (genes and depths), when the learning phase ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automata: Option<Vec<Automaton>>,
}

impl RunReport {
    pub fn total_iterations(&self) -> u32 {
        self.ga_generations + self.la_iterations
    }

    /// `G+L` iteration split.
    pub fn split(&self) -> String {
        format!("{}+{}", self.ga_generations, self.la_iterations)
    }
}

enum Phase {
    Genetic(Population),
    Learning(Vec<Automaton>),
}

fn to_automata(pop: &Population, memory_depth: u32) -> Vec<Automaton> {
    pop.members
        .iter()
        .map(|m| Automaton {
            genes: m.chromosome.clone(),
            depths: vec![1; m.chromosome.len()],
            memory_depth,
            makespan: m.makespan,
        })
        .collect()
}

/// Run the configured search on `g`.
pub fn run(g: &TaskGraph, cfg: &HybridConfig) -> Result<RunReport, ConfigError> {
    cfg.validate()?;
    let clock = Instant::now();
    let p = cfg.processors;
    let mut rng = SeededRng::new(cfg.ga.seed);

    let initial = Population::random(cfg.ga.popsize, g, p, &mut rng);
    let mut evaluations = initial.len() as u64;
    let first = initial.best();
    let mut best_genes = first.chromosome.clone();
    let mut best_makespan = first.makespan;
    let mut trace = vec![best_makespan];

    let mut phase = match cfg.mode {
        Mode::LaOnly => Phase::Learning(to_automata(&initial, cfg.memory_depth)),
        Mode::Hybrid | Mode::GaOnly => Phase::Genetic(initial),
    };
    let mut ga_generations = 0u32;
    let mut la_iterations = 0u32;
    let mut stagnant = 0u32;
    let mut iterations_to_best = 0u32;

    while stagnant < cfg.term_stagnation && ga_generations + la_iterations < cfg.max_iterations {
        let (candidate, candidate_makespan) = match &mut phase {
            Phase::Genetic(pop) => {
                let next = next_generation(pop, &cfg.ga, g, p, &mut rng);
                evaluations += (next.len() - cfg.ga.elite_count().min(pop.len())) as u64;
                ga_generations += 1;
                *pop = next;
                let b = pop.best();
                (&b.chromosome, b.makespan)
            }
            Phase::Learning(pool) => {
                la_sweep(pool, g, p, &mut rng);
                evaluations += pool.len() as u64;
                la_iterations += 1;
                let b = pool
                    .iter()
                    .min_by_key(|a| a.makespan)
                    .expect("pool is never empty");
                (&b.genes, b.makespan)
            }
        };

        if candidate_makespan < best_makespan {
            best_makespan = candidate_makespan;
            best_genes = candidate.clone();
            stagnant = 0;
            iterations_to_best = ga_generations + la_iterations;
        } else {
            stagnant += 1;
        }
        trace.push(best_makespan);

        if cfg.mode == Mode::Hybrid {
            if let Phase::Genetic(pop) = &phase {
                let switch = match cfg.phase_switch {
                    PhaseSwitch::Stagnation(s) => stagnant >= s,
                    PhaseSwitch::AfterGenerations(n) => ga_generations >= n,
                };
                if switch {
                    phase = Phase::Learning(to_automata(pop, cfg.memory_depth));
                }
            }
        }
    }

    let best_schedule = decode(&best_genes, g, p).expect("chromosome length matches graph");
    debug_assert_eq!(best_schedule.makespan, best_makespan);
    let automata = match phase {
        Phase::Learning(pool) => Some(pool),
        Phase::Genetic(_) => None,
    };

    Ok(RunReport {
        config: cfg.clone(),
        graph: None,
        comm_augmentation: None,
        task_count: g.task_count(),
        best_makespan,
        best_chromosome: best_genes,
        best_schedule,
        ga_generations,
        la_iterations,
        iterations_to_best,
        trace,
        evaluations,
        wall_ms: Some(clock.elapsed().as_millis() as u64),
        automata,
    })
}

/// One `(graph, mode, seed)` cell of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub graph: String,
    pub processors: usize,
    pub mode: Mode,
    pub seed: u64,
    pub makespan: u64,
    pub ga_gens: u32,
    pub la_iters: u32,
    pub evals: u64,
    pub wall_ms: u64,
    pub iterations_to_best: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub graph: String,
    pub processors: usize,
    pub mode: Mode,
    pub runs: usize,
    pub mean_makespan: f64,
    pub min_makespan: u64,
    pub mean_ga_gens: f64,
    pub mean_la_iters: f64,
    pub mean_evals: f64,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<ModeSummary>,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "graph",
    "processors",
    "mode",
    "seed",
    "makespan",
    "ga_gens",
    "la_iters",
    "evals",
    "wall_ms",
];

impl ComparisonTable {
    /// Rows for `(mode, seed)` on `graph`, in input order.
    pub fn cells<'a>(&'a self, graph: &'a str, mode: Mode) -> impl Iterator<Item = &'a ComparisonRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.graph == graph && r.mode == mode)
    }

    /// CSV with the stable column set; one data row per cell followed by one
    /// `summary` row (means) per graph and mode.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.graph.clone(),
                r.processors.to_string(),
                r.mode.to_string(),
                r.seed.to_string(),
                r.makespan.to_string(),
                r.ga_gens.to_string(),
                r.la_iters.to_string(),
                r.evals.to_string(),
                r.wall_ms.to_string(),
            ])
            .expect("in-memory write");
        }
        for s in &self.summaries {
            w.write_record([
                s.graph.clone(),
                s.processors.to_string(),
                s.mode.to_string(),
                "summary".to_string(),
                format!("{:.2}", s.mean_makespan),
                format!("{:.2}", s.mean_ga_gens),
                format!("{:.2}", s.mean_la_iters),
                format!("{:.2}", s.mean_evals),
                format!("{:.2}", s.mean_wall_ms),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

fn mean<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Run every `(graph, mode, seed)` cell and tabulate. Cells run in parallel;
/// each run is seeded independently so the table does not depend on thread
/// count (apart from `wall_ms`).
pub fn compare(
    graphs: &[(String, TaskGraph)],
    base: &HybridConfig,
    modes: &[Mode],
    seeds: &[u64],
) -> Result<ComparisonTable, ConfigError> {
    base.validate()?;
    let cells: Vec<(usize, Mode, u64)> = (0..graphs.len())
        .flat_map(|gi| {
            modes
                .iter()
                .flat_map(move |&m| seeds.iter().map(move |&s| (gi, m, s)))
        })
        .collect();
    let rows: Vec<ComparisonRow> = cells
        .into_par_iter()
        .map(|(gi, mode, seed)| {
            let (name, g) = &graphs[gi];
            let report = run(g, &base.with_mode(mode).with_seed(seed))?;
            Ok(ComparisonRow {
                graph: name.clone(),
                processors: base.processors,
                mode,
                seed,
                makespan: report.best_makespan,
                ga_gens: report.ga_generations,
                la_iters: report.la_iterations,
                evals: report.evaluations,
                wall_ms: report.wall_ms.unwrap_or(0),
                iterations_to_best: report.iterations_to_best,
            })
        })
        .collect::<Result<_, ConfigError>>()?;

    let mut summaries = Vec::new();
    for (name, _) in graphs {
        for &mode in modes {
            let group: Vec<&ComparisonRow> = rows
                .iter()
                .filter(|r| &r.graph == name && r.mode == mode)
                .collect();
            if group.is_empty() {
                continue;
            }
            summaries.push(ModeSummary {
                graph: name.clone(),
                processors: base.processors,
                mode,
                runs: group.len(),
                mean_makespan: mean(group.iter().map(|r| r.makespan as f64)),
                min_makespan: group.iter().map(|r| r.makespan).min().unwrap_or(0),
                mean_ga_gens: mean(group.iter().map(|r| r.ga_gens as f64)),
                mean_la_iters: mean(group.iter().map(|r| r.la_iters as f64)),
                mean_evals: mean(group.iter().map(|r| r.evals as f64)),
                mean_wall_ms: mean(group.iter().map(|r| r.wall_ms as f64)),
            });
        }
    }
    Ok(ComparisonTable { rows, summaries })
}
