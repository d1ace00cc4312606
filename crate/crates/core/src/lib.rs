//! Makespan-minimizing scheduler for task graphs on identical processors.
//!
//! The search couples a genetic algorithm (weight-mapping crossover, swap
//! mutation, elitism) with object-migration automata that refine the
//! population once the genetic phase stalls. An exact branch-and-bound solver
//! for small graphs serves as ground truth.
//!
//! ```
//! use tgsched::graph::parse_native;
//! use tgsched::hybrid::{run, HybridConfig};
//!
//! let g = parse_native(r#"{"tasks":[{"id":0,"cost":2},{"id":1,"cost":3}],
//!                          "edges":[{"from":0,"to":1,"comm":4}]}"#).unwrap();
//! let report = run(&g, &HybridConfig::default()).unwrap();
//! assert_eq!(report.best_makespan, 5);
//! ```

pub mod ga;
pub mod gantt;
pub mod graph;
pub mod hybrid;
pub mod oma;
pub mod oracle;
pub mod rng;
pub mod schedule;

pub use ga::{GaConfig, Population};
pub use graph::{augment_comm, parse_native, parse_stg, CommAugmentSpec, Edge, GraphError, TaskGraph};
pub use hybrid::{compare, run, HybridConfig, Mode, PhaseSwitch, RunReport};
pub use oma::Automaton;
pub use oracle::{brute_force_optimum, OracleResult};
pub use rng::SeededRng;
pub use schedule::{decode, Chromosome, Schedule};
