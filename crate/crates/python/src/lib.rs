//! Python bindings: graphs, the decoder, the genetic operators, the exact
//! oracle and full search runs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tgsched::ga::{fitness as ga_fitness, swap_positions, wmx_crossover};
use tgsched::graph::{augment_comm, parse_native, parse_stg, CommAugmentSpec, Edge};
use tgsched::hybrid::{run as run_search, HybridConfig, Mode, PhaseSwitch};
use tgsched::oracle::brute_force_optimum;
use tgsched::schedule::{decode, Chromosome, Schedule};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type Span = (usize, usize, u64, u64);

fn spans(s: &Schedule) -> Vec<Span> {
    s.placements
        .iter()
        .map(|p| (p.task, p.processor, p.start, p.finish))
        .collect()
}

#[pyclass(name = "TaskGraph", module = "pytgsched", frozen)]
struct PyTaskGraph {
    inner: tgsched::TaskGraph,
}

#[pymethods]
impl PyTaskGraph {
    /// Build from task costs and `(from, to, comm)` edges.
    #[new]
    fn new(costs: Vec<u64>, edges: Vec<(usize, usize, u64)>) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(from, to, comm)| Edge { from, to, comm })
            .collect();
        let inner = tgsched::TaskGraph::new(costs, edges).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_stg(text: &str) -> PyResult<Self> {
        parse_stg(text).map(|inner| Self { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn from_native(text: &str) -> PyResult<Self> {
        parse_native(text).map(|inner| Self { inner }).map_err(value_error)
    }

    #[getter]
    fn task_count(&self) -> usize {
        self.inner.task_count()
    }

    #[getter]
    fn costs(&self) -> Vec<u64> {
        self.inner.costs().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.inner.edges().iter().map(|e| (e.from, e.to, e.comm)).collect()
    }

    fn topo_order(&self) -> Vec<usize> {
        self.inner.topo_order()
    }

    fn critical_path(&self) -> u64 {
        self.inner.critical_path()
    }

    fn total_cost(&self) -> u64 {
        self.inner.total_cost()
    }

    fn to_native(&self) -> String {
        self.inner.to_native_json()
    }

    fn to_stg(&self) -> String {
        self.inner.to_stg()
    }

    /// Copy with communication costs drawn uniformly from `[comm_min, comm_max]`.
    #[pyo3(signature = (seed, comm_min = CommAugmentSpec::DEFAULT_MIN, comm_max = CommAugmentSpec::DEFAULT_MAX))]
    fn augment(&self, seed: u64, comm_min: u64, comm_max: u64) -> PyResult<Self> {
        let spec = CommAugmentSpec::new(seed, comm_min, comm_max).map_err(value_error)?;
        Ok(Self {
            inner: augment_comm(&self.inner, &spec),
        })
    }

    /// Decode a gene vector; returns `(makespan, [(task, processor, start, finish)])`.
    fn decode(&self, genes: Vec<u64>, processors: usize) -> PyResult<(u64, Vec<Span>)> {
        let s = decode(&Chromosome::new(genes), &self.inner, processors).map_err(value_error)?;
        Ok((s.makespan, spans(&s)))
    }

    fn makespan(&self, genes: Vec<u64>, processors: usize) -> PyResult<u64> {
        tgsched::schedule::evaluate(&genes, &self.inner, processors).map_err(value_error)
    }

    /// Exact optimum for at most 12 tasks; same return shape as `decode`.
    fn oracle(&self, processors: usize) -> PyResult<(u64, Vec<Span>)> {
        let r = brute_force_optimum(&self.inner, processors).map_err(value_error)?;
        Ok((r.optimum_makespan, spans(&r.witness)))
    }

    fn __repr__(&self) -> String {
        format!(
            "TaskGraph(tasks={}, edges={})",
            self.inner.task_count(),
            self.inner.edges().len()
        )
    }
}

#[pyfunction]
fn fitness(makespan: u64) -> PyResult<f64> {
    ga_fitness(makespan).map_err(value_error)
}

/// Weight-mapping crossover over the segment `[lo, hi)`.
#[pyfunction]
fn wmx(p1: Vec<u64>, p2: Vec<u64>, lo: usize, hi: usize) -> PyResult<(Vec<u64>, Vec<u64>)> {
    let (a, b) = wmx_crossover(&Chromosome::new(p1), &Chromosome::new(p2), (lo, hi)).map_err(value_error)?;
    Ok((a.into_genes(), b.into_genes()))
}

#[pyfunction]
fn swap(genes: Vec<u64>, i: usize, j: usize) -> PyResult<Vec<u64>> {
    if i >= genes.len() || j >= genes.len() {
        return Err(PyValueError::new_err("swap position out of range"));
    }
    Ok(swap_positions(&Chromosome::new(genes), i, j).into_genes())
}

/// Run a search and return the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (
    graph, processors = 2, mode = "hybrid", seed = 1, popsize = 100,
    crossover_rate = 0.7, mutation_rate = 0.3, elite_fraction = 0.1,
    memory_depth = 5, switch_stagnation = 5, switch_after = None,
    term_stagnation = 10, max_iterations = 10_000,
))]
#[allow(clippy::too_many_arguments)]
fn run(
    graph: &PyTaskGraph,
    processors: usize,
    mode: &str,
    seed: u64,
    popsize: usize,
    crossover_rate: f64,
    mutation_rate: f64,
    elite_fraction: f64,
    memory_depth: u32,
    switch_stagnation: u32,
    switch_after: Option<u32>,
    term_stagnation: u32,
    max_iterations: u32,
) -> PyResult<String> {
    let mode: Mode = mode.parse().map_err(value_error)?;
    let cfg = HybridConfig {
        ga: tgsched::GaConfig {
            popsize,
            crossover_rate,
            mutation_rate,
            elite_fraction,
            seed,
        },
        memory_depth,
        processors,
        phase_switch: match switch_after {
            Some(n) => PhaseSwitch::AfterGenerations(n),
            None => PhaseSwitch::Stagnation(switch_stagnation),
        },
        term_stagnation,
        max_iterations,
        mode,
    };
    let mut report = run_search(&graph.inner, &cfg).map_err(value_error)?;
    report.wall_ms = None;
    report.automata = None;
    serde_json::to_string(&report).map_err(value_error)
}

#[pymodule]
fn pytgsched(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTaskGraph>()?;
    m.add_function(wrap_pyfunction!(fitness, m)?)?;
    m.add_function(wrap_pyfunction!(wmx, m)?)?;
    m.add_function(wrap_pyfunction!(swap, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
