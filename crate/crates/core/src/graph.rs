//! Task-graph model and its two text formats.
//!
//! A [`TaskGraph`] is a DAG of `k` tasks (ids `0..k`) with integer computation
//! costs and integer communication costs on edges. Communication is only paid
//! when the two endpoints run on different processors.
//!
//! Two formats are understood:
//!
//! * STG, the Standard Task Graph Set layout: a header with the task count `n`
//!   followed by one line per task, `id cost npreds pred...`. The published
//!   files count `n` without their dummy entry/exit nodes but list `n + 2`
//!   lines; both layouts are accepted and the dummies are kept as ordinary
//!   zero-cost tasks. Lines starting with `#` and blank lines are skipped.
//!   STG carries no communication costs, so every edge gets `comm = 0`.
//! * The native JSON layout:
//!   `{"tasks": [{"id": 0, "cost": 2}], "edges": [{"from": 0, "to": 1, "comm": 4}]}`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SeededRng;

pub type TaskId = usize;

/// Where in an input document an error was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "line {n}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must contain at least one task")]
    Empty,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("{line}task {task} lists unknown predecessor {pred}")]
    DanglingPredecessor { line: Line, task: TaskId, pred: usize },
    #[error("{line}edge {from} -> {to} references a task outside 0..{task_count}")]
    UnknownEndpoint {
        line: Line,
        from: usize,
        to: usize,
        task_count: usize,
    },
    #[error("{line}task id {id} is defined more than once")]
    DuplicateTask { line: Line, id: TaskId },
    #[error("task id {id} is missing (ids must cover 0..{task_count})")]
    MissingTask { id: TaskId, task_count: usize },
    #[error("{line}task {task} depends on itself")]
    SelfEdge { line: Line, task: TaskId },
    #[error("{line}edge {from} -> {to} appears more than once")]
    DuplicateEdge { line: Line, from: TaskId, to: TaskId },
    #[error("{line}cycle detected through task {task}")]
    Cycle { line: Line, task: TaskId },
    #[error("negative {what} {value}")]
    NegativeCost { what: &'static str, value: i64 },
    #[error("invalid communication range [{min}, {max}]: need 1 <= min <= max")]
    InvalidAugmentRange { min: u64, max: u64 },
    #[error("invalid native graph document: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: TaskId,
    pub to: TaskId,
    pub comm: u64,
}

/// Validated, immutable task graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NativeDoc", into = "NativeDoc")]
pub struct TaskGraph {
    costs: Vec<u64>,
    /// Sorted ascending by `(from, to)`.
    edges: Vec<Edge>,
    /// Per task, indices into `edges` of incoming edges.
    preds: Vec<Vec<usize>>,
    /// Per task, indices into `edges` of outgoing edges.
    succs: Vec<Vec<usize>>,
}

impl TaskGraph {
    /// Build a graph from per-task costs and an edge list, validating every
    /// structural invariant.
    pub fn new(costs: Vec<u64>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        Self::build(costs, edges, &[])
    }

    /// `lines[t]` (when present) is the source line of task `t`, used in error messages.
    fn build(costs: Vec<u64>, mut edges: Vec<Edge>, lines: &[usize]) -> Result<Self, GraphError> {
        let k = costs.len();
        if k == 0 {
            return Err(GraphError::Empty);
        }
        let line_of = |t: TaskId| Line(lines.get(t).copied());
        for e in &edges {
            if e.from >= k || e.to >= k {
                return Err(GraphError::UnknownEndpoint {
                    line: if e.to < k { line_of(e.to) } else { Line(None) },
                    from: e.from,
                    to: e.to,
                    task_count: k,
                });
            }
            if e.from == e.to {
                return Err(GraphError::SelfEdge {
                    line: line_of(e.to),
                    task: e.to,
                });
            }
        }
        edges.sort();
        for w in edges.windows(2) {
            if (w[0].from, w[0].to) == (w[1].from, w[1].to) {
                return Err(GraphError::DuplicateEdge {
                    line: line_of(w[1].to),
                    from: w[1].from,
                    to: w[1].to,
                });
            }
        }
        let mut preds = vec![Vec::new(); k];
        let mut succs = vec![Vec::new(); k];
        for (i, e) in edges.iter().enumerate() {
            preds[e.to].push(i);
            succs[e.from].push(i);
        }
        let g = TaskGraph {
            costs,
            edges,
            preds,
            succs,
        };
        if let Err(task) = g.kahn() {
            return Err(GraphError::Cycle {
                line: line_of(task),
                task,
            });
        }
        Ok(g)
    }

    /// Kahn's algorithm with a min-heap, so ties go to the smallest id.
    /// On a cycle returns the smallest task id left unprocessed.
    fn kahn(&self) -> Result<Vec<TaskId>, TaskId> {
        let k = self.task_count();
        let mut indegree: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<TaskId>> = (0..k)
            .filter(|&t| indegree[t] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::with_capacity(k);
        while let Some(Reverse(t)) = ready.pop() {
            order.push(t);
            for &ei in &self.succs[t] {
                let v = self.edges[ei].to;
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    ready.push(Reverse(v));
                }
            }
        }
        if order.len() == k {
            Ok(order)
        } else {
            Err((0..k).find(|&t| indegree[t] > 0).unwrap_or(0))
        }
    }

    /// Topological order, ties broken by ascending task id.
    pub fn topo_order(&self) -> Vec<TaskId> {
        self.kahn()
            .expect("TaskGraph is acyclic by construction")
    }

    pub fn task_count(&self) -> usize {
        self.costs.len()
    }

    pub fn cost(&self, t: TaskId) -> u64 {
        self.costs[t]
    }

    pub fn costs(&self) -> &[u64] {
        &self.costs
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Incoming edges of `t`.
    pub fn preds(&self, t: TaskId) -> impl Iterator<Item = &Edge> + '_ {
        self.preds[t].iter().map(move |&i| &self.edges[i])
    }

    /// Outgoing edges of `t`.
    pub fn succs(&self, t: TaskId) -> impl Iterator<Item = &Edge> + '_ {
        self.succs[t].iter().map(move |&i| &self.edges[i])
    }

    pub fn pred_count(&self, t: TaskId) -> usize {
        self.preds[t].len()
    }

    pub fn comm(&self, from: TaskId, to: TaskId) -> Option<u64> {
        self.edges
            .binary_search_by(|e| (e.from, e.to).cmp(&(from, to)))
            .ok()
            .map(|i| self.edges[i].comm)
    }

    pub fn total_cost(&self) -> u64 {
        self.costs.iter().sum()
    }

    /// For each task, the longest cost-only path starting at it (its own cost
    /// included). Communication is ignored, so this is a valid lower bound on
    /// the time from the task's start to the end of any schedule.
    pub fn bottom_levels(&self) -> Vec<u64> {
        let mut level = self.costs.clone();
        for &t in self.topo_order().iter().rev() {
            let tail = self.succs(t).map(|e| level[e.to]).max().unwrap_or(0);
            level[t] = self.costs[t] + tail;
        }
        level
    }

    /// Length of the longest cost-only path.
    pub fn critical_path(&self) -> u64 {
        self.bottom_levels().into_iter().max().unwrap_or(0)
    }

    /// Copy of the graph with the same topology and costs but new edge
    /// communication costs, given in `edges()` order.
    fn with_comm(&self, comm: impl IntoIterator<Item = u64>) -> Self {
        let mut g = self.clone();
        for (e, c) in g.edges.iter_mut().zip(comm) {
            e.comm = c;
        }
        g
    }

    pub fn to_native_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&NativeDoc::from(self.clone()))
            .expect("native document always serializes");
        s.push('\n');
        s
    }

    /// STG rendering. Communication costs are dropped.
    pub fn to_stg(&self) -> String {
        let mut out = format!("{}\n", self.task_count());
        for t in 0..self.task_count() {
            out.push_str(&format!("{t} {} {}", self.costs[t], self.preds[t].len()));
            for e in self.preds(t) {
                out.push_str(&format!(" {}", e.from));
            }
            out.push('\n');
        }
        out
    }
}

/// Parse an STG document. All edges get communication cost 0.
pub fn parse_stg(text: &str) -> Result<TaskGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(GraphError::Malformed {
        line: 1,
        reason: "missing task-count header".into(),
    })?;
    let declared: usize = header
        .split_whitespace()
        .next()
        .and_then(|tok| tok.parse().ok())
        .ok_or_else(|| GraphError::Malformed {
            line: header_line,
            reason: format!("expected a task count, found {header:?}"),
        })?;
    if declared == 0 {
        return Err(GraphError::Empty);
    }

    struct Row {
        line: usize,
        id: usize,
        cost: u64,
        preds: Vec<usize>,
    }
    let mut rows = Vec::new();
    for (line, body) in lines {
        let nums = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>().map_err(|_| GraphError::Malformed {
                    line,
                    reason: format!("{tok:?} is not a non-negative integer"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if nums.len() < 3 {
            return Err(GraphError::Malformed {
                line,
                reason: "expected `id cost npreds pred...`".into(),
            });
        }
        let npreds = nums[2] as usize;
        if nums.len() != 3 + npreds {
            return Err(GraphError::Malformed {
                line,
                reason: format!(
                    "declares {npreds} predecessors but lists {}",
                    nums.len() - 3
                ),
            });
        }
        rows.push(Row {
            line,
            id: nums[0] as usize,
            cost: nums[1],
            preds: nums[3..].iter().map(|&p| p as usize).collect(),
        });
    }

    let k = rows.len();
    if k != declared && k != declared + 2 {
        return Err(GraphError::Malformed {
            line: header_line,
            reason: format!(
                "header declares {declared} tasks but {k} task lines follow \
                 (expected {declared} or {} with entry/exit nodes)",
                declared + 2
            ),
        });
    }

    let mut costs = vec![0; k];
    let mut task_lines = vec![0; k];
    let mut seen = vec![false; k];
    let mut edges = Vec::new();
    let mut pairs = HashSet::new();
    for row in &rows {
        if row.id >= k {
            return Err(GraphError::Malformed {
                line: row.line,
                reason: format!("task id {} outside 0..{k}", row.id),
            });
        }
        if seen[row.id] {
            return Err(GraphError::DuplicateTask {
                line: Line(Some(row.line)),
                id: row.id,
            });
        }
        seen[row.id] = true;
        costs[row.id] = row.cost;
        task_lines[row.id] = row.line;
        for &p in &row.preds {
            let line = Line(Some(row.line));
            if p >= k {
                return Err(GraphError::DanglingPredecessor {
                    line,
                    task: row.id,
                    pred: p,
                });
            }
            if p == row.id {
                return Err(GraphError::SelfEdge { line, task: p });
            }
            if !pairs.insert((p, row.id)) {
                return Err(GraphError::DuplicateEdge {
                    line,
                    from: p,
                    to: row.id,
                });
            }
            edges.push(Edge {
                from: p,
                to: row.id,
                comm: 0,
            });
        }
    }
    TaskGraph::build(costs, edges, &task_lines)
}

/// Parse the native JSON document.
pub fn parse_native(text: &str) -> Result<TaskGraph, GraphError> {
    let doc: NativeDoc = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
    TaskGraph::try_from(doc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NativeTask {
    id: i64,
    cost: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NativeEdge {
    from: i64,
    to: i64,
    comm: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NativeDoc {
    tasks: Vec<NativeTask>,
    edges: Vec<NativeEdge>,
}

impl TryFrom<NativeDoc> for TaskGraph {
    type Error = GraphError;

    fn try_from(doc: NativeDoc) -> Result<Self, GraphError> {
        let k = doc.tasks.len();
        if k == 0 {
            return Err(GraphError::Empty);
        }
        let mut costs = vec![None; k];
        for t in &doc.tasks {
            if t.cost < 0 {
                return Err(GraphError::NegativeCost {
                    what: "task cost",
                    value: t.cost,
                });
            }
            if t.id < 0 || t.id as usize >= k {
                return Err(GraphError::MissingTask {
                    id: (0..k).find(|&i| costs[i].is_none()).unwrap_or(0),
                    task_count: k,
                });
            }
            let slot = &mut costs[t.id as usize];
            if slot.is_some() {
                return Err(GraphError::DuplicateTask {
                    line: Line(None),
                    id: t.id as usize,
                });
            }
            *slot = Some(t.cost as u64);
        }
        let costs: Vec<u64> = costs.into_iter().map(|c| c.unwrap_or(0)).collect();

        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in &doc.edges {
            if e.comm < 0 {
                return Err(GraphError::NegativeCost {
                    what: "communication cost",
                    value: e.comm,
                });
            }
            if e.from < 0 || e.to < 0 {
                return Err(GraphError::UnknownEndpoint {
                    line: Line(None),
                    from: e.from.max(0) as usize,
                    to: e.to.max(0) as usize,
                    task_count: k,
                });
            }
            edges.push(Edge {
                from: e.from as usize,
                to: e.to as usize,
                comm: e.comm as u64,
            });
        }
        TaskGraph::new(costs, edges)
    }
}

impl From<TaskGraph> for NativeDoc {
    fn from(g: TaskGraph) -> Self {
        NativeDoc {
            tasks: g
                .costs
                .iter()
                .enumerate()
                .map(|(id, &cost)| NativeTask {
                    id: id as i64,
                    cost: cost as i64,
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| NativeEdge {
                    from: e.from as i64,
                    to: e.to as i64,
                    comm: e.comm as i64,
                })
                .collect(),
        }
    }
}

/// Parameters for replacing every edge's communication cost with a seeded
/// uniform draw from `[min_cost, max_cost]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAugment")]
pub struct CommAugmentSpec {
    seed: u64,
    min_cost: u64,
    max_cost: u64,
}

#[derive(Deserialize)]
struct RawAugment {
    seed: u64,
    min_cost: u64,
    max_cost: u64,
}

impl TryFrom<RawAugment> for CommAugmentSpec {
    type Error = GraphError;
    fn try_from(r: RawAugment) -> Result<Self, GraphError> {
        CommAugmentSpec::new(r.seed, r.min_cost, r.max_cost)
    }
}

impl CommAugmentSpec {
    pub const DEFAULT_MIN: u64 = 1;
    pub const DEFAULT_MAX: u64 = 20;

    pub fn new(seed: u64, min_cost: u64, max_cost: u64) -> Result<Self, GraphError> {
        if min_cost < 1 || max_cost < min_cost {
            return Err(GraphError::InvalidAugmentRange {
                min: min_cost,
                max: max_cost,
            });
        }
        Ok(Self {
            seed,
            min_cost,
            max_cost,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn min_cost(&self) -> u64 {
        self.min_cost
    }

    pub fn max_cost(&self) -> u64 {
        self.max_cost
    }
}

/// Replace every communication cost with a seeded draw. Edges are visited in
/// ascending `(from, to)` order, one draw each.
pub fn augment_comm(g: &TaskGraph, spec: &CommAugmentSpec) -> TaskGraph {
    let mut rng = SeededRng::new(spec.seed);
    let draws: Vec<u64> = g
        .edges()
        .iter()
        .map(|_| rng.inclusive(spec.min_cost, spec.max_cost))
        .collect();
    g.with_comm(draws)
}
