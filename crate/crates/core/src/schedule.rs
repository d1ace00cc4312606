//! Chromosome decoding into concrete schedules.
//!
//! A gene value does double duty: it is the task's priority (larger runs
//! first among ready tasks) and, modulo the processor count, the processor
//! the task runs on. Decoding is a strict priority-list pass: the
//! highest-priority ready task is always placed next, appended after the last
//! task on its processor (no filling of idle gaps), at the earliest time its
//! inputs are available.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{TaskGraph, TaskId};

/// Gene vector, one value per task.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chromosome(Vec<u64>);

impl Chromosome {
    pub fn new(genes: Vec<u64>) -> Self {
        Self(genes)
    }

    pub fn genes(&self) -> &[u64] {
        &self.0
    }

    pub fn genes_mut(&mut self) -> &mut [u64] {
        &mut self.0
    }

    pub fn into_genes(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks length `k` and that every gene is below `gene_range(k, p)`.
    pub fn is_valid_for(&self, k: usize, p: usize) -> bool {
        let range = gene_range(k, p);
        self.len() == k && self.0.iter().all(|&v| v < range)
    }
}

impl From<Vec<u64>> for Chromosome {
    fn from(genes: Vec<u64>) -> Self {
        Self(genes)
    }
}

/// Exclusive upper bound for gene values: `2·k·P`. A multiple of `P`, so
/// uniform gene draws give uniform processor assignments.
pub fn gene_range(k: usize, p: usize) -> u64 {
    2 * k as u64 * p as u64
}

pub fn processor_of(gene: u64, p: usize) -> usize {
    (gene % p as u64) as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("chromosome has {actual} genes but the graph has {expected} tasks")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("processor count must be at least 1")]
    NoProcessors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub task: TaskId,
    pub processor: usize,
    pub start: u64,
    pub finish: u64,
}

/// Timed placement of every task. `placements[t]` belongs to task `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub processors: usize,
    pub placements: Vec<Placement>,
    pub makespan: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleViolation {
    #[error("schedule covers {actual} tasks, graph has {expected}")]
    TaskCount { expected: usize, actual: usize },
    #[error("placement {index} is labelled as task {task}")]
    Misindexed { index: usize, task: TaskId },
    #[error("task {task} runs on processor {processor} of {processors}")]
    BadProcessor {
        task: TaskId,
        processor: usize,
        processors: usize,
    },
    #[error("task {task}: finish {finish} != start {start} + cost {cost}")]
    Duration {
        task: TaskId,
        start: u64,
        finish: u64,
        cost: u64,
    },
    #[error("tasks {a} and {b} overlap on processor {processor}")]
    Overlap { a: TaskId, b: TaskId, processor: usize },
    #[error("task {succ} starts at {start} before its input from {pred} is available at {ready}")]
    Precedence {
        pred: TaskId,
        succ: TaskId,
        start: u64,
        ready: u64,
    },
    #[error("recorded makespan {recorded} != latest finish {actual}")]
    Makespan { recorded: u64, actual: u64 },
}

impl Schedule {
    pub fn makespan(&self) -> u64 {
        self.makespan
    }

    /// Placements grouped by processor, each lane ordered by start time.
    pub fn lanes(&self) -> Vec<Vec<Placement>> {
        let mut lanes = vec![Vec::new(); self.processors];
        for p in &self.placements {
            if p.processor < self.processors {
                lanes[p.processor].push(*p);
            }
        }
        for lane in &mut lanes {
            lane.sort_by_key(|p| (p.start, p.finish, p.task));
        }
        lanes
    }

    /// Check the schedule against `g`: durations, no overlap per processor,
    /// precedence with communication delays across processors, and the
    /// recorded makespan.
    pub fn validate(&self, g: &TaskGraph) -> Result<(), ScheduleViolation> {
        let k = g.task_count();
        if self.placements.len() != k {
            return Err(ScheduleViolation::TaskCount {
                expected: k,
                actual: self.placements.len(),
            });
        }
        for (i, p) in self.placements.iter().enumerate() {
            if p.task != i {
                return Err(ScheduleViolation::Misindexed { index: i, task: p.task });
            }
            if p.processor >= self.processors {
                return Err(ScheduleViolation::BadProcessor {
                    task: i,
                    processor: p.processor,
                    processors: self.processors,
                });
            }
            if p.start.checked_add(g.cost(i)) != Some(p.finish) {
                return Err(ScheduleViolation::Duration {
                    task: i,
                    start: p.start,
                    finish: p.finish,
                    cost: g.cost(i),
                });
            }
        }
        for (processor, lane) in self.lanes().iter().enumerate() {
            for w in lane.windows(2) {
                // Zero-length tasks may share an instant with a neighbour.
                if w[1].start < w[0].finish {
                    return Err(ScheduleViolation::Overlap {
                        a: w[0].task,
                        b: w[1].task,
                        processor,
                    });
                }
            }
        }
        for e in g.edges() {
            let u = &self.placements[e.from];
            let v = &self.placements[e.to];
            let delay = if u.processor == v.processor { 0 } else { e.comm };
            let ready = u.finish + delay;
            if v.start < ready {
                return Err(ScheduleViolation::Precedence {
                    pred: e.from,
                    succ: e.to,
                    start: v.start,
                    ready,
                });
            }
        }
        let actual = self.placements.iter().map(|p| p.finish).max().unwrap_or(0);
        if actual != self.makespan {
            return Err(ScheduleViolation::Makespan {
                recorded: self.makespan,
                actual,
            });
        }
        Ok(())
    }
}

/// Earliest start of `task` on `processor`, appended after `available`,
/// given already-placed predecessors.
pub(crate) fn earliest_start(
    g: &TaskGraph,
    placements: &[Option<Placement>],
    task: TaskId,
    processor: usize,
    available: u64,
) -> u64 {
    g.preds(task).fold(available, |acc, e| {
        let pred = placements[e.from].expect("predecessor placed before successor");
        let delay = if pred.processor == processor { 0 } else { e.comm };
        acc.max(pred.finish + delay)
    })
}

/// Decode a chromosome into a schedule on `p` processors.
pub fn decode(c: &Chromosome, g: &TaskGraph, p: usize) -> Result<Schedule, DecodeError> {
    decode_genes(c.genes(), g, p)
}

pub fn decode_genes(genes: &[u64], g: &TaskGraph, p: usize) -> Result<Schedule, DecodeError> {
    let k = g.task_count();
    if genes.len() != k {
        return Err(DecodeError::LengthMismatch {
            expected: k,
            actual: genes.len(),
        });
    }
    if p == 0 {
        return Err(DecodeError::NoProcessors);
    }

    let mut waiting: Vec<usize> = (0..k).map(|t| g.pred_count(t)).collect();
    let mut ready: BinaryHeap<(u64, Reverse<TaskId>)> = (0..k)
        .filter(|&t| waiting[t] == 0)
        .map(|t| (genes[t], Reverse(t)))
        .collect();
    let mut available = vec![0u64; p];
    let mut placements: Vec<Option<Placement>> = vec![None; k];
    let mut makespan = 0;

    while let Some((gene, Reverse(task))) = ready.pop() {
        let processor = processor_of(gene, p);
        let start = earliest_start(g, &placements, task, processor, available[processor]);
        let finish = start + g.cost(task);
        placements[task] = Some(Placement {
            task,
            processor,
            start,
            finish,
        });
        available[processor] = finish;
        makespan = makespan.max(finish);
        for e in g.succs(task) {
            waiting[e.to] -= 1;
            if waiting[e.to] == 0 {
                ready.push((genes[e.to], Reverse(e.to)));
            }
        }
    }

    Ok(Schedule {
        processors: p,
        placements: placements
            .into_iter()
            .map(|pl| pl.expect("every task of a DAG becomes ready"))
            .collect(),
        makespan,
    })
}

/// Makespan of the decoded chromosome.
pub fn evaluate(genes: &[u64], g: &TaskGraph, p: usize) -> Result<u64, DecodeError> {
    decode_genes(genes, g, p).map(|s| s.makespan)
}
