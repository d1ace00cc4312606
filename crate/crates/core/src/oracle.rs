//! Exact minimum makespan for small graphs.
//!
//! The search enumerates every sequence of `(ready task, processor)` choices
//! and places each task at its earliest start after the last task already on
//! that processor. This space contains an optimum of the general
//! non-preemptive problem: take any feasible schedule and replay its tasks in
//! order of start time; each task's earliest start is no later than before,
//! so the replay is feasible and no longer. Idle time inserted beyond the
//! earliest start therefore never helps.
//!
//! The same argument, iterated to a fixed point, shows some optimal schedule
//! is reproduced by a sequence whose start times never decrease, so branches
//! that would place a task earlier than the previous placement are skipped.
//! Two further cuts keep the search small without losing the optimum:
//! processors that are still empty are interchangeable (only the first is
//! tried), and a branch is abandoned when
//! `max(critical-path remainder, ceil(total load / P))` reaches the incumbent.
//!
//! Every schedule the decoder can produce lies in this space, so the optimum
//! is a lower bound for any chromosome.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{TaskGraph, TaskId};
use crate::schedule::{earliest_start, Placement, Schedule};

pub const MAX_ORACLE_TASKS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {tasks} tasks; the exact search accepts at most {MAX_ORACLE_TASKS}")]
    TooLarge { tasks: usize },
    #[error("processor count must be at least 1")]
    NoProcessors,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimum_makespan: u64,
    pub witness: Schedule,
    pub nodes_explored: u64,
}

struct Search<'g> {
    g: &'g TaskGraph,
    p: usize,
    bottom: Vec<u64>,
    topo_rank: Vec<usize>,
    placements: Vec<Option<Placement>>,
    waiting: Vec<usize>,
    available: Vec<u64>,
    used: Vec<bool>,
    remaining_cost: u64,
    placed: usize,
    best: u64,
    best_placements: Vec<Option<Placement>>,
    nodes: u64,
}

impl Search<'_> {
    fn lower_bound(&self, partial: u64) -> u64 {
        let min_avail = self.available.iter().copied().min().unwrap_or(0);
        let mut lb = partial;
        for t in 0..self.g.task_count() {
            if self.placements[t].is_none() && self.waiting[t] == 0 {
                let data = self
                    .g
                    .preds(t)
                    .map(|e| self.placements[e.from].map_or(0, |pl| pl.finish))
                    .max()
                    .unwrap_or(0);
                lb = lb.max(data.max(min_avail) + self.bottom[t]);
            }
        }
        let load: u64 = self.available.iter().sum::<u64>() + self.remaining_cost;
        lb.max(load.div_ceil(self.p as u64))
    }

    fn dfs(&mut self, partial: u64, last: (u64, usize)) {
        self.nodes += 1;
        if self.placed == self.g.task_count() {
            if partial < self.best {
                self.best = partial;
                self.best_placements = self.placements.clone();
            }
            return;
        }
        if self.lower_bound(partial) >= self.best {
            return;
        }
        let k = self.g.task_count();
        for t in 0..k {
            if self.placements[t].is_some() || self.waiting[t] != 0 {
                continue;
            }
            let mut tried_empty = false;
            for proc in 0..self.p {
                if !self.used[proc] {
                    if tried_empty {
                        continue;
                    }
                    tried_empty = true;
                }
                let start = earliest_start(self.g, &self.placements, t, proc, self.available[proc]);
                if (start, self.topo_rank[t]) < last {
                    continue;
                }
                let finish = start + self.g.cost(t);
                if finish >= self.best {
                    continue;
                }
                self.place(t, proc, start, finish);
                let (saved_avail, saved_used) = (self.available[proc], self.used[proc]);
                self.available[proc] = finish;
                self.used[proc] = true;
                self.dfs(partial.max(finish), (start, self.topo_rank[t]));
                self.available[proc] = saved_avail;
                self.used[proc] = saved_used;
                self.unplace(t);
            }
        }
    }

    fn place(&mut self, t: TaskId, processor: usize, start: u64, finish: u64) {
        self.placements[t] = Some(Placement {
            task: t,
            processor,
            start,
            finish,
        });
        self.placed += 1;
        self.remaining_cost -= self.g.cost(t);
        for e in self.g.succs(t) {
            self.waiting[e.to] -= 1;
        }
    }

    fn unplace(&mut self, t: TaskId) {
        self.placements[t] = None;
        self.placed -= 1;
        self.remaining_cost += self.g.cost(t);
        for e in self.g.succs(t) {
            self.waiting[e.to] += 1;
        }
    }
}

/// Exhaustive branch-and-bound optimum on `p` processors.
pub fn brute_force_optimum(g: &TaskGraph, p: usize) -> Result<OracleResult, OracleError> {
    let k = g.task_count();
    if k > MAX_ORACLE_TASKS {
        return Err(OracleError::TooLarge { tasks: k });
    }
    if p == 0 {
        return Err(OracleError::NoProcessors);
    }

    let topo = g.topo_order();
    let mut topo_rank = vec![0; k];
    for (i, &t) in topo.iter().enumerate() {
        topo_rank[t] = i;
    }

    // Incumbent: everything on processor 0 in topological order.
    let mut serial = vec![None; k];
    let mut clock = 0;
    for &t in &topo {
        serial[t] = Some(Placement {
            task: t,
            processor: 0,
            start: clock,
            finish: clock + g.cost(t),
        });
        clock += g.cost(t);
    }

    let mut search = Search {
        g,
        p,
        bottom: g.bottom_levels(),
        topo_rank,
        placements: vec![None; k],
        waiting: (0..k).map(|t| g.pred_count(t)).collect(),
        available: vec![0; p],
        used: vec![false; p],
        remaining_cost: g.total_cost(),
        placed: 0,
        best: clock,
        best_placements: serial,
        nodes: 0,
    };
    search.dfs(0, (0, 0));

    let witness = Schedule {
        processors: p,
        placements: search
            .best_placements
            .into_iter()
            .map(|pl| pl.expect("incumbent covers every task"))
            .collect(),
        makespan: search.best,
    };
    Ok(OracleResult {
        optimum_makespan: search.best,
        witness,
        nodes_explored: search.nodes,
    })
}
