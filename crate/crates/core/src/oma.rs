//! Object-migration automata over gene vectors.
//!
//! Each gene of a chromosome becomes an action of an automaton. Every action
//! owns a chain of `N` states (the memory depth), numbered here by depth:
//! depth 1 is the boundary state, depth `N` the most internal one. A learning
//! step proposes a new value for one gene and asks the environment (the
//! decoder) whether the makespan strictly improves:
//!
//! * improvement: the proposal is kept and the gene moves one state inward
//!   (reward, capped at `N`);
//! * no improvement above the boundary: the proposal is discarded and the
//!   gene moves one state outward (penalty);
//! * no improvement at the boundary: the gene migrates, i.e. the proposal
//!   replaces it even though it is not better, and the gene stays at depth 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::TaskGraph;
use crate::rng::SeededRng;
use crate::schedule::{evaluate, gene_range, Chromosome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automaton {
    pub genes: Chromosome,
    pub depths: Vec<u32>,
    pub memory_depth: u32,
    pub makespan: u64,
}

/// What a single learning step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Reward,
    Penalty,
    Replace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub gene: usize,
    pub candidate: u64,
    pub candidate_makespan: u64,
    pub kind: StepKind,
}

impl Automaton {
    /// One action per gene, every action at its boundary state.
    pub fn from_chromosome(c: &Chromosome, g: &TaskGraph, p: usize, memory_depth: u32) -> Self {
        assert!(memory_depth >= 1, "memory depth must be at least 1");
        let makespan = evaluate(c.genes(), g, p).expect("chromosome length matches graph");
        Self {
            genes: c.clone(),
            depths: vec![1; c.len()],
            memory_depth,
            makespan,
        }
    }

    pub fn to_chromosome(&self) -> Chromosome {
        self.genes.clone()
    }

    /// Apply the environment's verdict on replacing gene `i` by `candidate`.
    pub fn respond(&mut self, i: usize, candidate: u64, candidate_makespan: u64) -> StepKind {
        if candidate_makespan < self.makespan {
            self.genes.genes_mut()[i] = candidate;
            self.makespan = candidate_makespan;
            self.depths[i] = (self.depths[i] + 1).min(self.memory_depth);
            StepKind::Reward
        } else if self.depths[i] > 1 {
            self.depths[i] -= 1;
            StepKind::Penalty
        } else {
            self.genes.genes_mut()[i] = candidate;
            self.makespan = candidate_makespan;
            StepKind::Replace
        }
    }

    /// Propose a uniform new value for a uniformly chosen gene and respond.
    pub fn la_step(&mut self, g: &TaskGraph, p: usize, rng: &mut SeededRng) -> StepOutcome {
        let k = self.genes.len();
        let i = rng.below_usize(k);
        let candidate = rng.below(gene_range(k, p));
        let mut trial = self.genes.genes().to_vec();
        trial[i] = candidate;
        let candidate_makespan = evaluate(&trial, g, p).expect("automaton length matches graph");
        let kind = self.respond(i, candidate, candidate_makespan);
        StepOutcome {
            gene: i,
            candidate,
            candidate_makespan,
            kind,
        }
    }
}

/// Result of one sweep over a pool of automata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub outcomes: Vec<StepOutcome>,
}

/// One learning step per automaton. The sweep draws a single key from `rng`;
/// automaton `i` then uses substream `i` of that key, so the result does not
/// depend on how the work is spread over threads.
pub fn la_sweep(pool: &mut [Automaton], g: &TaskGraph, p: usize, rng: &mut SeededRng) -> Sweep {
    let key = rng.next_u64();
    let outcomes = pool
        .par_iter_mut()
        .enumerate()
        .map(|(i, a)| {
            let mut sub = SeededRng::substream(key, i as u64);
            a.la_step(g, p, &mut sub)
        })
        .collect();
    Sweep { outcomes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn graph() -> TaskGraph {
        TaskGraph::new(
            vec![3, 2, 4, 1],
            vec![
                Edge { from: 0, to: 1, comm: 2 },
                Edge { from: 0, to: 2, comm: 5 },
                Edge { from: 1, to: 3, comm: 1 },
                Edge { from: 2, to: 3, comm: 3 },
            ],
        )
        .unwrap()
    }

    fn automaton(depths: Vec<u32>, n: u32) -> Automaton {
        Automaton {
            genes: Chromosome::new(vec![1, 2, 3, 4]),
            depths,
            memory_depth: n,
            makespan: 10,
        }
    }

    #[test]
    fn nine_gene_chromosome_maps_to_boundary_actions() {
        let genes = vec![15, 11, 14, 9, 17, 5, 3, 2, 7];
        let g = TaskGraph::new(vec![1; 9], vec![]).unwrap();
        let c = Chromosome::new(genes.clone());
        let a = Automaton::from_chromosome(&c, &g, 2, 5);
        assert_eq!(a.genes.genes(), genes.as_slice());
        assert_eq!(a.depths, vec![1; 9]);
        assert_eq!(a.to_chromosome(), c);
        assert_eq!(a.makespan, evaluate(&genes, &g, 2).unwrap());
    }

    #[test]
    fn single_gene_automaton() {
        let g = TaskGraph::new(vec![4], vec![]).unwrap();
        let a = Automaton::from_chromosome(&Chromosome::new(vec![0]), &g, 1, 5);
        assert_eq!(a.depths, vec![1]);
        assert_eq!(a.makespan, 4);
    }

    #[test]
    fn reward_moves_inward_and_takes_candidate() {
        let mut a = automaton(vec![1, 3, 1, 1], 5);
        assert_eq!(a.respond(1, 99, 8), StepKind::Reward);
        assert_eq!(a.depths, vec![1, 4, 1, 1]);
        assert_eq!(a.genes.genes(), &[1, 99, 3, 4]);
        assert_eq!(a.makespan, 8);
    }

    #[test]
    fn penalty_moves_outward_and_keeps_gene() {
        let mut a = automaton(vec![1, 3, 1, 1], 5);
        assert_eq!(a.respond(1, 99, 12), StepKind::Penalty);
        assert_eq!(a.depths, vec![1, 2, 1, 1]);
        assert_eq!(a.genes.genes(), &[1, 2, 3, 4]);
        assert_eq!(a.makespan, 10);
    }

    #[test]
    fn equal_makespan_is_not_a_reward() {
        let mut a = automaton(vec![2, 1, 1, 1], 5);
        assert_eq!(a.respond(0, 50, 10), StepKind::Penalty);
        assert_eq!(a.depths[0], 1);
    }

    #[test]
    fn boundary_penalty_replaces() {
        let mut a = automaton(vec![1, 1, 1, 1], 5);
        assert_eq!(a.respond(2, 42, 15), StepKind::Replace);
        assert_eq!(a.depths, vec![1, 1, 1, 1]);
        assert_eq!(a.genes.genes(), &[1, 2, 42, 4]);
        assert_eq!(a.makespan, 15);
    }

    #[test]
    fn depth_laws_exhaustive() {
        for n in 1..=6u32 {
            for d in 1..=n {
                for improve in [true, false] {
                    let mut a = automaton(vec![d, 1, 1, 1], n);
                    let before = a.clone();
                    let ms = if improve { 9 } else { 11 };
                    let kind = a.respond(0, 77, ms);
                    assert!(a.depths[0] >= 1 && a.depths[0] <= n);
                    assert_eq!(&a.depths[1..], &before.depths[1..]);
                    assert_eq!(&a.genes.genes()[1..], &before.genes.genes()[1..]);
                    match (improve, d) {
                        (true, _) => {
                            assert_eq!(kind, StepKind::Reward);
                            assert_eq!(a.depths[0], (d + 1).min(n));
                            assert_eq!(a.genes.genes()[0], 77);
                        }
                        (false, 1) => {
                            assert_eq!(kind, StepKind::Replace);
                            assert_eq!(a.depths[0], 1);
                            assert_eq!(a.genes.genes()[0], 77);
                        }
                        (false, _) => {
                            assert_eq!(kind, StepKind::Penalty);
                            assert_eq!(a.depths[0], d - 1);
                            assert_eq!(a.genes.genes()[0], 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn la_step_keeps_cache_consistent() {
        let g = graph();
        let mut rng = SeededRng::new(12);
        let mut a = Automaton::from_chromosome(&Chromosome::new(vec![5, 9, 2, 14]), &g, 2, 5);
        for _ in 0..500 {
            let before = a.clone();
            let out = a.la_step(&g, 2, &mut rng);
            assert_eq!(a.makespan, evaluate(a.genes.genes(), &g, 2).unwrap());
            assert!(a.genes.is_valid_for(4, 2));
            let changed = (0..4).filter(|&i| a.depths[i] != before.depths[i]).count();
            assert!(changed <= 1);
            if out.kind == StepKind::Reward {
                assert!(a.makespan < before.makespan);
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_touches_each_once() {
        let g = graph();
        let mut seed_rng = SeededRng::new(1);
        let pool: Vec<Automaton> = (0..8)
            .map(|_| {
                let c = crate::ga::random_chromosome(4, 2, &mut seed_rng);
                Automaton::from_chromosome(&c, &g, 2, 5)
            })
            .collect();

        let mut a = pool.clone();
        let mut b = pool.clone();
        let sa = la_sweep(&mut a, &g, 2, &mut SeededRng::new(9));
        let sb = la_sweep(&mut b, &g, 2, &mut SeededRng::new(9));
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(sa.outcomes.len(), 8);
        for (after, before) in a.iter().zip(&pool) {
            let changed = after
                .depths
                .iter()
                .zip(&before.depths)
                .filter(|(x, y)| x != y)
                .count();
            assert!(changed <= 1);
        }
    }

    #[test]
    fn sweep_of_one_matches_single_step() {
        let g = graph();
        let base = Automaton::from_chromosome(&Chromosome::new(vec![5, 9, 2, 14]), &g, 2, 5);
        let mut pool = vec![base.clone()];
        let mut rng = SeededRng::new(33);
        la_sweep(&mut pool, &g, 2, &mut rng);

        let key = SeededRng::new(33).next_u64();
        let mut single = base;
        single.la_step(&g, 2, &mut SeededRng::substream(key, 0));
        assert_eq!(pool[0], single);
    }
}
