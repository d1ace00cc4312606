//! Genetic search over gene vectors.
//!
//! Fitness is the reciprocal of makespan. Each generation keeps an elite slice
//! unchanged and fills the rest with offspring from size-2 tournaments,
//! weight-mapping crossover (WMX) and swap mutation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::TaskGraph;
use crate::rng::SeededRng;
use crate::schedule::{evaluate, gene_range, Chromosome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("makespan 0 has no fitness (every task cost is zero)")]
    ZeroMakespan,
    #[error("parents differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid crossover cut [{lo}, {hi}) for length {len}")]
    InvalidCut { lo: usize, hi: usize, len: usize },
    #[error("invalid GA configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub popsize: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_fraction: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            popsize: 100,
            crossover_rate: 0.7,
            mutation_rate: 0.3,
            elite_fraction: 0.1,
            seed: 1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.popsize < 2 {
            return Err(GaError::Config(format!("popsize {} < 2", self.popsize)));
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(GaError::Config(format!("{name} {rate} outside [0, 1]")));
            }
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(GaError::Config(format!(
                "elite_fraction {} outside (0, 1)",
                self.elite_fraction
            )));
        }
        Ok(())
    }

    /// `⌈elite_fraction · popsize⌉`, at most `popsize`.
    pub fn elite_count(&self) -> usize {
        let raw = self.elite_fraction * self.popsize as f64;
        // Absorb representation error such as 0.1 * 30 = 3.0000000000000004.
        ((raw - 1e-9).ceil() as usize).clamp(1, self.popsize)
    }
}

/// `1 / makespan`.
pub fn fitness(makespan: u64) -> Result<f64, GaError> {
    if makespan == 0 {
        return Err(GaError::ZeroMakespan);
    }
    Ok(1.0 / makespan as f64)
}

pub fn random_chromosome(k: usize, p: usize, rng: &mut SeededRng) -> Chromosome {
    let range = gene_range(k, p);
    Chromosome::new((0..k).map(|_| rng.below(range)).collect())
}

/// Positions of `segment` ordered by rank: largest value first, equal values
/// in ascending position order.
fn rank_order(segment: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..segment.len()).collect();
    idx.sort_by(|&a, &b| segment[b].cmp(&segment[a]));
    idx
}

/// Rank (1 = largest) of each position of `segment`, ties by position.
pub fn rank_pattern(segment: &[u64]) -> Vec<usize> {
    let mut ranks = vec![0; segment.len()];
    for (r, i) in rank_order(segment).into_iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Rearrange `donor` values so they follow the rank pattern of `pattern`.
fn remap(pattern: &[u64], donor: &[u64]) -> Vec<u64> {
    let mut sorted = donor.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut out = vec![0; pattern.len()];
    for (r, i) in rank_order(pattern).into_iter().enumerate() {
        out[i] = sorted[r];
    }
    out
}

/// Weight-mapping crossover over the segment `[lo, hi)`.
///
/// `child1` is `p1` with its segment replaced by `p2`'s segment values laid
/// out in `p1`'s rank pattern; `child2` is the mirror image.
pub fn wmx_crossover(
    p1: &Chromosome,
    p2: &Chromosome,
    (lo, hi): (usize, usize),
) -> Result<(Chromosome, Chromosome), GaError> {
    if p1.len() != p2.len() {
        return Err(GaError::LengthMismatch(p1.len(), p2.len()));
    }
    if lo >= hi || hi > p1.len() {
        return Err(GaError::InvalidCut {
            lo,
            hi,
            len: p1.len(),
        });
    }
    let s1 = &p1.genes()[lo..hi];
    let s2 = &p2.genes()[lo..hi];
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    c1.genes_mut()[lo..hi].copy_from_slice(&remap(s1, s2));
    c2.genes_mut()[lo..hi].copy_from_slice(&remap(s2, s1));
    Ok((c1, c2))
}

/// Two distinct cut positions drawn uniformly from `[0, k]`, returned ordered.
pub fn random_cut(k: usize, rng: &mut SeededRng) -> (usize, usize) {
    assert!(k >= 1);
    loop {
        let a = rng.below_usize(k + 1);
        let b = rng.below_usize(k + 1);
        if a != b {
            return (a.min(b), a.max(b));
        }
    }
}

pub fn swap_positions(c: &Chromosome, i: usize, j: usize) -> Chromosome {
    let mut out = c.clone();
    out.genes_mut().swap(i, j);
    out
}

/// Swap the values at two distinct uniformly chosen positions. With fewer than
/// two genes this is a no-op and consumes no randomness.
pub fn swap_mutation(c: &Chromosome, rng: &mut SeededRng) -> Chromosome {
    let k = c.len();
    if k < 2 {
        return c.clone();
    }
    let i = rng.below_usize(k);
    let j = (i + 1 + rng.below_usize(k - 1)) % k;
    swap_positions(c, i, j)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub chromosome: Chromosome,
    pub makespan: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Member>,
    pub generation: u64,
}

/// Makespans of many chromosomes in parallel; consumes no randomness.
pub(crate) fn evaluate_all(chromosomes: Vec<Chromosome>, g: &TaskGraph, p: usize) -> Vec<Member> {
    chromosomes
        .into_par_iter()
        .map(|c| {
            let makespan = evaluate(c.genes(), g, p).expect("chromosome length matches graph");
            Member {
                chromosome: c,
                makespan,
            }
        })
        .collect()
}

impl Population {
    pub fn random(popsize: usize, g: &TaskGraph, p: usize, rng: &mut SeededRng) -> Self {
        let k = g.task_count();
        let chromosomes = (0..popsize).map(|_| random_chromosome(k, p, rng)).collect();
        Self {
            members: evaluate_all(chromosomes, g, p),
            generation: 0,
        }
    }

    /// Lowest-makespan member; the earliest one on ties.
    pub fn best(&self) -> &Member {
        self.members
            .iter()
            .min_by_key(|m| m.makespan)
            .expect("population is never empty")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Size-2 tournament: two uniform draws (with replacement), lower makespan wins.
fn tournament(members: &[Member], rng: &mut SeededRng) -> usize {
    let a = rng.below_usize(members.len());
    let b = rng.below_usize(members.len());
    match members[a].makespan.cmp(&members[b].makespan) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => a.min(b),
    }
}

/// One generation: elites first (by makespan, stable), then evaluated offspring.
pub fn next_generation(
    pop: &Population,
    cfg: &GaConfig,
    g: &TaskGraph,
    p: usize,
    rng: &mut SeededRng,
) -> Population {
    let popsize = cfg.popsize;
    let k = g.task_count();
    let mut ranked: Vec<usize> = (0..pop.members.len()).collect();
    ranked.sort_by_key(|&i| pop.members[i].makespan);
    let elites = cfg.elite_count().min(pop.members.len());
    let mut members: Vec<Member> = ranked[..elites]
        .iter()
        .map(|&i| pop.members[i].clone())
        .collect();

    let wanted = popsize.saturating_sub(members.len());
    let mut offspring = Vec::with_capacity(wanted + 1);
    while offspring.len() < wanted {
        let a = &pop.members[tournament(&pop.members, rng)].chromosome;
        let b = &pop.members[tournament(&pop.members, rng)].chromosome;
        let (c1, c2) = if rng.chance(cfg.crossover_rate) {
            wmx_crossover(a, b, random_cut(k, rng)).expect("population chromosomes share length")
        } else {
            (a.clone(), b.clone())
        };
        for child in [c1, c2] {
            let child = if rng.chance(cfg.mutation_rate) {
                swap_mutation(&child, rng)
            } else {
                child
            };
            offspring.push(child);
        }
    }
    offspring.truncate(wanted);
    members.extend(evaluate_all(offspring, g, p));

    Population {
        members,
        generation: pop.generation + 1,
    }
}
