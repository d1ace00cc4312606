#![allow(dead_code)]

use tgsched::graph::{Edge, TaskGraph};
use tgsched::rng::SeededRng;

/// Random DAG: `k` tasks, each forward pair `(i, j)` linked with probability
/// `density`, costs uniform in `cost`, communication uniform in `comm`.
pub fn random_dag(
    rng: &mut SeededRng,
    k: usize,
    density: f64,
    cost: (u64, u64),
    comm: (u64, u64),
) -> TaskGraph {
    let costs = (0..k).map(|_| rng.inclusive(cost.0, cost.1)).collect();
    let mut edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if rng.chance(density) {
                edges.push(Edge {
                    from: i,
                    to: j,
                    comm: rng.inclusive(comm.0, comm.1),
                });
            }
        }
    }
    TaskGraph::new(costs, edges).expect("forward edges form a DAG")
}

/// Small instance in the acceptance family: k in 2..=8, costs 1..=10, comm 0..=10.
pub fn small_instance(seed: u64) -> TaskGraph {
    let mut rng = SeededRng::new(seed ^ 0x5e_ed0f_da95);
    let k = 2 + rng.below_usize(7);
    let density = 0.15 + 0.35 * rng.unit();
    random_dag(&mut rng, k, density, (1, 10), (0, 10))
}

/// 50-task layered graph in STG layout (with zero-cost entry/exit dummies),
/// costs 1..=10. Communication costs are not part of STG.
pub fn synthetic_stg50(seed: u64) -> String {
    let mut rng = SeededRng::new(seed);
    let n = 50usize;
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n + 2];
    let mut costs = vec![0u64; n + 2];
    for t in 1..=n {
        costs[t] = rng.inclusive(1, 10);
        if t > 1 {
            let fan = rng.below_usize(4);
            for _ in 0..fan {
                let lo = t.saturating_sub(12).max(1);
                let p = lo + rng.below_usize(t - lo);
                if !preds[t].contains(&p) {
                    preds[t].push(p);
                }
            }
            preds[t].sort_unstable();
        }
        if preds[t].is_empty() {
            preds[t].push(0);
        }
    }
    let has_succ: Vec<bool> = (0..n + 2)
        .map(|t| preds.iter().any(|ps| ps.contains(&t)))
        .collect();
    preds[n + 1] = (1..=n).filter(|&t| !has_succ[t]).collect();
    let mut out = format!("{n}\n");
    for t in 0..n + 2 {
        out.push_str(&format!("{t} {} {}", costs[t], preds[t].len()));
        for p in &preds[t] {
            out.push_str(&format!(" {p}"));
        }
        out.push('\n');
    }
    out
}
