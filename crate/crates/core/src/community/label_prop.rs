//! Asynchronous weighted label propagation (Raghavan-Albert-Kumara).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Partition, ProjectionGraph};

pub const MAX_SWEEPS: usize = 1000;

#[derive(Debug, Clone)]
pub struct LabelPropagation {
    pub partition: Partition,
    pub sweeps: usize,
    /// `false` if the sweep cap was reached before every node held one of
    /// its weighted-majority labels.
    pub converged: bool,
}

/// Labels carrying the maximum incident weight at `node`, ascending.
fn majority_labels(g: &ProjectionGraph, labels: &[usize], node: usize, acc: &mut Vec<u64>, touched: &mut Vec<usize>) -> Vec<usize> {
    for &(nb, w) in g.neighbors(node) {
        let l = labels[nb as usize];
        if acc[l] == 0 {
            touched.push(l);
        }
        acc[l] += w;
    }
    let best = touched.iter().map(|&l| acc[l]).max().unwrap_or(0);
    let mut tied: Vec<usize> = touched.iter().copied().filter(|&l| acc[l] == best).collect();
    tied.sort_unstable();
    for &l in touched.iter() {
        acc[l] = 0;
    }
    touched.clear();
    tied
}

pub fn label_propagation(g: &ProjectionGraph, seed: u64) -> LabelPropagation {
    label_propagation_with_cap(g, seed, MAX_SWEEPS)
}

/// Each sweep visits nodes in a seed-shuffled order; a node takes the label
/// with maximum total edge weight among its neighbors, ties drawn uniformly.
/// Stops once every node's label is among its majority labels.
pub fn label_propagation_with_cap(g: &ProjectionGraph, seed: u64, max_sweeps: usize) -> LabelPropagation {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut acc = vec![0u64; n];
    let mut touched = Vec::new();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        order.shuffle(&mut rng);
        for &v in &order {
            let tied = majority_labels(g, &labels, v, &mut acc, &mut touched);
            match tied.len() {
                0 => {}
                1 => labels[v] = tied[0],
                k => labels[v] = tied[rng.random_range(0..k)],
            }
        }
        let stable = (0..n).all(|v| {
            let tied = majority_labels(g, &labels, v, &mut acc, &mut touched);
            tied.is_empty() || tied.binary_search(&labels[v]).is_ok()
        });
        if stable {
            converged = true;
            break;
        }
    }
    LabelPropagation { partition: g.partition_from_labels(&labels), sweeps, converged }
}
