//! Random-walk distance clustering (Pons-Latapy).
//!
//! Every node gets a self-loop whose weight is the mean of its incident edge
//! weights, so walk distributions of adjacent nodes do not alternate between
//! sides of bipartite-like structures. Communities merge Ward-style: the
//! adjacent pair whose merge least increases the mean squared walk distance
//! goes first. Distances between the merged community and its neighbors are
//! recomputed exactly from the probability vectors.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::fastgreedy::Agglomeration;
use super::Dendrogram;
use crate::error::{Error, Result};
use crate::graph::{Partition, ProjectionGraph};

pub const DEFAULT_STEPS: usize = 4;

#[derive(Debug, Clone)]
pub struct Walktrap {
    pub partition: Partition,
    pub dendrogram: Dendrogram,
    pub modularity: f64,
}

#[derive(PartialEq)]
struct Candidate {
    delta: f64,
    reps: (usize, usize),
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.delta.total_cmp(&other.delta).then(self.reps.cmp(&other.reps))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Row-stochastic walk matrix raised to `steps`, one dense row per node, and
/// the stationary weights `d_k` used by the distance.
fn walk_distributions(g: &ProjectionGraph, steps: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.node_count();
    // weights divided by their gcd: scaling every weight leaves the walk bit-identical
    let div = g.edges().fold(0, |acc, (_, _, w)| gcd(acc, w)).max(1);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut degree = Vec::with_capacity(n);
    for i in 0..n {
        let nbs = g.neighbors(i);
        let s = (g.strength(i) / div) as f64;
        let loop_w = if nbs.is_empty() { 1.0 } else { s / nbs.len() as f64 };
        let d = s + loop_w;
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(nbs.len() + 1);
        row.push((i, loop_w / d));
        row.extend(nbs.iter().map(|&(j, w)| (j as usize, (w / div) as f64 / d)));
        rows.push(row);
        degree.push(d);
    }
    let mut probs = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..steps {
            let mut next = vec![0.0; n];
            for (k, &pk) in v.iter().enumerate() {
                if pk != 0.0 {
                    for &(j, p) in &rows[k] {
                        next[j] += pk * p;
                    }
                }
            }
            v = next;
        }
        probs.push(v);
    }
    (probs, degree)
}

fn ward_delta(pa: &[f64], pb: &[f64], size_a: usize, size_b: usize, inv_degree: &[f64], n: usize) -> f64 {
    let r2: f64 = pa
        .iter()
        .zip(pb)
        .zip(inv_degree)
        .map(|((x, y), inv)| (x - y) * (x - y) * inv)
        .sum();
    let (sa, sb) = (size_a as f64, size_b as f64);
    sa * sb / (sa + sb) * r2 / n as f64
}

/// Walktrap partition: the dendrogram cut with maximum modularity.
pub fn walktrap(g: &ProjectionGraph, steps: usize) -> Result<Walktrap> {
    if steps == 0 {
        return Err(Error::Parameter("walktrap needs at least one step".into()));
    }
    if g.total_weight() == 0 {
        return Err(Error::ZeroWeight);
    }
    let n = g.node_count();
    let (mut probs, degree) = walk_distributions(g, steps);
    let inv_degree: Vec<f64> = degree.iter().map(|d| 1.0 / d).collect();
    let mut st = Agglomeration::new(g);
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    for (a, b, _) in g.edges() {
        let delta = ward_delta(&probs[a], &probs[b], 1, 1, &inv_degree, n);
        heap.push(Reverse(Candidate { delta, reps: st.rep_pair(a, b), a, b }));
    }
    while let Some(Reverse(cand)) = heap.pop() {
        let (a, b) = (cand.a, cand.b);
        if !st.alive[a] || !st.alive[b] {
            continue;
        }
        let (sa, sb) = (st.size[a] as f64, st.size[b] as f64);
        let merged: Vec<f64> = probs[a]
            .iter()
            .zip(&probs[b])
            .map(|(x, y)| (sa * x + sb * y) / (sa + sb))
            .collect();
        probs[a] = Vec::new();
        probs[b] = Vec::new();
        let c = st.merge(a, b);
        probs.push(merged);
        let nbs: Vec<usize> = st.links[c].keys().copied().collect();
        for nb in nbs {
            let delta = ward_delta(&probs[c], &probs[nb], st.size[c], st.size[nb], &inv_degree, n);
            heap.push(Reverse(Candidate { delta, reps: st.rep_pair(c, nb), a: c, b: nb }));
        }
    }
    let (partition, dendrogram, modularity) = st.finish(g);
    Ok(Walktrap { partition, dendrogram, modularity })
}
