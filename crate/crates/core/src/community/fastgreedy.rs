//! Greedy agglomerative modularity maximization (Clauset-Newman-Moore).

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{four_m_squared, Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::graph::{Partition, ProjectionGraph};

#[derive(Debug, Clone)]
pub struct FastGreedy {
    pub partition: Partition,
    pub dendrogram: Dendrogram,
    /// Modularity of the chosen cut.
    pub modularity: f64,
}

/// Community bookkeeping shared by the agglomerative algorithms.
///
/// Tracks inter-community weights, strengths and `4m²·Q` exactly while
/// communities merge; community `leaves + k` is created by the k-th merge.
pub(super) struct Agglomeration {
    pub leaves: usize,
    pub two_m: i128,
    pub links: Vec<BTreeMap<usize, u64>>,
    pub strength: Vec<u64>,
    pub size: Vec<usize>,
    /// Smallest leaf index inside each community, used for tie-breaks.
    pub rep: Vec<usize>,
    pub alive: Vec<bool>,
    pub scaled_q: i128,
    pub merges: Vec<Merge>,
    q_history: Vec<i128>,
    m: u64,
}

impl Agglomeration {
    pub fn new(g: &ProjectionGraph) -> Self {
        let n = g.node_count();
        let links = (0..n)
            .map(|i| g.neighbors(i).iter().map(|&(b, w)| (b as usize, w)).collect())
            .collect();
        let strength = g.strengths().to_vec();
        let scaled_q = -strength.iter().map(|&s| i128::from(s) * i128::from(s)).sum::<i128>();
        Self {
            leaves: n,
            two_m: 2 * i128::from(g.total_weight()),
            links,
            strength,
            size: vec![1; n],
            rep: (0..n).collect(),
            alive: vec![true; n],
            scaled_q,
            merges: Vec::new(),
            q_history: vec![scaled_q],
            m: g.total_weight(),
        }
    }

    /// `2m² · ΔQ` of merging `a` and `b`.
    pub fn gain(&self, a: usize, b: usize) -> i128 {
        let w = self.links[a].get(&b).copied().unwrap_or(0);
        self.two_m * i128::from(w) - i128::from(self.strength[a]) * i128::from(self.strength[b])
    }

    pub fn rep_pair(&self, a: usize, b: usize) -> (usize, usize) {
        let (x, y) = (self.rep[a], self.rep[b]);
        (x.min(y), x.max(y))
    }

    /// Merges two live communities and returns the new id.
    pub fn merge(&mut self, a: usize, b: usize) -> usize {
        let c = self.links.len();
        self.scaled_q += 2 * self.gain(a, b);
        let la = std::mem::take(&mut self.links[a]);
        let lb = std::mem::take(&mut self.links[b]);
        let mut lc: BTreeMap<usize, u64> = BTreeMap::new();
        for (nb, w) in la.into_iter().chain(lb) {
            if nb == a || nb == b {
                continue;
            }
            *lc.entry(nb).or_default() += w;
            let l = &mut self.links[nb];
            l.remove(&a);
            l.remove(&b);
        }
        for (&nb, &w) in &lc {
            self.links[nb].insert(c, w);
        }
        self.links.push(lc);
        self.strength.push(self.strength[a] + self.strength[b]);
        self.size.push(self.size[a] + self.size[b]);
        self.rep.push(self.rep[a].min(self.rep[b]));
        self.alive[a] = false;
        self.alive[b] = false;
        self.alive.push(true);
        let score = self.scaled_q as f64 / four_m_squared(self.m);
        self.merges.push(Merge { a, b, score });
        self.q_history.push(self.scaled_q);
        c
    }

    /// Number of merges of the best cut; ties go to the later cut.
    pub fn best_cut(&self) -> usize {
        let mut best = 0;
        for (k, &q) in self.q_history.iter().enumerate() {
            if q >= self.q_history[best] {
                best = k;
            }
        }
        best
    }

    pub fn finish(self, g: &ProjectionGraph) -> (Partition, Dendrogram, f64) {
        let cut = self.best_cut();
        let q = self.q_history[cut] as f64 / four_m_squared(self.m);
        let dendrogram = Dendrogram { leaves: self.leaves, merges: self.merges };
        let labels = dendrogram.cut(cut);
        (g.partition_from_labels(&labels), dendrogram, q)
    }
}

/// Starts from singletons and repeatedly merges the connected pair with the
/// largest modularity gain, recording every merge; returns the cut of the
/// dendrogram with the highest modularity.
///
/// Gain ties go to the pair with the lowest (smaller page, larger page)
/// representatives. Communities with no connecting edge never merge.
pub fn fastgreedy(g: &ProjectionGraph) -> Result<FastGreedy> {
    if g.total_weight() == 0 {
        return Err(Error::ZeroWeight);
    }
    let mut st = Agglomeration::new(g);
    // Gains of untouched pairs never change, so stale entries are simply
    // skipped once either side has been merged away.
    let mut heap: BinaryHeap<(i128, Reverse<(usize, usize)>, usize, usize)> = BinaryHeap::new();
    for (a, b, _) in g.edges() {
        heap.push((st.gain(a, b), Reverse(st.rep_pair(a, b)), a, b));
    }
    while let Some((_, _, a, b)) = heap.pop() {
        if !st.alive[a] || !st.alive[b] {
            continue;
        }
        let c = st.merge(a, b);
        let nbs: Vec<usize> = st.links[c].keys().copied().collect();
        for nb in nbs {
            heap.push((st.gain(c, nb), Reverse(st.rep_pair(c, nb)), c, nb));
        }
    }
    let (partition, dendrogram, modularity) = st.finish(g);
    Ok(FastGreedy { partition, dendrogram, modularity })
}
