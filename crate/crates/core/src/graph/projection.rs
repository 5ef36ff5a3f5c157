use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;

use super::bipartite::BipartiteGraph;
use super::partition::Partition;
use crate::error::{Error, Result};

/// Weighted undirected page graph; the weight of a pair is its number of
/// common users.
///
/// Nodes are dense indices over lexicographically sorted page ids. No
/// self-loops, every stored weight is at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionGraph {
    nodes: Vec<Arc<str>>,
    adj: Vec<Vec<(u32, u64)>>,
    strength: Vec<u64>,
    edge_count: usize,
    total_weight: u64,
}

/// Above this many pages the pair counter switches from a dense triangle to a hash map.
const DENSE_PAIR_LIMIT: usize = 2048;

impl ProjectionGraph {
    /// Builds a graph from weighted edges over sorted, distinct `nodes`.
    pub fn from_edges(nodes: Vec<Arc<str>>, edges: &[(usize, usize, u64)]) -> Result<Self> {
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("node ids must be sorted and distinct".into()));
        }
        let n = nodes.len();
        let mut adj: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a},{b}) references a missing node")));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop on {:?}", nodes[a])));
            }
            if w == 0 {
                return Err(Error::Invalid(format!("zero weight on ({:?},{:?})", nodes[a], nodes[b])));
            }
            adj[a].push((b as u32, w));
            adj[b].push((a as u32, w));
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::Invalid(format!(
                    "duplicate edge ({:?},{:?})",
                    nodes[i], nodes[w[0].0 as usize]
                )));
            }
        }
        Ok(Self::from_adjacency(nodes, adj))
    }

    fn from_adjacency(nodes: Vec<Arc<str>>, adj: Vec<Vec<(u32, u64)>>) -> Self {
        let strength: Vec<u64> = adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        let total_weight = strength.iter().sum::<u64>() / 2;
        Self { nodes, adj, strength, edge_count, total_weight }
    }

    /// Convenience constructor for tests and fixtures: named nodes, unit-free weights.
    pub fn from_named_edges(nodes: &[&str], edges: &[(&str, &str, u64)]) -> Result<Self> {
        let mut ids: Vec<&str> = nodes.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let find = |s: &str| ids.binary_search(&s).map_err(|_| Error::UnknownNode(s.to_string()));
        let mut idx = Vec::with_capacity(edges.len());
        for &(a, b, w) in edges {
            idx.push((find(a)?, find(b)?, w));
        }
        Self::from_edges(ids.into_iter().map(Arc::from).collect(), &idx)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> &[Arc<str>] {
        &self.nodes
    }

    pub fn index_of(&self, page: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| (**n).cmp(page)).ok()
    }

    /// Sorted `(neighbor, weight)` list of a node.
    pub fn neighbors(&self, node: usize) -> &[(u32, u64)] {
        &self.adj[node]
    }

    pub fn strength(&self, node: usize) -> u64 {
        self.strength[node]
    }

    pub fn strengths(&self) -> &[u64] {
        &self.strength
    }

    /// Sum of edge weights, each edge counted once (the `m` of modularity).
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        self.adj[a]
            .binary_search_by_key(&(b as u32), |e| e.0)
            .map(|i| self.adj[a][i].1)
            .unwrap_or(0)
    }

    /// Each edge once as `(a, b, w)` with `a < b`, ordered by `(a, b)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(a, l)| {
            l.iter().filter(move |e| (e.0 as usize) > a).map(move |&(b, w)| (a, b as usize, w))
        })
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let adj = self
            .adj
            .iter()
            .map(|l| l.iter().map(|&(b, w)| (b, w * factor)).collect())
            .collect();
        Self::from_adjacency(self.nodes.clone(), adj)
    }

    /// All nodes in one community.
    pub fn trivial_partition(&self) -> Partition {
        Partition::from_sorted(self.nodes.clone(), &vec![0; self.nodes.len()])
    }

    pub fn singleton_partition(&self) -> Partition {
        let labels: Vec<usize> = (0..self.nodes.len()).collect();
        Partition::from_sorted(self.nodes.clone(), &labels)
    }

    pub(crate) fn partition_from_labels(&self, labels: &[usize]) -> Partition {
        Partition::from_sorted(self.nodes.clone(), labels)
    }

    /// Membership vector of `p` aligned to this graph's node indices.
    pub fn align(&self, p: &Partition) -> Result<Vec<usize>> {
        if p.nodes() == self.nodes.as_slice() {
            return Ok(p.membership().to_vec());
        }
        let ours: BTreeSet<&str> = self.nodes.iter().map(|n| &**n).collect();
        let theirs: BTreeSet<&str> = p.nodes().iter().map(|n| &**n).collect();
        let diff: Vec<String> = ours.symmetric_difference(&theirs).map(|s| s.to_string()).collect();
        Err(Error::NodeSetMismatch(diff))
    }

    /// CSV `page_a,page_b,weight`, rows in lexicographic order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["page_a", "page_b", "weight"])?;
        for (a, b, wt) in self.edges() {
            w.write_record([&*self.nodes[a], &*self.nodes[b], &wt.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv). Pages that
    /// appear in no row are not recoverable.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            if row.len() != 3 {
                return Err(Error::Parse { line, reason: "expected page_a,page_b,weight".into() });
            }
            let w: u64 = row[2]
                .parse()
                .map_err(|e| Error::Parse { line, reason: format!("bad weight: {e}") })?;
            rows.push((row[0].to_string(), row[1].to_string(), w));
        }
        let ids: BTreeSet<&str> = rows.iter().flat_map(|r| [r.0.as_str(), r.1.as_str()]).collect();
        let nodes: Vec<&str> = ids.into_iter().collect();
        let edges: Vec<(&str, &str, u64)> = rows.iter().map(|r| (r.0.as_str(), r.1.as_str(), r.2)).collect();
        Self::from_named_edges(&nodes, &edges)
    }
}

/// One-mode projection onto pages.
///
/// Runs in time proportional to the sum over users of squared degree: every
/// user emits one unit for each pair of pages it touches.
pub fn project(b: &BipartiteGraph) -> ProjectionGraph {
    let n = b.pages().len();
    let users = 0..b.users().len();
    let mut adj: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];
    if n <= DENSE_PAIR_LIMIT {
        // upper triangle, row-major over a < b
        let offset = |a: usize| a * (2 * n - a - 1) / 2;
        let mut counts = vec![0u64; n * n.saturating_sub(1) / 2];
        for u in users {
            let ps = b.user_pages(u);
            for (i, &a) in ps.iter().enumerate() {
                let base = offset(a as usize);
                for &c in &ps[i + 1..] {
                    counts[base + (c - a - 1) as usize] += 1;
                }
            }
        }
        for a in 0..n {
            let base = offset(a);
            for c in a + 1..n {
                let w = counts[base + (c - a - 1)];
                if w > 0 {
                    adj[a].push((c as u32, w));
                    adj[c].push((a as u32, w));
                }
            }
        }
    } else {
        let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
        for u in users {
            let ps = b.user_pages(u);
            for (i, &a) in ps.iter().enumerate() {
                for &c in &ps[i + 1..] {
                    *counts.entry((a, c)).or_default() += 1;
                }
            }
        }
        for ((a, c), w) in counts {
            adj[a as usize].push((c, w));
            adj[c as usize].push((a, w));
        }
        for l in &mut adj {
            l.sort_unstable();
        }
    }
    ProjectionGraph::from_adjacency(b.pages().to_vec(), adj)
}

/// Sub-graph on `keep`, weights unchanged.
pub fn induced_subgraph<'a, I>(g: &ProjectionGraph, keep: I) -> Result<ProjectionGraph>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut idx = Vec::new();
    for page in keep {
        idx.push(g.index_of(page).ok_or_else(|| Error::UnknownNode(page.to_string()))?);
    }
    idx.sort_unstable();
    idx.dedup();
    let mut new_index = vec![u32::MAX; g.node_count()];
    for (new, &old) in idx.iter().enumerate() {
        new_index[old] = new as u32;
    }
    let adj = idx
        .iter()
        .map(|&old| {
            g.neighbors(old)
                .iter()
                .filter(|e| new_index[e.0 as usize] != u32::MAX)
                .map(|&(nb, w)| (new_index[nb as usize], w))
                .collect()
        })
        .collect();
    let nodes = idx.iter().map(|&i| g.nodes()[i].clone()).collect();
    Ok(ProjectionGraph::from_adjacency(nodes, adj))
}

/// Nodes joined by a path of edges share a community. Ids follow the
/// canonical order: decreasing component size, ties by smallest page id.
pub fn connected_components(g: &ProjectionGraph) -> Partition {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(nb, _) in g.neighbors(v) {
                let nb = nb as usize;
                if label[nb] == usize::MAX {
                    label[nb] = start;
                    stack.push(nb);
                }
            }
        }
    }
    g.partition_from_labels(&label)
}
