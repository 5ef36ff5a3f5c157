use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Total assignment of nodes to communities.
///
/// Nodes are kept in lexicographic order. Community ids are contiguous from
/// 0 and canonical: ordered by decreasing size, ties by the smallest member
/// node. Two partitions that agree up to relabeling compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    nodes: Vec<Arc<str>>,
    membership: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Builds a partition from arbitrary (not necessarily contiguous) labels.
    pub fn new(nodes: Vec<Arc<str>>, labels: Vec<usize>) -> Result<Self> {
        if nodes.len() != labels.len() {
            return Err(Error::Invalid(format!(
                "{} nodes but {} labels",
                nodes.len(),
                labels.len()
            )));
        }
        let mut pairs: Vec<(Arc<str>, usize)> = nodes.into_iter().zip(labels).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid(format!("node {:?} listed twice", w[0].0)));
        }
        let (nodes, labels): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Ok(Self::from_sorted(nodes, &labels))
    }

    /// `nodes` must already be sorted and distinct.
    pub(crate) fn from_sorted(nodes: Vec<Arc<str>>, labels: &[usize]) -> Self {
        let membership = canonical_labels(labels);
        let count = membership.iter().max().map_or(0, |m| m + 1);
        Self { nodes, membership, count }
    }

    pub fn from_map(map: &BTreeMap<String, usize>) -> Self {
        let nodes = map.keys().map(|k| Arc::from(k.as_str())).collect();
        let labels: Vec<usize> = map.values().copied().collect();
        Self::from_sorted(nodes, &labels)
    }

    pub fn nodes(&self) -> &[Arc<str>] {
        &self.nodes
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.count
    }

    pub fn community_of(&self, node: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|n| (**n).cmp(node))
            .ok()
            .map(|i| self.membership[i])
    }

    /// Sizes indexed by community id (non-increasing).
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &c in &self.membership {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn largest(&self) -> usize {
        self.sizes().first().copied().unwrap_or(0)
    }

    pub fn members(&self, community: usize) -> impl Iterator<Item = &Arc<str>> {
        self.nodes
            .iter()
            .zip(&self.membership)
            .filter(move |(_, &c)| c == community)
            .map(|(n, _)| n)
    }

    /// Keeps only the listed nodes and re-canonicalizes ids.
    pub fn restrict(&self, keep: &BTreeSet<&str>) -> Self {
        let (nodes, labels): (Vec<_>, Vec<_>) = self
            .nodes
            .iter()
            .zip(&self.membership)
            .filter(|(n, _)| keep.contains(&***n))
            .map(|(n, &c)| (n.clone(), c))
            .unzip();
        Self::from_sorted(nodes, &labels)
    }

    pub fn to_map(&self) -> BTreeMap<String, usize> {
        self.nodes
            .iter()
            .zip(&self.membership)
            .map(|(n, &c)| (n.to_string(), c))
            .collect()
    }

    /// CSV `page_id,community`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["page_id", "community"])?;
        for (n, c) in self.nodes.iter().zip(&self.membership) {
            w.write_record([&**n, &c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut nodes = Vec::new();
        let mut labels = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let line = i + 2;
            if row.len() != 2 {
                return Err(Error::Parse { line, reason: "expected page_id,community".into() });
            }
            let c = row[1]
                .parse()
                .map_err(|e| Error::Parse { line, reason: format!("bad community id: {e}") })?;
            nodes.push(Arc::from(&row[0]));
            labels.push(c);
        }
        Self::new(nodes, labels)
    }
}

/// Relabels to 0.. by decreasing group size, ties by first position.
pub(crate) fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let e = groups.entry(l).or_insert((0, i));
        e.0 += 1;
    }
    let mut order: Vec<(usize, (usize, usize))> = groups.into_iter().collect();
    order.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    let remap: BTreeMap<usize, usize> = order.iter().enumerate().map(|(new, (old, _))| (*old, new)).collect();
    labels.iter().map(|l| remap[l]).collect()
}
