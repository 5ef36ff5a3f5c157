//! Community detection on weighted page projections.
//!
//! Modularity gains are compared as exact integer numerators wherever the
//! algorithm allows it, so results do not depend on floating-point rounding
//! and are unchanged when every weight is multiplied by the same constant.

mod fastgreedy;
mod label_prop;
mod louvain;
mod walktrap;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fastgreedy::{fastgreedy, FastGreedy};
pub use label_prop::{label_propagation, LabelPropagation, MAX_SWEEPS};
pub use louvain::louvain;
pub use walktrap::{walktrap, Walktrap, DEFAULT_STEPS};

use crate::error::{Error, Result};
use crate::graph::{Partition, ProjectionGraph};

/// Modularity `Q = Σ_c (e_c/m − (s_c/2m)²)` of a partition.
pub fn modularity(g: &ProjectionGraph, p: &Partition) -> Result<f64> {
    let labels = g.align(p)?;
    modularity_of_labels(g, &labels)
}

pub(crate) fn modularity_of_labels(g: &ProjectionGraph, labels: &[usize]) -> Result<f64> {
    let m = g.total_weight();
    if m == 0 {
        return Err(Error::ZeroWeight);
    }
    Ok(scaled_modularity(g, labels) as f64 / four_m_squared(m))
}

/// `4m² · Q`, computed exactly.
pub(crate) fn scaled_modularity(g: &ProjectionGraph, labels: &[usize]) -> i128 {
    let k = labels.iter().max().map_or(0, |x| x + 1);
    let mut internal = vec![0u128; k];
    let mut strength = vec![0u128; k];
    for (a, b, w) in g.edges() {
        if labels[a] == labels[b] {
            internal[labels[a]] += u128::from(w);
        }
    }
    for (i, &s) in g.strengths().iter().enumerate() {
        strength[labels[i]] += u128::from(s);
    }
    let four_m = 4 * i128::from(g.total_weight());
    internal
        .iter()
        .zip(&strength)
        .map(|(&e, &s)| four_m * e as i128 - (s * s) as i128)
        .sum()
}

pub(crate) fn four_m_squared(m: u64) -> f64 {
    let m = m as f64;
    4.0 * m * m
}

/// One agglomeration step. Leaves are communities `0..leaves`; the k-th
/// merge creates community `leaves + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    /// Modularity right after this merge.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Leaf membership after applying the first `steps` merges.
    pub fn cut(&self, steps: usize) -> Vec<usize> {
        let total = self.leaves + self.merges.len();
        let mut parent: Vec<usize> = (0..total).collect();
        for (k, m) in self.merges.iter().take(steps).enumerate() {
            let c = self.leaves + k;
            parent[m.a] = c;
            parent[m.b] = c;
        }
        (0..self.leaves)
            .map(|leaf| {
                let mut c = leaf;
                while parent[c] != c {
                    c = parent[c];
                }
                c
            })
            .collect()
    }

    /// CSV `step,comm_a,comm_b,score`; steps count from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "comm_a", "comm_b", "score"])?;
        for (k, m) in self.merges.iter().enumerate() {
            w.write_record([
                (k + 1).to_string(),
                m.a.to_string(),
                m.b.to_string(),
                format!("{:.12}", m.score),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    FastGreedy,
    Walktrap,
    #[serde(rename = "multilevel")]
    Louvain,
    #[serde(rename = "labelprop")]
    LabelPropagation,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FastGreedy,
        Algorithm::Walktrap,
        Algorithm::Louvain,
        Algorithm::LabelPropagation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::FastGreedy => "fastgreedy",
            Algorithm::Walktrap => "walktrap",
            Algorithm::Louvain => "multilevel",
            Algorithm::LabelPropagation => "labelprop",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fastgreedy" => Ok(Algorithm::FastGreedy),
            "walktrap" => Ok(Algorithm::Walktrap),
            "multilevel" | "louvain" => Ok(Algorithm::Louvain),
            "labelprop" | "labelpropagation" | "label_propagation" => Ok(Algorithm::LabelPropagation),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// Output of [`detect`].
#[derive(Debug, Clone)]
pub struct Detection {
    pub partition: Partition,
    pub dendrogram: Option<Dendrogram>,
    /// `false` when label propagation stopped at its sweep cap.
    pub converged: bool,
}

/// Runs one algorithm with default parameters.
pub fn detect(g: &ProjectionGraph, algorithm: Algorithm, seed: u64) -> Result<Detection> {
    Ok(match algorithm {
        Algorithm::FastGreedy => {
            let r = fastgreedy(g)?;
            Detection { partition: r.partition, dendrogram: Some(r.dendrogram), converged: true }
        }
        Algorithm::Walktrap => {
            let r = walktrap(g, DEFAULT_STEPS)?;
            Detection { partition: r.partition, dendrogram: Some(r.dendrogram), converged: true }
        }
        Algorithm::Louvain => Detection { partition: louvain(g, seed)?, dendrogram: None, converged: true },
        Algorithm::LabelPropagation => {
            let r = label_propagation(g, seed);
            Detection { partition: r.partition, dendrogram: None, converged: r.converged }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangles(scale: u64) -> ProjectionGraph {
        ProjectionGraph::from_named_edges(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b", scale),
                ("b", "c", scale),
                ("a", "c", scale),
                ("d", "e", scale),
                ("e", "f", scale),
                ("d", "f", scale),
            ],
        )
        .unwrap()
    }

    #[test]
    fn modularity_examples() {
        let g = two_triangles(1);
        assert_eq!(modularity(&g, &g.trivial_partition()).unwrap(), 0.0);
        let split = g.partition_from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(modularity(&g, &split).unwrap(), 0.5);
        let g10 = two_triangles(10);
        let split10 = g10.partition_from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(modularity(&g10, &split10).unwrap(), 0.5);
    }

    #[test]
    fn modularity_errors() {
        let empty = ProjectionGraph::from_named_edges(&["a", "b"], &[]).unwrap();
        assert!(matches!(modularity(&empty, &empty.trivial_partition()), Err(Error::ZeroWeight)));
        let g = two_triangles(1);
        let other = empty.trivial_partition();
        assert!(matches!(modularity(&g, &other), Err(Error::NodeSetMismatch(_))));
    }

    #[test]
    fn dendrogram_cut_and_csv() {
        let d = Dendrogram {
            leaves: 3,
            merges: vec![Merge { a: 0, b: 2, score: 0.1 }, Merge { a: 1, b: 3, score: 0.0 }],
        };
        assert_eq!(d.cut(0), vec![0, 1, 2]);
        assert_eq!(d.cut(1), vec![3, 1, 3]);
        assert_eq!(d.cut(2), vec![4, 4, 4]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,comm_a,comm_b,score\n1,0,2,0.100000000000\n"));
    }

    #[test]
    fn algorithm_names() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
    }
}
