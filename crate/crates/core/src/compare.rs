//! Partition similarity, rater agreement and the random-partition baseline.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Partition;

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn symmetric_difference(a: &[Arc<str>], b: &[Arc<str>]) -> Vec<String> {
    let a: BTreeSet<&str> = a.iter().map(|s| &**s).collect();
    let b: BTreeSet<&str> = b.iter().map(|s| &**s).collect();
    a.symmetric_difference(&b).map(|s| s.to_string()).collect()
}

/// Plain (unadjusted) Rand index: the fraction of node pairs on which the two
/// partitions agree, from the contingency table.
pub fn rand_index(p: &Partition, q: &Partition) -> Result<f64> {
    if p.nodes() != q.nodes() {
        return Err(Error::NodeSetMismatch(symmetric_difference(p.nodes(), q.nodes())));
    }
    let n = p.len() as u64;
    if n < 2 {
        return Err(Error::Invalid("the Rand index needs at least two nodes".into()));
    }
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    for (&a, &b) in p.membership().iter().zip(q.membership()) {
        *cells.entry((a, b)).or_default() += 1;
    }
    let both: u64 = cells.values().map(|&c| pairs(c)).sum();
    let in_p: u64 = p.sizes().iter().map(|&s| pairs(s as u64)).sum();
    let in_q: u64 = q.sizes().iter().map(|&s| pairs(s as u64)).sum();
    let total = pairs(n);
    // together in both + apart in both = total + 2·both − in_p − in_q
    let agree = total + 2 * both - in_p - in_q;
    Ok(agree as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub kappa: f64,
    pub observed: f64,
    pub expected: f64,
    /// Chance agreement is 1 (both raters constant and equal); kappa is set to 1.
    pub degenerate: bool,
}

/// Cohen's kappa for two raters over the same items.
pub fn cohen_kappa<L: Ord + Clone>(r1: &BTreeMap<String, L>, r2: &BTreeMap<String, L>) -> Result<Kappa> {
    if r1.len() != r2.len() || r1.keys().zip(r2.keys()).any(|(a, b)| a != b) {
        let a: BTreeSet<&String> = r1.keys().collect();
        let b: BTreeSet<&String> = r2.keys().collect();
        return Err(Error::NodeSetMismatch(a.symmetric_difference(&b).map(|s| s.to_string()).collect()));
    }
    let alphabet: BTreeSet<&L> = r1.values().chain(r2.values()).collect();
    let index: BTreeMap<&L, usize> = alphabet.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let k = index.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (a, b) in r1.values().zip(r2.values()) {
        confusion[index[a]][index[b]] += 1;
    }
    kappa_from_confusion(&confusion)
}

/// Cohen's kappa from a square confusion table (rows rater 1, columns rater 2).
pub fn kappa_from_confusion(confusion: &[Vec<u64>]) -> Result<Kappa> {
    let k = confusion.len();
    if confusion.iter().any(|r| r.len() != k) {
        return Err(Error::Invalid("confusion table must be square".into()));
    }
    let n: u64 = confusion.iter().flatten().sum();
    if n == 0 {
        return Err(Error::Invalid("no rated items".into()));
    }
    let agree: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let rows: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..k).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
    let chance: u128 = rows.iter().zip(&cols).map(|(&r, &c)| u128::from(r) * u128::from(c)).sum();
    let n2 = u128::from(n) * u128::from(n);
    let observed = agree as f64 / n as f64;
    let expected = chance as f64 / n2 as f64;
    if chance == n2 {
        return Ok(Kappa { kappa: 1.0, observed, expected, degenerate: true });
    }
    // (p_o − p_e)/(1 − p_e) with both terms over n²
    let num = (u128::from(n) * u128::from(agree)) as i128 - chance as i128;
    let den = (n2 - chance) as f64;
    Ok(Kappa { kappa: num as f64 / den, observed, expected, degenerate: false })
}

/// Assigns each node independently and uniformly to one of `k` communities.
/// Empty communities vanish when ids are compacted.
pub fn random_partition(nodes: &[Arc<str>], k: usize, seed: u64) -> Result<Partition> {
    if k == 0 {
        return Err(Error::Parameter("random partition needs k >= 1".into()));
    }
    if k > nodes.len() {
        return Err(Error::Parameter(format!("k = {k} exceeds the {} nodes", nodes.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = nodes.iter().map(|_| rng.random_range(0..k)).collect();
    Partition::new(nodes.to_vec(), labels)
}
