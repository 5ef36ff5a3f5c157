//! Agreement of every detection algorithm with a random baseline, the page
//! labels and FastGreedy, per action kind.

use std::collections::BTreeSet;
use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::community::{detect, Algorithm};
use crate::compare::{rand_index, random_partition};
use crate::error::{Error, Result};
use crate::graph::{project, BipartiteGraph, Partition};
use crate::ingest::{ActionKind, Dataset, SideMap};

pub const RANDOM_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationTable {
    pub kind: ActionKind,
    pub algorithms: Vec<Algorithm>,
    /// Mean Rand index against random two-community partitions.
    pub random: Vec<f64>,
    /// Rand index against the labeled partition, over labeled pages.
    pub labeled: Vec<f64>,
    pub fastgreedy: Vec<f64>,
    pub communities: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub tables: Vec<ValidationTable>,
    pub warnings: Vec<String>,
}

fn labeled_pair(p: &Partition, sides: &SideMap) -> Result<(Partition, Partition)> {
    let keep: BTreeSet<&str> = p.nodes().iter().map(|n| &**n).filter(|n| sides.contains_key(*n)).collect();
    let restricted = p.restrict(&keep);
    let truth = Partition::new(
        restricted.nodes().to_vec(),
        restricted.nodes().iter().map(|n| sides[&**n] as usize).collect(),
    )?;
    Ok((restricted, truth))
}

fn table(d: &Dataset, sides: &SideMap, kind: ActionKind, seed: u64) -> Result<ValidationTable> {
    let g = project(&BipartiteGraph::build(d, kind, None));
    if g.total_weight() == 0 {
        return Err(Error::ZeroWeight);
    }
    let algorithms = Algorithm::ALL.to_vec();
    let parts: Vec<Partition> = algorithms
        .par_iter()
        .map(|&a| detect(&g, a, seed).map(|r| r.partition))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_seeds: Vec<u64> = (0..RANDOM_DRAWS).map(|_| rng.next_u64()).collect();
    let randoms: Vec<Partition> = draw_seeds
        .iter()
        .map(|&s| random_partition(g.nodes(), 2, s))
        .collect::<Result<_>>()?;
    let fg = &parts[0];
    let mut out = ValidationTable {
        kind,
        algorithms: algorithms.clone(),
        random: Vec::new(),
        labeled: Vec::new(),
        fastgreedy: Vec::new(),
        communities: parts.iter().map(Partition::community_count).collect(),
    };
    for p in &parts {
        let mut sum = 0.0;
        for r in &randoms {
            sum += rand_index(r, p)?;
        }
        out.random.push(sum / RANDOM_DRAWS as f64);
        let (restricted, truth) = labeled_pair(p, sides)?;
        out.labeled.push(rand_index(&truth, &restricted)?);
        out.fastgreedy.push(rand_index(fg, p)?);
    }
    Ok(out)
}

/// Builds the projection for likes and for comments, runs all four
/// algorithms and compares each partition with the references. A kind with
/// no records (or no shared users) is skipped with a warning.
pub fn run_validation_matrix(d: &Dataset, sides: &SideMap, seed: u64) -> Result<Validation> {
    let labeled = d.pages().filter(|p| sides.contains_key(&***p)).count();
    if labeled < 2 {
        return Err(Error::Invalid(format!("need at least 2 labeled pages, found {labeled}")));
    }
    let mut v = Validation::default();
    for kind in ActionKind::ALL {
        if d.actions(kind.action()).next().is_none() {
            v.warnings.push(format!("no {} records; {kind} table omitted", kind.action()));
            continue;
        }
        match table(d, sides, kind, seed) {
            Ok(t) => v.tables.push(t),
            Err(Error::ZeroWeight) => v.warnings.push(format!("{kind} projection has no edges; table omitted")),
            Err(e) => return Err(e),
        }
    }
    Ok(v)
}

pub fn write_validation<W: Write>(v: &Validation, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["kind".to_string(), "reference".to_string()];
    header.extend(Algorithm::ALL.iter().map(|a| a.as_str().to_string()));
    w.write_record(&header)?;
    for t in &v.tables {
        let rows: [(&str, &[f64]); 3] = [("random", &t.random), ("labeled", &t.labeled), ("fastgreedy", &t.fastgreedy)];
        for (name, vals) in rows {
            let mut rec = vec![t.kind.to_string(), name.to_string()];
            rec.extend(vals.iter().map(|x| format!("{x:.6}")));
            w.write_record(&rec)?;
        }
        let mut rec = vec![t.kind.to_string(), "communities".to_string()];
        rec.extend(t.communities.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
