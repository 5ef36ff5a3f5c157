use std::io::Write;

use rayon::prelude::*;

use crate::calendar::{DateRange, Quarter};
use crate::community::{detect, Algorithm};
use crate::error::Result;
use crate::graph::{connected_components, induced_subgraph, project, BipartiteGraph};
use crate::ingest::{ActionKind, Dataset, Side, SideMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohesionPoint {
    pub quarter: Quarter,
    pub community: Side,
    pub algorithm: Algorithm,
    /// Size of the biggest detected community.
    pub largest: usize,
    /// Size of the biggest connected component of the same graph.
    pub largest_component: usize,
    /// Pages with at least one action of the selected kind in the window.
    pub total: usize,
    /// Fewer than two active pages, or no shared users: no detection ran.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct CohesionOptions {
    pub kind: ActionKind,
    pub algorithms: Vec<Algorithm>,
    /// Windows run from the first quarter up to each quarter instead of
    /// covering one quarter.
    pub cumulative: bool,
    pub seed: u64,
}

impl Default for CohesionOptions {
    fn default() -> Self {
        Self { kind: ActionKind::Like, algorithms: Algorithm::ALL.to_vec(), cumulative: false, seed: 0 }
    }
}

fn quarter_points(d: &Dataset, sides: &SideMap, opts: &CohesionOptions, first: Quarter, quarter: Quarter, side: Side) -> Result<Vec<CohesionPoint>> {
    let range = quarter.range();
    let window = if opts.cumulative { DateRange { start: first.range().start, end: range.end } } else { range };
    let b = BipartiteGraph::build_filtered(d, opts.kind, Some(window), |p| sides.get(p) == Some(&side));
    let active: Vec<&str> = (0..b.pages().len())
        .filter(|&i| b.page_degree(i) > 0)
        .map(|i| &*b.pages()[i])
        .collect();
    let total = active.len();
    let g = induced_subgraph(&project(&b), active)?;
    let degenerate = total < 2 || g.total_weight() == 0;
    let component = if total == 0 { 0 } else { connected_components(&g).largest() };
    opts.algorithms
        .iter()
        .map(|&algorithm| {
            let largest = if total < 2 {
                total
            } else if g.total_weight() == 0 {
                1
            } else {
                detect(&g, algorithm, opts.seed)?.partition.largest()
            };
            Ok(CohesionPoint {
                quarter,
                community: side,
                algorithm,
                largest,
                largest_component: component,
                total,
                degenerate,
            })
        })
        .collect()
}

/// For every quarter and community: the graph of that window's actions on
/// the community's pages, projected, with the size of the biggest detected
/// community for each algorithm.
pub fn cohesion_series(d: &Dataset, sides: &SideMap, opts: &CohesionOptions) -> Result<Vec<CohesionPoint>> {
    let Some((first, last)) = d.quarter_bounds() else {
        return Ok(Vec::new());
    };
    let tasks: Vec<(Quarter, Side)> = Quarter::span(first, last)
        .into_iter()
        .flat_map(|q| Side::BOTH.map(|s| (q, s)))
        .collect();
    let parts: Vec<Vec<CohesionPoint>> = tasks
        .par_iter()
        .map(|&(q, s)| quarter_points(d, sides, opts, first, q, s))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

pub fn write_cohesion<W: Write>(points: &[CohesionPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quarter", "community", "algorithm", "largest", "largest_component", "total", "degenerate"])?;
    for p in points {
        w.write_record([
            p.quarter.to_string(),
            p.community.to_string(),
            p.algorithm.as_str().to_string(),
            p.largest.to_string(),
            p.largest_component.to_string(),
            p.total.to_string(),
            p.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
