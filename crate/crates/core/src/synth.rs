//! Seeded generator of planted-polarization datasets.
//!
//! Every page and every user draws from its own ChaCha stream keyed by
//! `(seed, entity id)`, so generation order (and parallelism) cannot change
//! the output.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{DateRange, Timestamp};
use crate::error::{Error, Result};
use crate::graph::ProjectionGraph;
use crate::ingest::{Action, Dataset, InteractionRecord, LabelMap, PageLabel, Side};

/// Upper bound on a lognormal activity draw.
pub const MAX_ACTIONS: u64 = 5_000;
/// Largest delay between a post and a reaction to it.
const MAX_REACTION_DELAY: i64 = 7 * 86_400;
const USER_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ActivityDist {
    Fixed { n: u64 },
    /// `ceil(exp(N(mu, sigma)))`, capped at [`MAX_ACTIONS`].
    LogNormal { mu: f64, sigma: f64 },
}

impl Default for ActivityDist {
    fn default() -> Self {
        ActivityDist::LogNormal { mu: 2.0, sigma: 1.0 }
    }
}

/// `(pro, anti)` pair.
pub type PerSide<T> = (T, T);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub users: PerSide<usize>,
    pub pages: PerSide<usize>,
    /// Probability that an action targets the other side.
    pub p_out: f64,
    pub actions_per_user: ActivityDist,
    /// Probability that an action is a comment rather than a like.
    pub comment_fraction: f64,
    pub posts_per_page: usize,
    pub time_range: DateRange,
    pub seed: u64,
    /// Optional split of a side's pages into user-disjoint blocks (page
    /// counts per block, summing to that side's page count). Users of the
    /// side are dealt round-robin to blocks and act only on their own block
    /// when acting on their side. Empty means one block.
    #[serde(default)]
    pub blocks: PerSide<Vec<usize>>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users: (5_000, 5_000),
            pages: (145, 98),
            p_out: 0.02,
            actions_per_user: ActivityDist::default(),
            comment_fraction: 0.2,
            posts_per_page: 40,
            time_range: DateRange::default(),
            seed: 0,
            blocks: (Vec::new(), Vec::new()),
        }
    }
}

impl SynthConfig {
    fn side<T: Clone>(pair: &PerSide<T>, side: Side) -> T {
        match side {
            Side::Pro => pair.0.clone(),
            Side::Anti => pair.1.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.p_out) {
            return bad(format!("p_out must lie in [0,1], got {}", self.p_out));
        }
        if !(0.0..=1.0).contains(&self.comment_fraction) {
            return bad(format!("comment_fraction must lie in [0,1], got {}", self.comment_fraction));
        }
        if let ActivityDist::LogNormal { mu, sigma } = self.actions_per_user {
            if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
                return bad(format!("invalid lognormal parameters ({mu}, {sigma})"));
            }
        }
        let may_act = match self.actions_per_user {
            ActivityDist::Fixed { n } => n > 0,
            ActivityDist::LogNormal { .. } => true,
        };
        for side in Side::BOTH {
            let users = Self::side(&self.users, side);
            let pages = Self::side(&self.pages, side);
            let other_pages = Self::side(&self.pages, side.other());
            if users > 0 && may_act {
                if pages == 0 && self.p_out < 1.0 {
                    return bad(format!("{side} side has {users} users but no pages"));
                }
                if other_pages == 0 && self.p_out > 0.0 {
                    return bad(format!("{side} users act cross-side but the other side has no pages"));
                }
                if self.posts_per_page == 0 {
                    return bad("users act but pages have no posts".into());
                }
            }
            let blocks = Self::side(&self.blocks, side);
            if !blocks.is_empty() {
                if blocks.iter().sum::<usize>() != pages || blocks.contains(&0) {
                    return bad(format!("{side} blocks {blocks:?} must be positive and sum to {pages}"));
                }
                if users < blocks.len() {
                    return bad(format!("{side} side has fewer users than blocks"));
                }
            }
        }
        Ok(())
    }
}

/// Generator ground truth: the side of every page and user.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlantedTruth {
    pub pages: BTreeMap<String, Side>,
    pub users: BTreeMap<String, Side>,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub truth: PlantedTruth,
    pub labels: LabelMap,
}

pub fn page_id(side: Side, i: usize) -> String {
    format!("{side}_p{i:04}")
}

pub fn user_id(side: Side, i: usize) -> String {
    format!("{side}_u{i:06}")
}

struct PageInfo {
    id: Arc<str>,
    posts: Vec<(Arc<str>, Timestamp)>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_actions(dist: ActivityDist, rng: &mut ChaCha8Rng) -> u64 {
    match dist {
        ActivityDist::Fixed { n } => n,
        ActivityDist::LogNormal { mu, sigma } => {
            let x: f64 = LogNormal::new(mu, sigma).expect("validated parameters").sample(rng);
            (x.ceil() as u64).clamp(1, MAX_ACTIONS)
        }
    }
}

/// Generates a planted dataset: post records for every page, then each
/// user's actions. Fully determined by the config.
pub fn generate(config: &SynthConfig) -> Result<Synthetic> {
    config.validate()?;
    let first = config.time_range.first_second();
    let last = config.time_range.last_second();

    let mut pages: BTreeMap<Side, Vec<PageInfo>> = BTreeMap::new();
    let mut stream = 0u64;
    for side in Side::BOTH {
        let n = SynthConfig::side(&config.pages, side);
        let mut list = Vec::with_capacity(n);
        for i in 0..n {
            let id: Arc<str> = page_id(side, i).into();
            let mut rng = rng_for(config.seed, stream);
            stream += 1;
            let posts = (0..config.posts_per_page)
                .map(|k| (Arc::from(format!("{id}_x{k:04}")), rng.random_range(first..=last)))
                .collect();
            list.push(PageInfo { id, posts });
        }
        pages.insert(side, list);
    }

    let mut records: Vec<InteractionRecord> = Vec::new();
    for list in pages.values() {
        for p in list {
            for (post, ts) in &p.posts {
                records.push(InteractionRecord {
                    user: p.id.clone(),
                    page: p.id.clone(),
                    post: post.clone(),
                    action: Action::Post,
                    timestamp: *ts,
                });
            }
        }
    }

    let mut truth = PlantedTruth::default();
    let mut labels = LabelMap::new();
    for (side, list) in &pages {
        let label = match side {
            Side::Pro => PageLabel::Pro,
            Side::Anti => PageLabel::Anti,
        };
        for p in list {
            truth.pages.insert(p.id.to_string(), *side);
            labels.insert(p.id.to_string(), label);
        }
    }

    let mut users: Vec<(Side, usize, u64)> = Vec::new();
    let mut offset = 0u64;
    for side in Side::BOTH {
        let n = SynthConfig::side(&config.users, side);
        for i in 0..n {
            users.push((side, i, USER_STREAM_BASE + offset + i as u64));
            truth.users.insert(user_id(side, i), side);
        }
        offset += n as u64;
    }

    // block ranges of page indices per side
    let block_ranges = |side: Side| -> Vec<std::ops::Range<usize>> {
        let blocks = SynthConfig::side(&config.blocks, side);
        let total = SynthConfig::side(&config.pages, side);
        if blocks.is_empty() {
            return vec![0..total];
        }
        let mut start = 0;
        blocks
            .iter()
            .map(|&b| {
                let r = start..start + b;
                start += b;
                r
            })
            .collect()
    };
    let ranges: BTreeMap<Side, Vec<std::ops::Range<usize>>> =
        Side::BOTH.iter().map(|&s| (s, block_ranges(s))).collect();

    let actions: Vec<Vec<InteractionRecord>> = users
        .par_iter()
        .map(|&(side, i, stream)| {
            let mut rng = rng_for(config.seed, stream);
            let uid: Arc<str> = user_id(side, i).into();
            let own_blocks = &ranges[&side];
            let own = own_blocks[i % own_blocks.len()].clone();
            let other = &pages[&side.other()];
            let n = draw_actions(config.actions_per_user, &mut rng);
            let mut out = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let cross = rng.random::<f64>() < config.p_out;
                let page = if cross {
                    &other[rng.random_range(0..other.len())]
                } else {
                    &pages[&side][rng.random_range(own.clone())]
                };
                let action = if rng.random::<f64>() < config.comment_fraction {
                    Action::Comment
                } else {
                    Action::Like
                };
                let (post, posted) = &page.posts[rng.random_range(0..page.posts.len())];
                let delay = rng.random_range(0..=MAX_REACTION_DELAY);
                out.push(InteractionRecord {
                    user: uid.clone(),
                    page: page.id.clone(),
                    post: post.clone(),
                    action,
                    timestamp: (posted + delay).min(last),
                });
            }
            out
        })
        .collect();
    records.extend(actions.into_iter().flatten());

    Ok(Synthetic { dataset: Dataset::from_records(records), truth, labels })
}

/// Writes `id,kind,side` rows for every planted page and user.
pub fn write_truth<W: std::io::Write>(truth: &PlantedTruth, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "kind", "side"])?;
    for (id, side) in &truth.pages {
        w.write_record([id.as_str(), "page", side.as_str()])?;
    }
    for (id, side) in &truth.users {
        w.write_record([id.as_str(), "user", side.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Planted-partition graph with unit weights: blocks of the given sizes,
/// within-block edge probability `p_in`, across-block `p_out`. Returns the
/// graph and the planted block of every node (in node order).
pub fn planted_partition_graph(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<(ProjectionGraph, Vec<usize>)> {
    let n: usize = sizes.iter().sum();
    let width = n.to_string().len();
    let nodes: Vec<Arc<str>> = (0..n).map(|i| Arc::from(format!("v{i:0width$}"))).collect();
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if block[a] == block[b] { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((a, b, 1));
            }
        }
    }
    Ok((ProjectionGraph::from_edges(nodes, &edges)?, block))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::to_canonical_string;

    fn small() -> SynthConfig {
        SynthConfig {
            users: (200, 150),
            pages: (6, 4),
            posts_per_page: 12,
            seed: 11,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(to_canonical_string(&a.dataset), to_canonical_string(&b.dataset));
        let c = generate(&SynthConfig { seed: 12, ..small() }).unwrap();
        assert_ne!(to_canonical_string(&a.dataset), to_canonical_string(&c.dataset));
    }

    #[test]
    fn record_count_is_exact() {
        let cfg = SynthConfig { actions_per_user: ActivityDist::Fixed { n: 7 }, ..small() };
        let s = generate(&cfg).unwrap();
        assert_eq!(s.dataset.len(), 10 * 12 + 350 * 7);
    }

    #[test]
    fn timestamps_in_range() {
        let cfg = small();
        let s = generate(&cfg).unwrap();
        assert!(s.dataset.records().iter().all(|r| cfg.time_range.contains(r.timestamp)));
    }

    #[test]
    fn no_cross_actions_at_zero_p_out() {
        let s = generate(&SynthConfig { p_out: 0.0, ..small() }).unwrap();
        for r in s.dataset.records().iter().filter(|r| r.action != Action::Post) {
            assert_eq!(s.truth.users[&*r.user], s.truth.pages[&*r.page]);
        }
    }

    #[test]
    fn config_errors() {
        assert!(generate(&SynthConfig { pages: (0, 4), ..small() }).is_err());
        assert!(generate(&SynthConfig { p_out: 1.5, ..small() }).is_err());
        assert!(generate(&SynthConfig { comment_fraction: -0.1, ..small() }).is_err());
        assert!(generate(&SynthConfig { blocks: (vec![3, 2], vec![]), ..small() }).is_err());
        // no users on a side without pages is fine
        assert!(generate(&SynthConfig { pages: (0, 4), users: (0, 10), p_out: 0.0, ..small() }).is_ok());
    }

    #[test]
    fn blocks_are_user_disjoint() {
        let cfg = SynthConfig { p_out: 0.0, blocks: (vec![3, 2, 1], vec![]), ..small() };
        let s = generate(&cfg).unwrap();
        let block_of = |page: &str| -> usize {
            let i: usize = page.rsplit('p').next().unwrap().parse().unwrap();
            [0, 0, 0, 1, 1, 2][i]
        };
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for r in s.dataset.records().iter().filter(|r| r.action != Action::Post && r.page.starts_with("pro")) {
            let b = block_of(&r.page);
            assert_eq!(*seen.entry(&r.user).or_insert(b), b);
        }
    }

    #[test]
    fn planted_graph_shape() {
        let (g, block) = planted_partition_graph(&[20, 20], 0.9, 0.05, 1).unwrap();
        assert_eq!(g.node_count(), 40);
        assert_eq!(block.iter().filter(|&&b| b == 1).count(), 20);
        let within = g.edges().filter(|&(a, b, _)| block[a] == block[b]).count();
        assert!(within > 300 && within <= 380);
    }
}
