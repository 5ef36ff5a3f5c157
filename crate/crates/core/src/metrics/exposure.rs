use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use chrono::Datelike;
use rayon::prelude::*;

use super::loess::{loess_fit, LoessPoint};
use super::polarization::side_counts;
use crate::calendar::{date_of, Timestamp};
use crate::error::{Error, Result};
use crate::ingest::{ActionKind, Dataset, Side, SideMap};

#[derive(Debug, Clone, PartialEq)]
pub struct UserEngagement {
    pub user: Arc<str>,
    pub community: Side,
    /// Seconds between the latest and earliest action.
    pub lifetime: i64,
    pub activity: u64,
    pub lifetime_std: f64,
    pub activity_std: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Engagement {
    pub users: Vec<UserEngagement>,
    /// `(community, measure)` pairs whose range was zero; their standardized
    /// values are 0.
    pub degenerate: Vec<(Side, &'static str)>,
}

fn min_max(values: &[f64]) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        Some(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
    } else {
        None
    }
}

/// Lifetime and activity of every user with an action of `kind` on a sided
/// page. A user belongs to the side holding most of those actions (ties go
/// to the side of the earliest one). Both measures are min–max scaled within
/// each community.
pub fn user_engagement(d: &Dataset, sides: &SideMap, kind: ActionKind) -> Result<Engagement> {
    let action = kind.action();
    if d.actions(action).next().is_none() {
        return Err(Error::Invalid(format!("dataset has no {action} records")));
    }
    let counts = side_counts(d, kind, sides);
    let mut by_side: BTreeMap<Side, Vec<UserEngagement>> = BTreeMap::new();
    for (user, [pro, anti]) in counts {
        let recs: Vec<_> = d.user_records(&user).filter(|r| r.action == action).collect();
        let first = recs.iter().map(|r| r.timestamp).min().unwrap_or(0);
        let last = recs.iter().map(|r| r.timestamp).max().unwrap_or(0);
        let community = match pro.cmp(&anti) {
            std::cmp::Ordering::Greater => Side::Pro,
            std::cmp::Ordering::Less => Side::Anti,
            std::cmp::Ordering::Equal => recs
                .iter()
                .find_map(|r| sides.get(&*r.page).copied())
                .unwrap_or(Side::Pro),
        };
        by_side.entry(community).or_default().push(UserEngagement {
            user,
            community,
            lifetime: last - first,
            activity: recs.len() as u64,
            lifetime_std: 0.0,
            activity_std: 0.0,
        });
    }
    let mut out = Engagement::default();
    for (side, mut users) in by_side {
        let life: Vec<f64> = users.iter().map(|u| u.lifetime as f64).collect();
        let act: Vec<f64> = users.iter().map(|u| u.activity as f64).collect();
        match min_max(&life) {
            Some(s) => users.iter_mut().zip(s).for_each(|(u, v)| u.lifetime_std = v),
            None => out.degenerate.push((side, "lifetime")),
        }
        match min_max(&act) {
            Some(s) => users.iter_mut().zip(s).for_each(|(u, v)| u.activity_std = v),
            None => out.degenerate.push((side, "activity")),
        }
        out.users.extend(users);
    }
    out.users.sort_by(|a, b| a.user.cmp(&b.user));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Window {
    Week,
    Month,
    Year,
}

impl Window {
    /// ISO weeks are cut at month boundaries so that every window lies
    /// inside one month and one year.
    fn key(self, ts: Timestamp) -> (i32, u32, u32) {
        let d = date_of(ts);
        match self {
            Window::Week => (d.year(), d.month(), d.iso_week().week()),
            Window::Month => (d.year(), d.month(), 0),
            Window::Year => (d.year(), 0, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Window::Week => "week",
            Window::Month => "month",
            Window::Year => "year",
        }
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "week" => Ok(Window::Week),
            "month" => Ok(Window::Month),
            "year" => Ok(Window::Year),
            other => Err(format!("unknown window {other:?}")),
        }
    }
}

/// Maximum over calendar windows of the distinct pages the user acted on
/// (with `kind`) inside one window.
pub fn pages_per_window(d: &Dataset, user: &str, window: Window, kind: ActionKind) -> usize {
    let action = kind.action();
    let mut per: BTreeMap<(i32, u32, u32), BTreeSet<&str>> = BTreeMap::new();
    for r in d.user_records(user).filter(|r| r.action == action) {
        per.entry(window.key(r.timestamp)).or_default().insert(&r.page);
    }
    per.values().map(BTreeSet::len).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageStats {
    pub users: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Mean and sample SD, per community, of the number of distinct pages of
/// that community each of its users liked.
pub fn community_page_stats(d: &Dataset, sides: &SideMap) -> Result<BTreeMap<Side, PageStats>> {
    let eng = user_engagement(d, sides, ActionKind::Like)?;
    let mut counts: BTreeMap<Side, Vec<f64>> = BTreeMap::new();
    for u in &eng.users {
        let pages: BTreeSet<&str> = d
            .user_records(&u.user)
            .filter(|r| r.action == ActionKind::Like.action() && sides.get(&*r.page) == Some(&u.community))
            .map(|r| &*r.page)
            .collect();
        counts.entry(u.community).or_default().push(pages.len() as f64);
    }
    Ok(counts
        .into_iter()
        .map(|(side, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            (side, PageStats { users: v.len(), mean, sd })
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExposureAxis {
    Lifetime,
    Activity,
}

impl FromStr for ExposureAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lifetime" => Ok(ExposureAxis::Lifetime),
            "activity" => Ok(ExposureAxis::Activity),
            other => Err(format!("unknown axis {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExposureOptions {
    pub window: Window,
    pub axis: ExposureAxis,
    pub span: f64,
    /// Evaluation grid size over [0, 1].
    pub points: usize,
    pub standardize_pages: bool,
    pub kind: ActionKind,
}

impl Default for ExposureOptions {
    fn default() -> Self {
        Self {
            window: Window::Year,
            axis: ExposureAxis::Lifetime,
            span: 0.75,
            points: 21,
            standardize_pages: false,
            kind: ActionKind::Like,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExposureCurve {
    pub community: Side,
    pub users: usize,
    pub points: Vec<LoessPoint>,
}

/// Per community: standardized lifetime (or activity) against the maximum
/// pages per window, smoothed by LOESS on an even grid over [0, 1].
pub fn exposure_curves(d: &Dataset, sides: &SideMap, opts: &ExposureOptions) -> Result<Vec<ExposureCurve>> {
    let eng = user_engagement(d, sides, opts.kind)?;
    let ppw: Vec<f64> = eng
        .users
        .par_iter()
        .map(|u| pages_per_window(d, &u.user, opts.window, opts.kind) as f64)
        .collect();
    let grid: Vec<f64> = match opts.points {
        0 => return Err(Error::Parameter("need at least one evaluation point".into())),
        1 => vec![0.5],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    };
    let mut out = Vec::new();
    for side in Side::BOTH {
        let idx: Vec<usize> = (0..eng.users.len()).filter(|&i| eng.users[i].community == side).collect();
        if idx.is_empty() {
            continue;
        }
        let x: Vec<f64> = idx
            .iter()
            .map(|&i| match opts.axis {
                ExposureAxis::Lifetime => eng.users[i].lifetime_std,
                ExposureAxis::Activity => eng.users[i].activity_std,
            })
            .collect();
        let mut y: Vec<f64> = idx.iter().map(|&i| ppw[i]).collect();
        if opts.standardize_pages {
            y = min_max(&y).unwrap_or_else(|| vec![0.0; y.len()]);
        }
        let points = loess_fit(&x, &y, opts.span, &grid)?;
        out.push(ExposureCurve { community: side, users: idx.len(), points });
    }
    Ok(out)
}

pub fn write_exposure<W: Write>(curves: &[ExposureCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["community", "x", "fit", "lo95", "hi95"])?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                c.community.as_str().to_string(),
                format!("{:.6}", p.x),
                format!("{:.9}", p.fit),
                format!("{:.9}", p.lo95),
                format!("{:.9}", p.hi95),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
