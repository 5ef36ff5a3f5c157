use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::calendar::Quarter;
use crate::error::Result;
use crate::ingest::{Action, Dataset, Side, SideMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    ActivePagesPost,
    ActivePagesLike,
    ActivePagesComment,
    ActiveUsersLike,
    ActiveUsersComment,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::ActivePagesPost,
        Measure::ActivePagesLike,
        Measure::ActivePagesComment,
        Measure::ActiveUsersLike,
        Measure::ActiveUsersComment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::ActivePagesPost => "active_pages_post",
            Measure::ActivePagesLike => "active_pages_like",
            Measure::ActivePagesComment => "active_pages_comment",
            Measure::ActiveUsersLike => "active_users_like",
            Measure::ActiveUsersComment => "active_users_comment",
        }
    }

    fn of(action: Action) -> [Option<Measure>; 2] {
        match action {
            Action::Post => [Some(Measure::ActivePagesPost), None],
            Action::Like => [Some(Measure::ActivePagesLike), Some(Measure::ActiveUsersLike)],
            Action::Comment => [Some(Measure::ActivePagesComment), Some(Measure::ActiveUsersComment)],
        }
    }

    fn counts_users(self) -> bool {
        matches!(self, Measure::ActiveUsersLike | Measure::ActiveUsersComment)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = String;

    /// Accepts the full names and the short forms `posts`, `likes`,
    /// `comments`, `users_like`, `users_comment`.
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "active_pages_post" | "posts" => Measure::ActivePagesPost,
            "active_pages_like" | "likes" => Measure::ActivePagesLike,
            "active_pages_comment" | "comments" => Measure::ActivePagesComment,
            "active_users_like" | "users_like" => Measure::ActiveUsersLike,
            "active_users_comment" | "users_comment" => Measure::ActiveUsersComment,
            other => return Err(format!("unknown measure {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesPoint {
    pub quarter: Quarter,
    pub community: Side,
    pub measure: Measure,
    pub count: u64,
}

/// Active pages and users per quarter, community and measure, over every
/// quarter from the dataset's first to its last record. Records on pages
/// without a side are ignored.
pub fn activity_series(d: &Dataset, sides: &SideMap) -> Vec<SeriesPoint> {
    let Some((first, last)) = d.quarter_bounds() else {
        return Vec::new();
    };
    let mut sets: BTreeMap<(Quarter, Side, Measure), BTreeSet<&str>> = BTreeMap::new();
    for r in d.records() {
        let Some(&side) = sides.get(&*r.page) else { continue };
        let q = Quarter::of(r.timestamp);
        for m in Measure::of(r.action).into_iter().flatten() {
            let id = if m.counts_users() { &*r.user } else { &*r.page };
            sets.entry((q, side, m)).or_default().insert(id);
        }
    }
    let mut out = Vec::new();
    for quarter in Quarter::span(first, last) {
        for community in Side::BOTH {
            for measure in Measure::ALL {
                let count = sets.get(&(quarter, community, measure)).map_or(0, |s| s.len() as u64);
                out.push(SeriesPoint { quarter, community, measure, count });
            }
        }
    }
    out
}

pub fn write_series<W: Write>(points: &[SeriesPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quarter", "community", "measure", "count"])?;
    for p in points {
        w.write_record([p.quarter.to_string(), p.community.to_string(), p.measure.to_string(), p.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{day_start, parse_date};
    use crate::ingest::InteractionRecord;

    fn rec(user: &str, page: &str, action: Action, date: &str) -> InteractionRecord {
        InteractionRecord {
            user: user.into(),
            page: page.into(),
            post: format!("{page}_x").into(),
            action,
            timestamp: day_start(parse_date(date).unwrap()),
        }
    }

    fn sides() -> SideMap {
        [("a", Side::Pro), ("b", Side::Anti), ("c", Side::Anti), ("d", Side::Anti)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    #[test]
    fn single_post() {
        let d = Dataset::from_records(vec![rec("a", "a", Action::Post, "2014-02-10")]);
        let s = activity_series(&d, &sides());
        assert_eq!(s.len(), 10);
        for p in s {
            let want = u64::from(p.community == Side::Pro && p.measure == Measure::ActivePagesPost);
            assert_eq!(p.count, want, "{p:?}");
            assert_eq!(p.quarter, Quarter::new(2014, 1).unwrap());
        }
    }

    #[test]
    fn distinct_users() {
        let d = Dataset::from_records(vec![
            rec("u", "b", Action::Like, "2015-04-01"),
            rec("u", "c", Action::Like, "2015-05-01"),
            rec("u", "d", Action::Like, "2015-06-30"),
        ]);
        let s = activity_series(&d, &sides());
        let get = |m: Measure| s.iter().find(|p| p.community == Side::Anti && p.measure == m).unwrap().count;
        assert_eq!(get(Measure::ActiveUsersLike), 1);
        assert_eq!(get(Measure::ActivePagesLike), 3);
    }

    #[test]
    fn empty_quarters_are_filled() {
        let d = Dataset::from_records(vec![
            rec("u", "a", Action::Like, "2014-01-01"),
            rec("u", "a", Action::Like, "2014-12-31"),
        ]);
        let s = activity_series(&d, &sides());
        assert_eq!(s.len(), 4 * 10);
        assert_eq!(s.iter().map(|p| p.count).sum::<u64>(), 4);
    }
}
