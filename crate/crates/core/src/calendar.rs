//! Calendar helpers: UTC timestamps, inclusive date ranges and calendar quarters.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

pub fn parse_timestamp(text: &str) -> Result<Timestamp, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty timestamp".into());
    }
    if let Ok(secs) = text.parse::<i64>() {
        return Ok(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Ok(dt.with_timezone(&Utc).timestamp());
    }
    // Date-only values are read as midnight UTC.
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(day_start(d));
    }
    Err(format!("unparseable timestamp {text:?}"))
}

/// Canonical rendering: `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(ts: Timestamp) -> String {
    match Utc.timestamp_opt(ts, 0).single() {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => ts.to_string(),
    }
}

pub fn date_of(ts: Timestamp) -> NaiveDate {
    Utc.timestamp_opt(ts, 0)
        .single()
        .map(|dt| dt.date_naive())
        .unwrap_or(NaiveDate::MIN)
}

pub fn day_start(d: NaiveDate) -> Timestamp {
    d.and_hms_opt(0, 0, 0).map(|dt| dt.and_utc().timestamp()).unwrap_or(i64::MIN)
}

pub fn parse_date(text: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(text.trim(), "%Y-%m-%d")
        .map_err(|e| Error::Parameter(format!("bad date {text:?}: {e}")))
}

/// Closed interval of calendar days, `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::Parameter(format!("date range start {start} is after end {end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, ts: Timestamp) -> bool {
        let d = date_of(ts);
        self.start <= d && d <= self.end
    }

    /// First second of `start`.
    pub fn first_second(&self) -> Timestamp {
        day_start(self.start)
    }

    /// Last second of `end`.
    pub fn last_second(&self) -> Timestamp {
        day_start(self.end) + 86_399
    }
}

impl Default for DateRange {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2017, 5, 31).expect("valid date"),
        }
    }
}

/// Calendar quarter, Q1 = January through March.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Quarter {
    pub year: i32,
    pub q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self> {
        if !(1..=4).contains(&q) {
            return Err(Error::Parameter(format!("quarter must be 1..=4, got {q}")));
        }
        Ok(Self { year, q })
    }

    pub fn of(ts: Timestamp) -> Self {
        let d = date_of(ts);
        Self { year: d.year(), q: (d.month0() / 3 + 1) as u8 }
    }

    pub fn next(self) -> Self {
        if self.q == 4 {
            Self { year: self.year + 1, q: 1 }
        } else {
            Self { year: self.year, q: self.q + 1 }
        }
    }

    /// Inclusive day range covered by the quarter.
    pub fn range(self) -> DateRange {
        let start = NaiveDate::from_ymd_opt(self.year, u32::from(self.q) * 3 - 2, 1).expect("valid date");
        let next = self.next();
        let end = NaiveDate::from_ymd_opt(next.year, u32::from(next.q) * 3 - 2, 1)
            .and_then(|d| d.pred_opt())
            .expect("valid date");
        DateRange { start, end }
    }

    /// Every quarter from `first` to `last`, inclusive.
    pub fn span(first: Quarter, last: Quarter) -> Vec<Quarter> {
        let mut out = Vec::new();
        let mut q = first;
        while q <= last {
            out.push(q);
            q = q.next();
        }
        out
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("bad quarter {s:?}, expected e.g. 2014Q4"));
        let (year, q) = s.trim().split_once(['Q', 'q']).ok_or_else(bad)?;
        let year = year.parse().map_err(|_| bad())?;
        let q = q.parse().map_err(|_| bad())?;
        Quarter::new(year, q)
    }
}
