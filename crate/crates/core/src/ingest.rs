//! Interaction logs: parsing, canonical serialization, filtering and the
//! per-label dataset summary.
//!
//! JSONL is the canonical interchange format. A [`Dataset`] always holds its
//! records in canonical order (timestamp, page, post, action, user), so the
//! result of parsing does not depend on line order and serialization is a
//! pure function of the record multiset.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calendar::{format_timestamp, parse_timestamp, DateRange, Quarter, Timestamp};
use crate::error::{Error, Result};

/// Actor id used by post records when the publisher is not named.
pub const PAGE_ACTOR: &str = "page";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Post,
    Like,
    Comment,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Post => "post",
            Action::Like => "like",
            Action::Comment => "comment",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "post" => Ok(Action::Post),
            "like" => Ok(Action::Like),
            "comment" => Ok(Action::Comment),
            other => Err(format!("unknown action {other:?}")),
        }
    }
}

/// User-side action kinds that define the bipartite graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Like,
    Comment,
}

impl ActionKind {
    pub const ALL: [ActionKind; 2] = [ActionKind::Like, ActionKind::Comment];

    pub fn action(self) -> Action {
        match self {
            ActionKind::Like => Action::Like,
            ActionKind::Comment => Action::Comment,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.action().as_str())
    }
}

impl FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "like" | "likes" => Ok(ActionKind::Like),
            "comment" | "comments" => Ok(ActionKind::Comment),
            other => Err(format!("unknown action kind {other:?}")),
        }
    }
}

/// One user action on a page's post.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionRecord {
    pub user: Arc<str>,
    pub page: Arc<str>,
    pub post: Arc<str>,
    pub action: Action,
    pub timestamp: Timestamp,
}

impl InteractionRecord {
    fn canonical_key(&self) -> (Timestamp, &str, &str, Action, &str) {
        (self.timestamp, &self.page, &self.post, self.action, &self.user)
    }

    fn validate(&self) -> Result<(), String> {
        if self.user.is_empty() || self.page.is_empty() || self.post.is_empty() {
            return Err("ids must be non-empty".into());
        }
        if self.action == Action::Post && *self.user != *self.page && &*self.user != PAGE_ACTOR {
            return Err(format!(
                "post record actor {:?} is neither the page {:?} nor {PAGE_ACTOR:?}",
                self.user, self.page
            ));
        }
        Ok(())
    }
}

/// Shares one allocation per distinct id string.
#[derive(Default)]
pub struct Interner {
    map: HashMap<Box<str>, Arc<str>>,
}

impl Interner {
    pub fn intern(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.map.get(s) {
            return a.clone();
        }
        let a: Arc<str> = Arc::from(s);
        self.map.insert(s.into(), a.clone());
        a
    }
}

/// Immutable, indexed collection of interaction records.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    records: Vec<InteractionRecord>,
    by_page: BTreeMap<Arc<str>, Vec<usize>>,
    by_user: BTreeMap<Arc<str>, Vec<usize>>,
    by_action_quarter: BTreeMap<(Action, Quarter), Vec<usize>>,
}

impl Dataset {
    pub fn from_records(mut records: Vec<InteractionRecord>) -> Self {
        records.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
        let mut by_page: BTreeMap<Arc<str>, Vec<usize>> = BTreeMap::new();
        let mut by_user: BTreeMap<Arc<str>, Vec<usize>> = BTreeMap::new();
        let mut by_action_quarter: BTreeMap<(Action, Quarter), Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            by_page.entry(r.page.clone()).or_default().push(i);
            if r.action != Action::Post {
                by_user.entry(r.user.clone()).or_default().push(i);
            }
            by_action_quarter
                .entry((r.action, Quarter::of(r.timestamp)))
                .or_default()
                .push(i);
        }
        Self { records, by_page, by_user, by_action_quarter }
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Page ids in lexicographic order.
    pub fn pages(&self) -> impl Iterator<Item = &Arc<str>> {
        self.by_page.keys()
    }

    pub fn page_count(&self) -> usize {
        self.by_page.len()
    }

    /// Actors of like and comment records, in lexicographic order.
    pub fn users(&self) -> impl Iterator<Item = &Arc<str>> {
        self.by_user.keys()
    }

    pub fn user_count(&self) -> usize {
        self.by_user.len()
    }

    pub fn page_records(&self, page: &str) -> impl Iterator<Item = &InteractionRecord> {
        self.by_page.get(page).into_iter().flatten().map(|&i| &self.records[i])
    }

    /// Like and comment records of a user.
    pub fn user_records(&self, user: &str) -> impl Iterator<Item = &InteractionRecord> {
        self.by_user.get(user).into_iter().flatten().map(|&i| &self.records[i])
    }

    pub fn quarter_records(&self, action: Action, quarter: Quarter) -> impl Iterator<Item = &InteractionRecord> {
        self.by_action_quarter
            .get(&(action, quarter))
            .into_iter()
            .flatten()
            .map(|&i| &self.records[i])
    }

    /// Records of one action kind.
    pub fn actions(&self, action: Action) -> impl Iterator<Item = &InteractionRecord> {
        self.records.iter().filter(move |r| r.action == action)
    }

    /// First and last quarter touched by any record.
    pub fn quarter_bounds(&self) -> Option<(Quarter, Quarter)> {
        let first = self.records.first()?;
        let last = self.records.last()?;
        Some((Quarter::of(first.timestamp), Quarter::of(last.timestamp)))
    }

    #[cfg(test)]
    pub(crate) fn index_sizes(&self) -> (usize, usize, usize) {
        (
            self.by_page.values().map(Vec::len).sum(),
            self.by_user.values().map(Vec::len).sum(),
            self.by_action_quarter.values().map(Vec::len).sum(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Outcome of a lenient parse.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub accepted: usize,
    pub skipped: usize,
    /// First few rejected lines as `(line number, reason)`.
    pub rejects: Vec<(usize, String)>,
}

const MAX_REPORTED_REJECTS: usize = 20;
const CSV_HEADER: &str = "user,page,post,action,ts";

#[derive(Deserialize)]
struct JsonLine {
    user: String,
    page: String,
    post: String,
    action: String,
    ts: serde_json::Value,
}

#[derive(Serialize)]
struct WireRecord<'a> {
    user: &'a str,
    page: &'a str,
    post: &'a str,
    action: &'a str,
    ts: String,
}

fn json_ts(v: &serde_json::Value) -> Result<Timestamp, String> {
    match v {
        serde_json::Value::String(s) => parse_timestamp(s),
        serde_json::Value::Number(n) => n
            .as_i64()
            .ok_or_else(|| format!("timestamp {n} is not an integer number of seconds")),
        other => Err(format!("timestamp must be a string or integer, got {other}")),
    }
}

fn parse_line(
    line: &str,
    format: Format,
    interner: &mut Interner,
) -> Result<InteractionRecord, String> {
    let (user, page, post, action, ts) = match format {
        Format::Jsonl => {
            let j: JsonLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
            let ts = json_ts(&j.ts)?;
            (j.user, j.page, j.post, j.action, ts)
        }
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
            let row = rdr
                .records()
                .next()
                .ok_or("empty csv row")?
                .map_err(|e| e.to_string())?;
            if row.len() != 5 {
                return Err(format!("expected 5 columns ({CSV_HEADER}), got {}", row.len()));
            }
            let ts = parse_timestamp(&row[4])?;
            (row[0].to_string(), row[1].to_string(), row[2].to_string(), row[3].to_string(), ts)
        }
    };
    let action: Action = action.parse()?;
    let rec = InteractionRecord {
        user: interner.intern(&user),
        page: interner.intern(&page),
        post: interner.intern(&post),
        action,
        timestamp: ts,
    };
    rec.validate()?;
    Ok(rec)
}

/// Parses a line-oriented record stream.
///
/// In strict mode the first malformed line aborts with its 1-based line
/// number; otherwise malformed lines are skipped and counted. Blank lines and
/// a leading CSV header are ignored.
pub fn parse_records<R: BufRead>(reader: R, format: Format, strict: bool) -> Result<(Dataset, ParseReport)> {
    let mut interner = Interner::default();
    let mut records = Vec::new();
    let mut report = ParseReport::default();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                let reason = "line is not valid UTF-8".to_string();
                if strict {
                    return Err(Error::Parse { line: lineno, reason });
                }
                report.skipped += 1;
                if report.rejects.len() < MAX_REPORTED_REJECTS {
                    report.rejects.push((lineno, reason));
                }
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || (format == Format::Csv && lineno == 1 && trimmed == CSV_HEADER) {
            continue;
        }
        match parse_line(trimmed, format, &mut interner) {
            Ok(r) => records.push(r),
            Err(reason) if strict => return Err(Error::Parse { line: lineno, reason }),
            Err(reason) => {
                report.skipped += 1;
                if report.rejects.len() < MAX_REPORTED_REJECTS {
                    report.rejects.push((lineno, reason));
                }
            }
        }
    }
    report.accepted = records.len();
    Ok((Dataset::from_records(records), report))
}

/// Writes the dataset in canonical order.
pub fn write_records<W: Write>(d: &Dataset, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Jsonl => {
            for r in d.records() {
                let wire = WireRecord {
                    user: &r.user,
                    page: &r.page,
                    post: &r.post,
                    action: r.action.as_str(),
                    ts: format_timestamp(r.timestamp),
                };
                serde_json::to_writer(&mut out, &wire)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
            w.write_record(CSV_HEADER.split(','))?;
            for r in d.records() {
                w.write_record([
                    &*r.user,
                    &*r.page,
                    &*r.post,
                    r.action.as_str(),
                    &format_timestamp(r.timestamp),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn to_canonical_string(d: &Dataset) -> String {
    let mut buf = Vec::new();
    write_records(d, Format::Jsonl, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Drops records outside `range`, then drops every page left with fewer than
/// `min_posts` post records together with all of its records.
pub fn filter_dataset(d: &Dataset, min_posts: usize, range: &DateRange) -> Dataset {
    let in_range: Vec<&InteractionRecord> = d.records().iter().filter(|r| range.contains(r.timestamp)).collect();
    let mut posts: HashMap<&str, usize> = HashMap::new();
    for r in &in_range {
        if r.action == Action::Post {
            *posts.entry(&*r.page).or_default() += 1;
        }
    }
    let kept = in_range
        .into_iter()
        .filter(|r| posts.get(&*r.page).copied().unwrap_or(0) >= min_posts)
        .cloned()
        .collect();
    Dataset::from_records(kept)
}

/// Side of the debate a page belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pro,
    Anti,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Pro, Side::Anti];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Pro => "pro",
            Side::Anti => "anti",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Pro => Side::Anti,
            Side::Anti => Side::Pro,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PageLabel {
    Pro,
    Anti,
    Unlabeled,
}

impl PageLabel {
    pub fn side(self) -> Option<Side> {
        match self {
            PageLabel::Pro => Some(Side::Pro),
            PageLabel::Anti => Some(Side::Anti),
            PageLabel::Unlabeled => None,
        }
    }
}

impl FromStr for PageLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "pro" => Ok(PageLabel::Pro),
            "anti" => Ok(PageLabel::Anti),
            "unlabeled" | "" => Ok(PageLabel::Unlabeled),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Page id to label, at most one label per page.
pub type LabelMap = BTreeMap<String, PageLabel>;

/// Page id to side; pages absent from the map have no side.
pub type SideMap = BTreeMap<String, Side>;

pub fn side_map(labels: &LabelMap) -> SideMap {
    labels
        .iter()
        .filter_map(|(p, l)| l.side().map(|s| (p.clone(), s)))
        .collect()
}

/// Reads a `page_id,label` CSV (header optional).
pub fn read_labels<R: std::io::Read>(reader: R) -> Result<LabelMap> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut out = LabelMap::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 1;
        if row.len() != 2 {
            return Err(Error::Parse { line, reason: "expected page_id,label".into() });
        }
        if line == 1 && &row[0] == "page_id" {
            continue;
        }
        let label = row[1].parse().map_err(|reason| Error::Parse { line, reason })?;
        if out.insert(row[0].to_string(), label).is_some() {
            return Err(Error::Parse { line, reason: format!("page {:?} labeled twice", &row[0]) });
        }
    }
    Ok(out)
}

pub fn write_labels<W: Write>(labels: &LabelMap, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["page_id", "label"])?;
    for (page, label) in labels {
        let l = match label {
            PageLabel::Pro => "pro",
            PageLabel::Anti => "anti",
            PageLabel::Unlabeled => "unlabeled",
        };
        w.write_record([page.as_str(), l])?;
    }
    w.flush()?;
    Ok(())
}

/// One column of the dataset description table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub pages: u64,
    pub posts: u64,
    pub likes: u64,
    pub likers: u64,
    pub comments: u64,
    pub commenters: u64,
    pub users: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub pro: SummaryRow,
    pub anti: SummaryRow,
    /// Pages without a pro/anti label, kept apart from both sides.
    pub unlabeled: SummaryRow,
}

impl SummaryTable {
    pub fn row(&self, side: Option<Side>) -> &SummaryRow {
        match side {
            Some(Side::Pro) => &self.pro,
            Some(Side::Anti) => &self.anti,
            None => &self.unlabeled,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["measure", "anti", "pro", "unlabeled"])?;
        let rows: [(&str, fn(&SummaryRow) -> u64); 7] = [
            ("pages", |r| r.pages),
            ("posts", |r| r.posts),
            ("likes", |r| r.likes),
            ("likers", |r| r.likers),
            ("comments", |r| r.comments),
            ("commenters", |r| r.commenters),
            ("users", |r| r.users),
        ];
        for (name, get) in rows {
            w.write_record([
                name.to_string(),
                get(&self.anti).to_string(),
                get(&self.pro).to_string(),
                get(&self.unlabeled).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-label counts. Posting actors never count as likers, commenters or users.
pub fn dataset_summary(d: &Dataset, labels: &LabelMap) -> SummaryTable {
    #[derive(Default)]
    struct Acc<'a> {
        row: SummaryRow,
        likers: BTreeSet<&'a str>,
        commenters: BTreeSet<&'a str>,
    }
    let mut acc: [Acc; 3] = Default::default();
    let slot = |page: &str| match labels.get(page).and_then(|l| l.side()) {
        Some(Side::Pro) => 0,
        Some(Side::Anti) => 1,
        None => 2,
    };
    for page in d.pages() {
        acc[slot(page)].row.pages += 1;
    }
    for r in d.records() {
        let a = &mut acc[slot(&r.page)];
        match r.action {
            Action::Post => a.row.posts += 1,
            Action::Like => {
                a.row.likes += 1;
                a.likers.insert(&r.user);
            }
            Action::Comment => {
                a.row.comments += 1;
                a.commenters.insert(&r.user);
            }
        }
    }
    let [pro, anti, unlabeled] = acc.map(|mut a| {
        a.row.likers = a.likers.len() as u64;
        a.row.commenters = a.commenters.len() as u64;
        a.row.users = a.likers.union(&a.commenters).count() as u64;
        a.row
    });
    SummaryTable { pro, anti, unlabeled }
}
