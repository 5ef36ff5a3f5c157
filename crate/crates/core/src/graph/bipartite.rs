use std::collections::BTreeSet;
use std::sync::Arc;

use crate::calendar::DateRange;
use crate::ingest::{ActionKind, Dataset};

/// User-page incidence for one action kind.
///
/// An edge means the user performed the action at least once on the page;
/// multiplicities are collapsed. Pages and users are indexed densely in
/// lexicographic id order.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    pages: Vec<Arc<str>>,
    users: Vec<Arc<str>>,
    page_users: Vec<Vec<u32>>,
    user_pages: Vec<Vec<u32>>,
    kind: ActionKind,
    window: Option<DateRange>,
}

impl BipartiteGraph {
    /// Every dataset page becomes a node, with or without edges.
    pub fn build(d: &Dataset, kind: ActionKind, window: Option<DateRange>) -> Self {
        Self::build_filtered(d, kind, window, |_| true)
    }

    /// Like [`build`](Self::build) but keeps only pages accepted by `keep_page`.
    pub fn build_filtered<F>(d: &Dataset, kind: ActionKind, window: Option<DateRange>, keep_page: F) -> Self
    where
        F: Fn(&str) -> bool,
    {
        let pages: Vec<Arc<str>> = d.pages().filter(|p| keep_page(p)).cloned().collect();
        let action = kind.action();
        let mut pairs: BTreeSet<(&Arc<str>, usize)> = BTreeSet::new();
        for (pi, page) in pages.iter().enumerate() {
            for r in d.page_records(page) {
                if r.action == action && window.is_none_or(|w| w.contains(r.timestamp)) {
                    pairs.insert((&r.user, pi));
                }
            }
        }
        let mut users: Vec<Arc<str>> = Vec::new();
        let mut user_pages: Vec<Vec<u32>> = Vec::new();
        let mut page_users: Vec<Vec<u32>> = vec![Vec::new(); pages.len()];
        for (user, pi) in pairs {
            if users.last().is_none_or(|u| u != user) {
                users.push(user.clone());
                user_pages.push(Vec::new());
            }
            let ui = users.len() - 1;
            user_pages[ui].push(pi as u32);
            page_users[pi].push(ui as u32);
        }
        Self { pages, users, page_users, user_pages, kind, window }
    }

    /// Builds directly from `(user, page)` incidence pairs; duplicates collapse.
    pub fn from_pairs<'a, I>(pages: &[&str], pairs: I, kind: ActionKind) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let page_set: BTreeSet<&str> = pages.iter().copied().collect();
        let pages: Vec<Arc<str>> = page_set.iter().map(|p| Arc::from(*p)).collect();
        let uniq: BTreeSet<(&str, &str)> = pairs.into_iter().collect();
        let mut users: Vec<Arc<str>> = Vec::new();
        let mut user_pages: Vec<Vec<u32>> = Vec::new();
        let mut page_users: Vec<Vec<u32>> = vec![Vec::new(); pages.len()];
        for (user, page) in uniq {
            let Ok(pi) = pages.binary_search_by(|p| (**p).cmp(page)) else { continue };
            if users.last().is_none_or(|u| &**u != user) {
                users.push(Arc::from(user));
                user_pages.push(Vec::new());
            }
            let ui = users.len() - 1;
            user_pages[ui].push(pi as u32);
            page_users[pi].push(ui as u32);
        }
        for pu in &mut page_users {
            pu.sort_unstable();
        }
        Self { pages, users, page_users, user_pages, kind, window: None }
    }

    pub fn pages(&self) -> &[Arc<str>] {
        &self.pages
    }

    pub fn users(&self) -> &[Arc<str>] {
        &self.users
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn window(&self) -> Option<DateRange> {
        self.window
    }

    /// Sorted distinct user indices of a page.
    pub fn page_users(&self, page: usize) -> &[u32] {
        &self.page_users[page]
    }

    /// Sorted distinct page indices of a user.
    pub fn user_pages(&self, user: usize) -> &[u32] {
        &self.user_pages[user]
    }

    pub fn edge_count(&self) -> usize {
        self.user_pages.iter().map(Vec::len).sum()
    }

    /// `(user, page)` id pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.user_pages
            .iter()
            .enumerate()
            .flat_map(move |(u, ps)| ps.iter().map(move |&p| (&*self.users[u], &*self.pages[p as usize])))
    }

    pub fn page_degree(&self, page: usize) -> usize {
        self.page_users[page].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::parse_timestamp;
    use crate::ingest::{Action, InteractionRecord};

    fn rec(user: &str, page: &str, action: Action, ts: &str) -> InteractionRecord {
        InteractionRecord {
            user: user.into(),
            page: page.into(),
            post: format!("{page}-x").into(),
            action,
            timestamp: parse_timestamp(ts).unwrap(),
        }
    }

    #[test]
    fn collapses_multiplicity() {
        let d = Dataset::from_records(vec![
            rec("u1", "p1", Action::Like, "2014-01-01T00:00:00Z"),
            rec("u1", "p1", Action::Like, "2014-01-02T00:00:00Z"),
        ]);
        let b = BipartiteGraph::build(&d, ActionKind::Like, None);
        assert_eq!(b.edge_count(), 1);
        assert_eq!(b.edges().collect::<Vec<_>>(), vec![("u1", "p1")]);
    }

    #[test]
    fn kind_filter_keeps_pages() {
        let d = Dataset::from_records(vec![
            rec("u1", "p1", Action::Like, "2014-01-01T00:00:00Z"),
            rec("u2", "p2", Action::Like, "2014-01-01T00:00:00Z"),
        ]);
        let b = BipartiteGraph::build(&d, ActionKind::Comment, None);
        assert_eq!(b.pages().len(), 2);
        assert_eq!(b.edge_count(), 0);
    }

    #[test]
    fn window_restricts_edges() {
        let d = Dataset::from_records(vec![
            rec("u1", "p1", Action::Like, "2014-01-01T00:00:00Z"),
            rec("u2", "p1", Action::Like, "2015-01-01T00:00:00Z"),
        ]);
        let w = crate::calendar::Quarter::new(2014, 1).unwrap().range();
        let b = BipartiteGraph::build(&d, ActionKind::Like, Some(w));
        assert_eq!(b.edges().collect::<Vec<_>>(), vec![("u1", "p1")]);
    }
}
