use std::io::Cursor;

use polarnet::graph::{connected_components, induced_subgraph, project, BipartiteGraph};
use polarnet::ingest::{parse_records, to_canonical_string, write_records, Action, ActionKind, Format, Side};
use polarnet::synth::{generate, ActivityDist, SynthConfig};

#[test]
fn cross_side_fraction_is_binomial() {
    let cfg = SynthConfig {
        users: (5_000, 5_000),
        pages: (20, 20),
        p_out: 0.05,
        actions_per_user: ActivityDist::Fixed { n: 1 },
        seed: 10,
        ..SynthConfig::default()
    };
    let s = generate(&cfg).unwrap();
    let mut cross = 0u64;
    let mut total = 0u64;
    for r in s.dataset.records().iter().filter(|r| r.action != Action::Post) {
        total += 1;
        if s.truth.users[&*r.user] != s.truth.pages[&*r.page] {
            cross += 1;
        }
    }
    assert_eq!(total, 10_000);
    let sd = (total as f64 * 0.05 * 0.95).sqrt();
    assert!((cross as f64 - 500.0).abs() <= 3.0 * sd, "{cross}");
}

#[test]
fn record_count_is_posts_plus_actions() {
    let cfg = SynthConfig { users: (300, 200), pages: (7, 5), posts_per_page: 9, seed: 1, ..SynthConfig::default() };
    let s = generate(&cfg).unwrap();
    let posts = s.dataset.actions(Action::Post).count();
    assert_eq!(posts, 12 * 9);
    let per_user: usize = s.truth.users.keys().map(|u| s.dataset.user_records(u).count()).sum();
    assert_eq!(s.dataset.len(), posts + per_user);
    assert_eq!(s.truth.pages.len(), 12);
    assert_eq!(s.truth.users.len(), 500);
}

#[test]
fn sides_project_to_single_components() {
    let cfg = SynthConfig {
        users: (800, 800),
        pages: (10, 6),
        p_out: 0.0,
        actions_per_user: ActivityDist::LogNormal { mu: 3.0, sigma: 0.5 },
        seed: 2,
        ..SynthConfig::default()
    };
    let s = generate(&cfg).unwrap();
    let g = project(&BipartiteGraph::build(&s.dataset, ActionKind::Like, None));
    for side in Side::BOTH {
        let pages = s.truth.pages.iter().filter(|(_, &v)| v == side).map(|(k, _)| k.as_str());
        let sub = induced_subgraph(&g, pages).unwrap();
        assert_eq!(connected_components(&sub).community_count(), 1, "{side}");
    }
    assert_eq!(connected_components(&g).community_count(), 2);
}

#[test]
fn thousand_record_file_round_trips() {
    let cfg = SynthConfig {
        users: (60, 40),
        pages: (3, 2),
        posts_per_page: 40,
        actions_per_user: ActivityDist::Fixed { n: 8 },
        seed: 7,
        ..SynthConfig::default()
    };
    let s = generate(&cfg).unwrap();
    assert_eq!(s.dataset.len(), 1_000);
    let direct = to_canonical_string(&s.dataset);
    let (parsed, report) = parse_records(Cursor::new(direct.as_bytes()), Format::Jsonl, true).unwrap();
    assert_eq!(report.accepted, 1_000);
    assert_eq!(to_canonical_string(&parsed), direct);

    let mut csv = Vec::new();
    write_records(&s.dataset, Format::Csv, &mut csv).unwrap();
    let (from_csv, _) = parse_records(Cursor::new(csv), Format::Csv, true).unwrap();
    assert_eq!(to_canonical_string(&from_csv), direct);
}
