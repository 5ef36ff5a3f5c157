use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Datelike};
use polarnet::ingest::{Action, Dataset, InteractionRecord, Side, SideMap};
use polarnet::temporal::{
    activity_series, f_tail, manova_pillai, two_way_anova, Epoch, Measure, Observation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::gamma::ln_gamma;

#[test]
fn series_matches_group_by() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let sides: SideMap = [("p0", Side::Pro), ("p1", Side::Pro), ("p2", Side::Anti), ("p3", Side::Anti), ("p4", Side::Anti)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let actions = [Action::Post, Action::Like, Action::Comment];
    let recs: Vec<InteractionRecord> = (0..200)
        .map(|_| {
            let page = format!("p{}", rng.random_range(0..6));
            let action = actions[rng.random_range(0..3)];
            let user = if action == Action::Post { page.clone() } else { format!("u{}", rng.random_range(0..15)) };
            InteractionRecord {
                user: user.into(),
                page: page.clone().into(),
                post: format!("{page}_x").into(),
                action,
                timestamp: 1_262_304_000 + rng.random_range(0..2 * 365 * 86_400),
            }
        })
        .collect();
    let d = Dataset::from_records(recs.clone());
    let mut groups: BTreeMap<(String, &str, &str), BTreeSet<String>> = BTreeMap::new();
    for r in &recs {
        let Some(side) = sides.get(&*r.page) else { continue };
        let t = DateTime::from_timestamp(r.timestamp, 0).unwrap();
        let quarter = format!("{}Q{}", t.year(), (t.month() + 2) / 3);
        let (pages, users) = match r.action {
            Action::Post => ("active_pages_post", None),
            Action::Like => ("active_pages_like", Some("active_users_like")),
            Action::Comment => ("active_pages_comment", Some("active_users_comment")),
        };
        groups.entry((quarter.clone(), side.as_str(), pages)).or_default().insert(r.page.to_string());
        if let Some(m) = users {
            groups.entry((quarter, side.as_str(), m)).or_default().insert(r.user.to_string());
        }
    }
    let series = activity_series(&d, &sides);
    assert_eq!(series.len(), 8 * 2 * 5);
    for p in series {
        let key = (p.quarter.to_string(), p.community.as_str(), p.measure.as_str());
        assert_eq!(p.count, groups.get(&key).map_or(0, |s| s.len() as u64), "{key:?}");
    }
}

fn design(per_cell: usize, seed: u64, dvs: usize) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut out = Vec::new();
    for (side, epoch, shift) in [
        (Side::Pro, Epoch::Before, 0.0),
        (Side::Pro, Epoch::After, 3.0),
        (Side::Anti, Epoch::Before, 1.0),
        (Side::Anti, Epoch::After, 6.0),
    ] {
        for _ in 0..per_cell {
            let mut values = vec![10.0 + shift + noise.sample(&mut rng)];
            for _ in 1..dvs {
                values.push(noise.sample(&mut rng));
            }
            out.push(Observation { sentiment: side, epoch, values });
        }
    }
    out
}

#[test]
fn balanced_decomposition_sums_to_total() {
    for seed in 0..20 {
        let a = two_way_anova(&design(7, seed, 1)).unwrap();
        let sum = a.ss_sentiment + a.ss_epoch + a.ss_interaction + a.ss_error;
        assert!((sum - a.ss_total).abs() <= 1e-9 * a.ss_total);
    }
}

#[test]
fn paper_design_shapes() {
    let a = two_way_anova(&design(15, 1, 1)).unwrap();
    assert_eq!((a.interaction.df1, a.interaction.df2), (1, 56));
    let m = manova_pillai(&design(15, 1, 2)).unwrap();
    assert_eq!((m.df1, m.df2), (2, 55));
}

#[test]
fn single_dv_pillai_is_univariate_f() {
    for seed in 0..10 {
        let obs = design(9, seed, 1);
        let a = two_way_anova(&obs).unwrap().interaction;
        let m = manova_pillai(&obs).unwrap();
        assert!((a.f - m.f).abs() <= 1e-9 * a.f.max(1.0), "{} {}", a.f, m.f);
        assert_eq!((a.df1, a.df2), (m.df1, m.df2));
        assert!((a.partial_eta2 - m.partial_eta2).abs() < 1e-9);
    }
}

#[test]
fn pillai_matches_straight_line_algebra() {
    let obs = design(15, 42, 2);
    let cell = |o: &Observation| (o.sentiment as usize) * 2 + o.epoch as usize;
    let mut mean = [[0.0; 2]; 4];
    let mut cnt = [0.0; 4];
    for o in &obs {
        mean[cell(o)][0] += o.values[0];
        mean[cell(o)][1] += o.values[1];
        cnt[cell(o)] += 1.0;
    }
    for c in 0..4 {
        mean[c][0] /= cnt[c];
        mean[c][1] /= cnt[c];
    }
    let (mut e11, mut e12, mut e22) = (0.0, 0.0, 0.0);
    for o in &obs {
        let r0 = o.values[0] - mean[cell(o)][0];
        let r1 = o.values[1] - mean[cell(o)][1];
        e11 += r0 * r0;
        e12 += r0 * r1;
        e22 += r1 * r1;
    }
    // balanced: H = (n/4)·c·cᵀ with c the interaction contrast of cell means
    let c0 = mean[0][0] - mean[1][0] - mean[2][0] + mean[3][0];
    let c1 = mean[0][1] - mean[1][1] - mean[2][1] + mean[3][1];
    let k = 15.0 / 4.0;
    let (h11, h12, h22) = (k * c0 * c0, k * c0 * c1, k * c1 * c1);
    let (t11, t12, t22) = (h11 + e11, h12 + e12, h22 + e22);
    let det = t11 * t22 - t12 * t12;
    let (i11, i12, i22) = (t22 / det, -t12 / det, t11 / det);
    let v = h11 * i11 + h12 * i12 + h12 * i12 + h22 * i22;
    let f = (56.0 - 2.0 + 1.0) / 2.0 * v / (1.0 - v);
    let m = manova_pillai(&obs).unwrap();
    assert!((m.partial_eta2 - v).abs() < 1e-9);
    assert!((m.f - f).abs() < 1e-9);
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// 1 − ∫₀^F density, integrating over s = √f so the d1 = 1 singularity vanishes.
fn tail_by_quadrature(x: f64, d1: f64, d2: f64) -> f64 {
    let ln_b = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
    let density = |f: f64| -> f64 {
        if f == 0.0 {
            return if d1 == 2.0 { 1.0 } else { 0.0 };
        }
        let ln = 0.5 * (d1 * (d1 * f).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * f + d2).ln()) - f.ln() - ln_b;
        ln.exp()
    };
    let g = |s: f64| {
        if s == 0.0 {
            // limit of density(s²)·2s
            return if d1 == 1.0 { 2.0 / d2.sqrt() * (-ln_b).exp() } else { 0.0 };
        }
        density(s * s) * 2.0 * s
    };
    1.0 - adaptive_simpson(&g, 0.0, x.sqrt(), 1e-13)
}

#[test]
fn f_tail_agrees_with_quadrature() {
    for &(f, d1, d2) in &[(5.053, 1, 56), (12.218, 2, 55), (2.708, 2, 55), (0.4, 3, 10), (3.0, 1, 8)] {
        let got = f_tail(f, d1, d2);
        let want = tail_by_quadrature(f, d1 as f64, d2 as f64);
        assert!((got - want).abs() < 1e-7, "F({d1},{d2}) = {f}: {got} vs {want}");
    }
    // the reported pairing of statistic and p-value
    assert!((f_tail(5.053, 1, 56) - 0.029).abs() < 0.0005);
    for d in [1, 2, 5, 30, 56] {
        assert!((f_tail(1.0, d, d) - 0.5).abs() < 1e-9);
    }
}

#[test]
fn measure_names_round_trip() {
    for m in Measure::ALL {
        assert_eq!(m.as_str().parse::<Measure>().unwrap(), m);
    }
}
