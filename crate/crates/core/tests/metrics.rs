use polarnet::ingest::{side_map, Action, ActionKind, Dataset, InteractionRecord};
use polarnet::metrics::{
    loess_fit, pages_per_window, polarization_histogram, user_engagement, user_polarization, Window,
};
use polarnet::synth::{generate, ActivityDist, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn small_corpus(p_out: f64, seed: u64) -> polarnet::synth::Synthetic {
    generate(&SynthConfig {
        users: (400, 300),
        pages: (12, 8),
        p_out,
        posts_per_page: 30,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

/// Weighted least squares on the design [1, x] by Cramer's rule, with the
/// hat row at `x0` built from (XᵀWX)⁻¹XᵀW.
fn direct_row(x: &[f64], x0: f64, span: f64) -> Vec<f64> {
    let n = x.len();
    let q = (span * n as f64).floor() as usize;
    let mut d: Vec<f64> = x.iter().map(|v| (v - x0).abs()).collect();
    d.sort_by(f64::total_cmp);
    let h = d[q - 1];
    let w: Vec<f64> = x
        .iter()
        .map(|v| {
            let u = (v - x0).abs() / h;
            if u < 1.0 { (1.0 - u.powi(3)).powi(3) } else { 0.0 }
        })
        .collect();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        a += wi;
        b += wi * xi;
        c += wi * xi * xi;
    }
    let det = a * c - b * b;
    // [1 x0]·inv([[a b][b c]])·[1 x_i]ᵀ w_i
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| {
            let beta0 = (c - b * xi) / det;
            let beta1 = (a * xi - b) / det;
            wi * (beta0 + beta1 * x0)
        })
        .collect()
}

#[test]
fn loess_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let n = 500;
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let y: Vec<f64> = x.iter().map(|v| v.sin() + noise.sample(&mut rng)).collect();
    let eval: Vec<f64> = (0..10).map(|i| 0.3 + i as f64 * 0.6).collect();
    let span = 0.3;
    let got = loess_fit(&x, &y, span, &eval).unwrap();

    let rows: Vec<Vec<f64>> = x.iter().map(|&xi| direct_row(&x, xi, span)).collect();
    let mut rss = 0.0;
    let mut delta1 = 0.0;
    for i in 0..n {
        let fit: f64 = rows[i].iter().zip(&y).map(|(l, v)| l * v).sum();
        rss += (y[i] - fit).powi(2);
        for j in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            delta1 += (e - rows[i][j]).powi(2);
        }
    }
    let sigma = (rss / delta1).sqrt();
    for (p, &x0) in got.iter().zip(&eval) {
        let l = direct_row(&x, x0, span);
        let fit: f64 = l.iter().zip(&y).map(|(a, b)| a * b).sum();
        let half = 1.959_963_984_540_054 * sigma * l.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((p.fit - fit).abs() < 1e-9, "{} vs {fit}", p.fit);
        assert!((p.hi95 - (fit + half)).abs() < 1e-9);
        assert!((p.lo95 - (fit - half)).abs() < 1e-9);
        assert!((p.fit - x0.sin()).abs() < 0.25);
    }
}

#[test]
fn loess_full_span_is_ols_on_linear_data() {
    let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos() * 5.0 + i as f64 * 0.1).collect();
    let y: Vec<f64> = x.iter().map(|v| -0.5 * v + 3.0).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    for p in loess_fit(&x, &y, 1.0, &[-4.0, 0.0, 2.5, 6.0]).unwrap() {
        assert!((p.fit - (icpt + slope * p.x)).abs() < 1e-9);
    }
}

#[test]
fn zero_crossing_rate_gives_pure_rho_and_outer_bins() {
    let s = small_corpus(0.0, 5);
    let sides = side_map(&s.labels);
    let prof = user_polarization(&s.dataset, ActionKind::Like, &sides, 10).unwrap();
    assert!(!prof.is_empty());
    assert!(prof.iter().all(|p| p.rho == 1.0 || p.rho == -1.0));
    let h = polarization_histogram(&prof, 21).unwrap();
    assert_eq!(h.counts[0] + h.counts[20], h.total);
    let mass: f64 = h.density.iter().sum::<f64>() * h.bin_width();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn rho_invariant_under_action_duplication() {
    let s = small_corpus(0.1, 6);
    let sides = side_map(&s.labels);
    let base = user_polarization(&s.dataset, ActionKind::Like, &sides, 1).unwrap();
    let mut recs: Vec<InteractionRecord> = Vec::new();
    for r in s.dataset.records() {
        let copies = if r.action == Action::Post { 1 } else { 3 };
        recs.extend(std::iter::repeat_n(r.clone(), copies));
    }
    let tripled = user_polarization(&Dataset::from_records(recs), ActionKind::Like, &sides, 1).unwrap();
    assert_eq!(base.len(), tripled.len());
    for (a, b) in base.iter().zip(&tripled) {
        assert_eq!((a.x * 3, a.y * 3), (b.x, b.y));
        assert_eq!(a.rho, b.rho);
    }
}

#[test]
fn windows_nest_for_every_user() {
    let s = small_corpus(0.05, 8);
    for user in s.dataset.users() {
        let w = pages_per_window(&s.dataset, user, Window::Week, ActionKind::Like);
        let m = pages_per_window(&s.dataset, user, Window::Month, ActionKind::Like);
        let y = pages_per_window(&s.dataset, user, Window::Year, ActionKind::Like);
        assert!(w <= m && m <= y, "{user}: {w} {m} {y}");
    }
}

#[test]
fn engagement_standardized_range() {
    let s = generate(&SynthConfig {
        users: (100, 100),
        pages: (4, 4),
        actions_per_user: ActivityDist::LogNormal { mu: 1.5, sigma: 1.0 },
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    let e = user_engagement(&s.dataset, &side_map(&s.labels), ActionKind::Like).unwrap();
    assert!(e.degenerate.is_empty());
    for side in polarnet::ingest::Side::BOTH {
        let users: Vec<_> = e.users.iter().filter(|u| u.community == side).collect();
        for f in [|u: &&polarnet::metrics::UserEngagement| u.lifetime_std, |u: &&polarnet::metrics::UserEngagement| u.activity_std] {
            let vals: Vec<f64> = users.iter().map(f).collect();
            assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(vals.contains(&0.0) && vals.contains(&1.0));
        }
    }
}
