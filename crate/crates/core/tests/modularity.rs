use std::sync::Arc;

use polarnet::community::{detect, fastgreedy, modularity, walktrap, Algorithm};
use polarnet::graph::{Partition, ProjectionGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(n: usize) -> Vec<Arc<str>> {
    (0..n).map(|i| Arc::from(format!("n{i}"))).collect()
}

/// Q = (1/2m) Σ_ij [A_ij − s_i s_j / 2m] δ(c_i, c_j) over the dense matrix.
fn direct_q(n: usize, edges: &[(usize, usize, u64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w as f64;
        a[j][i] += w as f64;
    }
    let s: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = s.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - s[i] * s[j] / two_m;
            }
        }
    }
    q / two_m
}

fn connected(n: usize, edges: &[(usize, usize, u64)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b, _) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Restricted growth strings: every set partition of `n` items once.
fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur.push(c);
            rec(i + 1, n, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut cur = vec![0];
        rec(1, n, &mut cur, 0, &mut out);
    }
    out
}

fn random_weighted(n: usize, seed: u64) -> Vec<(usize, usize, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random::<f64>() < 0.45 {
                    edges.push((a, b, rng.random_range(1..=9)));
                }
            }
        }
        if connected(n, &edges) {
            return edges;
        }
    }
}

#[test]
fn matches_direct_formula_on_small_graphs() {
    // every labeled connected graph on 2..=5 nodes, every partition
    for n in 2..=5 {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let parts = all_partitions(n);
        for mask in 1u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize, u64)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &(a, b))| (a, b, 1))
                .collect();
            if !connected(n, &edges) {
                continue;
            }
            let g = ProjectionGraph::from_edges(names(n), &edges).unwrap();
            for labels in &parts {
                let p = Partition::new(names(n), labels.clone()).unwrap();
                let q = modularity(&g, &p).unwrap();
                assert!((q - direct_q(n, &edges, labels)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn reported_scores_and_brute_force_bound() {
    let mut graphs: Vec<(usize, Vec<(usize, usize, u64)>)> = Vec::new();
    // every labeled connected graph on 6 nodes with unit weights, thinned by a fixed stride
    let n6: Vec<(usize, usize)> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
    for mask in (1u32..(1 << 15)).step_by(37) {
        let edges: Vec<_> = n6.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &(a, b))| (a, b, 1)).collect();
        if connected(6, &edges) {
            graphs.push((6, edges));
        }
    }
    for seed in 0..100 {
        graphs.push((8, random_weighted(8, seed)));
    }
    let parts8 = all_partitions(8);
    let parts6 = all_partitions(6);
    for (n, edges) in &graphs {
        let g = ProjectionGraph::from_edges(names(*n), edges).unwrap();
        let parts = if *n == 8 { &parts8 } else { &parts6 };
        let best = parts.iter().map(|l| direct_q(*n, edges, l)).fold(f64::NEG_INFINITY, f64::max);
        let fg = fastgreedy(&g).unwrap();
        assert!((fg.modularity - modularity(&g, &fg.partition).unwrap()).abs() < 1e-12);
        assert!(fg.modularity <= best + 1e-12);
        let wt = walktrap(&g, 4).unwrap();
        assert!((wt.modularity - modularity(&g, &wt.partition).unwrap()).abs() < 1e-12);
        let singletons = modularity(&g, &g.singleton_partition()).unwrap();
        for alg in Algorithm::ALL {
            let p = detect(&g, alg, 9).unwrap().partition;
            let q = modularity(&g, &p).unwrap();
            assert!(q <= best + 1e-12);
            assert!(q >= singletons - 1e-12, "{alg:?}");
            assert_eq!(p.len(), *n);
        }
    }
}

#[test]
fn louvain_finds_unique_two_clique_optimum() {
    let edges = [(0, 1, 1), (0, 2, 1), (1, 2, 1), (3, 4, 1), (3, 5, 1), (4, 5, 1)];
    let best = all_partitions(6)
        .into_iter()
        .max_by(|a, b| direct_q(6, &edges, a).total_cmp(&direct_q(6, &edges, b)))
        .unwrap();
    assert_eq!(best, vec![0, 0, 0, 1, 1, 1]);
    let g = ProjectionGraph::from_edges(names(6), &edges).unwrap();
    for seed in 0..10 {
        assert_eq!(detect(&g, Algorithm::Louvain, seed).unwrap().partition.membership(), &best[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn argmax_is_scale_invariant(seed in 0u64..10_000, k in 2u64..20) {
        let edges = random_weighted(8, seed);
        let g = ProjectionGraph::from_edges(names(8), &edges).unwrap();
        let gk = g.scaled(k);
        for alg in Algorithm::ALL {
            let a = detect(&g, alg, seed).unwrap().partition;
            let b = detect(&gk, alg, seed).unwrap().partition;
            prop_assert_eq!(a, b, "{:?}", alg);
        }
    }

    #[test]
    fn outputs_are_total_with_contiguous_ids(seed in 0u64..10_000) {
        let edges = random_weighted(8, seed);
        let g = ProjectionGraph::from_edges(names(8), &edges).unwrap();
        for alg in Algorithm::ALL {
            let p = detect(&g, alg, seed).unwrap().partition;
            prop_assert_eq!(p.len(), 8);
            let used: std::collections::BTreeSet<usize> = p.membership().iter().copied().collect();
            prop_assert_eq!(used, (0..p.community_count()).collect());
        }
    }
}
