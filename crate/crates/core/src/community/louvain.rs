//! Multi-level modularity optimization (Blondel et al.), resolution 1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Partition, ProjectionGraph};

/// Aggregated graph of one level. Self-loop weight holds the internal weight
/// of the community a node stands for.
struct Level {
    adj: Vec<Vec<(usize, u64)>>,
    self_loop: Vec<u64>,
    strength: Vec<u64>,
}

impl Level {
    fn from_graph(g: &ProjectionGraph) -> Self {
        let n = g.node_count();
        Self {
            adj: (0..n)
                .map(|i| g.neighbors(i).iter().map(|&(b, w)| (b as usize, w)).collect())
                .collect(),
            self_loop: vec![0; n],
            strength: g.strengths().to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, comm: &[usize], count: usize) -> Self {
        let mut self_loop = vec![0u64; count];
        let mut strength = vec![0u64; count];
        let mut maps: Vec<std::collections::BTreeMap<usize, u64>> = vec![Default::default(); count];
        for (i, list) in self.adj.iter().enumerate() {
            let ci = comm[i];
            strength[ci] += self.strength[i];
            self_loop[ci] += self.self_loop[i];
            for &(j, w) in list {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    if i < j {
                        self_loop[ci] += w;
                    }
                } else {
                    *maps[ci].entry(cj).or_default() += w;
                }
            }
        }
        let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        Self { adj, self_loop, strength }
    }
}

/// Local-moving phase. Returns whether any node moved.
fn move_nodes(level: &Level, comm: &mut [usize], two_m: i128, rng: &mut ChaCha8Rng) -> bool {
    let n = level.len();
    let mut tot: Vec<i128> = vec![0; n];
    for i in 0..n {
        tot[comm[i]] += i128::from(level.strength[i]);
    }
    let mut link = vec![0u64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let mut any_move = false;
    loop {
        order.shuffle(rng);
        let mut moved = false;
        for &i in &order {
            let home = comm[i];
            let s_i = i128::from(level.strength[i]);
            for &(j, w) in &level.adj[i] {
                let c = comm[j];
                if link[c] == 0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[home] -= s_i;
            // 2m·ΔQ of joining c, up to a term shared by all candidates
            let gain = |c: usize, k: u64| two_m * i128::from(k) - s_i * tot[c];
            let mut best = home;
            let mut best_gain = gain(home, link[home]);
            touched.sort_unstable();
            for &c in &touched {
                let gc = gain(c, link[c]);
                if gc > best_gain {
                    best = c;
                    best_gain = gc;
                }
            }
            for &c in &touched {
                link[c] = 0;
            }
            touched.clear();
            tot[best] += s_i;
            if best != home {
                comm[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

fn compact(comm: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    for c in comm.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Louvain partition. Node visit order is reshuffled every pass from `seed`.
pub fn louvain(g: &ProjectionGraph, seed: u64) -> Result<Partition> {
    let m = g.total_weight();
    if m == 0 {
        return Err(Error::ZeroWeight);
    }
    let two_m = 2 * i128::from(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(g);
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    loop {
        let mut comm: Vec<usize> = (0..level.len()).collect();
        if !move_nodes(&level, &mut comm, two_m, &mut rng) {
            break;
        }
        let count = compact(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        if count == level.len() {
            break;
        }
        level = level.aggregate(&comm, count);
    }
    Ok(g.partition_from_labels(&membership))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::tests::two_triangles;

    #[test]
    fn two_cliques_any_seed() {
        let g = two_triangles(1);
        for seed in 0..20 {
            let p = louvain(&g, seed).unwrap();
            assert_eq!(p.membership(), &[0, 0, 0, 1, 1, 1], "seed {seed}");
        }
    }

    #[test]
    fn complete_graph_one_community() {
        let names: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut edges = Vec::new();
        for i in 0..8 {
            for j in i + 1..8 {
                edges.push((refs[i], refs[j], 1));
            }
        }
        let g = ProjectionGraph::from_named_edges(&refs, &edges).unwrap();
        for seed in 0..10 {
            assert_eq!(louvain(&g, seed).unwrap().community_count(), 1);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let g = two_triangles(3);
        assert_eq!(louvain(&g, 5).unwrap(), louvain(&g, 5).unwrap());
    }
}
