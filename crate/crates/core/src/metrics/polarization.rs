use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Partition;
use crate::ingest::{ActionKind, Dataset, Side, SideMap};

pub const DEFAULT_MIN_ACTIONS: u64 = 10;
pub const DEFAULT_BINS: usize = 21;

/// A user's action counts on the two communities. `x` counts actions on
/// C1 (the `Pro` side of the map), `y` on C2.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationProfile {
    pub user: Arc<str>,
    pub x: u64,
    pub y: u64,
    pub rho: f64,
}

impl PolarizationProfile {
    pub fn new(user: Arc<str>, x: u64, y: u64) -> Self {
        let rho = (x as f64 - y as f64) / (x + y) as f64;
        Self { user, x, y, rho }
    }
}

/// ρ(u) = (x − y)/(x + y) for every user with at least `min_actions` actions
/// of `kind` on pages of either side. Pages missing from `sides` are ignored.
pub fn user_polarization(d: &Dataset, kind: ActionKind, sides: &SideMap, min_actions: u64) -> Result<Vec<PolarizationProfile>> {
    if sides.is_empty() {
        return Err(Error::Invalid("empty side map".into()));
    }
    let action = kind.action();
    let mut out = Vec::new();
    for user in d.users() {
        let (mut x, mut y) = (0u64, 0u64);
        for r in d.user_records(user).filter(|r| r.action == action) {
            match sides.get(&*r.page) {
                Some(Side::Pro) => x += 1,
                Some(Side::Anti) => y += 1,
                None => {}
            }
        }
        if x + y > 0 && x + y >= min_actions {
            out.push(PolarizationProfile::new(user.clone(), x, y));
        }
    }
    Ok(out)
}

/// Side map from a detected partition: the largest community is C1 (`Pro`),
/// the second largest C2 (`Anti`); other pages get no side.
pub fn detected_sides(p: &Partition) -> Result<SideMap> {
    if p.community_count() < 2 {
        return Err(Error::Invalid("need at least two detected communities".into()));
    }
    // canonical ids: 0 and 1 are the two largest
    let mut map = SideMap::new();
    for (node, &c) in p.nodes().iter().zip(p.membership()) {
        match c {
            0 => map.insert(node.to_string(), Side::Pro),
            1 => map.insert(node.to_string(), Side::Anti),
            _ => None,
        };
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges from −1 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    pub total: u64,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        2.0 / self.counts.len() as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count", "density"])?;
        for i in 0..self.counts.len() {
            w.write_record([
                format!("{:.6}", self.edges[i]),
                format!("{:.6}", self.edges[i + 1]),
                self.counts[i].to_string(),
                format!("{:.12}", self.density[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Equal-width density histogram of ρ over [−1, 1]; ±1 land in the outer bins.
pub fn polarization_histogram(profiles: &[PolarizationProfile], bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {bins}")));
    }
    if profiles.is_empty() {
        return Err(Error::Invalid("no polarization profiles".into()));
    }
    let mut counts = vec![0u64; bins];
    for p in profiles {
        let i = ((p.rho + 1.0) * bins as f64 / 2.0).floor() as usize;
        counts[i.min(bins - 1)] += 1;
    }
    let total = profiles.len() as u64;
    let width = 2.0 / bins as f64;
    let density = counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect();
    let edges = (0..=bins).map(|i| -1.0 + 2.0 * i as f64 / bins as f64).collect();
    Ok(Histogram { edges, counts, density, total })
}

pub fn write_profiles<W: Write>(profiles: &[PolarizationProfile], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "x", "y", "rho"])?;
    for p in profiles {
        w.write_record([p.user.to_string(), p.x.to_string(), p.y.to_string(), format!("{:.12}", p.rho)])?;
    }
    w.flush()?;
    Ok(())
}

/// Count of like records per (user, side), used by the engagement measures.
pub(crate) fn side_counts(d: &Dataset, kind: ActionKind, sides: &SideMap) -> BTreeMap<Arc<str>, [u64; 2]> {
    let action = kind.action();
    let mut out: BTreeMap<Arc<str>, [u64; 2]> = BTreeMap::new();
    for r in d.records().iter().filter(|r| r.action == action) {
        if let Some(&s) = sides.get(&*r.page) {
            out.entry(r.user.clone()).or_default()[s as usize] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Action, InteractionRecord};

    fn likes(spec: &[(&str, &str, usize)]) -> Dataset {
        let mut recs = Vec::new();
        let mut t = 0;
        for &(u, p, n) in spec {
            for _ in 0..n {
                t += 60;
                recs.push(InteractionRecord {
                    user: u.into(),
                    page: p.into(),
                    post: format!("{p}_x").into(),
                    action: Action::Like,
                    timestamp: 1_400_000_000 + t,
                });
            }
        }
        Dataset::from_records(recs)
    }

    fn sides() -> SideMap {
        [("a", Side::Pro), ("b", Side::Anti)].into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn rho_examples() {
        let d = likes(&[("u1", "a", 10), ("u2", "a", 5), ("u2", "b", 5), ("u3", "b", 9), ("u4", "c", 20)]);
        let p = user_polarization(&d, ActionKind::Like, &sides(), 10).unwrap();
        let got: Vec<(&str, f64)> = p.iter().map(|p| (&*p.user, p.rho)).collect();
        assert_eq!(got, vec![("u1", 1.0), ("u2", 0.0)]);
        assert!(user_polarization(&d, ActionKind::Like, &SideMap::new(), 10).is_err());
    }

    #[test]
    fn side_swap_negates() {
        let d = likes(&[("u1", "a", 7), ("u1", "b", 4), ("u2", "b", 12), ("u2", "a", 1)]);
        let swapped: SideMap = sides().into_iter().map(|(k, v)| (k, v.other())).collect();
        let p = user_polarization(&d, ActionKind::Like, &sides(), 1).unwrap();
        let q = user_polarization(&d, ActionKind::Like, &swapped, 1).unwrap();
        for (a, b) in p.iter().zip(&q) {
            assert_eq!(a.rho, -b.rho);
        }
    }

    #[test]
    fn histogram_examples() {
        let prof = |rhos: &[(u64, u64)]| -> Vec<PolarizationProfile> {
            rhos.iter().map(|&(x, y)| PolarizationProfile::new("u".into(), x, y)).collect()
        };
        let h = polarization_histogram(&prof(&[(0, 3), (2, 2), (5, 0)]), 3).unwrap();
        let w = 2.0 / 3.0;
        assert_eq!(h.counts, vec![1, 1, 1]);
        for d in &h.density {
            assert!((d - 1.0 / 3.0 / w).abs() < 1e-12);
        }
        let h = polarization_histogram(&prof(&[(4, 0), (9, 0)]), DEFAULT_BINS).unwrap();
        assert_eq!(h.counts[20], 2);
        assert!((h.density.iter().sum::<f64>() * h.bin_width() - 1.0).abs() < 1e-12);
        assert!(matches!(polarization_histogram(&prof(&[(1, 0)]), 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn detected_sides_takes_two_largest() {
        let p = Partition::new(
            ["a", "b", "c", "d", "e", "f"].iter().map(|s| Arc::from(*s)).collect(),
            vec![0, 0, 0, 1, 1, 2],
        )
        .unwrap();
        let m = detected_sides(&p).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m["a"], Side::Pro);
        assert_eq!(m["d"], Side::Anti);
        assert!(!m.contains_key("f"));
    }
}
