//! Local linear regression with tricube weights and pointwise 95% bands.

use rayon::prelude::*;

use crate::error::{Error, Result};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoessPoint {
    pub x: f64,
    pub fit: f64,
    pub lo95: f64,
    pub hi95: f64,
    /// The local design was degenerate and a local constant was fitted.
    pub degenerate: bool,
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

/// Smoother weights `l` with `fit(x0) = Σ l_i y_i`, over the `q` nearest
/// neighbours of `x0`.
fn smoother_row(x: &[f64], x0: f64, q: usize, dist: &mut Vec<f64>) -> (Vec<f64>, bool) {
    dist.clear();
    dist.extend(x.iter().map(|xi| (xi - x0).abs()));
    let (_, h, _) = dist.select_nth_unstable_by(q - 1, f64::total_cmp);
    let h = *h;
    let w: Vec<f64> = x
        .iter()
        .map(|xi| {
            let d = (xi - x0).abs();
            if h > 0.0 {
                tricube(d / h)
            } else if d == 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let dx = xi - x0;
        s0 += wi;
        s1 += wi * dx;
        s2 += wi * dx * dx;
    }
    let det = s0 * s2 - s1 * s1;
    if det > 1e-10 * s0 * s2 {
        let l = x.iter().zip(&w).map(|(xi, wi)| wi * (s2 - (xi - x0) * s1) / det).collect();
        (l, false)
    } else {
        (w.iter().map(|wi| wi / s0).collect(), true)
    }
}

/// LOESS fit at `eval` points. `span` is the fraction of points in each
/// local neighbourhood. The band is `fit ± 1.96·σ̂·‖l(x0)‖`, with σ̂² the
/// residual sum of squares over the trace-corrected degrees of freedom
/// `δ1 = tr((I−L)ᵀ(I−L))`.
pub fn loess_fit(x: &[f64], y: &[f64], span: f64, eval: &[f64]) -> Result<Vec<LoessPoint>> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Parameter(format!("x has {n} values, y has {}", y.len())));
    }
    if n < 3 {
        return Err(Error::Parameter("loess needs at least 3 points".into()));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::Parameter(format!("span must lie in (0, 1], got {span}")));
    }
    let q = (span * n as f64).floor() as usize;
    if q < 2 {
        return Err(Error::Parameter(format!("span {span} covers fewer than 2 of {n} points")));
    }
    if x.iter().chain(y).chain(eval).any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite input".into()));
    }

    // residuals and δ1 from the operator rows at the data points
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |dist, i| {
            let (l, _) = smoother_row(x, x[i], q, dist);
            let fit: f64 = l.iter().zip(y).map(|(a, b)| a * b).sum();
            let norm2: f64 = l.iter().map(|v| v * v).sum();
            let r = y[i] - fit;
            (r * r, 1.0 - 2.0 * l[i] + norm2)
        })
        .collect();
    let rss: f64 = rows.iter().map(|r| r.0).sum();
    let delta1: f64 = rows.iter().map(|r| r.1).sum();
    let sigma = if delta1 > 0.0 { (rss / delta1).sqrt() } else { 0.0 };

    let mut dist = Vec::new();
    Ok(eval
        .iter()
        .map(|&x0| {
            let (l, degenerate) = smoother_row(x, x0, q, &mut dist);
            let fit: f64 = l.iter().zip(y).map(|(a, b)| a * b).sum();
            let se = sigma * l.iter().map(|v| v * v).sum::<f64>().sqrt();
            LoessPoint { x: x0, fit, lo95: fit - Z95 * se, hi95: fit + Z95 * se, degenerate }
        })
        .collect())
}
