//! Two-way fixed-effects ANOVA and MANOVA (Pillai's trace) for a 2×2
//! sentiment × epoch design.

use std::fmt;
use std::io::Write;

use statrs::function::beta::beta_reg;

use crate::calendar::Quarter;
use crate::error::{Error, Result};
use crate::ingest::Side;
use crate::temporal::series::{Measure, SeriesPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Epoch {
    Before,
    After,
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Epoch::Before => "before",
            Epoch::After => "after",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub sentiment: Side,
    pub epoch: Epoch,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub f: f64,
    pub df1: usize,
    pub df2: usize,
    pub p: f64,
    pub partial_eta2: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWayAnova {
    pub sentiment: AnovaResult,
    pub epoch: AnovaResult,
    pub interaction: AnovaResult,
    pub ss_sentiment: f64,
    pub ss_epoch: f64,
    pub ss_interaction: f64,
    pub ss_error: f64,
    pub ss_total: f64,
}

/// Upper-tail probability of the F distribution.
pub fn f_tail(f: f64, df1: usize, df2: usize) -> f64 {
    if f.is_nan() || f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let (a, b) = (df1 as f64, df2 as f64);
    beta_reg(b / 2.0, a / 2.0, b / (b + a * f)).clamp(0.0, 1.0)
}

fn cell(side: Side, epoch: Epoch) -> usize {
    (side as usize) * 2 + epoch as usize
}

fn cell_name(c: usize) -> String {
    let side = if c < 2 { Side::Pro } else { Side::Anti };
    let epoch = if c % 2 == 0 { Epoch::Before } else { Epoch::After };
    format!("{side}/{epoch}")
}

/// Solves `a·x = b` in place by Gaussian elimination with partial pivoting.
/// `None` if `a` is numerically singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let k = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= k * a[col][c];
            }
            b[r] -= k * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares residuals of `y` on the given columns.
fn residuals(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let xty: Vec<f64> = cols.iter().map(|c| c.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let beta = solve(xtx, xty).expect("effect-coded design with non-empty cells is full rank");
    y.iter()
        .enumerate()
        .map(|(i, yi)| yi - cols.iter().zip(&beta).map(|(c, b)| c[i] * b).sum::<f64>())
        .collect()
}

struct Design {
    n: usize,
    p: usize,
    cells: Vec<usize>,
    intercept: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Design {
    fn new(obs: &[Observation]) -> Result<Self> {
        let p = obs.first().map_or(0, |o| o.values.len());
        if p == 0 || obs.iter().any(|o| o.values.len() != p) {
            return Err(Error::Invalid("observations need the same non-zero number of values".into()));
        }
        let cells: Vec<usize> = obs.iter().map(|o| cell(o.sentiment, o.epoch)).collect();
        for c in 0..4 {
            if !cells.contains(&c) {
                return Err(Error::EmptyCell(cell_name(c)));
            }
        }
        let n = obs.len();
        if n < 4 + p {
            return Err(Error::Invalid(format!("{n} observations leave no error degrees of freedom")));
        }
        let sign = |b: bool| if b { 1.0 } else { -1.0 };
        Ok(Self {
            n,
            p,
            intercept: vec![1.0; n],
            a: obs.iter().map(|o| sign(o.sentiment == Side::Pro)).collect(),
            b: obs.iter().map(|o| sign(o.epoch == Epoch::Before)).collect(),
            cells,
        })
    }

    /// Residuals of the full (cell-means) model.
    fn within(&self, y: &[f64]) -> Vec<f64> {
        let mut sum = [0.0; 4];
        let mut cnt = [0.0; 4];
        for (&c, v) in self.cells.iter().zip(y) {
            sum[c] += v;
            cnt[c] += 1.0;
        }
        self.cells.iter().zip(y).map(|(&c, v)| v - sum[c] / cnt[c]).collect()
    }

    fn additive(&self) -> Vec<Vec<f64>> {
        vec![self.intercept.clone(), self.a.clone(), self.b.clone()]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn effect(ss: f64, ss_error: f64, df_error: usize, degenerate: bool) -> AnovaResult {
    if degenerate {
        return AnovaResult { f: 0.0, df1: 1, df2: df_error, p: 1.0, partial_eta2: 0.0, degenerate };
    }
    let f = if ss_error > 0.0 { ss / (ss_error / df_error as f64) } else { f64::INFINITY };
    AnovaResult {
        f,
        df1: 1,
        df2: df_error,
        p: f_tail(f, 1, df_error),
        partial_eta2: ss / (ss + ss_error),
        degenerate: false,
    }
}

/// Two-way ANOVA on the first value of every observation, with Type II sums
/// of squares (equal to Type I/III for balanced designs).
pub fn two_way_anova(obs: &[Observation]) -> Result<TwoWayAnova> {
    let design = Design::new(obs)?;
    let y: Vec<f64> = obs.iter().map(|o| o.values[0]).collect();
    let df_error = design.n - 4;
    if y.iter().all(|v| *v == y[0]) {
        let r = effect(0.0, 0.0, df_error, true);
        return Ok(TwoWayAnova {
            sentiment: r,
            epoch: r,
            interaction: r,
            ss_sentiment: 0.0,
            ss_epoch: 0.0,
            ss_interaction: 0.0,
            ss_error: 0.0,
            ss_total: 0.0,
        });
    }
    let rss = |cols: Vec<Vec<f64>>| -> f64 {
        let r = residuals(&cols, &y);
        dot(&r, &r)
    };
    let one = design.intercept.clone();
    let rss_a = rss(vec![one.clone(), design.a.clone()]);
    let rss_b = rss(vec![one.clone(), design.b.clone()]);
    let rss_ab = rss(design.additive());
    let within = design.within(&y);
    let ss_error = dot(&within, &within);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_total = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_sentiment = (rss_b - rss_ab).max(0.0);
    let ss_epoch = (rss_a - rss_ab).max(0.0);
    let ss_interaction = (rss_ab - ss_error).max(0.0);
    Ok(TwoWayAnova {
        sentiment: effect(ss_sentiment, ss_error, df_error, false),
        epoch: effect(ss_epoch, ss_error, df_error, false),
        interaction: effect(ss_interaction, ss_error, df_error, false),
        ss_sentiment,
        ss_epoch,
        ss_interaction,
        ss_error,
        ss_total,
    })
}

fn sscp(res: &[Vec<f64>]) -> Vec<Vec<f64>> {
    res.iter().map(|a| res.iter().map(|b| dot(a, b)).collect()).collect()
}

/// Pillai's trace for the sentiment × epoch interaction with every value of
/// an observation as a dependent variable. `V = tr(H (H+E)⁻¹)` where E is the
/// within-cell SSCP matrix and H the extra SSCP left by the additive model.
/// The hypothesis has one degree of freedom, so the F approximation is exact:
/// `F = (df_e − p + 1)/p · V/(1 − V)` on `(p, df_e − p + 1)`.
pub fn manova_pillai(obs: &[Observation]) -> Result<AnovaResult> {
    let design = Design::new(obs)?;
    let p = design.p;
    let df_error = design.n - 4;
    let df1 = p;
    let df2 = df_error - p + 1;
    let ys: Vec<Vec<f64>> = (0..p).map(|k| obs.iter().map(|o| o.values[k]).collect()).collect();
    if ys.iter().all(|y| y.iter().all(|v| *v == y[0])) {
        return Ok(AnovaResult { f: 0.0, df1, df2, p: 1.0, partial_eta2: 0.0, degenerate: true });
    }
    let e = sscp(&ys.iter().map(|y| design.within(y)).collect::<Vec<_>>());
    let cols = design.additive();
    let t = sscp(&ys.iter().map(|y| residuals(&cols, y)).collect::<Vec<_>>());
    // E must be invertible for the trace to mean anything
    let scale = (0..p).map(|i| e[i][i]).fold(0.0f64, f64::max);
    if scale == 0.0 || solve(e.clone(), vec![0.0; p]).is_none() {
        return Err(Error::SingularError);
    }
    // tr(H T⁻¹) = Σ_k (T⁻¹ H)_kk, one solve per column of H
    let mut v = 0.0;
    for k in 0..p {
        let h_col: Vec<f64> = (0..p).map(|i| t[i][k] - e[i][k]).collect();
        let x = solve(t.clone(), h_col).ok_or(Error::SingularError)?;
        v += x[k];
    }
    let v = v.clamp(0.0, 1.0);
    let f = if v < 1.0 { df2 as f64 / df1 as f64 * v / (1.0 - v) } else { f64::INFINITY };
    Ok(AnovaResult { f, df1, df2, p: f_tail(f, df1, df2), partial_eta2: v, degenerate: false })
}

/// One observation per (quarter, community) holding the given measures;
/// quarters up to and including `split` are `Before`.
pub fn observations(series: &[SeriesPoint], measures: &[Measure], split: Quarter) -> Vec<Observation> {
    let mut out: Vec<Observation> = Vec::new();
    let mut keys: Vec<(Quarter, Side)> = series.iter().map(|p| (p.quarter, p.community)).collect();
    keys.sort();
    keys.dedup();
    for (q, side) in keys {
        let values = measures
            .iter()
            .map(|&m| {
                series
                    .iter()
                    .find(|p| p.quarter == q && p.community == side && p.measure == m)
                    .map_or(0.0, |p| p.count as f64)
            })
            .collect();
        let epoch = if q <= split { Epoch::Before } else { Epoch::After };
        out.push(Observation { sentiment: side, epoch, values });
    }
    out
}

/// A named interaction test over series measures.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochTest {
    pub measures: Vec<Measure>,
    pub split: Quarter,
}

impl EpochTest {
    /// The three default analyses: posts and likes split after 2012Q4,
    /// comments after 2014Q4, commenting and liking users after 2015Q4.
    pub fn defaults() -> Vec<EpochTest> {
        let q = |y| Quarter::new(y, 4).expect("valid quarter");
        vec![
            EpochTest { measures: vec![Measure::ActivePagesPost, Measure::ActivePagesLike], split: q(2012) },
            EpochTest { measures: vec![Measure::ActivePagesComment], split: q(2014) },
            EpochTest { measures: vec![Measure::ActiveUsersComment, Measure::ActiveUsersLike], split: q(2015) },
        ]
    }

    /// ANOVA for one measure, Pillai MANOVA otherwise.
    pub fn run(&self, series: &[SeriesPoint]) -> Result<AnovaResult> {
        let obs = observations(series, &self.measures, self.split);
        if self.measures.len() == 1 {
            Ok(two_way_anova(&obs)?.interaction)
        } else {
            manova_pillai(&obs)
        }
    }
}

pub fn write_tests<W: Write>(rows: &[(EpochTest, AnovaResult)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["test", "dv", "split", "F", "df1", "df2", "p", "partial_eta2", "degenerate"])?;
    for (t, r) in rows {
        let dv: Vec<&str> = t.measures.iter().map(|m| m.as_str()).collect();
        w.write_record([
            if t.measures.len() == 1 { "anova" } else { "manova_pillai" }.to_string(),
            dv.join("+"),
            t.split.to_string(),
            format!("{:.9}", r.f),
            r.df1.to_string(),
            r.df2.to_string(),
            format!("{:.9}", r.p),
            format!("{:.9}", r.partial_eta2),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
