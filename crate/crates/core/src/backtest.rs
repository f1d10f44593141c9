//! Return panels, the rebalanced-portfolio log-wealth decomposition, and
//! rolling excess growth rates over non-overlapping windows.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::egr::gamma_unchecked;
use crate::error::{check_len, Error, Result};
use crate::simplex::Weights;

/// T periods of strictly positive gross returns on n assets.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    gross: Vec<Vec<f64>>,
    asset_names: Vec<String>,
    period_labels: Vec<String>,
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate {what} {l:?}")));
        }
    }
    Ok(())
}

impl ReturnsPanel {
    pub fn new(gross: Vec<Vec<f64>>, asset_names: Vec<String>, period_labels: Vec<String>) -> Result<Self> {
        let n = asset_names.len();
        if n == 0 {
            return Err(Error::InvalidArgument("a panel needs at least one asset".into()));
        }
        if gross.is_empty() {
            return Err(Error::InvalidArgument("a panel needs at least one period".into()));
        }
        check_len(gross.len(), period_labels.len())?;
        check_unique(&asset_names, "asset name")?;
        check_unique(&period_labels, "period label")?;
        for (t, row) in gross.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RaggedRows {
                    row: t + 1,
                    expected: n,
                    got: row.len(),
                });
            }
            for (i, &x) in row.iter().enumerate() {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(Error::NonPositiveReturn {
                        row: t + 1,
                        column: i + 1,
                        value: x,
                    });
                }
            }
        }
        Ok(ReturnsPanel {
            gross,
            asset_names,
            period_labels,
        })
    }

    /// Panel with default labels `a1..an` and `1..T`.
    pub fn from_gross(gross: Vec<Vec<f64>>) -> Result<Self> {
        let n = gross.first().map_or(0, |r| r.len());
        let names = (1..=n).map(|i| format!("a{i}")).collect();
        let labels = (1..=gross.len()).map(|t| t.to_string()).collect();
        Self::new(gross, names, labels)
    }

    pub fn from_log_returns(log: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_gross(log.into_iter().map(|r| r.into_iter().map(f64::exp).collect()).collect())
    }

    pub fn gross(&self) -> &[Vec<f64>] {
        &self.gross
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn period_labels(&self) -> &[String] {
        &self.period_labels
    }

    pub fn periods(&self) -> usize {
        self.gross.len()
    }

    pub fn assets(&self) -> usize {
        self.asset_names.len()
    }

    /// Each row t multiplied by `factors[t]`.
    pub fn rescale_rows(&self, factors: &[f64]) -> Result<Self> {
        check_len(self.periods(), factors.len())?;
        let gross = self
            .gross
            .iter()
            .zip(factors)
            .map(|(row, a)| row.iter().map(|x| a * x).collect())
            .collect();
        Self::new(gross, self.asset_names.clone(), self.period_labels.clone())
    }

    fn log_row(&self, t: usize) -> Vec<f64> {
        self.gross[t].iter().map(|x| x.ln()).collect()
    }
}

/// How cell values in a panel file are interpreted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PanelFormat {
    /// Cells hold log returns rather than gross returns.
    pub log_returns: bool,
}

/// Reads `period,<asset1>,...,<assetN>` CSV. Row and column numbers in
/// errors are 1-based and count data rows and asset columns.
pub fn read_panel<R: Read>(reader: R, format: PanelFormat) -> Result<ReturnsPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header needs a period column and at least one asset".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if let Err(Error::InvalidArgument(m)) = check_unique(&names, "asset name") {
        return Err(Error::Parse { line: 1, message: m });
    }
    let n = names.len();
    let mut gross = Vec::new();
    let mut labels = Vec::new();
    for (idx, rec) in records.enumerate() {
        let row = idx + 1;
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.len() != n + 1 {
            return Err(Error::RaggedRows {
                row,
                expected: n + 1,
                got: rec.len(),
            });
        }
        labels.push(rec[0].to_string());
        let mut values = Vec::with_capacity(n);
        for (i, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|e| Error::Parse {
                line,
                message: format!("column {}: {field:?}: {e}", i + 1),
            })?;
            let g = if format.log_returns {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("column {}: log return {v} is not finite", i + 1),
                    });
                }
                v.exp()
            } else {
                v
            };
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::NonPositiveReturn {
                    row,
                    column: i + 1,
                    value: v,
                });
            }
            values.push(g);
        }
        gross.push(values);
    }
    if gross.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "no data rows after the header".into(),
        });
    }
    if let Err(Error::InvalidArgument(m)) = check_unique(&labels, "period label") {
        return Err(Error::Parse { line: 0, message: m });
    }
    ReturnsPanel::new(gross, names, labels)
}

pub fn load_panel(path: &Path, format: PanelFormat) -> Result<ReturnsPanel> {
    let file = std::fs::File::open(path)?;
    read_panel(std::io::BufReader::new(file), format)
}

/// Log wealth of a constant-rebalanced portfolio split into its weighted
/// average log return and the accumulated excess growth rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub total_log_return: f64,
    pub weighted_avg_log_return: f64,
    pub cumulative_egr: f64,
    pub per_period_egr: Vec<f64>,
}

impl DecompositionReport {
    /// total − (weighted average + cumulative EGR).
    pub fn residual(&self) -> f64 {
        self.total_log_return - (self.weighted_avg_log_return + self.cumulative_egr)
    }
}

pub fn rebalanced_decomposition(pi: &Weights, panel: &ReturnsPanel) -> Result<DecompositionReport> {
    check_len(panel.assets(), pi.len())?;
    let mut total = 0.0;
    let mut per_period = Vec::with_capacity(panel.periods());
    let mut sum_logs = vec![0.0; pi.len()];
    for t in 0..panel.periods() {
        let row = &panel.gross[t];
        total += pi.iter().zip(row).map(|(p, r)| p * r).sum::<f64>().ln();
        let logs = panel.log_row(t);
        for (acc, l) in sum_logs.iter_mut().zip(&logs) {
            *acc += l;
        }
        per_period.push(gamma_unchecked(pi, &logs));
    }
    let weighted_avg = pi
        .iter()
        .zip(&sum_logs)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, l)| p * l)
        .sum();
    Ok(DecompositionReport {
        total_log_return: total,
        weighted_avg_log_return: weighted_avg,
        cumulative_egr: per_period.iter().sum(),
        per_period_egr: per_period,
    })
}

/// Portfolio used inside each rolling window.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Equal weights on the k assets with the largest relative price at the
    /// window start; ties go to the lower index.
    EqualOnTopK(usize),
    Fixed(Weights),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEgr {
    /// 0-based first and last period of the window.
    pub start: usize,
    pub end: usize,
    pub start_label: String,
    pub end_label: String,
    pub egr: f64,
    pub cumulative_egr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingEgr {
    pub windows: Vec<WindowEgr>,
}

impl RollingEgr {
    pub fn per_window(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.egr).collect()
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.cumulative_egr).collect()
    }

    /// `window_start,window_end,egr,cumulative_egr`, one row per window,
    /// labelled by period labels.
    pub fn write_csv<W: Write>(&self, out: W, fmt_num: impl Fn(f64) -> String) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["window_start", "window_end", "egr", "cumulative_egr"])
            .map_err(io)?;
        for win in &self.windows {
            w.write_record([
                win.start_label.clone(),
                win.end_label.clone(),
                fmt_num(win.egr),
                fmt_num(win.cumulative_egr),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn top_k(log_price: &[f64], k: usize) -> Weights {
    let mut idx: Vec<usize> = (0..log_price.len()).collect();
    idx.sort_by(|&a, &b| log_price[b].total_cmp(&log_price[a]).then(a.cmp(&b)));
    let mut w = vec![0.0; log_price.len()];
    for &i in &idx[..k] {
        w[i] = 1.0 / k as f64;
    }
    crate::simplex::normalize(&w).expect("k >= 1")
}

/// Excess growth rate of compounded returns over consecutive
/// non-overlapping windows; a trailing partial window is dropped.
pub fn rolling_egr(panel: &ReturnsPanel, window: usize, weighting: &Weighting) -> Result<RollingEgr> {
    let (t_len, n) = (panel.periods(), panel.assets());
    if window == 0 || window > t_len {
        return Err(Error::DomainViolation(format!(
            "window {window} must lie in 1..={t_len}"
        )));
    }
    match weighting {
        Weighting::EqualOnTopK(k) if *k == 0 || *k > n => {
            return Err(Error::DomainViolation(format!("top-k needs 1 <= k <= {n}, got {k}")));
        }
        Weighting::Fixed(pi) => check_len(n, pi.len())?,
        _ => {}
    }
    let count = t_len / window;
    // log relative price at each window start
    let mut starts = Vec::with_capacity(count);
    let mut acc = vec![0.0; n];
    let mut sums = Vec::with_capacity(count);
    for w in 0..count {
        starts.push(acc.clone());
        let mut s = vec![0.0; n];
        for t in w * window..(w + 1) * window {
            for (si, l) in s.iter_mut().zip(panel.log_row(t)) {
                *si += l;
            }
        }
        for (a, si) in acc.iter_mut().zip(&s) {
            *a += si;
        }
        sums.push(s);
    }
    let egrs: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|w| {
            let pi = match weighting {
                Weighting::EqualOnTopK(k) => top_k(&starts[w], *k),
                Weighting::Fixed(pi) => pi.clone(),
            };
            gamma_unchecked(&pi, &sums[w])
        })
        .collect();
    let mut cum = 0.0;
    let windows = egrs
        .into_iter()
        .enumerate()
        .map(|(w, egr)| {
            cum += egr;
            let (start, end) = (w * window, (w + 1) * window - 1);
            WindowEgr {
                start,
                end,
                start_label: panel.period_labels[start].clone(),
                end_label: panel.period_labels[end].clone(),
                egr,
                cumulative_egr: cum,
            }
        })
        .collect();
    Ok(RollingEgr { windows })
}

/// One volatility regime of a synthetic panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub periods: usize,
    pub volatility: f64,
}

/// Panel of i.i.d. normal log returns with mean `drift` and a per-regime
/// standard deviation, regimes laid out back to back.
pub fn synthetic_regime_panel(assets: usize, regimes: &[Regime], drift: f64, seed: u64) -> Result<ReturnsPanel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for reg in regimes {
        let dist = Normal::new(drift, reg.volatility)
            .map_err(|e| Error::InvalidArgument(format!("volatility {}: {e}", reg.volatility)))?;
        for _ in 0..reg.periods {
            rows.push((0..assets).map(|_| dist.sample(&mut rng)).collect());
        }
    }
    ReturnsPanel::from_log_returns(rows)
}
