//! Pairwise return and jump correlations, cross-coefficient summaries and
//! division reports.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geography::DivisionMap;
use crate::jumps::JumpSeries;
use crate::stats::{mean, pearson, sample_sd};
use crate::timeseries::{Msa, MsaSeries, ReturnPanel};

pub const DEFAULT_MIN_OVERLAP: usize = 8;
pub const DEFAULT_JUMP_MIN_QUARTERS: usize = 4;
pub const DEFAULT_SIGNIFICANCE_T: f64 = 5.0;

#[derive(Debug, Error)]
pub enum CorrelationError {
    #[error("pair set is empty")]
    Empty,

    #[error("MSA {msa} has state '{state}' with no division")]
    UnmappedState { msa: String, state: String },

    #[error("unknown MSA '{0}' in pair set")]
    UnknownMsa(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Return,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timing {
    Contemporaneous,
    /// Series `i` at `t` against series `j` at `t + 1`.
    Lead,
}

impl std::fmt::Display for PairKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairKind::Return => "return",
            PairKind::Jump => "jump",
        })
    }
}

impl std::fmt::Display for Timing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Timing::Contemporaneous => "contemporaneous",
            Timing::Lead => "lead",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelation {
    pub msa_i: String,
    pub msa_j: String,
    pub kind: PairKind,
    pub timing: Timing,
    pub r: f64,
    pub n_effective: usize,
    pub t_stat: f64,
}

/// `r √(n−2) / √(1−r²)`; ±∞ at |r| = 1, NaN below three observations.
pub fn pair_t_stat(r: f64, n: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    let denom = (1.0 - r * r).max(0.0).sqrt();
    if denom == 0.0 {
        return if r > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    r * ((n - 2) as f64).sqrt() / denom
}

/// Index pairs in lexicographic order: `i < j` for contemporaneous, all
/// ordered pairs (self included) for lead.
fn pair_grid(n: usize, timing: Timing) -> Vec<(usize, usize)> {
    match timing {
        Timing::Contemporaneous => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        Timing::Lead => (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect(),
    }
}

/// Overlapping slices of `a` at `t` and `b` at `t + shift`.
fn overlap<'a>(a: &'a MsaSeries, b: &'a MsaSeries, shift: i64) -> (&'a [f64], &'a [f64]) {
    let a0 = a.series.start.ordinal();
    let b0 = b.series.start.ordinal() - shift;
    let lo = a0.max(b0);
    let hi = (a0 + a.series.len() as i64).min(b0 + b.series.len() as i64);
    if hi <= lo {
        return (&[], &[]);
    }
    let ai = (lo - a0) as usize;
    let bi = (lo - b0) as usize;
    let len = (hi - lo) as usize;
    (&a.series.values[ai..ai + len], &b.series.values[bi..bi + len])
}

/// Pearson correlations of returns over every pair with at least
/// `min_overlap` common quarters.
pub fn return_pair_correlations(panel: &ReturnPanel, timing: Timing, min_overlap: usize) -> Vec<PairCorrelation> {
    let m = panel.members();
    let shift = if timing == Timing::Lead { 1 } else { 0 };
    pair_grid(m.len(), timing)
        .into_par_iter()
        .filter_map(|(i, j)| {
            let (x, y) = overlap(&m[i], &m[j], shift);
            if x.len() < min_overlap.max(2) {
                log::debug!("pair {}/{} omitted: overlap {}", m[i].msa.id, m[j].msa.id, x.len());
                return None;
            }
            let Some(r) = pearson(x, y) else {
                log::debug!("pair {}/{} omitted: zero variance", m[i].msa.id, m[j].msa.id);
                return None;
            };
            Some(PairCorrelation {
                msa_i: m[i].msa.id.clone(),
                msa_j: m[j].msa.id.clone(),
                kind: PairKind::Return,
                timing,
                r,
                n_effective: x.len(),
                t_stat: pair_t_stat(r, x.len()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpPairConfig {
    /// Minimum quarters in the restricted set for a pair to be reported.
    pub min_quarters: usize,
    /// Pearson over the restricted set instead of the uncentered product rule.
    pub centered: bool,
}

impl Default for JumpPairConfig {
    fn default() -> Self {
        Self {
            min_quarters: DEFAULT_JUMP_MIN_QUARTERS,
            centered: false,
        }
    }
}

/// Jump correlation of two masked series over quarters where either is
/// nonzero and both are testable.
pub fn jump_pair(a: &JumpSeries, b: &JumpSeries, timing: Timing, config: &JumpPairConfig) -> Option<(f64, usize)> {
    let shift = if timing == Timing::Lead { 1 } else { 0 };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, q) in a.quarters.iter().enumerate() {
        let Some(j) = b.index_of(q.offset(shift)) else { continue };
        let (Some(x), Some(y)) = (a.masked(i), b.masked(j)) else { continue };
        if x != 0.0 || y != 0.0 {
            xs.push(x);
            ys.push(y);
        }
    }
    let n = xs.len();
    if n < config.min_quarters.max(1) {
        return None;
    }
    let r = if config.centered {
        pearson(&xs, &ys)?
    } else {
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let syy: f64 = ys.iter().map(|v| v * v).sum();
        if sxx <= 0.0 || syy <= 0.0 {
            return None;
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
    };
    Some((r, n))
}

/// Jump correlations over the same pair grid as returns.
pub fn jump_pair_correlations(series: &[JumpSeries], timing: Timing, config: &JumpPairConfig) -> Vec<PairCorrelation> {
    pair_grid(series.len(), timing)
        .into_par_iter()
        .filter_map(|(i, j)| {
            let Some((r, n)) = jump_pair(&series[i], &series[j], timing, config) else {
                log::debug!("jump pair {}/{} omitted: degenerate restricted set", series[i].msa_id, series[j].msa_id);
                return None;
            };
            Some(PairCorrelation {
                msa_i: series[i].msa_id.clone(),
                msa_j: series[j].msa_id.clone(),
                kind: PairKind::Jump,
                timing,
                r,
                n_effective: n,
                t_stat: pair_t_stat(r, n),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    /// Per-pair t cutoff (`None` = all pairs).
    pub threshold: Option<f64>,
    pub n: usize,
    pub mean: Option<f64>,
    pub sigma: Option<f64>,
    /// `mean / (sigma / √N)`; `None` when sigma is zero or undefined.
    pub t_stat: Option<f64>,
    pub max: Option<f64>,
    pub min: Option<f64>,
}

/// Cross-coefficient independence T statistic.
pub fn cross_coefficient_t(mean: f64, sigma: f64, n: usize) -> Option<f64> {
    (sigma > 0.0 && n > 0).then(|| mean / (sigma / (n as f64).sqrt()))
}

pub const DEFAULT_THRESHOLDS: [Option<f64>; 3] = [None, Some(2.0), Some(3.0)];

/// Summaries of `pairs` filtered by `t_stat > threshold` for each threshold.
pub fn correlation_summary(pairs: &[PairCorrelation], thresholds: &[Option<f64>]) -> Result<Vec<CorrelationSummary>, CorrelationError> {
    if pairs.is_empty() {
        return Err(CorrelationError::Empty);
    }
    Ok(thresholds
        .iter()
        .map(|&th| {
            let rs: Vec<f64> = pairs
                .iter()
                .filter(|p| th.is_none_or(|t| p.t_stat > t))
                .map(|p| p.r)
                .collect();
            summarize(th, &rs)
        })
        .collect())
}

fn summarize(threshold: Option<f64>, rs: &[f64]) -> CorrelationSummary {
    let n = rs.len();
    if n == 0 {
        return CorrelationSummary {
            threshold,
            n,
            mean: None,
            sigma: None,
            t_stat: None,
            max: None,
            min: None,
        };
    }
    let m = mean(rs);
    let sigma = if n == 1 { Some(0.0) } else { sample_sd(rs) };
    CorrelationSummary {
        threshold,
        n,
        mean: Some(m),
        sigma,
        t_stat: sigma.and_then(|s| cross_coefficient_t(m, s, n)),
        max: rs.iter().copied().reduce(f64::max),
        min: rs.iter().copied().reduce(f64::min),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionRow {
    pub division: String,
    pub kind: PairKind,
    pub timing: Timing,
    pub n: usize,
    pub n_significant: usize,
    /// `None` when `n = 0`.
    pub pct_significant: Option<f64>,
    pub mean: Option<f64>,
}

/// Division of every MSA; errors on an unmapped state.
pub fn assign_divisions<'a>(
    msas: impl IntoIterator<Item = &'a Msa>,
    map: &DivisionMap,
) -> Result<BTreeMap<String, String>, CorrelationError> {
    msas.into_iter()
        .map(|m| {
            map.division_of(&m.state)
                .map(|d| (m.id.clone(), d.to_string()))
                .ok_or_else(|| CorrelationError::UnmappedState {
                    msa: m.id.clone(),
                    state: m.state.clone(),
                })
        })
        .collect()
}

/// Within-division counts, significance share (`t > sig_t`) and mean r for
/// each kind and timing present in `pairs`.
pub fn cohort_correlation_report(
    pairs: &[PairCorrelation],
    divisions: &BTreeMap<String, String>,
    map: &DivisionMap,
    sig_t: f64,
) -> Result<Vec<DivisionRow>, CorrelationError> {
    let mut groups: BTreeMap<(String, PairKind, Timing), Vec<&PairCorrelation>> = BTreeMap::new();
    for p in pairs {
        let di = divisions.get(&p.msa_i).ok_or_else(|| CorrelationError::UnknownMsa(p.msa_i.clone()))?;
        let dj = divisions.get(&p.msa_j).ok_or_else(|| CorrelationError::UnknownMsa(p.msa_j.clone()))?;
        if di == dj {
            groups.entry((di.clone(), p.kind, p.timing)).or_default().push(p);
        }
    }
    let mut combos: Vec<(PairKind, Timing)> = pairs.iter().map(|p| (p.kind, p.timing)).collect();
    combos.sort();
    combos.dedup();
    let mut rows = Vec::new();
    for label in map.labels() {
        if !divisions.values().any(|d| *d == label) {
            continue;
        }
        for &(kind, timing) in &combos {
            let g = groups.get(&(label.clone(), kind, timing)).map(Vec::as_slice).unwrap_or(&[]);
            let n = g.len();
            let n_significant = g.iter().filter(|p| p.t_stat > sig_t).count();
            let rs: Vec<f64> = g.iter().map(|p| p.r).collect();
            rows.push(DivisionRow {
                division: label.clone(),
                kind,
                timing,
                n,
                n_significant,
                pct_significant: (n > 0).then(|| 100.0 * n_significant as f64 / n as f64),
                mean: (n > 0).then(|| mean(&rs)),
            });
        }
    }
    Ok(rows)
}
