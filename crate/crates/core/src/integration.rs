//! Rolling-window factor model: integration R² and factor-beta series,
//! cross-MSA summary tables and cohort averages.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::regress::{ar1_prewhiten, ols_fit, trend_fit, Design, RegressError, INTERCEPT};
use crate::stats::{mean, sample_sd};
use crate::timeseries::{align, AlignedDataset, FactorTable, Msa, MsaSeries, Quarter, QuarterSeries, ReturnPanel, TimeseriesError};

pub const DEFAULT_WINDOW: usize = 20;

#[derive(Debug, Error)]
pub enum IntegrationError {
    #[error("window {window} too short for {regressors} regressors; need at least {minimum}")]
    WindowTooShort {
        window: usize,
        regressors: usize,
        minimum: usize,
    },

    #[error("MSA {msa}: {rows} aligned rows, window needs {window}")]
    InsufficientData { msa: String, rows: usize, window: usize },

    #[error("cohort has no members")]
    EmptyCohort,

    #[error("MSA {msa} has no value at cohort start {start}")]
    MissingAtStart { msa: String, start: Quarter },

    #[error("unknown factor '{0}'")]
    UnknownFactor(String),

    #[error("no MSA has a complete integration series")]
    NoSeries,

    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),

    #[error(transparent)]
    Regress(#[from] RegressError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntegrationConfig {
    pub window: usize,
    /// Run the factor model on AR(1)-pre-whitened returns.
    pub prewhiten: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            prewhiten: true,
        }
    }
}

/// Rolling R² and coefficients, stamped at each window's last quarter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationSeries {
    pub msa_id: String,
    pub window: usize,
    /// Coefficient names: intercept first, then factors.
    pub coefficient_names: Vec<String>,
    pub quarters: Vec<Quarter>,
    pub r_square: Vec<f64>,
    /// `betas[w][j]` for window `w`, coefficient `j`.
    pub betas: Vec<Vec<f64>>,
    /// Windows that could not be fitted, with the reason.
    pub skipped: Vec<(Quarter, String)>,
    /// Lag order chosen by pre-whitening, if applied.
    pub prewhiten_lag: Option<u8>,
}

impl IntegrationSeries {
    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn r_square_at(&self, q: Quarter) -> Option<f64> {
        self.quarters.binary_search(&q).ok().map(|i| self.r_square[i])
    }

    pub fn beta_at(&self, q: Quarter, coefficient: usize) -> Option<f64> {
        self.quarters.binary_search(&q).ok().map(|i| self.betas[i][coefficient])
    }

    pub fn coefficient_index(&self, name: &str) -> Option<usize> {
        self.coefficient_names.iter().position(|n| n == name)
    }
}

/// Fits the factor model on every window of `window` consecutive rows.
pub fn rolling_factor_model(data: &AlignedDataset, window: usize) -> Result<IntegrationSeries, IntegrationError> {
    let regressors = data.factor_ids.len() + 1;
    let minimum = regressors + 2;
    if window < minimum {
        return Err(IntegrationError::WindowTooShort {
            window,
            regressors,
            minimum,
        });
    }
    if data.n_rows() < window {
        return Err(IntegrationError::InsufficientData {
            msa: data.msa_id.clone(),
            rows: data.n_rows(),
            window,
        });
    }
    let mut coefficient_names = vec![INTERCEPT.to_string()];
    coefficient_names.extend(data.factor_ids.iter().cloned());
    let mut out = IntegrationSeries {
        msa_id: data.msa_id.clone(),
        window,
        coefficient_names,
        quarters: Vec::new(),
        r_square: Vec::new(),
        betas: Vec::new(),
        skipped: Vec::new(),
        prewhiten_lag: None,
    };
    for start in 0..=data.n_rows() - window {
        let end = start + window - 1;
        let stamp = data.quarters[end];
        if data.quarters[start].quarters_until(stamp) != (window - 1) as i64 {
            out.skipped.push((stamp, "window spans a gap in quarters".into()));
            continue;
        }
        let cols = data
            .factor_ids
            .iter()
            .zip(&data.factors)
            .map(|(id, col)| (id.clone(), col[start..=end].to_vec()));
        let design = Design::with_intercept(cols, window)?;
        match ols_fit(&design, &data.response[start..=end]) {
            Ok(fit) => {
                out.quarters.push(stamp);
                out.r_square.push(fit.r_square);
                out.betas.push(fit.coefficients);
            }
            Err(e @ RegressError::Singular { .. }) => {
                log::warn!("MSA {}: window ending {stamp} skipped: {e}", data.msa_id);
                out.skipped.push((stamp, e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Pre-whitens (optionally), aligns against the factors and runs the
/// rolling model for one MSA.
pub fn integrate_msa(
    returns: &MsaSeries,
    factors: &FactorTable,
    config: &IntegrationConfig,
) -> Result<IntegrationSeries, IntegrationError> {
    let (response, lag) = if config.prewhiten {
        let pw = ar1_prewhiten(&returns.series.values)?;
        if pw.near_unit_root {
            log::warn!("MSA {}: AR(1) coefficient {} is at or beyond a unit root", returns.msa.id, pw.phi);
        }
        (
            QuarterSeries::new(returns.series.start.offset(pw.offset as i64), pw.residuals),
            Some(pw.lag_order),
        )
    } else {
        (returns.series.clone(), None)
    };
    let data = align(&returns.msa.id, &response, factors)?;
    let mut series = rolling_factor_model(&data, config.window)?;
    series.prewhiten_lag = lag;
    Ok(series)
}

/// An MSA left out of an aggregate, and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub msa_id: String,
    pub reason: String,
}

/// Runs [`integrate_msa`] for every MSA in parallel. Output order follows the
/// panel; failures become exclusions.
pub fn integrate_panel(
    panel: &ReturnPanel,
    factors: &FactorTable,
    config: &IntegrationConfig,
) -> Result<(Vec<IntegrationSeries>, Vec<Exclusion>), IntegrationError> {
    let regressors = factors.n_factors() + 1;
    if config.window < regressors + 2 {
        return Err(IntegrationError::WindowTooShort {
            window: config.window,
            regressors,
            minimum: regressors + 2,
        });
    }
    let results: Vec<_> = panel
        .members()
        .par_iter()
        .map(|m| integrate_msa(m, factors, config))
        .collect();
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    for (m, r) in panel.members().iter().zip(results) {
        match r {
            Ok(s) => series.push(s),
            Err(e) => {
                log::info!("MSA {} excluded from integration: {e}", m.msa.id);
                excluded.push(Exclusion {
                    msa_id: m.msa.id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((series, excluded))
}

/// How the change in R² picks its starting value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "quarter")]
pub enum ChangeBase {
    /// Each MSA's own first window.
    #[default]
    OwnFirst,
    /// A fixed quarter; MSAs without a window there get no change value.
    Fixed(Quarter),
}

/// Per-MSA integration characteristics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsaCharacteristics {
    pub msa: Msa,
    /// Mean quarterly return (percent).
    pub mean: f64,
    /// Sample standard deviation of quarterly returns.
    pub sigma: f64,
    pub final_r_square: f64,
    pub change_r_square: Option<f64>,
    pub trend_t_stat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Mean,
    Sigma,
    FinalRSquare,
    ChangeRSquare,
    TrendTStat,
}

impl Characteristic {
    pub const ALL: [Characteristic; 5] = [
        Characteristic::Mean,
        Characteristic::Sigma,
        Characteristic::FinalRSquare,
        Characteristic::ChangeRSquare,
        Characteristic::TrendTStat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Mean => "mean",
            Characteristic::Sigma => "sigma",
            Characteristic::FinalRSquare => "final_r_square",
            Characteristic::ChangeRSquare => "change_r_square",
            Characteristic::TrendTStat => "trend_t_stat",
        }
    }

    pub fn of(self, c: &MsaCharacteristics) -> Option<f64> {
        let v = match self {
            Characteristic::Mean => Some(c.mean),
            Characteristic::Sigma => Some(c.sigma),
            Characteristic::FinalRSquare => Some(c.final_r_square),
            Characteristic::ChangeRSquare => c.change_r_square,
            Characteristic::TrendTStat => Some(c.trend_t_stat),
        };
        v.filter(|x| x.is_finite())
    }
}

/// Cross-sectional statistics of one characteristic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection {
    pub n: usize,
    pub mean: f64,
    pub std_dev: Option<f64>,
    pub min: f64,
    /// Minimum of each rank quintile; `quintile_minima[0]` equals `min`.
    pub quintile_minima: [f64; 5],
    pub max: f64,
    /// Rank (1 = lowest) per MSA, aligned with `IntegrationSummary::msas`.
    pub ranks: Vec<Option<usize>>,
    /// Quintile (1..=5) per MSA.
    pub quintiles: Vec<Option<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationSummary {
    pub msas: Vec<MsaCharacteristics>,
    /// One entry per [`Characteristic::ALL`].
    pub cross_sections: Vec<(Characteristic, CrossSection)>,
    pub excluded: Vec<Exclusion>,
}

impl IntegrationSummary {
    pub fn cross_section(&self, c: Characteristic) -> &CrossSection {
        &self
            .cross_sections
            .iter()
            .find(|(k, _)| *k == c)
            .expect("all characteristics present")
            .1
    }
}

/// Summary characteristics, ranks and quintiles for the MSAs in `series`.
pub fn integration_summary(
    series: &[IntegrationSeries],
    returns: &ReturnPanel,
    change_base: ChangeBase,
) -> Result<IntegrationSummary, IntegrationError> {
    let mut msas = Vec::new();
    let mut excluded = Vec::new();
    let mut ordered: Vec<&IntegrationSeries> = series.iter().collect();
    ordered.sort_by(|a, b| a.msa_id.cmp(&b.msa_id));
    for s in ordered {
        let Some(ret) = returns.get(&s.msa_id) else {
            excluded.push(Exclusion {
                msa_id: s.msa_id.clone(),
                reason: "no returns in panel".into(),
            });
            continue;
        };
        if s.len() < 3 {
            log::info!("MSA {} excluded from summary: {} windows", s.msa_id, s.len());
            excluded.push(Exclusion {
                msa_id: s.msa_id.clone(),
                reason: format!("only {} windows (need 3)", s.len()),
            });
            continue;
        }
        let trend = trend_fit(&s.r_square)?;
        let last = s.r_square[s.len() - 1];
        let change = match change_base {
            ChangeBase::OwnFirst => Some(last - s.r_square[0]),
            ChangeBase::Fixed(q) => s.r_square_at(q).map(|first| last - first),
        };
        msas.push(MsaCharacteristics {
            msa: ret.msa.clone(),
            mean: mean(&ret.series.values),
            sigma: sample_sd(&ret.series.values).unwrap_or(f64::NAN),
            final_r_square: last,
            change_r_square: change,
            trend_t_stat: trend.slope_t_stat,
        });
    }
    if msas.is_empty() {
        return Err(IntegrationError::NoSeries);
    }
    let cross_sections = Characteristic::ALL
        .iter()
        .map(|&c| (c, cross_section(&msas, c)))
        .collect();
    Ok(IntegrationSummary {
        msas,
        cross_sections,
        excluded,
    })
}

fn cross_section(msas: &[MsaCharacteristics], c: Characteristic) -> CrossSection {
    // msas are sorted by id, so a stable sort on value breaks ties by id
    let mut order: Vec<(usize, f64)> = msas
        .iter()
        .enumerate()
        .filter_map(|(i, m)| c.of(m).map(|v| (i, v)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let n = order.len();
    let mut ranks = vec![None; msas.len()];
    let mut quintiles = vec![None; msas.len()];
    let mut quintile_minima = [f64::NAN; 5];
    if n == 0 {
        return CrossSection {
            n,
            mean: f64::NAN,
            std_dev: None,
            min: f64::NAN,
            quintile_minima,
            max: f64::NAN,
            ranks,
            quintiles,
        };
    }
    let bucket = n.div_ceil(5);
    for (rank0, &(i, v)) in order.iter().enumerate() {
        ranks[i] = Some(rank0 + 1);
        let qn = (rank0 / bucket).min(4);
        quintiles[i] = Some(qn as u8 + 1);
        if rank0 % bucket == 0 && rank0 / bucket < 5 {
            quintile_minima[qn] = v;
        }
    }
    // empty trailing buckets inherit the previous minimum
    for qn in 1..5 {
        if quintile_minima[qn].is_nan() {
            quintile_minima[qn] = quintile_minima[qn - 1];
        }
    }
    let values: Vec<f64> = order.iter().map(|&(_, v)| v).collect();
    CrossSection {
        n,
        mean: mean(&values),
        std_dev: sample_sd(&values),
        min: values[0],
        quintile_minima,
        max: values[n - 1],
        ranks,
        quintiles,
    }
}

/// Per-quarter mean R² of `members` from `start`, over quarters where every
/// member reports.
pub fn cohort_average(members: &[&IntegrationSeries], start: Quarter) -> Result<Vec<(Quarter, f64)>, IntegrationError> {
    average_over(members, start, |s, i| s.r_square[i])
}

/// Per-quarter mean of one factor's coefficient across `members`.
pub fn beta_average(
    members: &[&IntegrationSeries],
    factor_id: &str,
    start: Quarter,
) -> Result<Vec<(Quarter, f64)>, IntegrationError> {
    let first = members.first().ok_or(IntegrationError::EmptyCohort)?;
    if factor_id.is_empty() {
        return Err(IntegrationError::UnknownFactor(factor_id.into()));
    }
    let idx = first
        .coefficient_index(factor_id)
        .ok_or_else(|| IntegrationError::UnknownFactor(factor_id.into()))?;
    if members.iter().any(|m| m.coefficient_names.get(idx).map(String::as_str) != Some(factor_id)) {
        return Err(IntegrationError::UnknownFactor(factor_id.into()));
    }
    average_over(members, start, |s, i| s.betas[i][idx])
}

fn average_over(
    members: &[&IntegrationSeries],
    start: Quarter,
    value: impl Fn(&IntegrationSeries, usize) -> f64,
) -> Result<Vec<(Quarter, f64)>, IntegrationError> {
    if members.is_empty() {
        return Err(IntegrationError::EmptyCohort);
    }
    for m in members {
        if m.quarters.first().is_none_or(|&f| f > start) {
            return Err(IntegrationError::MissingAtStart {
                msa: m.msa_id.clone(),
                start,
            });
        }
    }
    let end = members
        .iter()
        .filter_map(|m| m.quarters.last().copied())
        .min()
        .expect("non-empty");
    let mut out = Vec::new();
    for q in crate::timeseries::quarter_range(start, end) {
        let mut sum = 0.0;
        let mut complete = true;
        for m in members {
            match m.quarters.binary_search(&q) {
                Ok(i) => sum += value(m, i),
                Err(_) => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            out.push((q, sum / members.len() as f64));
        }
    }
    Ok(out)
}

/// Per-quarter mean over whichever members report, with the member count.
/// `coefficient = None` averages R², otherwise that coefficient.
pub fn available_average(members: &[&IntegrationSeries], coefficient: Option<&str>) -> Vec<(Quarter, f64, usize)> {
    let mut acc: BTreeMap<Quarter, (f64, usize)> = BTreeMap::new();
    for m in members {
        let idx = match coefficient {
            Some(name) => match m.coefficient_index(name) {
                Some(i) => Some(i),
                None => continue,
            },
            None => None,
        };
        for (i, &q) in m.quarters.iter().enumerate() {
            let v = idx.map_or(m.r_square[i], |j| m.betas[i][j]);
            let e = acc.entry(q).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(q, (s, n))| (q, s / n as f64, n)).collect()
}

/// Assigns each series to the first cohort whose start quarter is at or
/// after the series' first window-end. Cohorts must be given in ascending
/// start order; series starting after the last cohort start are unassigned.
pub fn time_cohorts<'a>(series: &'a [IntegrationSeries], starts: &[Quarter]) -> Vec<Vec<&'a IntegrationSeries>> {
    let mut out = vec![Vec::new(); starts.len()];
    for s in series {
        let Some(&first) = s.quarters.first() else { continue };
        if let Some(c) = starts.iter().position(|&st| first <= st) {
            out[c].push(s);
        }
    }
    out
}
