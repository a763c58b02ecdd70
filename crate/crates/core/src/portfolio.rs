//! Equal-weighted portfolios, rolling risk and diversification.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::stats::{pearson, sample_sd};
use crate::timeseries::{Quarter, QuarterSeries, ReturnPanel};

pub const DEFAULT_SIGMA_WINDOW: usize = 20;
pub const MIN_CORRELATION_POINTS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum PortfolioError {
    #[error("portfolio has no members")]
    EmptyMembership,

    #[error("unknown MSA '{0}'")]
    UnknownMsa(String),

    #[error("series length {actual} shorter than window {window}")]
    TooShort { actual: usize, window: usize },

    #[error("window must be at least 2")]
    Window,

    #[error("members share no common quarters")]
    NoCommonRange,

    #[error("{actual} overlapping points; need at least {required}")]
    InsufficientOverlap { required: usize, actual: usize },

    #[error("correlation undefined: a series is constant")]
    Undefined,
}

fn member_series<'a>(panel: &'a ReturnPanel, members: &[&str]) -> Result<Vec<&'a QuarterSeries>, PortfolioError> {
    if members.is_empty() {
        return Err(PortfolioError::EmptyMembership);
    }
    members
        .iter()
        .map(|id| panel.get(id).map(|m| &m.series).ok_or_else(|| PortfolioError::UnknownMsa(id.to_string())))
        .collect()
}

fn common_range(series: &[&QuarterSeries]) -> Result<(Quarter, Quarter), PortfolioError> {
    let lo = series.iter().map(|s| s.start).max().ok_or(PortfolioError::EmptyMembership)?;
    let hi = series.iter().filter_map(|s| s.end()).min().ok_or(PortfolioError::NoCommonRange)?;
    if hi < lo {
        return Err(PortfolioError::NoCommonRange);
    }
    Ok((lo, hi))
}

/// Equal-weighted mean return over quarters where every member reports.
pub fn portfolio_returns(panel: &ReturnPanel, members: &[&str]) -> Result<QuarterSeries, PortfolioError> {
    let series = member_series(panel, members)?;
    let (lo, hi) = common_range(&series)?;
    let earliest = series.iter().map(|s| s.start).min().expect("non-empty");
    let dropped = earliest.quarters_until(lo);
    if dropped > 0 {
        log::info!("portfolio: {dropped} leading quarters dropped (not all members present)");
    }
    let k = series.len() as f64;
    let values = crate::timeseries::quarter_range(lo, hi)
        .map(|q| series.iter().map(|s| s.get(q).expect("common range")).sum::<f64>() / k)
        .collect();
    Ok(QuarterSeries::new(lo, values))
}

/// Trailing-window sample standard deviation, stamped at window end.
pub fn rolling_sigma(series: &QuarterSeries, window: usize) -> Result<QuarterSeries, PortfolioError> {
    if window < 2 {
        return Err(PortfolioError::Window);
    }
    if series.len() < window {
        return Err(PortfolioError::TooShort {
            actual: series.len(),
            window,
        });
    }
    let values = series
        .values
        .windows(window)
        .map(|w| sample_sd(w).expect("window >= 2"))
        .collect();
    Ok(QuarterSeries::new(series.start.offset(window as i64 - 1), values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioSeries {
    pub members: Vec<String>,
    pub window: usize,
    /// Window-end quarters.
    pub quarters: Vec<Quarter>,
    pub port_return: Vec<f64>,
    pub port_sigma: Vec<f64>,
    pub avg_member_sigma: Vec<f64>,
    pub diversification: Vec<f64>,
}

/// `(avg − port) / avg`, or 0 when the average member sigma is 0.
pub fn diversification(avg_member_sigma: f64, port_sigma: f64) -> f64 {
    if avg_member_sigma == 0.0 {
        0.0
    } else {
        (avg_member_sigma - port_sigma) / avg_member_sigma
    }
}

/// Rolling portfolio and member risk over the members' common range.
pub fn diversification_series(panel: &ReturnPanel, members: &[&str], window: usize) -> Result<PortfolioSeries, PortfolioError> {
    let series = member_series(panel, members)?;
    let (lo, hi) = common_range(&series)?;
    let port = portfolio_returns(panel, members)?;
    let port_sigma = rolling_sigma(&port, window)?;
    let member_sigmas: Vec<QuarterSeries> = series
        .par_iter()
        .map(|s| rolling_sigma(&s.slice(lo, hi), window))
        .collect::<Result<_, _>>()?;
    let k = member_sigmas.len() as f64;
    let n = port_sigma.len();
    let avg: Vec<f64> = (0..n)
        .map(|i| member_sigmas.iter().map(|s| s.values[i]).sum::<f64>() / k)
        .collect();
    let div = avg.iter().zip(&port_sigma.values).map(|(&a, &p)| diversification(a, p)).collect();
    Ok(PortfolioSeries {
        members: members.iter().map(|s| s.to_string()).collect(),
        window,
        quarters: port_sigma.quarters().collect(),
        port_return: port.values[window - 1..].to_vec(),
        port_sigma: port_sigma.values,
        avg_member_sigma: avg,
        diversification: div,
    })
}

/// MSAs with a rolling sigma available at `start` (returns from
/// `start − (window − 1)` onward).
pub fn full_history_members(panel: &ReturnPanel, start: Quarter, window: usize) -> Vec<String> {
    let first_needed = start.offset(-(window as i64 - 1));
    panel
        .members()
        .iter()
        .filter(|m| m.series.start <= first_needed && m.series.end().is_some_and(|e| e >= start))
        .map(|m| m.msa.id.clone())
        .collect()
}

/// Pearson correlation of two quarter-stamped series over their overlap,
/// optionally restricted to `[from, to]`.
pub fn series_correlation(
    a: &[(Quarter, f64)],
    b: &[(Quarter, f64)],
    range: Option<(Quarter, Quarter)>,
) -> Result<f64, PortfolioError> {
    let in_range = |q: Quarter| range.is_none_or(|(lo, hi)| q >= lo && q <= hi);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(q, x) in a.iter().filter(|(q, _)| in_range(*q)) {
        if let Ok(i) = b.binary_search_by(|p| p.0.cmp(&q)) {
            xs.push(x);
            ys.push(b[i].1);
        }
    }
    if xs.len() < MIN_CORRELATION_POINTS {
        return Err(PortfolioError::InsufficientOverlap {
            required: MIN_CORRELATION_POINTS,
            actual: xs.len(),
        });
    }
    pearson(&xs, &ys).ok_or(PortfolioError::Undefined)
}
