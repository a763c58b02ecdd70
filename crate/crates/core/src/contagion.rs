//! Lagged spillover regressions of satellite MSAs on a primary coastal MSA,
//! with optional boom/bust interactions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geography::{resolve_msa, CALIFORNIA};
use crate::regress::{
    cochrane_orcutt, dw_test, ols_fit, trend_fit, Design, DwVerdict, RegressError, RegressionFit, CO_DEFAULT_MAX_ITER,
    CO_DEFAULT_TOL, INTERCEPT,
};
use crate::timeseries::{IndexPanel, Msa, Quarter, QuarterSeries, ReturnPanel};

pub const DEFAULT_LAGS: usize = 3;
pub const DW_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ContagionError {
    #[error("overlap of {actual} quarters; need at least {required}")]
    InsufficientOverlap { required: usize, actual: usize },

    #[error("residual series does not cover {0}")]
    ResidualCoverage(Quarter),

    #[error("MSA '{0}' not found")]
    UnknownMsa(String),

    #[error("boom/bust residual needs at least 12 observations, got {0}")]
    ShortIndex(usize),

    #[error("no members for the equal-weighted index")]
    EmptyIndex,

    #[error(transparent)]
    Regress(#[from] RegressError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SerialPolicy {
    /// Cochrane–Orcutt when the OLS Durbin–Watson test does not accept
    /// independence (inconclusive counts as rejection).
    #[default]
    Auto,
    Never,
    Always,
}

impl std::str::FromStr for SerialPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "never" => Ok(Self::Never),
            "always" => Ok(Self::Always),
            _ => Err(format!("unknown serial policy '{s}' (auto, never, always)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualSource {
    /// Trend residual of the primary city's own log index.
    #[default]
    Coastal,
    /// Trend residual of an equal-weighted California index.
    CaEqualWeighted,
}

impl std::str::FromStr for ResidualSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coastal" => Ok(Self::Coastal),
            "ca-equal-weighted" => Ok(Self::CaEqualWeighted),
            _ => Err(format!("unknown interaction residual '{s}' (coastal, ca-equal-weighted)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContagionConfig {
    pub n_lags: usize,
    pub policy: SerialPolicy,
    pub co_tol: f64,
    pub co_max_iter: usize,
}

impl Default for ContagionConfig {
    fn default() -> Self {
        Self {
            n_lags: DEFAULT_LAGS,
            policy: SerialPolicy::Auto,
            co_tol: CO_DEFAULT_TOL,
            co_max_iter: CO_DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContagionFit {
    pub target: String,
    pub source: String,
    pub n_obs: usize,
    pub intercept: Term,
    /// `lags[ℓ]` is the coefficient on the source return at `t − ℓ`.
    pub lags: Vec<Term>,
    /// Interaction terms; dropped all-zero columns report estimate 0 with
    /// NaN standard error and t.
    pub interactions: Option<Vec<Term>>,
    pub r_square: f64,
    pub durbin_watson: f64,
    pub method: crate::regress::FitMethod,
    pub rho: Option<f64>,
    /// Verdict of the bounds test on the OLS residuals.
    pub ols_dw_verdict: Option<DwVerdict>,
    pub converged: bool,
    #[serde(skip)]
    pub fit: RegressionFit,
}

fn lag_name(l: usize) -> String {
    format!("lag{l}")
}

fn interaction_name(l: usize) -> String {
    format!("lag{l}_x_resid")
}

struct Aligned {
    quarters: Vec<Quarter>,
    y: Vec<f64>,
    lags: Vec<Vec<f64>>,
}

fn align_pair(target: &QuarterSeries, source: &QuarterSeries, n_lags: usize) -> Result<Aligned, ContagionError> {
    let lo = target.start.max(source.start);
    let hi = match (target.end(), source.end()) {
        (Some(a), Some(b)) => a.min(b),
        _ => return Err(ContagionError::InsufficientOverlap { required: n_lags + 8, actual: 0 }),
    };
    let overlap = (lo.quarters_until(hi) + 1).max(0) as usize;
    if overlap < n_lags + 8 {
        return Err(ContagionError::InsufficientOverlap {
            required: n_lags + 8,
            actual: overlap,
        });
    }
    let quarters: Vec<Quarter> = (n_lags..overlap).map(|i| lo.offset(i as i64)).collect();
    let y = quarters.iter().map(|&q| target.get(q).expect("in overlap")).collect();
    let lags = (0..=n_lags)
        .map(|l| quarters.iter().map(|&q| source.get(q.offset(-(l as i64))).expect("in overlap")).collect())
        .collect();
    Ok(Aligned { quarters, y, lags })
}

fn term(fit: &RegressionFit, j: usize) -> Term {
    Term {
        estimate: fit.coefficients[j],
        std_error: fit.std_errors[j],
        t_stat: fit.t_stats[j],
    }
}

fn fit_with_policy(
    design: &Design,
    y: &[f64],
    config: &ContagionConfig,
) -> Result<(RegressionFit, Option<DwVerdict>, bool), ContagionError> {
    let ols = ols_fit(design, y)?;
    let verdict = if ols.durbin_watson.is_finite() {
        Some(dw_test(ols.durbin_watson, ols.n_obs, design.n_cols() - 1, DW_ALPHA)?.0)
    } else {
        None
    };
    let use_co = match config.policy {
        SerialPolicy::Never => false,
        SerialPolicy::Always => true,
        SerialPolicy::Auto => verdict.is_some_and(|v| !v.accepts_null()),
    };
    if !use_co {
        return Ok((ols, verdict, true));
    }
    match cochrane_orcutt(design, y, config.co_tol, config.co_max_iter) {
        Ok(fit) => Ok((fit, verdict, true)),
        Err(RegressError::NotConverged { iterations, last }) => {
            log::warn!("Cochrane-Orcutt stopped after {iterations} iterations; reporting last iterate");
            Ok((*last, verdict, false))
        }
        Err(e) => Err(e.into()),
    }
}

fn assemble(
    target: &str,
    source: &str,
    n_lags: usize,
    fit: RegressionFit,
    verdict: Option<DwVerdict>,
    converged: bool,
    interactions: Option<&[bool]>,
) -> ContagionFit {
    let idx = |name: &str| fit.names.iter().position(|n| n == name);
    let lags = (0..=n_lags).map(|l| term(&fit, idx(&lag_name(l)).expect("lag column"))).collect();
    let interactions = interactions.map(|kept| {
        (0..=n_lags)
            .map(|l| match (kept[l], idx(&interaction_name(l))) {
                (true, Some(j)) => term(&fit, j),
                _ => Term {
                    estimate: 0.0,
                    std_error: f64::NAN,
                    t_stat: f64::NAN,
                },
            })
            .collect()
    });
    ContagionFit {
        target: target.into(),
        source: source.into(),
        n_obs: fit.n_obs,
        intercept: term(&fit, idx(INTERCEPT).expect("intercept")),
        lags,
        interactions,
        r_square: fit.r_square,
        durbin_watson: fit.durbin_watson,
        method: fit.method,
        rho: fit.rho,
        ols_dw_verdict: verdict,
        converged,
        fit,
    }
}

/// Regresses target returns on the source's contemporaneous and lagged
/// returns.
pub fn contagion_fit(
    target_id: &str,
    target: &QuarterSeries,
    source_id: &str,
    source: &QuarterSeries,
    config: &ContagionConfig,
) -> Result<ContagionFit, ContagionError> {
    let a = align_pair(target, source, config.n_lags)?;
    let n = a.y.len();
    let design = Design::with_intercept(a.lags.into_iter().enumerate().map(|(l, c)| (lag_name(l), c)), n)?;
    let (fit, verdict, converged) = fit_with_policy(&design, &a.y, config)?;
    Ok(assemble(target_id, source_id, config.n_lags, fit, verdict, converged, None))
}

/// [`contagion_fit`] plus `source_{t−ℓ} · resid_t` for each lag.
pub fn contagion_fit_interacted(
    target_id: &str,
    target: &QuarterSeries,
    source_id: &str,
    source: &QuarterSeries,
    residual: &QuarterSeries,
    config: &ContagionConfig,
) -> Result<ContagionFit, ContagionError> {
    let a = align_pair(target, source, config.n_lags)?;
    let n = a.y.len();
    let resid: Vec<f64> = a
        .quarters
        .iter()
        .map(|&q| residual.get(q).ok_or(ContagionError::ResidualCoverage(q)))
        .collect::<Result<_, _>>()?;
    let mut cols: Vec<(String, Vec<f64>)> = a.lags.iter().enumerate().map(|(l, c)| (lag_name(l), c.clone())).collect();
    let mut kept = Vec::new();
    for (l, c) in a.lags.iter().enumerate() {
        let inter: Vec<f64> = c.iter().zip(&resid).map(|(x, e)| x * e).collect();
        let nonzero = inter.iter().any(|&v| v != 0.0);
        kept.push(nonzero);
        if nonzero {
            cols.push((interaction_name(l), inter));
        } else {
            log::info!("{target_id} on {source_id}: interaction at lag {l} is identically zero; dropped");
        }
    }
    let design = Design::with_intercept(cols, n)?;
    let (fit, verdict, converged) = fit_with_policy(&design, &a.y, config)?;
    Ok(assemble(target_id, source_id, config.n_lags, fit, verdict, converged, Some(&kept)))
}

/// Residuals of a linear trend fitted to `ln(index)`; positive in booms.
pub fn boombust_residual(index: &QuarterSeries) -> Result<QuarterSeries, ContagionError> {
    if index.len() < 12 {
        return Err(ContagionError::ShortIndex(index.len()));
    }
    if index.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(RegressError::Invalid("index levels must be positive".into()).into());
    }
    let logs: Vec<f64> = index.values.iter().map(|v| v.ln()).collect();
    let fit = trend_fit(&logs)?;
    Ok(QuarterSeries::new(index.start, fit.residuals))
}

/// Index built from the equal-weighted mean of member log returns (members
/// present each quarter), starting at 100 one quarter before the first
/// return.
pub fn equal_weighted_index(returns: &ReturnPanel, members: &[&str]) -> Result<QuarterSeries, ContagionError> {
    let series: Vec<&QuarterSeries> = members
        .iter()
        .map(|id| returns.get(id).map(|m| &m.series).ok_or_else(|| ContagionError::UnknownMsa(id.to_string())))
        .collect::<Result<_, _>>()?;
    let first = series.iter().map(|s| s.start).min().ok_or(ContagionError::EmptyIndex)?;
    let last = series.iter().filter_map(|s| s.end()).max().ok_or(ContagionError::EmptyIndex)?;
    let mut levels = vec![100.0];
    let mut cum = 0.0;
    for q in crate::timeseries::quarter_range(first, last) {
        let rs: Vec<f64> = series.iter().filter_map(|s| s.get(q)).collect();
        if !rs.is_empty() {
            cum += rs.iter().sum::<f64>() / rs.len() as f64 / 100.0;
        }
        levels.push(100.0 * cum.exp());
    }
    Ok(QuarterSeries::new(first.pred(), levels))
}

/// A primary city and its satellites, given as MSA ids or California name
/// prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContagionMenu {
    pub source: String,
    pub targets: Vec<String>,
}

pub fn default_menus() -> Vec<ContagionMenu> {
    let menu = |source: &str, targets: &[&str]| ContagionMenu {
        source: source.into(),
        targets: targets.iter().map(|s| s.to_string()).collect(),
    };
    vec![
        menu(
            "Los Angeles",
            &["Bakersfield", "Fresno", "Oxnard", "Riverside", "San Diego", "Santa Ana", "Santa Barbara"],
        ),
        menu(
            "San Francisco",
            &[
                "Merced",
                "Modesto",
                "Napa",
                "Oakland",
                "Sacramento",
                "Salinas",
                "San Jose",
                "Santa Cruz",
                "Santa Rosa",
                "Stockton",
                "Vallejo",
            ],
        ),
        menu("Santa Barbara", &["Oxnard", "San Luis Obispo"]),
    ]
}

/// One menu entry's outcome.
#[derive(Debug)]
pub struct MenuResult {
    pub source: String,
    pub target: String,
    pub base: Result<ContagionFit, ContagionError>,
    pub interacted: Result<ContagionFit, ContagionError>,
}

fn resolve<'a>(msas: &'a [Msa], key: &str) -> Result<&'a Msa, ContagionError> {
    resolve_msa(msas, key, Some(CALIFORNIA))
        .or_else(|| resolve_msa(msas, key, None))
        .ok_or_else(|| ContagionError::UnknownMsa(key.into()))
}

/// Fits every menu entry, base and interacted. Menu sources or targets
/// absent from the panel are reported as errors in their rows.
pub fn fit_menus(
    index: &IndexPanel,
    returns: &ReturnPanel,
    menus: &[ContagionMenu],
    residual_source: ResidualSource,
    config: &ContagionConfig,
) -> Vec<MenuResult> {
    let msas: Vec<Msa> = returns.msas().cloned().collect();
    let ca_ids: Vec<&str> = msas.iter().filter(|m| m.state == CALIFORNIA).map(|m| m.id.as_str()).collect();
    let ca_residual = match residual_source {
        ResidualSource::CaEqualWeighted => Some(equal_weighted_index(returns, &ca_ids).and_then(|ix| boombust_residual(&ix))),
        ResidualSource::Coastal => None,
    };
    let jobs: Vec<(&ContagionMenu, &String)> = menus.iter().flat_map(|m| m.targets.iter().map(move |t| (m, t))).collect();
    jobs.into_par_iter()
        .map(|(menu, target)| {
            let run = || -> Result<(ContagionFit, Result<ContagionFit, ContagionError>), ContagionError> {
                let s = resolve(&msas, &menu.source)?;
                let t = resolve(&msas, target)?;
                let sr = &returns.get(&s.id).expect("resolved").series;
                let tr = &returns.get(&t.id).expect("resolved").series;
                let base = contagion_fit(&t.id, tr, &s.id, sr, config)?;
                let residual = match &ca_residual {
                    Some(Ok(r)) => Ok(r.clone()),
                    Some(Err(e)) => Err(ContagionError::Regress(RegressError::Invalid(format!("CA index residual: {e}")))),
                    None => boombust_residual(&index.get(&s.id).expect("index member").series),
                };
                let interacted = residual.and_then(|r| contagion_fit_interacted(&t.id, tr, &s.id, sr, &r, config));
                Ok((base, interacted))
            };
            match run() {
                Ok((base, interacted)) => MenuResult {
                    source: menu.source.clone(),
                    target: target.clone(),
                    base: Ok(base),
                    interacted,
                },
                Err(e) => {
                    log::info!("contagion {target} on {}: {e}", menu.source);
                    let msg = e.to_string();
                    MenuResult {
                        source: menu.source.clone(),
                        target: target.clone(),
                        base: Err(e),
                        interacted: Err(ContagionError::Regress(RegressError::Invalid(msg))),
                    }
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::FitMethod;
    use crate::timeseries::parse_quarter;
    use proptest::prelude::*;

    fn q0() -> Quarter {
        parse_quarter("1980:Q1").unwrap()
    }

    fn pseudo(n: usize, seed: u64) -> Vec<f64> {
        // small LCG, enough for deterministic fixtures
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn identity_target() {
        let s = QuarterSeries::new(q0(), pseudo(60, 1));
        let f = contagion_fit("t", &s, "s", &s, &ContagionConfig::default()).unwrap();
        assert!((f.lags[0].estimate - 1.0).abs() < 1e-12);
        for l in 1..4 {
            assert!(f.lags[l].estimate.abs() < 1e-12);
        }
        assert!((f.r_square - 1.0).abs() < 1e-12);
        assert_eq!(f.n_obs, 57);
        assert_eq!(f.method, FitMethod::Ols);
    }

    #[test]
    fn recovers_planted_lags() {
        let x = pseudo(140, 2);
        let e = pseudo(140, 3);
        let y: Vec<f64> = (0..140)
            .map(|t| 0.2 + 0.6 * x[t] + if t > 0 { 0.3 * x[t - 1] } else { 0.0 } + 0.3 * e[t])
            .collect();
        let cfg = ContagionConfig {
            policy: SerialPolicy::Never,
            ..ContagionConfig::default()
        };
        let f = contagion_fit("t", &QuarterSeries::new(q0(), y), "s", &QuarterSeries::new(q0(), x), &cfg).unwrap();
        for (l, truth) in [0.6, 0.3, 0.0, 0.0].iter().enumerate() {
            let t = &f.lags[l];
            assert!((t.estimate - truth).abs() < 2.0 * t.std_error, "lag {l}: {t:?}");
            assert!((t.t_stat - t.estimate / t.std_error).abs() < 1e-8);
        }
    }

    #[test]
    fn no_lags_slope_is_cov_over_var() {
        let x = pseudo(50, 4);
        let y: Vec<f64> = x.iter().zip(pseudo(50, 5)).map(|(a, b)| 0.4 * a + b).collect();
        let cfg = ContagionConfig {
            n_lags: 0,
            policy: SerialPolicy::Never,
            ..ContagionConfig::default()
        };
        let f = contagion_fit("t", &QuarterSeries::new(q0(), y.clone()), "s", &QuarterSeries::new(q0(), x.clone()), &cfg).unwrap();
        let mx = x.iter().sum::<f64>() / 50.0;
        let my = y.iter().sum::<f64>() / 50.0;
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let var: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        assert!((f.lags[0].estimate - cov / var).abs() < 1e-10);
    }

    #[test]
    fn overlap_and_singularity_errors() {
        let s = QuarterSeries::new(q0(), pseudo(10, 1));
        assert!(matches!(
            contagion_fit("t", &s, "s", &s, &ContagionConfig::default()),
            Err(ContagionError::InsufficientOverlap { required: 11, actual: 10 })
        ));
        let flat = QuarterSeries::new(q0(), vec![1.0; 40]);
        let t = QuarterSeries::new(q0(), pseudo(40, 1));
        assert!(matches!(
            contagion_fit("t", &t, "s", &flat, &ContagionConfig::default()),
            Err(ContagionError::Regress(RegressError::Singular { .. }))
        ));
    }

    #[test]
    fn offset_starts_align_by_quarter() {
        let x = pseudo(60, 6);
        let src = QuarterSeries::new(q0(), x.clone());
        // target starts 8 quarters later and equals the source one quarter back
        let tgt = QuarterSeries::new(q0().offset(8), (8..60).map(|t| x[t - 1]).collect());
        let cfg = ContagionConfig {
            policy: SerialPolicy::Never,
            ..ContagionConfig::default()
        };
        let f = contagion_fit("t", &tgt, "s", &src, &cfg).unwrap();
        assert!((f.lags[1].estimate - 1.0).abs() < 1e-12);
        assert_eq!(f.n_obs, 52 - 3);
    }

    #[test]
    fn co_drops_one_observation() {
        let x = pseudo(80, 7);
        let mut u = vec![0.0; 80];
        let e = pseudo(80, 8);
        for t in 1..80 {
            u[t] = 0.8 * u[t - 1] + e[t];
        }
        let y: Vec<f64> = (0..80).map(|t| x[t] + u[t]).collect();
        let cfg = ContagionConfig {
            policy: SerialPolicy::Always,
            ..ContagionConfig::default()
        };
        let f = contagion_fit("t", &QuarterSeries::new(q0(), y), "s", &QuarterSeries::new(q0(), x), &cfg).unwrap();
        assert_eq!(f.method, FitMethod::CochraneOrcutt);
        assert_eq!(f.n_obs, 80 - 3 - 1);
        assert!(f.rho.unwrap() > 0.5);
    }

    #[test]
    fn zero_residual_matches_base_bitwise() {
        let x = pseudo(70, 9);
        let y: Vec<f64> = x.iter().zip(pseudo(70, 10)).map(|(a, b)| 0.5 * a + b).collect();
        let (t, s) = (QuarterSeries::new(q0(), y), QuarterSeries::new(q0(), x));
        let zero = QuarterSeries::new(q0(), vec![0.0; 70]);
        let cfg = ContagionConfig::default();
        let base = contagion_fit("t", &t, "s", &s, &cfg).unwrap();
        let inter = contagion_fit_interacted("t", &t, "s", &s, &zero, &cfg).unwrap();
        assert_eq!(base.lags, inter.lags);
        assert_eq!(base.intercept, inter.intercept);
        let terms = inter.interactions.unwrap();
        assert!(terms.iter().all(|t| t.estimate == 0.0 && t.std_error.is_nan()));
    }

    #[test]
    fn interaction_recovers_regime_loading() {
        let n = 160;
        let x = pseudo(n, 11);
        let resid: Vec<f64> = (0..n).map(|t| (t as f64 * 0.15).sin()).collect();
        let e = pseudo(n, 12);
        let y: Vec<f64> = (0..n).map(|t| (0.6 + 0.5 * resid[t]) * x[t] + 0.2 * e[t]).collect();
        let cfg = ContagionConfig {
            policy: SerialPolicy::Never,
            ..ContagionConfig::default()
        };
        let f = contagion_fit_interacted(
            "t",
            &QuarterSeries::new(q0(), y),
            "s",
            &QuarterSeries::new(q0(), x),
            &QuarterSeries::new(q0(), resid),
            &cfg,
        )
        .unwrap();
        let i0 = f.interactions.as_ref().unwrap()[0];
        assert!((i0.estimate - 0.5).abs() < 2.0 * i0.std_error, "{i0:?}");
        let short = QuarterSeries::new(q0().offset(10), vec![0.1; 20]);
        assert!(matches!(
            contagion_fit_interacted("t", &QuarterSeries::new(q0(), pseudo(n, 1)), "s", &QuarterSeries::new(q0(), pseudo(n, 2)), &short, &cfg),
            Err(ContagionError::ResidualCoverage(_))
        ));
    }

    #[test]
    fn boombust_examples() {
        let exp_index = QuarterSeries::new(q0(), (0..40).map(|t| 100.0 * (0.02 * t as f64).exp()).collect());
        let r = boombust_residual(&exp_index).unwrap();
        assert!(r.values.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(
            boombust_residual(&QuarterSeries::new(q0(), vec![100.0; 11])),
            Err(ContagionError::ShortIndex(11))
        ));
    }

    // Projection oracle: residual of a sine off span{1, t} computed with
    // closed-form simple-regression formulas.
    fn detrended(v: &[f64]) -> Vec<f64> {
        let n = v.len() as f64;
        let tm = (n - 1.0) / 2.0;
        let vm = v.iter().sum::<f64>() / n;
        let sxy: f64 = v.iter().enumerate().map(|(t, y)| (t as f64 - tm) * (y - vm)).sum();
        let sxx: f64 = (0..v.len()).map(|t| (t as f64 - tm).powi(2)).sum();
        let b = sxy / sxx;
        v.iter().enumerate().map(|(t, y)| y - vm - b * (t as f64 - tm)).collect()
    }

    #[test]
    fn boombust_sine_against_projection_oracle() {
        let n = 48;
        let period = 16.0;
        let sine: Vec<f64> = (0..n).map(|t| 0.1 * (2.0 * std::f64::consts::PI * t as f64 / period).sin()).collect();
        let index = QuarterSeries::new(q0(), (0..n).map(|t| (4.6 + 0.01 * t as f64 + sine[t]).exp()).collect());
        let r = boombust_residual(&index).unwrap();
        let oracle = detrended(&sine);
        for (a, b) in r.values.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
        // a cosine centred on the sample midpoint is orthogonal to the trend
        let cos: Vec<f64> = (0..n)
            .map(|t| 0.1 * (2.0 * std::f64::consts::PI * (t as f64 - (n as f64 - 1.0) / 2.0) / period).cos())
            .collect();
        let cm = cos.iter().sum::<f64>() / n as f64;
        let index = QuarterSeries::new(q0(), (0..n).map(|t| (4.6 + 0.01 * t as f64 + cos[t] - cm).exp()).collect());
        let r = boombust_residual(&index).unwrap();
        for (a, b) in r.values.iter().zip(&cos) {
            assert!((a - (b - cm)).abs() < 1e-8);
        }
    }

    #[test]
    fn equal_weighted_index_cumulates_mean_returns() {
        let members = vec![
            crate::timeseries::MsaSeries {
                msa: Msa::new("a", "A", "CA"),
                series: QuarterSeries::new(q0(), vec![1.0, 2.0, 3.0]),
            },
            crate::timeseries::MsaSeries {
                msa: Msa::new("b", "B", "CA"),
                series: QuarterSeries::new(q0().offset(1), vec![4.0, 5.0]),
            },
        ];
        let panel = ReturnPanel::new(members).unwrap();
        let ix = equal_weighted_index(&panel, &["a", "b"]).unwrap();
        assert_eq!(ix.start, q0().pred());
        let expect = [100.0, 100.0 * 0.01f64.exp(), 100.0 * (0.01f64 + 0.03).exp(), 100.0 * (0.01f64 + 0.03 + 0.04).exp()];
        for (a, b) in ix.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn interacted_fit_invariant_to_residual_affine_map(a in 0.2f64..5.0, b in -2.0f64..2.0, seed in 0u64..100) {
            let n = 60;
            let x = pseudo(n, seed);
            let y: Vec<f64> = x.iter().zip(pseudo(n, seed + 1000)).map(|(p, q)| 0.5 * p + q).collect();
            let resid = pseudo(n, seed + 2000);
            let cfg = ContagionConfig { policy: SerialPolicy::Never, ..ContagionConfig::default() };
            let (t, s) = (QuarterSeries::new(q0(), y), QuarterSeries::new(q0(), x));
            let f1 = contagion_fit_interacted("t", &t, "s", &s, &QuarterSeries::new(q0(), resid.clone()), &cfg).unwrap();
            let f2 = contagion_fit_interacted("t", &t, "s", &s, &QuarterSeries::new(q0(), resid.iter().map(|e| a * e + b).collect()), &cfg).unwrap();
            let y1: Vec<f64> = t.values[3..].iter().zip(&f1.fit.residuals).map(|(y, e)| y - e).collect();
            let y2: Vec<f64> = t.values[3..].iter().zip(&f2.fit.residuals).map(|(y, e)| y - e).collect();
            for (p, q) in y1.iter().zip(&y2) {
                prop_assert!((p - q).abs() < 1e-8);
            }
        }
    }
}
