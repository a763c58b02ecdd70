//! Input loading and per-module analysis steps.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use metrorisk_core::contagion::{fit_menus, ContagionConfig, MenuResult, DEFAULT_LAGS};
use metrorisk_core::correlations::{
    assign_divisions, cohort_correlation_report, correlation_summary, jump_pair_correlations, return_pair_correlations,
    CorrelationSummary, DivisionRow,
};
use metrorisk_core::geography::{is_ca_coastal, CALIFORNIA};
use metrorisk_core::integration::{
    available_average, cohort_average, integrate_panel, integration_summary, time_cohorts, ChangeBase, Exclusion,
    IntegrationConfig,
};
use metrorisk_core::jumps::{jump_incidence, lm_panel, FlagKind};
use metrorisk_core::portfolio::{diversification_series, full_history_members, series_correlation};
use metrorisk_core::synth::{generate_panel, SyntheticPanel};
use metrorisk_core::timeseries::io::{read_factor_table, read_hpi_panel, write_hpi_csv, write_raw_factors_csv};
use metrorisk_core::timeseries::{compute_returns, TransformConfig};
use metrorisk_core::{
    FactorTable, IndexPanel, IntegrationError, IntegrationSeries, IntegrationSummary, JumpSeries, Msa, PairCorrelation,
    PairKind, PortfolioSeries, Quarter, ReturnPanel, ScenarioConfig, Timing,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::sha256_hex;

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Generated scenario with its serialized inputs.
pub struct Synthetic {
    pub scenario: ScenarioConfig,
    pub panel: SyntheticPanel,
    pub hpi_csv: Vec<u8>,
    pub factors_csv: Vec<u8>,
}

pub fn synthesize(cfg: &RunConfig, inputs: &mut BTreeMap<String, String>) -> Result<Synthetic, CliError> {
    let path = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Config("no scenario file given".into()))?;
    let bytes = read_file(path)?;
    inputs.insert("scenario".into(), sha256_hex(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{}: not UTF-8", path.display())))?;
    let mut scenario = ScenarioConfig::from_toml_str(&text)?;
    if let Some(seed) = cfg.seed {
        scenario.seed = seed;
    }
    let panel = generate_panel(&scenario)?;
    let mut hpi_csv = Vec::new();
    write_hpi_csv(&mut hpi_csv, &panel.index)?;
    let mut factors_csv = Vec::new();
    write_raw_factors_csv(&mut factors_csv, &panel.raw_factors)?;
    Ok(Synthetic {
        scenario,
        panel,
        hpi_csv,
        factors_csv,
    })
}

pub struct Dataset {
    pub index: IndexPanel,
    pub returns: ReturnPanel,
    pub factors: FactorTable,
    pub transforms: TransformConfig,
    pub synthetic: Option<Synthetic>,
}

impl Dataset {
    fn msa(&self, id: &str) -> Option<&Msa> {
        self.returns.get(id).map(|m| &m.msa)
    }
}

fn parse(hpi: &[u8], factors: &[u8], transforms: TransformConfig, synthetic: Option<Synthetic>) -> Result<Dataset, CliError> {
    let index = read_hpi_panel(hpi)?;
    let factors = read_factor_table(factors, &transforms)?;
    let returns = compute_returns(&index)?;
    Ok(Dataset {
        index,
        returns,
        factors,
        transforms,
        synthetic,
    })
}

/// Reads the HPI and factor files, or generates the scenario and reads its
/// CSV output back through the same parsers.
pub fn load(cfg: &RunConfig, inputs: &mut BTreeMap<String, String>) -> Result<Dataset, CliError> {
    match (&cfg.hpi, &cfg.factors) {
        (Some(h), Some(f)) => {
            let hpi = read_file(h)?;
            let factors = read_file(f)?;
            inputs.insert("hpi".into(), sha256_hex(&hpi));
            inputs.insert("factors".into(), sha256_hex(&factors));
            parse(&hpi, &factors, cfg.transform_config(), None)
        }
        _ if cfg.scenario.is_some() => {
            let s = synthesize(cfg, inputs)?;
            let (hpi, factors) = (s.hpi_csv.clone(), s.factors_csv.clone());
            let transforms = s.scenario.transform_config();
            parse(&hpi, &factors, transforms, Some(s))
        }
        _ => Err(CliError::Config("no input data: give hpi and factors, or a scenario".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Us,
    Ca,
    CaCoastal,
    CaInland,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::Us, Group::Ca, Group::CaCoastal, Group::CaInland];

    pub fn name(self) -> &'static str {
        match self {
            Group::Us => "US",
            Group::Ca => "CA",
            Group::CaCoastal => "CA coastal",
            Group::CaInland => "CA inland",
        }
    }

    pub fn contains(self, msa: &Msa, coastal: &[String]) -> bool {
        match self {
            Group::Us => true,
            Group::Ca => msa.state == CALIFORNIA,
            Group::CaCoastal => is_ca_coastal(msa, coastal),
            Group::CaInland => msa.state == CALIFORNIA && !is_ca_coastal(msa, coastal),
        }
    }
}

pub struct AverageSeries {
    pub name: String,
    /// (quarter, value, reporting members)
    pub points: Vec<(Quarter, f64, usize)>,
}

pub struct BetaSeries {
    pub scope: String,
    pub factor: String,
    pub points: Vec<(Quarter, f64, usize)>,
}

pub struct Integration {
    pub series: Vec<IntegrationSeries>,
    pub excluded: Vec<Exclusion>,
    pub us: IntegrationSummary,
    pub ca: Option<IntegrationSummary>,
    pub averages: Vec<AverageSeries>,
    pub betas: Vec<BetaSeries>,
}

pub fn integrate(data: &Dataset, cfg: &RunConfig) -> Result<Integration, CliError> {
    let icfg = IntegrationConfig {
        window: cfg.window,
        prewhiten: cfg.prewhiten,
    };
    let (series, excluded) = integrate_panel(&data.returns, &data.factors, &icfg)?;
    if series.is_empty() {
        return Err(IntegrationError::NoSeries.into());
    }
    let base = cfg.change_base.map_or(ChangeBase::OwnFirst, ChangeBase::Fixed);
    let us = integration_summary(&series, &data.returns, base)?;
    let ca_series: Vec<IntegrationSeries> = series
        .iter()
        .filter(|s| data.msa(&s.msa_id).is_some_and(|m| m.state == CALIFORNIA))
        .cloned()
        .collect();
    let ca = if ca_series.is_empty() {
        None
    } else {
        match integration_summary(&ca_series, &data.returns, base) {
            Ok(s) => Some(s),
            Err(e) => {
                log::warn!("California summary unavailable: {e}");
                None
            }
        }
    };

    let coastal = &cfg.cohorts.ca_coastal;
    let members = |g: Group| -> Vec<&IntegrationSeries> {
        series
            .iter()
            .filter(|s| data.msa(&s.msa_id).is_some_and(|m| g.contains(m, coastal)))
            .collect()
    };
    let mut averages = Vec::new();
    for g in Group::ALL {
        let m = members(g);
        if !m.is_empty() {
            averages.push(AverageSeries {
                name: g.name().into(),
                points: available_average(&m, None),
            });
        }
    }
    for (i, (cohort, &start)) in time_cohorts(&series, &cfg.cohorts.time)
        .iter()
        .zip(&cfg.cohorts.time)
        .enumerate()
    {
        if cohort.is_empty() {
            log::info!("time cohort {} ({start}) has no members", i + 1);
            continue;
        }
        let points = cohort_average(cohort, start)?;
        averages.push(AverageSeries {
            name: format!("cohort {} ({start})", i + 1),
            points: points.into_iter().map(|(q, v)| (q, v, cohort.len())).collect(),
        });
    }

    let mut betas = Vec::new();
    for g in [Group::Us, Group::Ca] {
        let m = members(g);
        if m.is_empty() {
            continue;
        }
        for f in &cfg.cohorts.beta_factors {
            if data.factors.factor_index(f).is_none() {
                log::info!("beta factor {f} not in the factor table");
                continue;
            }
            betas.push(BetaSeries {
                scope: g.name().into(),
                factor: f.clone(),
                points: available_average(&m, Some(f)),
            });
        }
    }

    Ok(Integration {
        series,
        excluded,
        us,
        ca,
        averages,
        betas,
    })
}

/// (cohort, flag, incidence)
pub type Incidence = (String, FlagKind, Vec<(Quarter, f64)>);

pub struct Jumps {
    pub series: Vec<JumpSeries>,
    pub incidence: Vec<Incidence>,
}

pub fn jumps(data: &Dataset, cfg: &RunConfig) -> Result<Jumps, CliError> {
    let series = lm_panel(&data.returns, &cfg.jumps)?;
    let mut incidence = Vec::new();
    for g in Group::ALL {
        let members: Vec<&JumpSeries> = series
            .iter()
            .filter(|s| data.msa(&s.msa_id).is_some_and(|m| g.contains(m, &cfg.cohorts.ca_coastal)))
            .collect();
        if members.is_empty() {
            continue;
        }
        for kind in [FlagKind::Jump, FlagKind::Big] {
            incidence.push((g.name().to_string(), kind, jump_incidence(&members, kind)));
        }
    }
    Ok(Jumps { series, incidence })
}

pub struct Correlations {
    pub pairs: Vec<PairCorrelation>,
    pub summaries: Vec<(PairKind, Timing, Vec<CorrelationSummary>)>,
    pub divisions: Vec<DivisionRow>,
}

pub fn correlate(data: &Dataset, jumps: &Jumps, cfg: &RunConfig) -> Result<Correlations, CliError> {
    let mut sets = Vec::new();
    for timing in [Timing::Contemporaneous, Timing::Lead] {
        sets.push((
            PairKind::Return,
            timing,
            return_pair_correlations(&data.returns, timing, cfg.min_overlap),
        ));
    }
    for timing in [Timing::Contemporaneous, Timing::Lead] {
        sets.push((PairKind::Jump, timing, jump_pair_correlations(&jumps.series, timing, &cfg.jump_pairs)));
    }
    let thresholds: Vec<Option<f64>> = std::iter::once(None)
        .chain(cfg.summary_thresholds.iter().copied().map(Some))
        .collect();
    let mut summaries = Vec::new();
    for (kind, timing, pairs) in &sets {
        if pairs.is_empty() {
            log::info!("no {kind} {timing} pairs to summarize");
            continue;
        }
        summaries.push((*kind, *timing, correlation_summary(pairs, &thresholds)?));
    }
    let pairs: Vec<PairCorrelation> = sets.into_iter().flat_map(|(_, _, p)| p).collect();
    let map = cfg.division_map();
    let assignment = assign_divisions(data.returns.msas(), &map)?;
    let divisions = cohort_correlation_report(&pairs, &assignment, &map, cfg.significance_t)?;
    Ok(Correlations {
        pairs,
        summaries,
        divisions,
    })
}

pub fn contagion(data: &Dataset, cfg: &RunConfig) -> Vec<MenuResult> {
    let ccfg = ContagionConfig {
        n_lags: DEFAULT_LAGS,
        policy: cfg.serial,
        ..ContagionConfig::default()
    };
    fit_menus(&data.index, &data.returns, &cfg.menus, cfg.interaction_residual, &ccfg)
}

pub struct Portfolio {
    pub name: String,
    pub start: Quarter,
    pub series: PortfolioSeries,
    /// Average member R² per portfolio quarter.
    pub integration: Vec<Option<f64>>,
}

pub struct SeriesCorrelation {
    pub portfolio: String,
    pub x: &'static str,
    pub y: &'static str,
    pub range: Option<(Quarter, Quarter)>,
    pub r: Result<f64, String>,
}

pub struct Portfolios {
    pub portfolios: Vec<Portfolio>,
    pub skipped: Vec<(String, String)>,
    pub correlations: Vec<SeriesCorrelation>,
}

pub fn portfolios(data: &Dataset, integration: &Integration, cfg: &RunConfig) -> Portfolios {
    let specs = [
        (Group::Us, cfg.cohorts.us_portfolio_start),
        (Group::Ca, cfg.cohorts.ca_portfolio_start),
    ];
    let mut out = Portfolios {
        portfolios: Vec::new(),
        skipped: Vec::new(),
        correlations: Vec::new(),
    };
    for (g, start) in specs {
        let members: Vec<String> = full_history_members(&data.returns, start, cfg.window)
            .into_iter()
            .filter(|id| data.msa(id).is_some_and(|m| g.contains(m, &cfg.cohorts.ca_coastal)))
            .collect();
        let ids: Vec<&str> = members.iter().map(String::as_str).collect();
        let series = if ids.is_empty() {
            Err(metrorisk_core::PortfolioError::EmptyMembership.to_string())
        } else {
            diversification_series(&data.returns, &ids, cfg.window).map_err(|e| e.to_string())
        };
        let mut series = match series {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{} portfolio skipped: {e}", g.name());
                out.skipped.push((g.name().into(), e));
                continue;
            }
        };
        let keep: Vec<usize> = (0..series.quarters.len()).filter(|&i| series.quarters[i] >= start).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        series = PortfolioSeries {
            quarters: keep.iter().map(|&i| series.quarters[i]).collect(),
            port_return: pick(&series.port_return),
            port_sigma: pick(&series.port_sigma),
            avg_member_sigma: pick(&series.avg_member_sigma),
            diversification: pick(&series.diversification),
            ..series
        };
        let member_series: Vec<&IntegrationSeries> =
            integration.series.iter().filter(|s| members.contains(&s.msa_id)).collect();
        let avg: BTreeMap<Quarter, f64> = available_average(&member_series, None)
            .into_iter()
            .map(|(q, v, _)| (q, v))
            .collect();
        let integ: Vec<Option<f64>> = series.quarters.iter().map(|q| avg.get(q).copied()).collect();

        let stamped = |v: &[f64]| -> Vec<(Quarter, f64)> { series.quarters.iter().copied().zip(v.iter().copied()).collect() };
        let integ_pts: Vec<(Quarter, f64)> = series
            .quarters
            .iter()
            .zip(&integ)
            .filter_map(|(q, v)| v.map(|v| (*q, v)))
            .collect();
        let pairs: [(&'static str, Vec<(Quarter, f64)>); 2] = [
            ("port_sigma", stamped(&series.port_sigma)),
            ("diversification", stamped(&series.diversification)),
        ];
        for range in [None, Some((cfg.cohorts.decade[0], cfg.cohorts.decade[1]))] {
            for (y, pts) in &pairs {
                out.correlations.push(SeriesCorrelation {
                    portfolio: g.name().into(),
                    x: "integration",
                    y,
                    range,
                    r: series_correlation(&integ_pts, pts, range).map_err(|e| e.to_string()),
                });
            }
        }
        out.portfolios.push(Portfolio {
            name: g.name().into(),
            start,
            series,
            integration: integ,
        });
    }
    out
}
