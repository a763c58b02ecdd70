//! Run configuration: defaults, TOML file, then command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use metrorisk_core::contagion::{default_menus, ContagionMenu, ResidualSource, SerialPolicy};
use metrorisk_core::correlations::{JumpPairConfig, DEFAULT_MIN_OVERLAP, DEFAULT_SIGNIFICANCE_T};
use metrorisk_core::geography::{default_coastal, DivisionMap};
use metrorisk_core::integration::DEFAULT_WINDOW;
use metrorisk_core::jumps::JumpConfig;
use metrorisk_core::timeseries::{parse_quarter, TransformConfig, TransformKind};
use metrorisk_core::Quarter;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

fn q(s: &str) -> Quarter {
    parse_quarter(s).expect("valid built-in quarter")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cohorts {
    /// Start quarters of the entry-time cohorts.
    pub time: Vec<Quarter>,
    /// Coastal California MSAs by id or name prefix.
    pub ca_coastal: Vec<String>,
    pub us_portfolio_start: Quarter,
    pub ca_portfolio_start: Quarter,
    /// Sub-range used for the integration–risk correlations.
    pub decade: [Quarter; 2],
    /// Factors whose average coefficients are reported.
    pub beta_factors: Vec<String>,
}

impl Default for Cohorts {
    fn default() -> Self {
        Self {
            time: vec![q("1983:Q4"), q("1989:Q2"), q("1992:Q1")],
            ca_coastal: default_coastal(),
            us_portfolio_start: q("1983:Q4"),
            ca_portfolio_start: q("1994:Q4"),
            decade: [q("2000:Q1"), q("2009:Q4")],
            beta_factors: vec!["FEDFUNDS".into(), "UNRATE".into(), "INCOME".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hpi: Option<PathBuf>,
    pub factors: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub out: PathBuf,
    pub income_transform: TransformKind,
    /// Per-factor transform overrides.
    pub transforms: BTreeMap<String, TransformKind>,
    pub window: usize,
    pub prewhiten: bool,
    /// Fixed base quarter for the change in R²; unset = each MSA's first window.
    pub change_base: Option<Quarter>,
    pub jumps: JumpConfig,
    pub min_overlap: usize,
    pub jump_pairs: JumpPairConfig,
    pub significance_t: f64,
    pub summary_thresholds: Vec<f64>,
    pub serial: SerialPolicy,
    pub interaction_residual: ResidualSource,
    pub seed: Option<u64>,
    pub cohorts: Cohorts,
    /// State → division overrides; unset = the built-in census map.
    pub divisions: Option<BTreeMap<String, String>>,
    pub menus: Vec<ContagionMenu>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            hpi: None,
            factors: None,
            scenario: None,
            out: PathBuf::from("out"),
            income_transform: TransformKind::LogPctChange,
            transforms: BTreeMap::new(),
            window: DEFAULT_WINDOW,
            prewhiten: true,
            change_base: None,
            jumps: JumpConfig::default(),
            min_overlap: DEFAULT_MIN_OVERLAP,
            jump_pairs: JumpPairConfig::default(),
            significance_t: DEFAULT_SIGNIFICANCE_T,
            summary_thresholds: vec![2.0, 3.0],
            serial: SerialPolicy::Auto,
            interaction_residual: ResidualSource::Coastal,
            seed: None,
            cohorts: Cohorts::default(),
            divisions: None,
            menus: default_menus(),
        }
    }
}

impl RunConfig {
    /// Parses a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.hpi, &mut cfg.factors, &mut cfg.scenario].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.jumps.jump_threshold <= 0.0 || self.jumps.big_threshold <= 0.0 || self.significance_t <= 0.0 {
            return bad("thresholds must be positive".into());
        }
        if self.summary_thresholds.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return bad("summary thresholds must be positive".into());
        }
        if self.window < 2 {
            return bad(format!("window {} is too short", self.window));
        }
        self.jumps.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.cohorts.time.windows(2).any(|w| w[0] >= w[1]) {
            return bad("time cohort starts must be increasing".into());
        }
        if self.cohorts.decade[0] > self.cohorts.decade[1] {
            return bad("decade range is reversed".into());
        }
        for p in [&self.hpi, &self.factors, &self.scenario].into_iter().flatten() {
            if !p.is_file() {
                return bad(format!("input file {} does not exist", p.display()));
            }
        }
        if self.hpi.is_some() != self.factors.is_some() {
            return bad("hpi and factors inputs must be given together".into());
        }
        Ok(())
    }

    pub fn transform_config(&self) -> TransformConfig {
        let mut t = TransformConfig::standard(self.income_transform);
        for (k, v) in &self.transforms {
            t.transforms.insert(k.clone(), *v);
        }
        t
    }

    pub fn division_map(&self) -> DivisionMap {
        match &self.divisions {
            Some(states) => DivisionMap { states: states.clone() },
            None => DivisionMap::default(),
        }
    }

    /// SHA-256 of the analysis parameters, excluding file locations.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.hpi = None;
        c.factors = None;
        c.scenario = None;
        c.out = PathBuf::new();
        let text = toml::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
