//! Synthetic panels with planted factor structure, jumps and contagion.
//!
//! Randomness comes from ChaCha8 seeded with `seed` (via
//! `SeedableRng::seed_from_u64`). Uniforms are `u64 >> 11` scaled to
//! `[0, 1)`; normals use the Box–Muller transform, consuming two uniforms
//! per pair. Draw order: factors (quarter-major), then per MSA one stationary
//! start value followed by one innovation per quarter.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timeseries::{
    FactorTable, IndexPanel, Msa, MsaSeries, Quarter, QuarterSeries, RawFactorFile, TimeseriesError, TransformConfig,
    TransformKind, STANDARD_FACTORS,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario field '{field}': {reason}")]
    Invalid { field: String, reason: String },

    #[error("cannot parse scenario: {0}")]
    Parse(String),

    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SynthError {
    SynthError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Factor loadings: one value for every factor, or one per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Loadings {
    Uniform(f64),
    PerFactor(Vec<f64>),
}

impl Loadings {
    fn expand(&self, k: usize, field: &str) -> Result<Vec<f64>, SynthError> {
        match self {
            Loadings::Uniform(v) => Ok(vec![*v; k]),
            Loadings::PerFactor(v) if v.len() == k => Ok(v.clone()),
            Loadings::PerFactor(v) => Err(invalid(field, format!("{} loadings for {k} factors", v.len()))),
        }
    }
}

/// Per-MSA parameters. Unset fields fall back to the scenario template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MsaSpec {
    pub id: Option<String>,
    pub name: Option<String>,
    pub state: Option<String>,
    pub loadings: Option<Loadings>,
    /// Loadings at the last quarter; linear interpolation in between.
    pub loadings_end: Option<Loadings>,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    /// Constant added to every quarterly return (percent).
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpPlan {
    pub quarter: Quarter,
    pub msas: Vec<String>,
    /// In units of each MSA's innovation sigma.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContagionPlan {
    pub source: String,
    pub target: String,
    /// `weights[ℓ]` multiplies the source return at `t − ℓ`.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// First return quarter; index levels start at 100 one quarter earlier.
    pub start: Quarter,
    pub n_quarters: usize,
    pub n_factors: usize,
    /// Number of MSAs generated from `template` when `msas` is empty.
    pub n_msas: usize,
    /// States assigned cyclically to generated MSAs.
    pub states: Vec<String>,
    pub template: MsaSpec,
    pub msas: Vec<MsaSpec>,
    pub jumps: Vec<JumpPlan>,
    pub contagion: Vec<ContagionPlan>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            start: Quarter::new(1980, 1).expect("valid"),
            n_quarters: 120,
            n_factors: 12,
            n_msas: 10,
            states: vec!["CA".into()],
            template: MsaSpec {
                loadings: Some(Loadings::Uniform(0.5)),
                sigma: Some(1.0),
                phi: Some(0.0),
                mean: Some(0.0),
                ..MsaSpec::default()
            },
            msas: Vec::new(),
            jumps: Vec::new(),
            contagion: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        toml::from_str(text).map_err(|e| SynthError::Parse(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Factor ids: the standard set first, then `F13`, `F14`, ...
    pub fn factor_ids(&self) -> Vec<String> {
        (0..self.n_factors)
            .map(|i| STANDARD_FACTORS.get(i).map_or_else(|| format!("F{:02}", i + 1), |f| f.0.to_string()))
            .collect()
    }

    pub fn transforms(&self) -> Vec<TransformKind> {
        (0..self.n_factors)
            .map(|i| STANDARD_FACTORS.get(i).map_or(TransformKind::LogLevel, |f| f.1))
            .collect()
    }

    pub fn transform_config(&self) -> TransformConfig {
        TransformConfig {
            transforms: self.factor_ids().into_iter().zip(self.transforms()).collect(),
        }
    }

    pub fn end(&self) -> Quarter {
        self.start.offset(self.n_quarters as i64 - 1)
    }

    /// Fully resolved per-MSA parameters.
    pub fn resolve(&self) -> Result<Vec<ResolvedMsa>, SynthError> {
        if self.n_quarters < 2 {
            return Err(invalid("n_quarters", "need at least 2"));
        }
        let k = self.n_factors;
        let specs: Vec<MsaSpec> = if self.msas.is_empty() {
            if self.states.is_empty() {
                return Err(invalid("states", "empty"));
            }
            (0..self.n_msas)
                .map(|i| MsaSpec {
                    id: Some(format!("M{:04}", i + 1)),
                    name: Some(format!("Synthetic {}", i + 1)),
                    state: Some(self.states[i % self.states.len()].clone()),
                    ..MsaSpec::default()
                })
                .collect()
        } else {
            self.msas.clone()
        };
        if specs.is_empty() {
            return Err(invalid("n_msas", "scenario has no MSAs"));
        }
        let t = &self.template;
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(specs.len());
        for (i, s) in specs.iter().enumerate() {
            let field = |f: &str| format!("msas[{i}].{f}");
            let id = s.id.clone().ok_or_else(|| invalid(field("id"), "missing"))?;
            if !seen.insert(id.clone()) {
                return Err(invalid(field("id"), format!("duplicate id {id}")));
            }
            let loadings = s
                .loadings
                .as_ref()
                .or(t.loadings.as_ref())
                .unwrap_or(&Loadings::Uniform(0.0))
                .expand(k, &field("loadings"))?;
            let loadings_end = match s.loadings_end.as_ref().or(t.loadings_end.as_ref()) {
                Some(l) => l.expand(k, &field("loadings_end"))?,
                None => loadings.clone(),
            };
            let sigma = s.sigma.or(t.sigma).unwrap_or(1.0);
            let phi = s.phi.or(t.phi).unwrap_or(0.0);
            let mean = s.mean.or(t.mean).unwrap_or(0.0);
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(invalid(field("sigma"), format!("{sigma} is negative or non-finite")));
            }
            if !(phi.abs() < 1.0) {
                return Err(invalid(field("phi"), format!("|{phi}| must be below 1")));
            }
            if !mean.is_finite() || loadings.iter().chain(&loadings_end).any(|v| !v.is_finite()) {
                return Err(invalid(field("loadings"), "non-finite value"));
            }
            out.push(ResolvedMsa {
                msa: Msa::new(
                    id.clone(),
                    s.name.clone().unwrap_or_else(|| id.clone()),
                    s.state.clone().or(t.state.clone()).unwrap_or_else(|| "CA".into()),
                ),
                loadings,
                loadings_end,
                sigma,
                phi,
                mean,
            });
        }
        let ids: BTreeSet<&str> = out.iter().map(|m| m.msa.id.as_str()).collect();
        for (j, plan) in self.jumps.iter().enumerate() {
            if plan.quarter < self.start || plan.quarter > self.end() {
                return Err(invalid(format!("jumps[{j}].quarter"), format!("{} outside the scenario", plan.quarter)));
            }
            if let Some(m) = plan.msas.iter().find(|m| !ids.contains(m.as_str())) {
                return Err(invalid(format!("jumps[{j}].msas"), format!("unknown MSA {m}")));
            }
            if !plan.magnitude.is_finite() {
                return Err(invalid(format!("jumps[{j}].magnitude"), "non-finite"));
            }
        }
        let targets: BTreeSet<&str> = self.contagion.iter().map(|c| c.target.as_str()).collect();
        for (j, plan) in self.contagion.iter().enumerate() {
            let f = |x: &str| format!("contagion[{j}].{x}");
            for (name, id) in [("source", &plan.source), ("target", &plan.target)] {
                if !ids.contains(id.as_str()) {
                    return Err(invalid(f(name), format!("unknown MSA {id}")));
                }
            }
            if plan.source == plan.target {
                return Err(invalid(f("target"), "source and target coincide"));
            }
            if targets.contains(plan.source.as_str()) {
                return Err(invalid(f("source"), "a contagion source cannot itself be a target"));
            }
            if plan.weights.is_empty() || plan.weights.iter().any(|w| !w.is_finite()) {
                return Err(invalid(f("weights"), "need at least one finite weight"));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedMsa {
    pub msa: Msa,
    pub loadings: Vec<f64>,
    pub loadings_end: Vec<f64>,
    pub sigma: f64,
    pub phi: f64,
    pub mean: f64,
}

impl ResolvedMsa {
    /// Loadings at quarter index `t` of `n`.
    pub fn loadings_at(&self, t: usize, n: usize) -> Vec<f64> {
        let w = if n > 1 { t as f64 / (n - 1) as f64 } else { 0.0 };
        self.loadings.iter().zip(&self.loadings_end).map(|(a, b)| a + (b - a) * w).collect()
    }

    /// Autocovariance of the AR(1) idiosyncratic term at lag `h`.
    fn gamma(&self, h: usize) -> f64 {
        self.sigma * self.sigma * self.phi.powi(h as i32) / (1.0 - self.phi * self.phi)
    }
}

/// Everything planted in a generated panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub start: Quarter,
    pub n_quarters: usize,
    pub factor_ids: Vec<String>,
    pub msas: Vec<ResolvedMsa>,
    pub jumps: Vec<JumpPlan>,
    pub contagion: Vec<ContagionPlan>,
    /// Actual jump sizes added, by `(msa, quarter)`.
    pub planted_jumps: Vec<(String, Quarter, f64)>,
}

impl GroundTruth {
    /// Share of return variance at quarter index `t` explained by the
    /// contemporaneous factors. Lagged factor terms and idiosyncratic noise
    /// arriving through contagion count as unexplained; planted jumps are
    /// ignored. Zero when the return has no variance.
    pub fn signal_share(&self, msa: usize, t: usize) -> f64 {
        let n = self.n_quarters;
        let m = &self.msas[msa];
        let mut contemporaneous = m.loadings_at(t, n);
        let mut unexplained = m.gamma(0);
        for plan in self.contagion.iter().filter(|c| c.target == m.msa.id) {
            let s = self.msas.iter().find(|x| x.msa.id == plan.source).expect("validated");
            for (l, w) in plan.weights.iter().enumerate() {
                if l > t {
                    break;
                }
                let bs = s.loadings_at(t - l, n);
                if l == 0 {
                    for (c, b) in contemporaneous.iter_mut().zip(&bs) {
                        *c += w * b;
                    }
                } else {
                    unexplained += w * w * bs.iter().map(|b| b * b).sum::<f64>();
                }
            }
            let lags = plan.weights.len().min(t + 1);
            for a in 0..lags {
                for b in 0..lags {
                    unexplained += plan.weights[a] * plan.weights[b] * s.gamma(a.abs_diff(b));
                }
            }
        }
        let explained: f64 = contemporaneous.iter().map(|b| b * b).sum();
        let total = explained + unexplained;
        if total > 0.0 {
            explained / total
        } else {
            0.0
        }
    }
}

/// Output of [`generate_panel`].
#[derive(Debug, Clone)]
pub struct SyntheticPanel {
    pub index: IndexPanel,
    /// Transformed factors over the return quarters.
    pub factors: FactorTable,
    /// Raw levels that reproduce `factors` under the scenario's transforms,
    /// starting one quarter before the first return.
    pub raw_factors: RawFactorFile,
    pub truth: GroundTruth,
}

/// Box–Muller standard normals over a ChaCha8 stream.
struct Normals {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Normals {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Generates returns, index levels and factors for `config`.
pub fn generate_panel(config: &ScenarioConfig) -> Result<SyntheticPanel, SynthError> {
    let msas = config.resolve()?;
    let n = config.n_quarters;
    let k = config.n_factors;
    let mut normals = Normals::new(config.seed);
    let mut factors = vec![vec![0.0; n]; k];
    for t in 0..n {
        for f in factors.iter_mut() {
            f[t] = normals.next();
        }
    }
    let mut returns: Vec<Vec<f64>> = Vec::with_capacity(msas.len());
    for m in &msas {
        let mut u = m.sigma / (1.0 - m.phi * m.phi).sqrt() * normals.next();
        let mut r = Vec::with_capacity(n);
        for t in 0..n {
            let e = normals.next();
            if t > 0 {
                u = m.phi * u + m.sigma * e;
            }
            let beta = m.loadings_at(t, n);
            let systematic: f64 = beta.iter().zip(&factors).map(|(b, f)| b * f[t]).sum();
            r.push(m.mean + systematic + u);
        }
        returns.push(r);
    }
    let pos: BTreeMap<&str, usize> = msas.iter().enumerate().map(|(i, m)| (m.msa.id.as_str(), i)).collect();
    let mut planted = Vec::new();
    for plan in &config.jumps {
        let t = config.start.quarters_until(plan.quarter) as usize;
        for id in &plan.msas {
            let i = pos[id.as_str()];
            let size = plan.magnitude * msas[i].sigma;
            returns[i][t] += size;
            planted.push((id.clone(), plan.quarter, size));
        }
    }
    for plan in &config.contagion {
        let s = pos[plan.source.as_str()];
        let d = pos[plan.target.as_str()];
        let src = returns[s].clone();
        for t in 0..n {
            for (l, w) in plan.weights.iter().enumerate() {
                if l <= t {
                    returns[d][t] += w * src[t - l];
                }
            }
        }
    }
    let base = config.start.pred();
    let members = msas
        .iter()
        .zip(&returns)
        .map(|(m, r)| {
            let mut levels = Vec::with_capacity(n + 1);
            let mut cum = 0.0;
            levels.push(100.0);
            for x in r {
                cum += x / 100.0;
                levels.push(100.0 * cum.exp());
            }
            MsaSeries {
                msa: m.msa.clone(),
                series: QuarterSeries::new(base, levels),
            }
        })
        .collect();
    let index = IndexPanel::new(members)?;
    let ids = config.factor_ids();
    let kinds = config.transforms();
    let table = FactorTable::from_transformed(
        config.start,
        ids.clone(),
        kinds.clone(),
        factors.iter().map(|c| c.iter().map(|&v| Some(v)).collect()).collect(),
    )?;
    let raw_columns = factors
        .iter()
        .zip(&kinds)
        .map(|(c, kind)| match kind {
            TransformKind::LogLevel => std::iter::once(None).chain(c.iter().map(|v| Some(v.exp()))).collect(),
            TransformKind::LogPctChange => {
                let mut acc = 0.0;
                std::iter::once(Some(100.0))
                    .chain(c.iter().map(|v| {
                        acc += v / 100.0;
                        Some(100.0 * f64::exp(acc))
                    }))
                    .collect()
            }
        })
        .collect();
    Ok(SyntheticPanel {
        index,
        factors: table,
        raw_factors: RawFactorFile {
            start: base,
            factor_ids: ids.clone(),
            columns: raw_columns,
        },
        truth: GroundTruth {
            seed: config.seed,
            start: config.start,
            n_quarters: n,
            factor_ids: ids,
            msas,
            jumps: config.jumps.clone(),
            contagion: config.contagion.clone(),
            planted_jumps: planted,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsaTruth {
    pub msa_id: String,
    pub signal_share_first: f64,
    pub signal_share_last: f64,
    pub loadings_first: Vec<f64>,
    pub loadings_last: Vec<f64>,
    pub sigma: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedJump {
    pub msa_id: String,
    pub quarter: Quarter,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruthReport {
    pub seed: u64,
    pub factor_ids: Vec<String>,
    pub msas: Vec<MsaTruth>,
    pub jumps: Vec<PlantedJump>,
    pub contagion: Vec<ContagionPlan>,
}

/// Expected statistics for test harnesses.
pub fn ground_truth_report(truth: &GroundTruth) -> GroundTruthReport {
    let n = truth.n_quarters;
    GroundTruthReport {
        seed: truth.seed,
        factor_ids: truth.factor_ids.clone(),
        msas: truth
            .msas
            .iter()
            .enumerate()
            .map(|(i, m)| MsaTruth {
                msa_id: m.msa.id.clone(),
                signal_share_first: truth.signal_share(i, 0),
                signal_share_last: truth.signal_share(i, n - 1),
                loadings_first: m.loadings_at(0, n),
                loadings_last: m.loadings_at(n - 1, n),
                sigma: m.sigma,
                phi: m.phi,
            })
            .collect(),
        jumps: truth
            .planted_jumps
            .iter()
            .map(|(id, q, size)| PlantedJump {
                msa_id: id.clone(),
                quarter: *q,
                size: *size,
            })
            .collect(),
        contagion: truth.contagion.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integration::rolling_factor_model;
    use crate::timeseries::{align, compute_returns, parse_quarter};

    fn scenario(toml: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml_str(toml).unwrap()
    }

    #[test]
    fn zero_everything_is_flat() {
        let c = scenario("n_msas = 2\nn_factors = 3\nn_quarters = 40\n[template]\nloadings = 0.0\nsigma = 0.0\n");
        let p = generate_panel(&c).unwrap();
        for m in p.index.members() {
            assert!(m.series.values.iter().all(|&v| v == 100.0));
        }
    }

    #[test]
    fn pure_factor_msa_has_unit_r_square() {
        let c = scenario("n_msas = 1\nn_factors = 4\nn_quarters = 60\n[template]\nloadings = [0.5, -1.0, 2.0, 0.25]\nsigma = 0.0\n");
        let p = generate_panel(&c).unwrap();
        let r = compute_returns(&p.index).unwrap();
        let m = &r.members()[0];
        let d = align(&m.msa.id, &m.series, &p.factors).unwrap();
        let s = rolling_factor_model(&d, 20).unwrap();
        assert!(s.r_square.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn deterministic_per_seed() {
        let c = ScenarioConfig {
            seed: 11,
            ..ScenarioConfig::default()
        };
        let a = generate_panel(&c).unwrap();
        let b = generate_panel(&c).unwrap();
        assert_eq!(a.index, b.index);
        assert_eq!(a.factors, b.factors);
        let d = generate_panel(&ScenarioConfig { seed: 12, ..c }).unwrap();
        assert_ne!(a.index, d.index);
    }

    #[test]
    fn raw_factors_invert_to_transformed() {
        let c = ScenarioConfig::default();
        let p = generate_panel(&c).unwrap();
        let raw = &p.raw_factors;
        let table = FactorTable::from_raw(raw.start, raw.factor_ids.clone(), raw.columns.clone(), &c.transform_config()).unwrap();
        for f in 0..c.n_factors {
            for q in crate::timeseries::quarter_range(c.start, c.end()) {
                let a = table.value(f, q).unwrap();
                let b = p.factors.value(f, q).unwrap();
                assert!((a - b).abs() < 1e-9, "{f} {q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normals_have_unit_moments() {
        let mut n = Normals::new(3);
        let xs: Vec<f64> = (0..200_000).map(|_| n.next()).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
        assert!(m.abs() < 0.01);
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn signal_share_closed_form() {
        let c = scenario("n_msas = 1\nn_factors = 2\n[template]\nloadings = [1.0, 1.0]\nsigma = 1.0\nphi = 0.5\n");
        let p = generate_panel(&c).unwrap();
        // explained 2, noise variance 1 / 0.75
        let expect = 2.0 / (2.0 + 1.0 / 0.75);
        assert!((p.truth.signal_share(0, 10) - expect).abs() < 1e-15);
    }

    #[test]
    fn report_examples() {
        let c = scenario(
            r#"
n_msas = 3
n_factors = 2
[[jumps]]
quarter = "1990:Q1"
msas = ["M0002"]
magnitude = 6.0
[[contagion]]
source = "M0001"
target = "M0003"
weights = [0.6, 0.3]
"#,
        );
        let p = generate_panel(&c).unwrap();
        let rep = ground_truth_report(&p.truth);
        assert_eq!(rep.jumps.len(), 1);
        assert_eq!(rep.jumps[0].quarter, parse_quarter("1990:Q1").unwrap());
        assert_eq!(rep.contagion[0].weights, vec![0.6, 0.3]);
        let none = ground_truth_report(&generate_panel(&ScenarioConfig::default()).unwrap().truth);
        assert!(none.contagion.is_empty() && none.jumps.is_empty());
    }

    #[test]
    fn invalid_fields_are_named() {
        let bad = |t: &str| match generate_panel(&scenario(t)) {
            Err(SynthError::Invalid { field, .. }) => field,
            other => panic!("expected invalid, got {other:?}"),
        };
        assert_eq!(bad("[template]\nphi = 1.0\n"), "msas[0].phi");
        assert_eq!(bad("[template]\nsigma = -1.0\n"), "msas[0].sigma");
        assert_eq!(bad("n_factors = 2\n[template]\nloadings = [1.0]\n"), "msas[0].loadings");
        assert_eq!(
            bad("[[contagion]]\nsource = \"M0001\"\ntarget = \"M0001\"\nweights = [1.0]\n"),
            "contagion[0].target"
        );
        assert_eq!(bad("[[jumps]]\nquarter = \"1970:Q1\"\nmsas = [\"M0001\"]\nmagnitude = 6.0\n"), "jumps[0].quarter");
        assert!(matches!(ScenarioConfig::from_toml_str("nope = 1"), Err(SynthError::Parse(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = scenario("seed = 5\n[[msas]]\nid = \"a\"\nloadings = [1.0, 2.0]\n[[msas]]\nid = \"b\"\n");
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, back);
    }
}
