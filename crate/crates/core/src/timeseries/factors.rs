use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Quarter, TimeseriesError};

/// How a raw factor level becomes a regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `100 * ln(x_t / x_{t-1})`
    LogPctChange,
    /// `ln(x_t)`
    LogLevel,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::LogPctChange => "log_pct_change",
            TransformKind::LogLevel => "log_level",
        })
    }
}

impl FromStr for TransformKind {
    type Err = TimeseriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "log_pct_change" => Ok(Self::LogPctChange),
            "log_level" => Ok(Self::LogLevel),
            other => Err(TimeseriesError::Config(format!("unknown transform '{other}'"))),
        }
    }
}

/// National factor set, in column order. INCOME's transform is configurable.
pub const STANDARD_FACTORS: [(&str, TransformKind); 12] = [
    ("CNP16OV", TransformKind::LogPctChange),
    ("CPILFESL", TransformKind::LogPctChange),
    ("FEDFUNDS", TransformKind::LogLevel),
    ("GS10", TransformKind::LogLevel),
    ("INDPRO", TransformKind::LogPctChange),
    ("PAYEMS", TransformKind::LogPctChange),
    ("PERMIT1", TransformKind::LogLevel),
    ("PPIITM", TransformKind::LogPctChange),
    ("UMCSENT", TransformKind::LogLevel),
    ("UNRATE", TransformKind::LogLevel),
    ("SP500", TransformKind::LogPctChange),
    ("INCOME", TransformKind::LogPctChange),
];

/// Mapping from factor id to transform kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub transforms: BTreeMap<String, TransformKind>,
}

impl TransformConfig {
    /// The standard 12-factor mapping; `income` selects INCOME's transform.
    pub fn standard(income: TransformKind) -> Self {
        let transforms = STANDARD_FACTORS
            .iter()
            .map(|&(id, kind)| {
                let kind = if id == "INCOME" { income } else { kind };
                (id.to_string(), kind)
            })
            .collect();
        Self { transforms }
    }

    pub fn get(&self, factor_id: &str) -> Option<TransformKind> {
        self.transforms.get(factor_id).copied()
    }

    /// Reads a TOML table of `factor_id = "log_level" | "log_pct_change"`,
    /// optionally nested under `[transforms]`.
    pub fn from_toml_str(text: &str) -> Result<Self, TimeseriesError> {
        let value: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| TimeseriesError::Config(e.to_string()))?;
        let table = match value.get("transforms") {
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => return Err(TimeseriesError::Config("'transforms' must be a table".into())),
            None => value,
        };
        let mut transforms = BTreeMap::new();
        for (k, v) in table {
            let s = v
                .as_str()
                .ok_or_else(|| TimeseriesError::Config(format!("transform for {k} must be a string")))?;
            transforms.insert(k, s.parse()?);
        }
        Ok(Self { transforms })
    }

    pub fn to_toml_string(&self) -> String {
        let mut out = String::from("[transforms]\n");
        for (k, v) in &self.transforms {
            out.push_str(&format!("{k} = \"{v}\"\n"));
        }
        out
    }
}

/// Applies `kind` to raw levels. Missing inputs stay missing, and a
/// percent change needs both endpoints present; the first percent change is
/// always missing.
pub fn transform_factor(
    raw: &[Option<f64>],
    kind: TransformKind,
) -> Result<Vec<Option<f64>>, TimeseriesError> {
    for (i, v) in raw.iter().enumerate() {
        if let Some(x) = v {
            if !(*x > 0.0) {
                return Err(TimeseriesError::FactorDomain {
                    index: i,
                    value: *x,
                    kind,
                });
            }
        }
    }
    Ok(match kind {
        TransformKind::LogLevel => raw.iter().map(|v| v.map(f64::ln)).collect(),
        TransformKind::LogPctChange => {
            let present = raw.iter().filter(|v| v.is_some()).count();
            if present < 2 {
                return Err(TimeseriesError::Shape(
                    "log_pct_change needs at least two observations".into(),
                ));
            }
            let mut out = Vec::with_capacity(raw.len());
            out.push(None);
            out.extend(raw.windows(2).map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(100.0 * (b / a).ln()),
                _ => None,
            }));
            out
        }
    })
}

/// Transformed factor observations over a contiguous quarter range.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorTable {
    start: Quarter,
    len: usize,
    factor_ids: Vec<String>,
    transforms: Vec<TransformKind>,
    /// `columns[f][t]`
    columns: Vec<Vec<Option<f64>>>,
}

impl FactorTable {
    /// Builds a table from already-transformed columns.
    pub fn from_transformed(
        start: Quarter,
        factor_ids: Vec<String>,
        transforms: Vec<TransformKind>,
        columns: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, TimeseriesError> {
        if factor_ids.len() != columns.len() || transforms.len() != columns.len() {
            return Err(TimeseriesError::Shape("factor ids, transforms and columns disagree".into()));
        }
        let len = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != len) {
            return Err(TimeseriesError::Shape("factor columns have unequal lengths".into()));
        }
        Ok(Self {
            start,
            len,
            factor_ids,
            transforms,
            columns,
        })
    }

    /// Transforms raw columns with `config`. Every factor must be mapped.
    pub fn from_raw(
        start: Quarter,
        factor_ids: Vec<String>,
        raw_columns: Vec<Vec<Option<f64>>>,
        config: &TransformConfig,
    ) -> Result<Self, TimeseriesError> {
        let mut transforms = Vec::with_capacity(factor_ids.len());
        let mut columns = Vec::with_capacity(factor_ids.len());
        for (id, raw) in factor_ids.iter().zip(&raw_columns) {
            let kind = config
                .get(id)
                .ok_or_else(|| TimeseriesError::Config(format!("no transform configured for factor {id}")))?;
            let col = transform_factor(raw, kind).map_err(|e| match e {
                TimeseriesError::FactorDomain { index, value, kind } => TimeseriesError::Ingest {
                    row: index + 2,
                    reason: format!("factor {id}: value {value} is not positive under {kind}"),
                },
                other => other,
            })?;
            transforms.push(kind);
            columns.push(col);
        }
        Self::from_transformed(start, factor_ids, transforms, columns)
    }

    pub fn start(&self) -> Quarter {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn end(&self) -> Option<Quarter> {
        (self.len > 0).then(|| self.start.offset(self.len as i64 - 1))
    }

    pub fn factor_ids(&self) -> &[String] {
        &self.factor_ids
    }

    pub fn transforms(&self) -> &[TransformKind] {
        &self.transforms
    }

    pub fn n_factors(&self) -> usize {
        self.factor_ids.len()
    }

    pub fn column(&self, idx: usize) -> &[Option<f64>] {
        &self.columns[idx]
    }

    pub fn value(&self, factor: usize, quarter: Quarter) -> Option<f64> {
        let offset = self.start.quarters_until(quarter);
        if offset < 0 {
            return None;
        }
        self.columns[factor].get(offset as usize).copied().flatten()
    }

    pub fn factor_index(&self, id: &str) -> Option<usize> {
        self.factor_ids.iter().position(|f| f == id)
    }

    /// Multiplies one factor column by `c`.
    pub fn with_scaled_column(&self, factor: usize, c: f64) -> Self {
        let mut out = self.clone();
        for v in out.columns[factor].iter_mut().flatten() {
            *v *= c;
        }
        out
    }
}
