//! Regression engine shared by the integration, contagion and portfolio
//! analyses: OLS with classical standard errors, Durbin–Watson,
//! Cochrane–Orcutt, AR(1) pre-whitening and linear trends.

mod ar;
mod dw_bounds;
mod linalg;
mod ols;
mod serial;
mod trend;

pub use ar::{ar1_prewhiten, Prewhitened};
pub use dw_bounds::{dw_bounds, dw_test, DwBounds, DwVerdict};
pub use ols::{ols_fit, ols_fit_with_min_df};
pub use serial::{cochrane_orcutt, durbin_watson, quasi_difference_fit, CO_DEFAULT_MAX_ITER, CO_DEFAULT_TOL};
pub use trend::{trend_fit, TrendFit};

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub const INTERCEPT: &str = "const";

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("singular design: columns {columns:?} are linearly dependent on earlier columns")]
    Singular { columns: Vec<String> },

    #[error("insufficient observations: need at least {required}, got {actual}")]
    InsufficientObservations { required: usize, actual: usize },

    #[error("statistic is undefined: {0}")]
    Undefined(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("serial correlation estimate rho = {rho} is not stationary (iteration {iteration})")]
    NonStationary { rho: f64, iteration: usize },

    #[error("Cochrane-Orcutt did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        last: Box<RegressionFit>,
    },
}

/// Regression design matrix stored by column, with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    names: Vec<String>,
    cols: Vec<Vec<f64>>,
    n: usize,
}

impl Design {
    pub fn new(names: Vec<String>, cols: Vec<Vec<f64>>) -> Result<Self, RegressError> {
        if names.len() != cols.len() {
            return Err(RegressError::Invalid("column names and columns disagree".into()));
        }
        if cols.is_empty() {
            return Err(RegressError::Invalid("design has no columns".into()));
        }
        let n = cols[0].len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(RegressError::Invalid("design columns have unequal lengths".into()));
        }
        if cols.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RegressError::Invalid("design contains non-finite values".into()));
        }
        Ok(Self { names, cols, n })
    }

    /// Prepends a column of ones named [`INTERCEPT`].
    pub fn with_intercept<S: Into<String>>(
        regressors: impl IntoIterator<Item = (S, Vec<f64>)>,
        n: usize,
    ) -> Result<Self, RegressError> {
        let mut names = vec![INTERCEPT.to_string()];
        let mut cols = vec![vec![1.0; n]];
        for (name, col) in regressors {
            names.push(name.into());
            cols.push(col);
        }
        Self::new(names, cols)
    }

    pub fn n_obs(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.cols
    }

    /// Index of the first all-ones column, if any.
    pub fn intercept_index(&self) -> Option<usize> {
        self.cols.iter().position(|c| c.iter().all(|&v| v == 1.0))
    }

    /// Rows `from..to`.
    pub fn rows(&self, from: usize, to: usize) -> Self {
        Self {
            names: self.names.clone(),
            cols: self.cols.iter().map(|c| c[from..to].to_vec()).collect(),
            n: to - from,
        }
    }

    /// Removes the named columns.
    pub fn without(&self, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..self.n_cols()).filter(|j| !drop.contains(j)).collect();
        Self {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            cols: keep.iter().map(|&j| self.cols[j].clone()).collect(),
            n: self.n,
        }
    }

    /// Fitted values `X b`.
    pub fn predict(&self, coefficients: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.cols
                    .iter()
                    .zip(coefficients)
                    .map(|(c, b)| c[i] * b)
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Ols,
    CochraneOrcutt,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMethod::Ols => "ols",
            FitMethod::CochraneOrcutt => "cochrane_orcutt",
        })
    }
}

/// Result of a linear regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    /// `1 - SSR/SST`; zero when the response is constant.
    pub r_square: f64,
    pub residuals: Vec<f64>,
    pub n_obs: usize,
    /// NaN when every residual is exactly zero.
    pub durbin_watson: f64,
    pub method: FitMethod,
    /// Serial-correlation estimate, Cochrane–Orcutt fits only.
    pub rho: Option<f64>,
    /// Residual standard error `sqrt(SSR / (n - k))`.
    pub sigma: f64,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.coefficients[i])
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.t_stats[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.std_errors[i])
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("fit serializes")
    }
}

#[derive(Serialize)]
struct CoefficientJson {
    estimate: f64,
    std_error: f64,
    t_stat: f64,
}

impl Serialize for RegressionFit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coefficients: BTreeMap<&str, CoefficientJson> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.as_str(),
                    CoefficientJson {
                        estimate: self.coefficients[i],
                        std_error: self.std_errors[i],
                        t_stat: self.t_stats[i],
                    },
                )
            })
            .collect();
        let mut s = serializer.serialize_struct("RegressionFit", 6)?;
        s.serialize_field("coefficients", &coefficients)?;
        s.serialize_field("n", &self.n_obs)?;
        s.serialize_field("r_square", &self.r_square)?;
        s.serialize_field("dw", &finite_or_none(self.durbin_watson))?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("rho", &self.rho)?;
        s.end()
    }
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// `coef / se` when `se > 0`; zero for a zero coefficient with zero
/// standard error; signed infinity otherwise.
pub(crate) fn t_ratio(coef: f64, se: f64) -> f64 {
    if se > 0.0 {
        coef / se
    } else if coef == 0.0 {
        0.0
    } else {
        coef.signum() * f64::INFINITY
    }
}
