use super::{ols_fit_with_min_df, Design, RegressError};

/// Linear time trend `y_t = a + b t`, `t = 0, 1, 2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    pub intercept: f64,
    /// Per quarter.
    pub slope: f64,
    pub slope_se: f64,
    pub slope_t_stat: f64,
    pub residuals: Vec<f64>,
}

pub fn trend_fit(series: &[f64]) -> Result<TrendFit, RegressError> {
    let n = series.len();
    if n < 3 {
        return Err(RegressError::InsufficientObservations { required: 3, actual: n });
    }
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let design = Design::with_intercept([("trend", t)], n)?;
    let fit = ols_fit_with_min_df(&design, series, 1)?;
    Ok(TrendFit {
        intercept: fit.coefficients[0],
        slope: fit.coefficients[1],
        slope_se: fit.std_errors[1],
        slope_t_stat: fit.t_stats[1],
        residuals: fit.residuals,
    })
}
