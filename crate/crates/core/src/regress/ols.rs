use super::linalg::householder_lstsq;
use super::{durbin_watson, t_ratio, Design, FitMethod, RegressError, RegressionFit};

/// Ordinary least squares with classical standard errors. Requires
/// `n >= k + 2`.
pub fn ols_fit(design: &Design, y: &[f64]) -> Result<RegressionFit, RegressError> {
    ols_fit_with_min_df(design, y, 2)
}

/// [`ols_fit`] with a configurable residual degrees-of-freedom floor.
pub fn ols_fit_with_min_df(design: &Design, y: &[f64], min_df: usize) -> Result<RegressionFit, RegressError> {
    let n = design.n_obs();
    let k = design.n_cols();
    if y.len() != n {
        return Err(RegressError::Invalid(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::Invalid("response contains non-finite values".into()));
    }
    let required = k + min_df.max(1);
    if n < required {
        return Err(RegressError::InsufficientObservations { required, actual: n });
    }

    let ls = householder_lstsq(design.columns(), y).map_err(|cols| RegressError::Singular {
        columns: cols.iter().map(|&j| design.names()[j].clone()).collect(),
    })?;

    let intercept = design.intercept_index();
    let constant_response = y.iter().all(|&v| v == y[0]);
    let coefficients = match intercept {
        // Exact solution: the intercept reproduces a constant response.
        Some(ic) if constant_response => (0..k).map(|j| if j == ic { y[0] } else { 0.0 }).collect(),
        _ => ls.coefficients,
    };

    let fitted = design.predict(&coefficients);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sst: f64 = if intercept.is_some() {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean) * (v - mean)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r_square = if sst == 0.0 { 0.0 } else { 1.0 - ssr / sst };
    let df = (n - k) as f64;
    let sigma = (ssr / df).sqrt();
    let std_errors: Vec<f64> = ls.xtx_inv_diag.iter().map(|d| sigma * d.sqrt()).collect();
    let t_stats = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(&b, &se)| t_ratio(b, se))
        .collect();
    let durbin_watson = durbin_watson(&residuals).unwrap_or(f64::NAN);

    Ok(RegressionFit {
        names: design.names().to_vec(),
        coefficients,
        std_errors,
        t_stats,
        r_square,
        residuals,
        n_obs: n,
        durbin_watson,
        method: FitMethod::Ols,
        rho: None,
        sigma,
    })
}
