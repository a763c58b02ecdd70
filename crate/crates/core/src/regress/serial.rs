use super::{ols_fit_with_min_df, t_ratio, Design, FitMethod, RegressError, RegressionFit};

pub const CO_DEFAULT_TOL: f64 = 1e-6;
pub const CO_DEFAULT_MAX_ITER: usize = 50;

/// `sum_{t>=2} (e_t - e_{t-1})^2 / sum e_t^2`.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64, RegressError> {
    if residuals.len() < 2 {
        return Err(RegressError::InsufficientObservations {
            required: 2,
            actual: residuals.len(),
        });
    }
    let den: f64 = residuals.iter().map(|e| e * e).sum();
    if den == 0.0 {
        return Err(RegressError::Undefined("Durbin-Watson with all-zero residuals".into()));
    }
    let num: f64 = residuals.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    Ok(num / den)
}

/// Fits the quasi-differenced model `y_t - rho y_{t-1}` on
/// `x_t - rho x_{t-1}` for rows `2..n`, keeping the intercept column as ones.
/// The intercept and its standard error are reported on the original scale
/// (divided by `1 - rho`); residual diagnostics refer to the transformed
/// model.
pub fn quasi_difference_fit(design: &Design, y: &[f64], rho: f64) -> Result<RegressionFit, RegressError> {
    let n = design.n_obs();
    if n < 2 || y.len() != n {
        return Err(RegressError::InsufficientObservations { required: 2, actual: n });
    }
    if !(rho.abs() < 1.0) {
        return Err(RegressError::NonStationary { rho, iteration: 0 });
    }
    let intercept = design.intercept_index();
    let cols: Vec<Vec<f64>> = design
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if Some(j) == intercept {
                vec![1.0; n - 1]
            } else {
                (1..n).map(|t| c[t] - rho * c[t - 1]).collect()
            }
        })
        .collect();
    let ys: Vec<f64> = (1..n).map(|t| y[t] - rho * y[t - 1]).collect();
    let transformed = Design::new(design.names().to_vec(), cols)?;
    let mut fit = ols_fit_with_min_df(&transformed, &ys, 2)?;
    if let Some(ic) = intercept {
        let scale = 1.0 / (1.0 - rho);
        fit.coefficients[ic] *= scale;
        fit.std_errors[ic] *= scale;
        fit.t_stats[ic] = t_ratio(fit.coefficients[ic], fit.std_errors[ic]);
    }
    fit.method = FitMethod::CochraneOrcutt;
    fit.rho = Some(rho);
    Ok(fit)
}

fn lag_one_rho(e: &[f64]) -> f64 {
    let num: f64 = e.windows(2).map(|w| w[1] * w[0]).sum();
    let den: f64 = e[..e.len() - 1].iter().map(|v| v * v).sum();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Iterated Cochrane–Orcutt. Each pass estimates `rho` from the
/// original-scale residuals of the current coefficients and re-fits the
/// quasi-differenced model, stopping when `|rho_k - rho_{k-1}| < tol`
/// (with `rho_0 = 0`).
pub fn cochrane_orcutt(
    design: &Design,
    y: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<RegressionFit, RegressError> {
    let required = design.n_cols() + 3;
    if design.n_obs() < required {
        return Err(RegressError::InsufficientObservations {
            required,
            actual: design.n_obs(),
        });
    }
    let ols = ols_fit_with_min_df(design, y, 2)?;
    let mut coefficients = ols.coefficients.clone();
    let mut last = ols;
    let mut rho_prev = 0.0;
    for iteration in 1..=max_iter {
        let fitted = design.predict(&coefficients);
        let e: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let rho = lag_one_rho(&e);
        if !(rho.abs() < 1.0) {
            return Err(RegressError::NonStationary { rho, iteration });
        }
        let fit = quasi_difference_fit(design, y, rho)?;
        if (rho - rho_prev).abs() < tol {
            return Ok(fit);
        }
        coefficients = fit.coefficients.clone();
        rho_prev = rho;
        last = fit;
    }
    Err(RegressError::NotConverged {
        iterations: max_iter,
        last: Box::new(last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::ols_fit;
    use proptest::prelude::*;

    #[test]
    fn dw_examples() {
        // numerator 4 * 4 = 16, denominator 5
        assert!((durbin_watson(&[1.0, -1.0, 1.0, -1.0, 1.0]).unwrap() - 3.2).abs() < 1e-15);
        assert_eq!(durbin_watson(&[0.7; 9]).unwrap(), 0.0);
        assert!(matches!(durbin_watson(&[0.0; 4]), Err(RegressError::Undefined(_))));
        assert!(durbin_watson(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn dw_in_range(e in prop::collection::vec(-100.0f64..100.0, 2..80)) {
            if let Ok(d) = durbin_watson(&e) {
                prop_assert!((0.0..=4.0 + 1e-12).contains(&d), "{d}");
            }
        }
    }

    fn xy_with_uncorrelated_residuals() -> (Design, Vec<f64>) {
        // residual pattern 0,1,0,-1,... has zero lag-one product sum; the x
        // values at its nonzero positions are equal so it is orthogonal to x.
        let n = 24;
        let pattern = [0.0, 1.0, 0.0, -1.0];
        let x: Vec<f64> = (0..n)
            .map(|t| if t % 2 == 1 { 2.0 } else { (t as f64) * 0.5 })
            .collect();
        let y: Vec<f64> = (0..n).map(|t| 1.0 + 0.8 * x[t] + pattern[t % 4]).collect();
        (Design::with_intercept([("x", x)], n).unwrap(), y)
    }

    #[test]
    fn zero_rho_fixed_point_matches_ols() {
        let (d, y) = xy_with_uncorrelated_residuals();
        let ols = ols_fit(&d, &y).unwrap();
        let co = cochrane_orcutt(&d, &y, CO_DEFAULT_TOL, CO_DEFAULT_MAX_ITER).unwrap();
        assert!(co.rho.unwrap().abs() < CO_DEFAULT_TOL);
        for (a, b) in co.coefficients.iter().zip(&ols.coefficients) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert_eq!(co.method, FitMethod::CochraneOrcutt);
        assert_eq!(co.n_obs, ols.n_obs - 1);
    }

    #[test]
    fn forced_zero_rho_equals_ols_on_same_rows() {
        let (d, y) = xy_with_uncorrelated_residuals();
        let co = quasi_difference_fit(&d, &y, 0.0).unwrap();
        let n = y.len();
        let ols = ols_fit(&d.rows(1, n), &y[1..]).unwrap();
        assert_eq!(co.coefficients, ols.coefficients);
        assert_eq!(co.std_errors, ols.std_errors);
        assert_eq!(co.residuals, ols.residuals);
        assert_eq!(co.r_square, ols.r_square);
    }

    #[test]
    fn max_iter_zero_is_non_convergence() {
        let (d, y) = xy_with_uncorrelated_residuals();
        match cochrane_orcutt(&d, &y, CO_DEFAULT_TOL, 0) {
            Err(RegressError::NotConverged { iterations: 0, last }) => assert_eq!(last.method, FitMethod::Ols),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn recovers_known_intercept_under_quasi_differencing() {
        // y_t = 2 + 0.5 x_t + u_t, u_t = 0.5 u_{t-1} with u_0 = 1 (noise-free AR(1))
        let n = 30;
        let x: Vec<f64> = (0..n).map(|t| ((t * 37) % 11) as f64).collect();
        let mut u = 1.0;
        let y: Vec<f64> = (0..n)
            .map(|t| {
                let v = 2.0 + 0.5 * x[t] + u;
                u *= 0.5;
                v
            })
            .collect();
        let d = Design::with_intercept([("x", x)], n).unwrap();
        let fit = quasi_difference_fit(&d, &y, 0.5).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((fit.coefficients[1] - 0.5).abs() < 1e-10);
    }
}
