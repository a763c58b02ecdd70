use super::{ols_fit_with_min_df, Design, RegressError};

/// Output of AR(1) pre-whitening.
#[derive(Debug, Clone, PartialEq)]
pub struct Prewhitened {
    /// Residuals with the series mean added back. Length `n` for lag 0 and
    /// `n - 1` for lag 1.
    pub residuals: Vec<f64>,
    /// Leading observations consumed (equal to `lag_order`).
    pub offset: usize,
    pub lag_order: u8,
    /// AR(1) coefficient estimate (reported even when lag 0 wins).
    pub phi: f64,
    pub near_unit_root: bool,
    /// `[AR(0), AR(1)]`
    pub bic: [f64; 2],
    pub aic: [f64; 2],
}

/// Chooses between AR(0) and AR(1) by BIC (AIC breaks exact ties; lag 0 if
/// still tied), both fitted by conditional least squares on observations
/// `2..n`.
pub fn ar1_prewhiten(series: &[f64]) -> Result<Prewhitened, RegressError> {
    let n = series.len();
    if n < 10 {
        return Err(RegressError::InsufficientObservations { required: 10, actual: n });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::Invalid("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let lag0 = |phi: f64, bic, aic| Prewhitened {
        residuals: series.to_vec(),
        offset: 0,
        lag_order: 0,
        phi,
        near_unit_root: phi.abs() >= 1.0,
        bic,
        aic,
    };

    let y = &series[1..];
    let m = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / m;
    let ssr0: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    if ssr0 == 0.0 {
        return Ok(lag0(0.0, [f64::NEG_INFINITY; 2], [f64::NEG_INFINITY; 2]));
    }
    let design = Design::with_intercept([("lag1", series[..n - 1].to_vec())], n - 1)?;
    let fit = match ols_fit_with_min_df(&design, y, 1) {
        Ok(f) => f,
        Err(RegressError::Singular { .. }) => {
            return Ok(lag0(0.0, [f64::NAN; 2], [f64::NAN; 2]));
        }
        Err(e) => return Err(e),
    };
    let (c, phi) = (fit.coefficients[0], fit.coefficients[1]);
    let ssr1: f64 = fit.residuals.iter().map(|e| e * e).sum();

    let info = |ssr: f64, params: f64, penalty: f64| m * (ssr / m).ln() + params * penalty;
    let bic = [info(ssr0, 1.0, m.ln()), info(ssr1, 2.0, m.ln())];
    let aic = [info(ssr0, 1.0, 2.0), info(ssr1, 2.0, 2.0)];
    let choose_ar1 = if bic[1] != bic[0] {
        bic[1] < bic[0]
    } else {
        aic[1] < aic[0]
    };
    if !choose_ar1 {
        return Ok(lag0(phi, bic, aic));
    }
    let residuals = (1..n).map(|t| series[t] - c - phi * series[t - 1] + mean).collect();
    Ok(Prewhitened {
        residuals,
        offset: 1,
        lag_order: 1,
        phi,
        near_unit_root: phi.abs() >= 1.0,
        bic,
        aic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_lag_zero() {
        let p = ar1_prewhiten(&[2.5; 20]).unwrap();
        assert_eq!(p.lag_order, 0);
        assert_eq!(p.residuals, vec![2.5; 20]);
    }

    #[test]
    fn deterministic_ar1_is_detected() {
        // x_t = 0.8 x_{t-1} + small deterministic wiggle
        let mut x = vec![5.0];
        for t in 1..60 {
            let prev = x[t - 1];
            x.push(0.8 * prev + 0.3 * ((t as f64) * 1.7).sin());
        }
        let p = ar1_prewhiten(&x).unwrap();
        assert_eq!(p.lag_order, 1);
        assert_eq!(p.offset, 1);
        assert_eq!(p.residuals.len(), 59);
        assert!((p.phi - 0.8).abs() < 0.1, "{}", p.phi);
        let mean = x.iter().sum::<f64>() / 60.0;
        let rmean = p.residuals.iter().sum::<f64>() / 59.0;
        assert!((rmean - mean).abs() < 1e-9);
    }

    #[test]
    fn short_series_rejected() {
        assert!(ar1_prewhiten(&[1.0; 9]).is_err());
    }

    #[test]
    fn explosive_series_flagged() {
        let x: Vec<f64> = (0..30).map(|t| 1.1f64.powi(t) + if t % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let p = ar1_prewhiten(&x).unwrap();
        assert_eq!(p.lag_order, 1);
        assert!(p.near_unit_root);
    }
}
