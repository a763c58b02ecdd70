//! Durbin–Watson bounds test.
//!
//! The lower and upper bounding statistics for `n` observations and `k`
//! columns (intercept included) are ratios of quadratic forms in
//! independent normals with weights drawn from the eigenvalues
//! `2 (1 - cos(pi j / n))` of the differencing matrix:
//! `d_L` uses `j = 1..n-k`, `d_U` uses `j = k..n-1`. Their lower-tail
//! critical values are found by inverting Imhof's characteristic-function
//! formula for `P(sum a_i z_i^2 < 0)` and bisecting.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use super::RegressError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DwBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DwVerdict {
    NoSerialCorrelation,
    Inconclusive,
    PositiveSerialCorrelation,
    NegativeSerialCorrelation,
}

impl DwVerdict {
    /// Whether the "no first-order serial correlation" null survives. The
    /// inconclusive band counts as a rejection.
    pub fn accepts_null(self) -> bool {
        self == DwVerdict::NoSerialCorrelation
    }
}

impl std::fmt::Display for DwVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DwVerdict::NoSerialCorrelation => "none",
            DwVerdict::Inconclusive => "inconclusive",
            DwVerdict::PositiveSerialCorrelation => "positive",
            DwVerdict::NegativeSerialCorrelation => "negative",
        })
    }
}

type CacheKey = (usize, usize, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, DwBounds>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, DwBounds>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Critical bounds at significance `alpha` for `n` observations and
/// `regressors` slope columns (intercept excluded).
pub fn dw_bounds(n: usize, regressors: usize, alpha: f64) -> Result<DwBounds, RegressError> {
    let k = regressors + 1;
    if n < k + 2 {
        return Err(RegressError::InsufficientObservations {
            required: k + 2,
            actual: n,
        });
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(RegressError::Invalid(format!("alpha {alpha} outside (0, 0.5)")));
    }
    let key = (n, k, alpha.to_bits());
    if let Some(b) = cache().lock().expect("cache lock").get(&key) {
        return Ok(*b);
    }
    let eig = |j: usize| 2.0 * (1.0 - (PI * j as f64 / n as f64).cos());
    let m = n - k;
    let lower_w: Vec<f64> = (1..=m).map(eig).collect();
    let upper_w: Vec<f64> = (k..k + m).map(eig).collect();
    let bounds = DwBounds {
        lower: lower_quantile(&lower_w, alpha),
        upper: lower_quantile(&upper_w, alpha),
    };
    cache().lock().expect("cache lock").insert(key, bounds);
    Ok(bounds)
}

/// Two-sided bounds test of `d` at level `alpha` per tail.
pub fn dw_test(d: f64, n: usize, regressors: usize, alpha: f64) -> Result<(DwVerdict, DwBounds), RegressError> {
    let b = dw_bounds(n, regressors, alpha)?;
    let verdict = if d < b.lower {
        DwVerdict::PositiveSerialCorrelation
    } else if 4.0 - d < b.lower {
        DwVerdict::NegativeSerialCorrelation
    } else if d < b.upper || 4.0 - d < b.upper {
        DwVerdict::Inconclusive
    } else {
        DwVerdict::NoSerialCorrelation
    };
    Ok((verdict, b))
}

/// `c` with `P(sum w_i z_i^2 / sum z_i^2 < c) = alpha`.
fn lower_quantile(weights: &[f64], alpha: f64) -> f64 {
    let (mut lo, mut hi) = (weights[0], weights[weights.len() - 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ratio_cdf(weights, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `P(sum w_i z_i^2 / sum z_i^2 < c) = P(sum (w_i - c) z_i^2 < 0)`.
fn ratio_cdf(weights: &[f64], c: f64) -> f64 {
    let a: Vec<f64> = weights.iter().map(|w| w - c).collect();
    0.5 - imhof_integral(&a) / PI
}

const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// `int_0^inf sin(theta(u)) / (u rho(u)) du` with
/// `theta = 0.5 sum atan(a_i u)`, `rho = prod (1 + a_i^2 u^2)^{1/4}`.
fn imhof_integral(a: &[f64]) -> f64 {
    let integrand = |u: f64| -> f64 {
        if u == 0.0 {
            return 0.5 * a.iter().sum::<f64>();
        }
        let mut theta = 0.0;
        let mut log_rho = 0.0;
        for &ai in a {
            theta += (ai * u).atan();
            log_rho += (ai * ai * u * u).ln_1p();
        }
        (0.5 * theta).sin() / (u * (0.25 * log_rho).exp())
    };
    // Tail beyond U is bounded by 2 / (m rho(U)) for m effective terms.
    let m = a.iter().filter(|v| v.abs() > 1e-12).count().max(1) as f64;
    let log_rho = |u: f64| a.iter().map(|&ai| (ai * ai * u * u).ln_1p()).sum::<f64>() * 0.25;
    let mut upper = 1.0;
    while (2.0 / m) * (-log_rho(upper)).exp() > 1e-10 && upper < 1e12 {
        upper *= 2.0;
    }

    let max_a = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-12);
    let mut width = 0.05 / (max_a * m.sqrt());
    let mut left = 0.0;
    let mut total = 0.0;
    while left < upper {
        let right = (left + width).min(upper);
        let (mid, half) = (0.5 * (left + right), 0.5 * (right - left));
        total += half
            * GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(x, w)| w * integrand(mid + half * x))
                .sum::<f64>();
        left = right;
        width *= 1.04;
    }
    total
}
