//! Householder QR for tall, thin least-squares problems.

/// Relative threshold below which a column is treated as linearly dependent
/// on its predecessors.
pub(crate) const RANK_TOL: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coefficients: Vec<f64>,
    /// Diagonal of `(X'X)^{-1}`.
    pub xtx_inv_diag: Vec<f64>,
}

/// Solves `min ||y - X b||` for column-major `cols`. On rank deficiency
/// returns the indices of columns that depend on earlier ones.
pub(crate) fn householder_lstsq(cols: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, Vec<usize>> {
    let k = cols.len();
    let n = y.len();
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut qty = y.to_vec();
    let orig_norms: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut dependent = Vec::new();
    let mut r = vec![vec![0.0; k]; k];

    // `p` counts applied reflections; dependent columns are skipped so later
    // columns are still tested against the span of the independent ones.
    let mut p = 0;
    for j in 0..k {
        let tail_norm = if p < n { norm(&a[j][p..]) } else { 0.0 };
        if orig_norms[j] == 0.0 || tail_norm <= RANK_TOL * orig_norms[j] {
            dependent.push(j);
            continue;
        }
        // v = x - alpha e0 with alpha = -sign(x0) ||x||; H = I - 2 v v' / v'v
        let alpha = if a[j][p] >= 0.0 { -tail_norm } else { tail_norm };
        let mut v: Vec<f64> = a[j][p..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            for col in a.iter_mut().skip(j) {
                reflect(&v, vtv, &mut col[p..]);
            }
            reflect(&v, vtv, &mut qty[p..]);
        }
        if dependent.is_empty() {
            for (i, row) in r.iter_mut().enumerate().take(j + 1) {
                row[j] = a[j][i];
            }
        }
        p += 1;
    }
    if !dependent.is_empty() {
        return Err(dependent);
    }

    let mut coefficients = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for m in i + 1..k {
            s -= r[i][m] * coefficients[m];
        }
        coefficients[i] = s / r[i][i];
    }

    // R^{-1}, upper triangular; (X'X)^{-1} = R^{-1} R^{-T}
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        rinv[c][c] = 1.0 / r[c][c];
        for i in (0..c).rev() {
            let mut s = 0.0;
            for m in i + 1..=c {
                s += r[i][m] * rinv[m][c];
            }
            rinv[i][c] = -s / r[i][i];
        }
    }
    let xtx_inv_diag = rinv.iter().map(|row| row.iter().map(|x| x * x).sum()).collect();
    Ok(LeastSquares {
        coefficients,
        xtx_inv_diag,
    })
}

fn reflect(v: &[f64], vtv: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let scale = 2.0 * dot / vtv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= scale * vi;
    }
}

fn norm(x: &[f64]) -> f64 {
    // scaled to avoid overflow for large magnitudes
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    max * x.iter().map(|v| (v / max) * (v / max)).sum::<f64>().sqrt()
}
