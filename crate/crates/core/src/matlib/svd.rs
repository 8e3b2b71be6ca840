use super::Matrix;
use crate::error::{invalid, Result};

/// Largest singular value (Euclidean operator norm).
///
/// Closed forms for 1x1, 2x2 and 3x3 (largest eigenvalue of the Gram matrix
/// by the trigonometric method); one-sided Jacobi otherwise.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    if !m.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    let a = m.as_slice();
    match (m.rows(), m.cols()) {
        (1, _) | (_, 1) => Ok(super::euclidean_norm(a)),
        (2, 2) => {
            let (p, q) = (a[0] + a[3], a[1] - a[2]);
            let (r, s) = (a[0] - a[3], a[1] + a[2]);
            Ok(0.5 * (p.hypot(q) + r.hypot(s)))
        }
        (3, 3) => Ok(gram3_max_eig(a).max(0.0).sqrt()),
        _ => Ok(singular_values(m)?.first().copied().unwrap_or(0.0)),
    }
}

fn gram3_max_eig(a: &[f64]) -> f64 {
    // G = A^T A
    let mut g = [0.0; 9];
    for i in 0..3 {
        for j in i..3 {
            let v = a[i] * a[j] + a[3 + i] * a[3 + j] + a[6 + i] * a[6 + j];
            g[3 * i + j] = v;
            g[3 * j + i] = v;
        }
    }
    let off = g[1] * g[1] + g[2] * g[2] + g[5] * g[5];
    let q = (g[0] + g[4] + g[8]) / 3.0;
    if off == 0.0 {
        return g[0].max(g[4]).max(g[8]);
    }
    let p2 = (g[0] - q).powi(2) + (g[4] - q).powi(2) + (g[8] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let b: Vec<f64> = (0..9)
        .map(|k| {
            let diag = if k % 4 == 0 { q } else { 0.0 };
            (g[k] - diag) / p
        })
        .collect();
    let det_b = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
        + b[2] * (b[3] * b[7] - b[4] * b[6]);
    let r = (0.5 * det_b).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

/// All singular values in decreasing order (one-sided Jacobi).
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    // work on columns of the taller orientation
    let a = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.transpose()
    };
    let (rows, cols) = (a.rows(), a.cols());
    let mut colv: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| a[(i, j)]).collect())
        .collect();

    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let alpha: f64 = colv[i].iter().map(|x| x * x).sum();
                let beta: f64 = colv[j].iter().map(|x| x * x).sum();
                let gamma: f64 = colv[i].iter().zip(&colv[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let x = colv[i][k];
                    let y = colv[j][k];
                    colv[i][k] = c * x - s * y;
                    colv[j][k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = colv.iter().map(|c| super::euclidean_norm(c)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
