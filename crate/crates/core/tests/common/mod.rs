//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the crate's numerical kernels.
#![allow(dead_code)]

use marginal::Matrix;

pub fn mat(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

/// Plain triple-loop product on nested vectors.
pub fn naive_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            out[i][j] = (0..k).map(|t| a[i][t] * b[t][j]).sum();
        }
    }
    out
}

pub fn naive_identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

/// Product of `mats[w[0]] * mats[w[1]] * ...` by left-to-right multiplication.
pub fn naive_word_product(mats: &[Vec<Vec<f64>>], w: &[u8]) -> Vec<Vec<f64>> {
    w.iter().fold(naive_identity(mats[0].len()), |acc, &c| naive_mul(&acc, &mats[c as usize]))
}

pub fn naive_transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(sym: &[Vec<f64>]) -> Vec<f64> {
    let n = sym.len();
    let mut a = sym.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Spectral norm as the square root of the top eigenvalue of `A^T A`.
pub fn power_norm(a: &[Vec<f64>]) -> f64 {
    let g = naive_mul(&naive_transpose(a), a);
    jacobi_eigenvalues(&g).into_iter().fold(0.0, f64::max).max(0.0).sqrt()
}

/// `exp(t A)` by Taylor series after halving `t` until `|tA|_1 <= 1/2`.
pub fn taylor_exp(a: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm1 = (0..n).map(|j| a.iter().map(|r| r[j].abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut halvings = 0;
    while norm1 * t.abs() / 2f64.powi(halvings) > 0.5 {
        halvings += 1;
    }
    let h = t / 2f64.powi(halvings);
    let ha: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| x * h).collect()).collect();
    let mut sum = naive_identity(n);
    let mut term = naive_identity(n);
    for k in 1..40 {
        term = naive_mul(&term, &ha);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..halvings {
        sum = naive_mul(&sum, &sum);
    }
    sum
}

/// Classical Runge-Kutta for `x' = A x` with `steps` equal steps over `t`.
pub fn rk4(a: &[Vec<f64>], x0: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let f = |x: &[f64]| -> Vec<f64> { a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect() };
    let h = t / steps as f64;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let k1 = f(&x);
        let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
        let k2 = f(&x2);
        let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
        let k3 = f(&x3);
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = f(&x4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// All words of length `k` over `m` letters, in lexicographic order.
pub fn all_words(m: u8, k: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..m).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}
