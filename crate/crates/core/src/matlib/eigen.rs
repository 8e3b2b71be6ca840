//! Eigenvalues of small real matrices.
//!
//! Dimensions 1 to 3 use closed-form roots of the characteristic polynomial
//! (polished by Newton steps); larger matrices go through Householder
//! reduction to Hessenberg form followed by the Francis double-shift QR
//! iteration.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Matrix;
use crate::error::{Error, Result};

/// Eigenvalues grouped by (numerical) multiplicity.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<(Complex64, usize)>,
    pub spectral_radius: f64,
}

/// All eigenvalues of a square matrix, with repetition.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    m.require_square()?;
    let a = m.as_slice();
    Ok(match m.dim() {
        1 => vec![Complex64::new(a[0], 0.0)],
        2 => eig2(a[0], a[1], a[2], a[3]).to_vec(),
        3 => eig3(a).to_vec(),
        _ => hqr(m)?,
    })
}

/// Eigenvalues through the Hessenberg QR route regardless of dimension.
pub fn eigenvalues_qr(m: &Matrix) -> Result<Vec<Complex64>> {
    m.require_square()?;
    if m.dim() == 1 {
        return Ok(vec![Complex64::new(m[(0, 0)], 0.0)]);
    }
    hqr(m)
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    m.require_square()?;
    let a = m.as_slice();
    Ok(match m.dim() {
        1 => a[0].abs(),
        2 => {
            let [l1, l2] = eig2(a[0], a[1], a[2], a[3]);
            l1.norm().max(l2.norm())
        }
        _ => eigenvalues(m)?
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max),
    })
}

/// Eigenvalues with multiplicities. Two computed eigenvalues belong to the
/// same cluster when they differ by less than `1e-6 * max(1, |lambda|)`.
pub fn spectrum(m: &Matrix) -> Result<Spectrum> {
    let eig = eigenvalues(m)?;
    let spectral_radius = eig.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for l in eig {
        let tol = 1e-6 * l.norm().max(1.0);
        match groups.iter_mut().find(|(c, _)| (*c - l).norm() <= tol) {
            Some((c, k)) => {
                *c = (*c * *k as f64 + l) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => groups.push((l, 1)),
        }
    }
    Ok(Spectrum {
        eigenvalues: groups,
        spectral_radius,
    })
}

fn eig2(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 2] {
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let l1 = if half_tr >= 0.0 { half_tr + sq } else { half_tr - sq };
        let det = a * d - b * c;
        let l2 = if l1 != 0.0 { det / l1 } else { half_tr - sq };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half_tr, im), Complex64::new(half_tr, -im)]
    }
}

fn eig3(a: &[f64]) -> [Complex64; 3] {
    // characteristic polynomial x^3 + b x^2 + c x + d
    let tr = a[0] + a[4] + a[8];
    let minors = a[0] * a[4] - a[1] * a[3] + a[0] * a[8] - a[2] * a[6] + a[4] * a[8]
        - a[5] * a[7];
    let det = a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
        + a[2] * (a[3] * a[7] - a[4] * a[6]);
    cubic_roots(-tr, minors, -det)
}

fn polish(b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    let f = |x: f64| ((x + b) * x + c) * x + d;
    let mut fx = f(x);
    for _ in 0..4 {
        let df = (3.0 * x + 2.0 * b) * x + c;
        if df == 0.0 || fx == 0.0 {
            break;
        }
        let y = x - fx / df;
        let fy = f(y);
        if fy.abs() >= fx.abs() {
            break;
        }
        x = y;
        fx = fy;
    }
    x
}

fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let scale = 1.0 + b.abs() + c.abs().sqrt() + d.abs().cbrt();
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if p.abs() <= 1e-14 * scale * scale && q.abs() <= 1e-14 * scale * scale * scale {
        let r = Complex64::new(-shift, 0.0);
        return [r, r, r];
    }
    if disc <= 0.0 && p < 0.0 {
        // three real roots
        let rho = (-third_p).sqrt();
        let cos_arg = (-half_q / (rho * rho * rho)).clamp(-1.0, 1.0);
        let theta = cos_arg.acos() / 3.0;
        let roots: Vec<f64> = (0..3)
            .map(|k| 2.0 * rho * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift)
            .map(|x| polish(b, c, d, x))
            .collect();
        return [
            Complex64::new(roots[0], 0.0),
            Complex64::new(roots[1], 0.0),
            Complex64::new(roots[2], 0.0),
        ];
    }
    // one real root, then deflate
    let sq = disc.max(0.0).sqrt();
    let u = (-half_q - half_q.signum() * sq).cbrt();
    let y = if u != 0.0 { u - third_p / u } else { (-q).cbrt() };
    let r = polish(b, c, d, y - shift);
    // remaining quadratic x^2 - s x + prod
    let s = -b - r;
    let prod = if r.abs() > 1e-8 * scale {
        -d / r
    } else {
        c + r * (b + r)
    };
    let [l1, l2] = eig2_from_sum_prod(s, prod);
    [Complex64::new(r, 0.0), l1, l2]
}

fn eig2_from_sum_prod(s: f64, prod: f64) -> [Complex64; 2] {
    let half = 0.5 * s;
    let disc = half * half - prod;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let l1 = if half >= 0.0 { half + sq } else { half - sq };
        let l2 = if l1 != 0.0 { prod / l1 } else { half - sq };
        [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &Matrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    let mut a = m.to_rows();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k + 1..n {
            v[i] = a[i][k];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                a[i][j] -= f * v[i];
            }
        }
        // A <- A H
        for row in a.iter_mut() {
            let dot: f64 = (k + 1..n).map(|j| row[j] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                row[j] -= f * v[j];
            }
        }
        for i in k + 2..n {
            a[i][k] = 0.0;
        }
    }
    a
}

/// Francis double-shift QR on the Hessenberg form (EISPACK `hqr` scheme).
fn hqr(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.dim();
    let mut a = hessenberg(m);
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(Error::InvalidInput(
                    "QR iteration did not converge".to_string(),
                ));
            }
            if its == 10 || its == 20 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut mm = nu - 2;
            let mut z;
            loop {
                z = a[mm][mm];
                r = x - z;
                let s = y - z;
                p = (r * s - w) / a[mm + 1][mm] + a[mm][mm + 1];
                q = a[mm + 1][mm + 1] - z - r - s;
                r = a[mm + 2][mm + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let u = a[mm][mm - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[mm - 1][mm - 1].abs() + z.abs() + a[mm + 1][mm + 1].abs());
                if u + v == v {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != mm + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = mm;
            while k + 1 <= nu {
                if k != mm {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == mm {
                        if l != mm {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        p = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k + 1] -= p * q;
                        row[k] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn spectral_radius_examples() {
        assert_eq!(spectral_radius(&Matrix::identity(2)).unwrap(), 1.0);
        let t = Matrix::from_rows(&[[1.0, 2.0], [0.0, -1.0]]).unwrap();
        assert!((spectral_radius(&t).unwrap() - 1.0).abs() < 1e-15);
        let (s, c) = (PI * 2f64.sqrt()).sin_cos();
        let r = Matrix::from_rows(&[[c, -s], [s, c]]).unwrap();
        assert!((spectral_radius(&r).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_agrees_with_qr_in_dim_3() {
        let cases = [
            [[2.0, 1.0, 0.5], [0.3, -1.0, 2.0], [1.0, 0.0, 0.7]],
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
            [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 3.0]],
            [[4.0, 1.0, 0.0], [0.0, 4.0, 1.0], [0.0, 0.0, 4.0]],
        ];
        for rows in cases {
            let m = Matrix::from_rows(&rows).unwrap();
            let a = sorted(eigenvalues(&m).unwrap());
            let b = sorted(eigenvalues_qr(&m).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-4, "{m}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn qr_handles_dim_4_rotation_blocks() {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 2)] = 1.0;
        m[(0, 3)] = 1.0;
        m[(1, 2)] = 1.0;
        m[(1, 3)] = 1.0;
        m[(2, 3)] = -1.0;
        m[(3, 2)] = 1.0;
        let eig = sorted(eigenvalues(&m).unwrap());
        let expected = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (x, y) in eig.iter().zip(expected) {
            assert!((x - y).norm() < 1e-10, "{eig:?}");
        }
        assert!((spectral_radius(&m).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_groups_multiplicities() {
        let s = spectrum(&Matrix::identity(3)).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert_eq!(s.eigenvalues[0].1, 3);
        let t = Matrix::from_rows(&[[1.0, 2.0], [0.0, -1.0]]).unwrap();
        let s = spectrum(&t).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert_eq!(s.spectral_radius, 1.0);
    }
}
