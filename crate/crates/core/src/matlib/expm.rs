use super::Matrix;
use crate::error::{invalid, Error, Result};

/// `exp(t * m)` by scaling and squaring around a truncated Taylor series.
///
/// The scaled matrix has 1-norm at most 1/2, where 24 Taylor terms are
/// already below double-precision rounding.
pub fn matrix_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    m.require_square()?;
    if !t.is_finite() {
        return invalid(format!("time must be finite, got {t}"));
    }
    let n = m.dim();
    let a = m.scale(t);
    let norm = a.norm_1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(0.5f64.powi(squarings));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    let mut scratch = Matrix::zeros(n, n);
    for k in 1..=30 {
        term.mul_into(&b, &mut scratch);
        term = scratch.scale(1.0 / k as f64);
        sum = sum.add(&term);
        if term.norm_1() <= 1e-18 * sum.norm_1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
        if !sum.is_finite() {
            return Err(Error::NumericOverflow(format!(
                "matrix exponential overflowed while squaring (||t m||_1 = {norm:e})"
            )));
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn trivial_cases() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(matrix_exp(&z, 7.0).unwrap(), Matrix::identity(3));
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(matrix_exp(&m, 0.0).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn rotation_generator_quarter_turn() {
        let g = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let e = matrix_exp(&g, FRAC_PI_2).unwrap();
        let expected = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn scalar_and_large_argument() {
        let e = matrix_exp(&Matrix::scalar(-1.0), 1.0).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        let e = matrix_exp(&Matrix::scalar(1.0), 40.0).unwrap();
        assert!((e[(0, 0)] / 40f64.exp() - 1.0).abs() < 1e-12);
        assert!(matches!(
            matrix_exp(&Matrix::scalar(1.0), 1e6),
            Err(Error::NumericOverflow(_))
        ));
    }
}
