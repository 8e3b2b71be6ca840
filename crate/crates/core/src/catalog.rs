//! Named families used as fixtures by the tests and the command line.

use crate::classifier::BlockFamily;
use crate::error::{invalid, Result};
use crate::growth::MatrixFamily;
use crate::matlib::Matrix;

/// `[[1, 1], [0, 1]]`
pub fn unit_jordan() -> Matrix {
    Matrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).expect("2x2 literal")
}

fn check_example1_b(b: &Matrix) -> Result<()> {
    if b.rows() != 2 || b.cols() != 2 {
        return invalid("B must be 2x2");
    }
    if b[(1, 0)] != 0.0 {
        return invalid("B must be upper triangular");
    }
    Ok(())
}

/// `[s B, [[top, a], [0, bottom]]]`, letter `0` first.
fn example1_like(a: f64, b: &Matrix, s: f64, top: f64, bottom: f64) -> Result<MatrixFamily> {
    check_example1_b(b)?;
    let flip = Matrix::from_rows(&[[top, a], [0.0, bottom]])?;
    MatrixFamily::with_labels(vec![b.scale(s), flip], vec!["sB".into(), "A1".into()])
}

/// `{s B, [[1, a], [0, -1]]}`: bounded products although the diagonal
/// blocks resonate in modulus. The parallelotope with vertices
/// `+-(1, 0)`, `+-(1, -2/a)` is an extremal norm for small `s`.
pub fn example1(a: f64, b: &Matrix, s: f64) -> Result<MatrixFamily> {
    example1_like(a, b, s, 1.0, -1.0)
}

/// [`example1`] with `B = [[1, 1], [0, 1]]`.
pub fn example1_default(a: f64, s: f64) -> Result<MatrixFamily> {
    example1(a, &unit_jordan(), s)
}

/// Same family with the second diagonal entry of `A1` set to `+1`; both
/// blocks then share the leading eigenvalue and products grow linearly.
pub fn example1_resonant(a: f64, b: &Matrix, s: f64) -> Result<MatrixFamily> {
    example1_like(a, b, s, 1.0, 1.0)
}

pub fn example1_blocks(a: f64, b: &Matrix, s: f64) -> Result<BlockFamily> {
    BlockFamily::from_family(&example1(a, b, s)?, 1)
}

pub fn example1_resonant_blocks(a: f64, b: &Matrix, s: f64) -> Result<BlockFamily> {
    BlockFamily::from_family(&example1_resonant(a, b, s)?, 1)
}

/// `{[[1, 1], [0, 1]], [[1, 0], [1, 1]]}`; its joint spectral radius is the
/// golden ratio, attained by the product of the two letters.
pub fn golden_pair() -> MatrixFamily {
    let a = unit_jordan();
    MatrixFamily::with_labels(vec![a.clone(), a.transpose()], vec!["U".into(), "L".into()])
        .expect("two 2x2 matrices")
}

/// Flow with bounded semigroup: zero upper-left block, `C` top-right and a
/// rotation generator bottom-right.
pub fn example2_flow(c: &Matrix) -> Result<Matrix> {
    if c.rows() != 2 || c.cols() != 2 {
        return invalid("C must be 2x2");
    }
    let mut a = Matrix::zeros(4, 4);
    a.set_block(0, 2, c);
    a[(2, 3)] = -1.0;
    a[(3, 2)] = 1.0;
    Ok(a)
}

/// Block upper-triangular `B` with every diagonal-block and upper entry `1`.
pub fn example2_default_b() -> Matrix {
    Matrix::from_rows(&[
        [1.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0],
    ])
    .expect("4x4 literal")
}

/// Continuous-time pair `[A1, B - s I]`; letter `0` is the bounded flow.
pub fn example2(c: &Matrix, b: &Matrix, s: f64) -> Result<MatrixFamily> {
    if b.rows() != 4 || b.cols() != 4 {
        return invalid("B must be 4x4");
    }
    if (2..4).any(|i| (0..2).any(|j| b[(i, j)] != 0.0)) {
        return invalid("B must be block upper triangular");
    }
    MatrixFamily::with_labels(
        vec![example2_flow(c)?, b.shifted(s)],
        vec!["A1".into(), "A2".into()],
    )
}

/// [`example2`] with `C` all ones and [`example2_default_b`].
pub fn example2_default(s: f64) -> Result<MatrixFamily> {
    let c = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]])?;
    example2(&c, &example2_default_b(), s)
}
