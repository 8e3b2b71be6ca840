//! Marginal-instability classification of two-block upper-triangular
//! families whose diagonal blocks have dominant words.
//!
//! With `pi_i` the dominant word of block `i`, the family has unbounded
//! (and then linear) growth iff `pi_1` and `pi_2` agree up to rotation, the
//! leading eigenvalues of `pi(A^(1))` and `pi(A^(2))` coincide, and `pi(A)`
//! has a Jordan block of size at least two at that eigenvalue. The verdict is
//! only as good as the finite-horizon dominance certificates behind it.

use std::fmt;

use num_complex::Complex64;

use crate::dominance::{
    candidate_dominant, leading_eigenvalue, verify_dominance_with, DominanceCertificate,
    DEFAULT_HORIZON, DEFAULT_Q,
};
use crate::error::{invalid, Error, Result};
use crate::growth::MatrixFamily;
use crate::matlib::{jordan_order, Matrix};
use crate::words::{cyclically_equal, Word};

/// Family in block upper-triangular form
/// `A_j = [[A_j^(1), C_j], [0, A_j^(2)]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFamily {
    pub block1: MatrixFamily,
    pub block2: MatrixFamily,
    /// `d1 x d2` coupling blocks, one per letter.
    pub couplings: Vec<Matrix>,
}

impl BlockFamily {
    pub fn new(block1: MatrixFamily, block2: MatrixFamily, couplings: Vec<Matrix>) -> Result<Self> {
        let m = block1.len();
        if block2.len() != m || couplings.len() != m {
            return invalid(format!(
                "blocks and couplings must share one alphabet: {} / {} / {} letters",
                m,
                block2.len(),
                couplings.len()
            ));
        }
        let (d1, d2) = (block1.dim(), block2.dim());
        for (j, c) in couplings.iter().enumerate() {
            if c.rows() != d1 || c.cols() != d2 {
                return invalid(format!(
                    "coupling {j} is {}x{}, expected {d1}x{d2}",
                    c.rows(),
                    c.cols()
                ));
            }
            if !c.is_finite() {
                return invalid(format!("coupling {j} has non-finite entries"));
            }
        }
        Ok(Self {
            block1,
            block2,
            couplings,
        })
    }

    /// Splits a family at row/column `d1`. The lower-left blocks must vanish.
    pub fn from_family(fam: &MatrixFamily, d1: usize) -> Result<Self> {
        let d = fam.dim();
        if d1 == 0 || d1 >= d {
            return invalid(format!("split point {d1} must lie strictly inside 1..{d}"));
        }
        let d2 = d - d1;
        let mut b1 = Vec::with_capacity(fam.len());
        let mut b2 = Vec::with_capacity(fam.len());
        let mut cs = Vec::with_capacity(fam.len());
        for (j, a) in fam.matrices().iter().enumerate() {
            let lower = a.submatrix(d1, 0, d2, d1);
            if lower.as_slice().iter().any(|&v| v != 0.0) {
                return invalid(format!("matrix {j} is not block upper-triangular at {d1}"));
            }
            b1.push(a.submatrix(0, 0, d1, d1));
            b2.push(a.submatrix(d1, d1, d2, d2));
            cs.push(a.submatrix(0, d1, d1, d2));
        }
        Self::new(MatrixFamily::new(b1)?, MatrixFamily::new(b2)?, cs)
    }

    pub fn len(&self) -> usize {
        self.block1.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.block1.dim(), self.block2.dim())
    }

    pub fn with_scaled_couplings(&self, c: f64) -> BlockFamily {
        BlockFamily {
            block1: self.block1.clone(),
            block2: self.block2.clone(),
            couplings: self.couplings.iter().map(|m| m.scale(c)).collect(),
        }
    }
}

/// Full matrices `[[A^(1), C], [0, A^(2)]]`.
pub fn assemble(bf: &BlockFamily) -> Result<MatrixFamily> {
    let (d1, d2) = bf.dims();
    let mats = (0..bf.len())
        .map(|j| {
            let mut a = Matrix::zeros(d1 + d2, d1 + d2);
            a.set_block(0, 0, bf.block1.get(j));
            a.set_block(d1, d1, bf.block2.get(j));
            a.set_block(0, d1, &bf.couplings[j]);
            a
        })
        .collect();
    MatrixFamily::with_labels(mats, bf.block1.labels().to_vec())
}

/// Top-right block of the product over the concatenation of `segments`,
/// expanded as `sum_r P1_1...P1_(r-1) Q_r P2_(r+1)...P2_k`, where `P1_j`, `P2_j`
/// are the diagonal-block products of segment `j` and `Q_j` the top-right
/// block of its full product.
pub fn coupling_sum(bf: &BlockFamily, segment_words: &[Word]) -> Result<Matrix> {
    if segment_words.is_empty() {
        return invalid("at least one segment required");
    }
    let full = assemble(bf)?;
    let (d1, d2) = bf.dims();
    let k = segment_words.len();
    let mut p1 = Vec::with_capacity(k);
    let mut p2 = Vec::with_capacity(k);
    let mut q = Vec::with_capacity(k);
    for w in segment_words {
        p1.push(bf.block1.product(w)?);
        p2.push(bf.block2.product(w)?);
        q.push(full.product(w)?.submatrix(0, d1, d1, d2));
    }
    // suffix[r] = P2_r ... P2_(k-1)
    let mut suffix = vec![Matrix::identity(d2); k + 1];
    for r in (0..k).rev() {
        suffix[r] = p2[r].mul(&suffix[r + 1]);
    }
    let mut prefix = Matrix::identity(d1);
    let mut sum = Matrix::zeros(d1, d2);
    for r in 0..k {
        sum = sum.add(&prefix.mul(&q[r]).mul(&suffix[r + 1]));
        prefix = prefix.mul(&p1[r]);
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    MarginallyStable,
    MarginallyUnstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Bounded,
    Linear,
}

/// What the verdict rests on.
#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    pub pi1: Word,
    pub pi2: Word,
    pub cyclic_match: bool,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    /// `|lambda1 - lambda2|`, conjugate pairs compared as sets.
    pub eigen_residual: f64,
    pub eigen_match: bool,
    /// Largest Jordan block of `pi1(A)` at `lambda1`.
    pub jordan_order: usize,
    pub jordan_nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub growth: Growth,
    pub evidence: Evidence,
    pub certificates: [DominanceCertificate; 2],
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub horizon: usize,
    pub q: f64,
    pub tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            q: DEFAULT_Q,
            tol: 1e-8,
        }
    }
}

fn block_certificate(
    fam: &MatrixFamily,
    block: usize,
    horizon: usize,
    q: f64,
    tol: f64,
) -> Result<DominanceCertificate> {
    let cand = candidate_dominant(fam, horizon)?;
    if !(cand.rho_estimate > 0.0) {
        return Err(Error::HypothesesUnmet {
            block,
            reason: "all products up to the horizon are nilpotent".into(),
        });
    }
    let cert = verify_dominance_with(fam, &cand.pi, horizon, q, Some(cand.rho_estimate), tol)?;
    if !cert.certified() {
        return Err(Error::DominanceUncertified {
            block,
            word: cand.pi.to_string(),
            violations: cert.violations.len(),
        });
    }
    if !cert.leading.unique || !cert.leading.simple {
        return Err(Error::HypothesesUnmet {
            block,
            reason: format!(
                "leading eigenvalue of word {} is not {}",
                cand.pi,
                if cert.leading.unique { "simple" } else { "unique" }
            ),
        });
    }
    Ok(cert)
}

pub fn classify(bf: &BlockFamily, horizon: usize, q: f64, tol: f64) -> Result<Classification> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let c1 = block_certificate(&bf.block1, 1, horizon, q, tol)?;
    let c2 = block_certificate(&bf.block2, 2, horizon, q, tol)?;
    let (pi1, pi2) = (c1.pi.clone(), c2.pi.clone());
    let cyclic_match = cyclically_equal(&pi1, &pi2);

    let lambda1 = c1.leading.value;
    // with matching words, compare products over the same word
    let lambda2 = if cyclic_match {
        leading_eigenvalue(&bf.block2.product(&pi1)?, tol)?.value
    } else {
        c2.leading.value
    };
    let eigen_residual = (lambda1 - lambda2).norm().min((lambda1 - lambda2.conj()).norm());
    let eigen_match = eigen_residual <= tol * lambda1.norm().max(lambda2.norm());

    let full = assemble(bf)?;
    let jordan = jordan_order(&full.product(&pi1)?, lambda1, tol)?;
    let jordan_nontrivial = jordan >= 2;

    let unstable = cyclic_match && eigen_match && jordan_nontrivial;
    Ok(Classification {
        verdict: if unstable {
            Verdict::MarginallyUnstable
        } else {
            Verdict::MarginallyStable
        },
        growth: if unstable { Growth::Linear } else { Growth::Bounded },
        evidence: Evidence {
            pi1,
            pi2,
            cyclic_match,
            lambda1,
            lambda2,
            eigen_residual,
            eigen_match,
            jordan_order: jordan,
            jordan_nontrivial,
        },
        certificates: [c1, c2],
        tol,
    })
}

pub fn classify_with(bf: &BlockFamily, opts: &ClassifyOptions) -> Result<Classification> {
    classify(bf, opts.horizon, opts.q, opts.tol)
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.12} {:+.12}i", z.re, z.im)
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.evidence;
        let verdict = match self.verdict {
            Verdict::MarginallyStable => "marginally stable",
            Verdict::MarginallyUnstable => "marginally unstable",
        };
        let growth = match self.growth {
            Growth::Bounded => "bounded",
            Growth::Linear => "linear",
        };
        writeln!(f, "verdict: {verdict}")?;
        writeln!(f, "growth: {growth}")?;
        writeln!(f, "pi1: {}", e.pi1)?;
        writeln!(f, "pi2: {}", e.pi2)?;
        writeln!(f, "cyclic_match: {}", e.cyclic_match)?;
        writeln!(f, "lambda1: {}", fmt_c(e.lambda1))?;
        writeln!(f, "lambda2: {}", fmt_c(e.lambda2))?;
        writeln!(f, "eigen_residual: {:e}", e.eigen_residual)?;
        writeln!(f, "eigen_match: {}", e.eigen_match)?;
        writeln!(f, "jordan_order: {}", e.jordan_order)?;
        writeln!(f, "jordan_nontrivial: {}", e.jordan_nontrivial)?;
        writeln!(f, "tol: {:e}", self.tol)?;
        for (i, c) in self.certificates.iter().enumerate() {
            writeln!(f, "block{}_certificate:", i + 1)?;
            for line in c.to_string().lines() {
                writeln!(f, "  {line}")?;
            }
        }
        write!(
            f,
            "conditional_on: dominance certified up to horizon {} only",
            self.certificates[0].horizon
        )
    }
}
