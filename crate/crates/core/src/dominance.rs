//! Dominant products: search, finite-horizon certification and
//! leading-eigenvalue qualification.
//!
//! A certificate only covers words up to its horizon. It is evidence for
//! dominance, never a proof of it.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::growth::{max_normalized_radius, MatrixFamily, DEFAULT_BUDGET};
use crate::matlib::{eigenvalues, spectral_radius, Matrix};
use crate::words::{is_simple, lyndon_words, word_count, Word};

pub const DEFAULT_Q: f64 = 0.95;
pub const DEFAULT_HORIZON: usize = 12;

/// Best simple word found by [`candidate_dominant`].
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// Least rotation in its cyclic class.
    pub pi: Word,
    /// `rho(pi product)^(1/|pi|)`
    pub rho_estimate: f64,
    /// Longest word length actually searched.
    pub searched_len: usize,
    /// The budget cut the search below the requested length.
    pub truncated: bool,
}

/// Simple word maximizing `rho(product)^(1/length)` over lengths up to `lmax`.
/// Near-ties (relative `1e-12`) go to the shorter, then lexicographically
/// smaller word.
pub fn candidate_dominant(fam: &MatrixFamily, lmax: usize) -> Result<Candidate> {
    candidate_dominant_with_budget(fam, lmax, DEFAULT_BUDGET)
}

pub fn candidate_dominant_with_budget(
    fam: &MatrixFamily,
    lmax: usize,
    budget: u64,
) -> Result<Candidate> {
    if lmax == 0 {
        return invalid("maximal word length must be positive");
    }
    let mut len = lmax;
    while len > 0 && word_count(fam.len(), len) > budget {
        len -= 1;
    }
    if len == 0 {
        return Err(Error::BudgetExceeded {
            budget,
            achieved: 0,
        });
    }
    let (rho_estimate, pi) = max_normalized_radius(fam, len)?;
    Ok(Candidate {
        pi,
        rho_estimate,
        searched_len: len,
        truncated: len < lmax,
    })
}

/// Leading eigenvalue of a product and its qualifications.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leading {
    /// An eigenvalue of largest modulus; the member with nonnegative
    /// imaginary part when it is non-real.
    pub value: Complex64,
    /// No other eigenvalue (besides the conjugate) attains the top modulus.
    pub unique: bool,
    /// Algebraic multiplicity one.
    pub simple: bool,
}

/// Leading eigenvalue of `prod`. Moduli within `tol * max(1, rho)` of the
/// spectral radius count as maximal; eigenvalues closer than
/// `max(tol, 1e-6) * max(1, rho)` are treated as one repeated eigenvalue.
pub fn leading_eigenvalue(prod: &Matrix, tol: f64) -> Result<Leading> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let eig = eigenvalues(prod)?;
    let r = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = r.max(1.0);
    let top: Vec<Complex64> = eig
        .iter()
        .copied()
        .filter(|z| z.norm() >= r - tol * scale)
        .collect();
    let mut value = top
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.im.total_cmp(&b.im)))
        .unwrap_or_default();
    if value.im < 0.0 {
        value = value.conj();
    }
    let cluster = tol.max(1e-6) * scale;
    let near = |z: &Complex64, w: Complex64| (z - w).norm() <= cluster;
    let unique = top.iter().all(|z| near(z, value) || near(z, value.conj()));
    let multiplicity = eig.iter().filter(|z| near(z, value)).count();
    Ok(Leading {
        value,
        unique,
        simple: multiplicity == 1,
    })
}

/// Finite-horizon evidence that `pi` is dominant.
#[derive(Clone, Debug, PartialEq)]
pub struct DominanceCertificate {
    pub pi: Word,
    pub horizon: usize,
    pub q: f64,
    /// Normalizing constant; the family is divided by it.
    pub rho_estimate: f64,
    pub leading: Leading,
    /// Least rotations of the words with normalized spectral radius `>= q`.
    pub violations: Vec<Word>,
    /// Largest normalized spectral radius among words outside the class of `pi`.
    pub worst_ratio: f64,
    pub worst_word: Word,
    /// Number of cyclic classes examined.
    pub classes_checked: usize,
}

impl DominanceCertificate {
    pub fn certified(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for DominanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.leading.value;
        writeln!(f, "word: {}", self.pi)?;
        writeln!(f, "horizon: {}", self.horizon)?;
        writeln!(f, "q: {}", self.q)?;
        writeln!(f, "rho_estimate: {:.12}", self.rho_estimate)?;
        writeln!(f, "leading_eigenvalue: {:.12} {:+.12}i", v.re, v.im)?;
        writeln!(f, "leading_unique: {}", self.leading.unique)?;
        writeln!(f, "leading_simple: {}", self.leading.simple)?;
        writeln!(f, "classes_checked: {}", self.classes_checked)?;
        writeln!(f, "worst_ratio: {:.12}", self.worst_ratio)?;
        writeln!(f, "worst_word: {}", self.worst_word)?;
        let list: Vec<String> = self.violations.iter().map(|w| w.to_string()).collect();
        writeln!(f, "violations: {} [{}]", list.len(), list.join(", "))?;
        write!(
            f,
            "scope: words up to length {} only; longer products are not examined",
            self.horizon
        )
    }
}

/// Checks every word of length up to `horizon` that is not a power of a
/// rotation of `pi`: its normalized spectral radius must be below `q`.
/// Normalization uses `rho(pi product)^(1/|pi|)`.
pub fn verify_dominance(
    fam: &MatrixFamily,
    pi: &Word,
    horizon: usize,
    q: f64,
) -> Result<DominanceCertificate> {
    verify_dominance_with(fam, pi, horizon, q, None, 1e-8)
}

/// As [`verify_dominance`], with an explicit normalizing constant and the
/// tolerance used for the leading-eigenvalue test.
pub fn verify_dominance_with(
    fam: &MatrixFamily,
    pi: &Word,
    horizon: usize,
    q: f64,
    rho: Option<f64>,
    tol: f64,
) -> Result<DominanceCertificate> {
    if !(q > 0.0 && q < 1.0) {
        return invalid(format!("gap q must lie in (0, 1), got {q}"));
    }
    if horizon == 0 {
        return invalid("horizon must be positive");
    }
    if !is_simple(pi)? {
        return invalid(format!("word {pi} is not simple"));
    }
    fam.check_word(pi)?;
    if word_count(fam.len(), horizon) > DEFAULT_BUDGET {
        let mut achieved = horizon;
        while achieved > 0 && word_count(fam.len(), achieved) > DEFAULT_BUDGET {
            achieved -= 1;
        }
        return Err(Error::BudgetExceeded {
            budget: DEFAULT_BUDGET,
            achieved,
        });
    }
    let pi_prod = fam.product(pi)?;
    let rho = match rho {
        Some(r) => r,
        None => spectral_radius(&pi_prod)?.powf(1.0 / pi.len() as f64),
    };
    if !(rho > 0.0) || !rho.is_finite() {
        return invalid(format!("normalizing constant must be positive, got {rho}"));
    }
    let leading = leading_eigenvalue(&pi_prod, tol)?;

    let canon_pi = pi.canonical_rotation();
    let classes: Vec<Word> = lyndon_words(fam.len(), horizon)
        .into_iter()
        .filter(|u| *u != canon_pi)
        .collect();
    // each Lyndon word u stands for the classes of u, u^2, ... up to the horizon
    let per_class: Vec<Vec<(Word, f64)>> = classes
        .par_iter()
        .map(|u| {
            let p = fam.product_unchecked(u.letters());
            let base = spectral_radius(&p)? / rho.powi(u.len() as i32);
            Ok((1..=horizon / u.len())
                .map(|j| (u.pow(j), base.powi(j as i32)))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut violations = Vec::new();
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut worst_word = Word::empty();
    let mut classes_checked = 0;
    for (w, ratio) in per_class.into_iter().flatten() {
        classes_checked += 1;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_word = w.clone();
        }
        if !(ratio < q) {
            violations.push(w);
        }
    }
    violations.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(DominanceCertificate {
        pi: pi.clone(),
        horizon,
        q,
        rho_estimate: rho,
        leading,
        violations,
        worst_ratio: worst_ratio.max(0.0),
        worst_word,
        classes_checked,
    })
}
