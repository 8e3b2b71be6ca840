//! Worst-case product norms `M_k`, joint spectral radius brackets and
//! growth-exponent fits.
//!
//! `M_k` is the largest norm of a length-`k` product, with no `1/k` root.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::matlib::{operator_norm, spectral_radius, Matrix};
use crate::words::{lyndon_words, Word};

/// Default cap on the number of length-`k` products examined.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Finite indexed set of same-size square matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    matrices: Vec<Matrix>,
    labels: Vec<String>,
}

impl MatrixFamily {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        let labels = (0..matrices.len()).map(|i| format!("A{i}")).collect();
        Self::with_labels(matrices, labels)
    }

    pub fn with_labels(matrices: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        if matrices.is_empty() {
            return invalid("a family needs at least one matrix");
        }
        if matrices.len() > 36 {
            return invalid("families are limited to 36 letters");
        }
        if labels.len() != matrices.len() {
            return invalid("one label per matrix required");
        }
        let d = matrices[0].rows();
        for (i, m) in matrices.iter().enumerate() {
            m.require_square()?;
            if m.dim() != d {
                return invalid(format!("matrix {i} has dimension {}, expected {d}", m.dim()));
            }
        }
        Ok(Self { matrices, labels })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, letter: usize) -> &Matrix {
        &self.matrices[letter]
    }

    /// Every matrix multiplied by `c`.
    pub fn scaled(&self, c: f64) -> MatrixFamily {
        MatrixFamily {
            matrices: self.matrices.iter().map(|m| m.scale(c)).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| l as usize >= self.len()) {
            Some(l) => invalid(format!("letter {l} outside a family of {} matrices", self.len())),
            None => Ok(()),
        }
    }

    /// `A_{w_1} A_{w_2} ... A_{w_k}`; identity for the empty word.
    pub fn product(&self, w: &Word) -> Result<Matrix> {
        self.check_word(w)?;
        Ok(self.product_unchecked(w.letters()))
    }

    pub(crate) fn product_unchecked(&self, letters: &[u8]) -> Matrix {
        let mut it = letters.iter();
        let Some(&first) = it.next() else {
            return Matrix::identity(self.dim());
        };
        let mut acc = self.matrices[first as usize].clone();
        let mut tmp = Matrix::zeros(self.dim(), self.dim());
        for &l in it {
            acc.mul_into(&self.matrices[l as usize], &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        acc
    }
}

/// Matrix norm used to measure products. Must be submultiplicative.
pub trait ProductNorm: Sync {
    fn norm(&self, m: &Matrix) -> f64;
}

/// Largest singular value.
#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl ProductNorm for Euclidean {
    fn norm(&self, m: &Matrix) -> f64 {
        operator_norm(m).unwrap_or(f64::NAN)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MkOptions {
    pub budget: u64,
    /// Branch-and-bound with the bound `||prefix|| * max_i ||A_i||^remaining`.
    pub prune: bool,
}

impl Default for MkOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            prune: true,
        }
    }
}

/// Largest `k` with `m^k <= budget`.
fn affordable_len(m: usize, budget: u64) -> usize {
    if m <= 1 {
        return usize::MAX;
    }
    let mut k = 0;
    let mut count: u64 = 1;
    while let Some(next) = count.checked_mul(m as u64) {
        if next > budget {
            break;
        }
        count = next;
        k += 1;
    }
    k
}

/// `M_k` in the Euclidean norm with its lexicographically least maximizing word.
pub fn exact_mk(fam: &MatrixFamily, k: usize) -> Result<(f64, Word)> {
    exact_mk_with(fam, k, &MkOptions::default(), &Euclidean)
}

pub fn exact_mk_with<N: ProductNorm>(
    fam: &MatrixFamily,
    k: usize,
    opts: &MkOptions,
    norm: &N,
) -> Result<(f64, Word)> {
    if k == 0 {
        return invalid("word length must be positive");
    }
    let m = fam.len();
    let achieved = affordable_len(m, opts.budget);
    if k > achieved {
        return Err(Error::BudgetExceeded {
            budget: opts.budget,
            achieved,
        });
    }
    if m == 1 {
        let p = fam.get(0).pow(k as u64);
        return Ok((norm.norm(&p), Word::repeat_letter(0, k)));
    }

    let letter_norms: Vec<f64> = fam.matrices().iter().map(|a| norm.norm(a)).collect();
    let cmax = letter_norms.iter().copied().fold(0.0, f64::max);
    // cmax^r for r = 0..k
    let tail_bound: Vec<f64> = (0..=k).map(|r| cmax.powi(r as i32)).collect();

    // independent subtrees keyed by a short prefix, merged in lexicographic order
    let depth = if k >= 4 && m < 8 { 2 } else { 1 };
    let mut prefixes: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..depth.min(k) {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                (0..m as u8).map(move |l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }

    let results: Vec<(f64, Vec<u8>)> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut search = Search {
                fam,
                norm,
                k,
                tail_bound: &tail_bound,
                prune: opts.prune,
                best: f64::NEG_INFINITY,
                best_word: Vec::new(),
                word: prefix.clone(),
            };
            let p = fam.product_unchecked(prefix);
            search.descend(&p);
            (search.best, search.best_word)
        })
        .collect();

    let mut best = f64::NEG_INFINITY;
    let mut best_word = Vec::new();
    for (v, w) in results {
        if v > best {
            best = v;
            best_word = w;
        }
    }
    if !best.is_finite() {
        return Err(Error::NumericOverflow(format!(
            "product norms of length {k} are not finite"
        )));
    }
    Ok((best, Word::new(best_word)))
}

struct Search<'a, N: ProductNorm> {
    fam: &'a MatrixFamily,
    norm: &'a N,
    k: usize,
    tail_bound: &'a [f64],
    prune: bool,
    best: f64,
    best_word: Vec<u8>,
    word: Vec<u8>,
}

impl<N: ProductNorm> Search<'_, N> {
    fn descend(&mut self, p: &Matrix) {
        let depth = self.word.len();
        if depth == self.k {
            let v = self.norm.norm(p);
            if v > self.best {
                self.best = v;
                self.best_word = self.word.clone();
            }
            return;
        }
        if self.prune && depth > 0 {
            let bound = self.norm.norm(p) * self.tail_bound[self.k - depth];
            // strict, so ties are still explored and the least word wins
            if bound * (1.0 + 1e-12) < self.best {
                return;
            }
        }
        for l in 0..self.fam.len() as u8 {
            let next = p.mul(self.fam.get(l as usize));
            self.word.push(l);
            self.descend(&next);
            self.word.pop();
        }
    }
}

/// Bracket for the joint spectral radius.
#[derive(Clone, Debug, PartialEq)]
pub struct JsrBounds {
    /// `max rho(product)^(1/k)` over words of length up to `k_used`.
    pub lower: f64,
    /// `min M_k^(1/k)` over `k` up to `k_used`.
    pub upper: f64,
    pub witness_word_lower: Word,
    pub k_used: usize,
    /// The budget stopped the enumeration before the requested length.
    pub truncated: bool,
}

/// `rho(product)^(1/|w|)` maximized over words of length up to `kmax`; ties
/// within a relative `1e-12` go to the shorter, then lexicographically
/// smaller word.
///
/// Only Lyndon words are visited: rotations share a spectrum and a power
/// `u^j` gives the same normalized value as `u`.
pub fn max_normalized_radius(fam: &MatrixFamily, kmax: usize) -> Result<(f64, Word)> {
    let words = lyndon_words(fam.len(), kmax);
    let values: Vec<f64> = words
        .par_iter()
        .map(|w| {
            let p = fam.product_unchecked(w.letters());
            spectral_radius(&p).map(|r| r.powf(1.0 / w.len() as f64))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > best * (1.0 + 1e-12) {
            best = v;
            best_idx = i;
        }
    }
    Ok((best, words[best_idx].clone()))
}

pub fn jsr_bounds(fam: &MatrixFamily, kmax: usize) -> Result<JsrBounds> {
    jsr_bounds_with(fam, kmax, &MkOptions::default())
}

pub fn jsr_bounds_with(fam: &MatrixFamily, kmax: usize, opts: &MkOptions) -> Result<JsrBounds> {
    if kmax == 0 {
        return invalid("kmax must be positive");
    }
    let achieved = affordable_len(fam.len(), opts.budget);
    let k_used = kmax.min(achieved);
    if k_used == 0 {
        return Err(Error::BudgetExceeded {
            budget: opts.budget,
            achieved,
        });
    }
    let (lower, witness) = max_normalized_radius(fam, k_used)?;
    let mut upper = f64::INFINITY;
    for k in 1..=k_used {
        let (mk, _) = exact_mk_with(fam, k, opts, &Euclidean)?;
        upper = upper.min(mk.powf(1.0 / k as f64));
    }
    Ok(JsrBounds {
        lower,
        upper,
        witness_word_lower: witness,
        k_used,
        truncated: k_used < kmax,
    })
}

/// `(k, M_k, witness)` rows for increasing `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSeries {
    pub entries: Vec<(usize, f64)>,
    pub witnesses: Vec<Word>,
}

impl GrowthSeries {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.windows(2).any(|p| p[1].0 <= p[0].0) {
            return invalid("series lengths must be strictly increasing");
        }
        if entries.iter().any(|&(_, v)| !(v > 0.0) || !v.is_finite()) {
            return invalid("series values must be positive and finite");
        }
        let witnesses = vec![Word::empty(); entries.len()];
        Ok(Self { entries, witnesses })
    }

    /// `M_k` for every `k` in `ks` (strictly increasing).
    pub fn compute(fam: &MatrixFamily, ks: &[usize], opts: &MkOptions) -> Result<Self> {
        let mut entries = Vec::with_capacity(ks.len());
        let mut witnesses = Vec::with_capacity(ks.len());
        for &k in ks {
            let (mk, w) = exact_mk_with(fam, k, opts, &Euclidean)?;
            entries.push((k, mk));
            witnesses.push(w);
        }
        let mut s = Self::new(entries)?;
        s.witnesses = witnesses;
        Ok(s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mk,witness\n");
        for ((k, mk), w) in self.entries.iter().zip(&self.witnesses) {
            let _ = writeln!(out, "{k},{mk:.12e},{w}");
        }
        out
    }
}

/// Least-squares line through `(x, y)` returning `(slope, stderr)`.
/// The standard error is `None` with only two points.
pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let stderr = (xs.len() > 2).then(|| {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    });
    (slope, stderr)
}

/// Slope of `log M_k` against `log k` over entries with `k >= k_min`.
pub fn growth_exponent(series: &GrowthSeries, k_min: usize) -> Result<(f64, f64)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .entries
        .iter()
        .filter(|&&(k, _)| k >= k_min)
        .map(|&(k, v)| ((k as f64).ln(), v.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points with k >= {k_min}, need 3",
            xs.len()
        )));
    }
    let (slope, stderr) = ols_slope(&xs, &ys);
    Ok((slope, stderr.unwrap_or(0.0)))
}
