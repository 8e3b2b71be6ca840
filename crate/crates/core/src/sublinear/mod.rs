//! A marginally unstable 3x3 pair whose worst-case products grow like
//! `N^{1/3}`, with closed-form couplings, Diophantine selection of exponents
//! and an explicit infinite product.
//!
//! Letter `0` is `A0 = diag(1, 1, 0)`; letter `1` is
//!
//! ```text
//! A1 = [ 1  sin a  cos a - 1 ]
//!      [ 0  cos a  -sin a    ]
//!      [ 0  sin a   cos a    ]
//! ```
//!
//! The lower-right 2x2 blocks are the projection `P = diag(1, 0)` and the
//! rotation `R` by `a`; the first row carries `a_vec = (sin a, cos a - 1)`.
//! For `A1^n` that row becomes `(sin na, cos na - 1)`.

pub mod angle;
pub mod contfrac;

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::growth::{ols_slope, MatrixFamily};
use crate::matlib::{operator_norm, Matrix};

pub use angle::{Alpha, DoubleDouble};
pub use contfrac::{continued_fraction, continued_fraction_dd, ConvergentTable, MAX_DEPTH};

use angle::{cos_pow, one_minus_cos};

/// Above this total length a witness is only evaluated in closed form.
pub const DIRECT_LIMIT: u64 = 1_000_000;

/// Largest exponent `n` accepted by the closed forms; `n alpha` is reduced
/// with about 106 bits, so `sin(n alpha)` stays accurate well past this.
pub const MAX_N: u64 = 1_000_000_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CubicPair {
    pub alpha: Alpha,
    pub a0: Matrix,
    pub a1: Matrix,
    pub p: Matrix,
    pub r: Matrix,
    pub a_vec: [f64; 2],
}

impl CubicPair {
    /// Irrationality of `alpha / pi` is not checked and cannot be in floating
    /// point; rational angles give bounded products.
    pub fn build_pair(alpha: Alpha) -> Self {
        let a = alpha.radians();
        let (s, c) = a.sin_cos();
        let a0 = Matrix::diag(&[1.0, 1.0, 0.0]);
        let a1 = Matrix::from_rows(&[[1.0, s, c - 1.0], [0.0, c, -s], [0.0, s, c]])
            .expect("3x3 literal");
        let p = Matrix::diag(&[1.0, 0.0]);
        let r = Matrix::from_rows(&[[c, -s], [s, c]]).expect("2x2 literal");
        Self {
            alpha,
            a0,
            a1,
            p,
            r,
            a_vec: [s, c - 1.0],
        }
    }

    /// `[A0, A1]` as letters `0` and `1`.
    pub fn family(&self) -> MatrixFamily {
        MatrixFamily::with_labels(
            vec![self.a0.clone(), self.a1.clone()],
            vec!["A0".into(), "A1".into()],
        )
        .expect("two 3x3 matrices")
    }
}

/// Top-right coupling of `A1^n` applied to `e1`: `sin(n alpha)`.
pub fn qn_e1(alpha: &Alpha, n: u64) -> f64 {
    alpha.sin_n(n)
}

fn check_exponents(ns: &[u64]) -> Result<()> {
    if ns.is_empty() {
        return invalid("exponent list must be nonempty");
    }
    if let Some(&n) = ns.iter().find(|&&n| n > MAX_N) {
        return invalid(format!("exponent {n} exceeds {MAX_N}"));
    }
    Ok(())
}

/// Coupling of `A1^{n_1} A0 ... A1^{n_k} A0` applied to `e1`:
/// `sum_r sin(n_r a) prod_{j > r} cos(n_j a)`.
pub fn coupling_closed_form(alpha: &Alpha, ns: &[u64]) -> Result<f64> {
    check_exponents(ns)?;
    let mut total = 0.0;
    for (r, &n) in ns.iter().enumerate() {
        let tail: f64 = ns[r + 1..].iter().map(|&m| alpha.cos_n(m)).product();
        total += alpha.sin_n(n) * tail;
    }
    Ok(total)
}

/// Majorant sequence `S_0 = 0`, `S_r = |sin n_r a| + S_{r-1} |cos n_r a|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SRecursion {
    pub alpha: Alpha,
    pub ns: Vec<u64>,
    /// `S_0 ..= S_k`
    pub s_values: Vec<f64>,
    /// Greatest `r` with `S_r < 8`.
    pub r0: usize,
}

/// Threshold below which the cubic increment bound is not claimed.
const S_THRESHOLD: f64 = 8.0;

impl SRecursion {
    pub fn last(&self) -> f64 {
        *self.s_values.last().expect("S_0 always present")
    }

    fn inverse_sines(&self, from: usize) -> f64 {
        self.ns[from - 1..]
            .iter()
            .map(|&n| 20.0 / self.alpha.sin_n(n).abs())
            .sum()
    }

    /// `(S_{r0+1}^3 + sum_{r = r0+2..k} 20/|sin n_r a|)^{1/3}`, available when
    /// at least one step follows `r0 + 1`.
    pub fn tight_bound(&self) -> Option<f64> {
        let k = self.ns.len();
        if self.r0 + 2 > k {
            return None;
        }
        let head = self.s_values[self.r0 + 1];
        Some((head.powi(3) + self.inverse_sines(self.r0 + 2)).cbrt())
    }

    /// `(9 + sum_{r = 1..k} 20/|sin n_r a|)^{1/3}`.
    pub fn loose_bound(&self) -> f64 {
        (9.0 + self.inverse_sines(1)).cbrt()
    }
}

pub fn s_recursion(alpha: &Alpha, ns: &[u64]) -> Result<SRecursion> {
    check_exponents(ns)?;
    let mut s = Vec::with_capacity(ns.len() + 1);
    s.push(0.0);
    for &n in ns {
        let prev = *s.last().expect("nonempty");
        s.push(alpha.sin_n(n).abs() + prev * alpha.cos_n(n).abs());
    }
    let r0 = s.iter().rposition(|&v| v < S_THRESHOLD).expect("S_0 = 0");
    Ok(SRecursion {
        alpha: *alpha,
        ns: ns.to_vec(),
        s_values: s,
        r0,
    })
}

/// `sin t + p cos t <= (p^3 + 20 / sin t)^{1/3}` for `p >= 2`, `t` in `(0, pi/2]`.
pub fn increment_bound_check(p: f64, t: f64) -> Result<bool> {
    if !(p >= 2.0) || !p.is_finite() {
        return invalid(format!("p must be finite and at least 2, got {p}"));
    }
    if !(t > 0.0 && t <= PI / 2.0) {
        return invalid(format!("t must lie in (0, pi/2], got {t}"));
    }
    let (s, c) = t.sin_cos();
    Ok(s + p * c <= (p.powi(3) + 20.0 / s).cbrt() + 1e-12)
}

/// Exponents `n > 1` with `frac(n alpha / 2pi) <= 1/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodN {
    pub ns: Vec<u64>,
    /// Fewer than requested were found before the expansion ran out of
    /// precision or passed `MAX_N`.
    pub precision_limited: bool,
}

/// Scans convergent denominators of `alpha / 2pi`; each accepted `n` is
/// verified directly on the high-precision reduction.
pub fn good_n_sequence(alpha: &Alpha, count: usize) -> Result<GoodN> {
    if count == 0 {
        return invalid("count must be positive");
    }
    let turns = alpha.turns();
    if !(turns.hi > 0.0) {
        return invalid("alpha must be positive");
    }
    let table = continued_fraction_dd(turns, MAX_DEPTH)?;
    let mut ns: Vec<u64> = Vec::with_capacity(count);
    for q in table.denominators() {
        if ns.len() == count || q > MAX_N {
            break;
        }
        if q <= 1 || ns.last().is_some_and(|&last| q <= last) {
            continue;
        }
        if alpha.frac_turns(q) * q as f64 <= 1.0 {
            ns.push(q);
        }
    }
    let precision_limited = ns.len() < count;
    Ok(GoodN {
        ns,
        precision_limited,
    })
}

/// The product `(A1^n A0)^{n^2}` of length `N = n^3 + n^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub n: u64,
    pub big_n: u128,
    /// Operator norm of the closed-form product.
    pub norm: f64,
    /// Same norm from repeated squaring of the 3x3 block, for `N <= DIRECT_LIMIT`.
    pub direct_norm: Option<f64>,
    /// `sin t (1 - cos^{n^2} t) / (1 - cos t)` with `t = n alpha`; the
    /// product's coupling on `e1`.
    pub lower_formula: f64,
    /// `n alpha` reduced to `[-pi, pi)`.
    pub t: f64,
}

impl Witness {
    /// `norm / N^{1/3}`
    pub fn ratio(&self) -> f64 {
        self.norm / (self.big_n as f64).cbrt()
    }
}

/// Closed form of `(A1^n A0)^k` with `t = n alpha`:
///
/// ```text
/// [ 1  c              0 ]
/// [ 0  cos^k t        0 ]      c = sin t (1 - cos^k t) / (1 - cos t)
/// [ 0  cos^{k-1} t sin t  0 ]
/// ```
fn block_power(t: f64, k: f64) -> (f64, f64, f64) {
    let s = t.sin();
    let omc = one_minus_cos(t);
    let ck = cos_pow(t, k);
    let c = if omc == 0.0 {
        // limit as cos t -> 1
        s * k
    } else {
        s * (1.0 - ck) / omc
    };
    (c, ck, cos_pow(t, k - 1.0) * s)
}

fn rank_one_tail(x: f64, y: f64, z: f64) -> Result<f64> {
    let m = Matrix::from_rows(&[[1.0, x, 0.0], [0.0, y, 0.0], [0.0, z, 0.0]])?;
    operator_norm(&m)
}

pub fn growth_witness(alpha: &Alpha, n: u64) -> Result<Witness> {
    if n == 0 || n > MAX_N {
        return invalid(format!("n must lie in 1..={MAX_N}, got {n}"));
    }
    let nn = n as u128;
    let big_n = nn * nn * nn + nn * nn;
    let k = (n as f64) * (n as f64);
    let t = alpha.reduced(n);
    let (c, y, z) = block_power(t, k);
    let norm = rank_one_tail(c, y, z)?;
    let direct_norm = if big_n <= DIRECT_LIMIT as u128 {
        let pair = CubicPair::build_pair(*alpha);
        let block = pair.a1.pow(n).mul(&pair.a0);
        Some(operator_norm(&block.pow(n * n))?)
    } else {
        None
    };
    Ok(Witness {
        n,
        big_n,
        norm,
        direct_norm,
        lower_formula: c,
        t,
    })
}

/// Witnesses for several `n`, computed in parallel.
pub fn growth_witnesses(alpha: &Alpha, ns: &[u64]) -> Result<Vec<Witness>> {
    ns.par_iter().map(|&n| growth_witness(alpha, n)).collect()
}

pub fn witnesses_csv(ws: &[Witness]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    wtr.write_record(["n", "N", "norm", "lower_formula", "ratio"])
        .map_err(err)?;
    for w in ws {
        wtr.write_record([
            w.n.to_string(),
            w.big_n.to_string(),
            w.norm.to_string(),
            w.lower_formula.to_string(),
            w.ratio().to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CubicFit {
    pub slope: f64,
    /// `None` with exactly two points.
    pub stderr: Option<f64>,
    pub witnesses: Vec<Witness>,
}

/// Least-squares slope of `ln norm` against `ln N` over the witnesses for `ns`.
pub fn fit_cubic_exponent(alpha: &Alpha, ns: &[u64]) -> Result<CubicFit> {
    let mut distinct = ns.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need witnesses at two or more distinct n, got {}",
            distinct.len()
        )));
    }
    let witnesses = growth_witnesses(alpha, ns)?;
    let xs: Vec<f64> = witnesses.iter().map(|w| (w.big_n as f64).ln()).collect();
    let ys: Vec<f64> = witnesses.iter().map(|w| w.norm.ln()).collect();
    let (slope, stderr) = ols_slope(&xs, &ys);
    Ok(CubicFit {
        slope,
        stderr,
        witnesses,
    })
}

/// How the decay constant `C1` of the length-selection rule is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum C1Mode {
    /// `C1 = exp(-4 pi^2)`, the constant guaranteed for every good `n`.
    Proof,
    /// `C1` = the smallest `cos(t)^{n^2}` over the calibration witnesses.
    Observed,
}

impl std::str::FromStr for C1Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(Self::Proof),
            "observed" => Ok(Self::Observed),
            _ => invalid(format!("c1 mode must be proof or observed, got {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixRow {
    pub j: usize,
    pub n_j: u64,
    /// Total length `N_1 + ... + N_j`.
    pub mk: u128,
    /// `ln` of the operator norm of the prefix product.
    pub log_norm: f64,
    /// `log_norm / ln mk`
    pub ratio: f64,
    /// `n_j alpha` reduced to `[-pi, pi)`.
    pub t_j: f64,
    /// `cos(t_j)^{n_j^2} >= exp(-4 pi^2)`
    pub c1_ok: bool,
    /// `t_j` in `(0.5 m pi / n_j, 2 pi / n_j)` with the estimated `m`; the
    /// factor `0.5` covers the estimate being an upper bound.
    pub t_in_range: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrefixTable {
    pub rows: Vec<PrefixRow>,
    pub c0: f64,
    pub c1: f64,
    pub mode: C1Mode,
    pub m_alpha_estimate: f64,
    /// Fewer than `j_max` blocks were admissible within `MAX_N`.
    pub truncated: bool,
}

impl PrefixTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        wtr.write_record(["j", "Mk", "log_norm", "ratio"]).map_err(err)?;
        for r in &self.rows {
            wtr.write_record([
                r.j.to_string(),
                r.mk.to_string(),
                r.log_norm.to_string(),
                r.ratio.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Number of leading good `n` used to calibrate `C0` (and `C1` when observed).
const CALIBRATION: usize = 5;

/// Greedy prefixes `P_1 ... P_k` of an infinite product, where
/// `P_j = (A1^{n_j} A0)^{n_j^2}` and `n_j` is the smallest good exponent
/// above `n_{j-1}` with
/// `C0 sum_{i<=j} C1^{i-1} N_i^{1/3} >= (sum_{i<=j} N_i)^{1/3 - 2^{-j}}`.
pub fn infinite_product_prefixes(alpha: &Alpha, j_max: usize, mode: C1Mode) -> Result<PrefixTable> {
    if j_max == 0 || j_max > 5 {
        return invalid(format!("j_max must lie in 1..=5, got {j_max}"));
    }
    let good = good_n_sequence(alpha, MAX_DEPTH)?.ns;
    if good.is_empty() {
        return Err(Error::InsufficientData("no good exponents found".into()));
    }
    let calib = growth_witnesses(alpha, &good[..good.len().min(CALIBRATION)])?;
    let c0 = calib
        .iter()
        .map(|w| w.lower_formula / (w.big_n as f64).cbrt())
        .fold(f64::INFINITY, f64::min);
    let c1_proof = (-4.0 * PI * PI).exp();
    let c1 = match mode {
        C1Mode::Proof => c1_proof,
        C1Mode::Observed => calib
            .iter()
            .map(|w| cos_pow(w.t, (w.n as f64) * (w.n as f64)))
            .fold(f64::INFINITY, f64::min),
    };
    let m_est = continued_fraction_dd(alpha.over_pi(), MAX_DEPTH)?.m_alpha_estimate;

    let mut rows = Vec::with_capacity(j_max);
    let (mut x, mut y, mut z) = (0.0, 1.0, 0.0);
    let mut weighted = 0.0;
    let mut total: u128 = 0;
    let mut prev = 0u64;
    for j in 1..=j_max {
        let exponent = 1.0 / 3.0 - 0.5f64.powi(j as i32);
        let decay = c1.powi(j as i32 - 1);
        let pick = good.iter().copied().filter(|&n| n > prev).find(|&n| {
            let nn = n as u128;
            let big_n = nn * nn * nn + nn * nn;
            let lhs = c0 * (weighted + decay * (big_n as f64).cbrt());
            lhs >= ((total + big_n) as f64).powf(exponent)
        });
        let Some(n) = pick else {
            return Ok(PrefixTable {
                rows,
                c0,
                c1,
                mode,
                m_alpha_estimate: m_est,
                truncated: true,
            });
        };
        let nn = n as u128;
        let big_n = nn * nn * nn + nn * nn;
        let k = (n as f64) * (n as f64);
        let t = alpha.reduced(n);
        let (c, d, e) = block_power(t, k);
        // [1 x 0; 0 y 0; 0 z 0] times [1 c 0; 0 d 0; 0 e 0]
        if j == 1 {
            (x, y, z) = (c, d, e);
        } else {
            (x, y, z) = (c + x * d, y * d, z * d);
        }
        weighted += decay * (big_n as f64).cbrt();
        total += big_n;
        prev = n;
        let log_norm = rank_one_tail(x, y, z)?.ln();
        let nf = n as f64;
        rows.push(PrefixRow {
            j,
            n_j: n,
            mk: total,
            log_norm,
            ratio: log_norm / (total as f64).ln(),
            t_j: t,
            c1_ok: cos_pow(t, k) >= c1_proof,
            t_in_range: t > 0.5 * m_est * PI / nf && t < TAU / nf,
        });
    }
    Ok(PrefixTable {
        rows,
        c0,
        c1,
        mode,
        m_alpha_estimate: m_est,
        truncated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_shape() {
        let pair = CubicPair::build_pair(Alpha::pi_sqrt2());
        let a = pair.alpha.radians();
        assert_eq!(pair.a1.row(0), &[1.0, a.sin(), a.cos() - 1.0]);
        assert_eq!(pair.a0, Matrix::diag(&[1.0, 1.0, 0.0]));
        assert_eq!(pair.a1.submatrix(1, 1, 2, 2), pair.r);
    }

    #[test]
    fn good_exponents_for_sqrt2() {
        let g = good_n_sequence(&Alpha::pi_sqrt2(), 5).unwrap();
        assert_eq!(g.ns, vec![3, 17, 99, 577, 3363]);
        assert!(!g.precision_limited);
    }

    #[test]
    fn witness_closed_form_matches_direct() {
        let alpha = Alpha::pi_sqrt2();
        for n in [3, 17, 99] {
            let w = growth_witness(&alpha, n).unwrap();
            let d = w.direct_norm.unwrap();
            assert!((w.norm - d).abs() < 1e-8 * d.max(1.0), "n={n}: {} vs {d}", w.norm);
        }
    }

    #[test]
    fn s_recursion_bounds() {
        let s = s_recursion(&Alpha::pi_sqrt2(), &[3, 3, 3]).unwrap();
        assert_eq!(s.s_values.len(), 4);
        assert_eq!(s.s_values[0], 0.0);
        assert!(s.last() <= s.loose_bound());
    }

    #[test]
    fn prefixes_proof_mode() {
        let t = infinite_product_prefixes(&Alpha::pi_sqrt2(), 2, C1Mode::Proof).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[0].ratio >= 0.25);
        assert!(t.rows[1].ratio > t.rows[0].ratio);
    }
}
