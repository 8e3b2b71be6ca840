//! Continued fractions in double-double precision.

use super::angle::DoubleDouble;
use crate::error::{invalid, Result};

/// Largest supported expansion depth.
pub const MAX_DEPTH: usize = 40;

/// Partial quotients and convergents `p_k / q_k` of a positive real.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergentTable {
    pub x: f64,
    pub partial_quotients: Vec<u64>,
    pub convergents: Vec<(u64, u64)>,
    /// `min q^2 |x - p/q|` over the convergents that differ from `x`; an
    /// upper bound for the best Liouville-type constant of `x`.
    pub m_alpha_estimate: f64,
    /// The expansion stopped before the requested depth because the
    /// remainder vanished to working precision.
    pub truncated: bool,
}

impl ConvergentTable {
    pub fn denominators(&self) -> impl Iterator<Item = u64> + '_ {
        self.convergents.iter().map(|c| c.1)
    }
}

pub fn continued_fraction(x: f64, depth: usize) -> Result<ConvergentTable> {
    continued_fraction_dd(DoubleDouble::from_f64(x), depth)
}

pub fn continued_fraction_dd(x: DoubleDouble, depth: usize) -> Result<ConvergentTable> {
    if !(x.hi >= 0.0) || !x.hi.is_finite() {
        return invalid(format!("continued fractions need a finite x >= 0, got {}", x.hi));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return invalid(format!("depth must lie in 1..={MAX_DEPTH}, got {depth}"));
    }
    let one = DoubleDouble::from_f64(1.0);
    let mut quotients = Vec::with_capacity(depth);
    let mut convergents = Vec::with_capacity(depth);
    // (p_{-2}, q_{-2}) = (0, 1) and (p_{-1}, q_{-1}) = (1, 0)
    let (mut p_prev, mut q_prev): (u128, u128) = (0, 1);
    let (mut p, mut q): (u128, u128) = (1, 0);
    let mut rest = x;
    let mut truncated = false;
    for k in 0..depth {
        let a_dd = rest.floor();
        let a = a_dd.to_f64();
        if a >= 1e15 {
            truncated = true;
            break;
        }
        let a = a as u128;
        let (pn, qn) = (a * p + p_prev, a * q + q_prev);
        if qn > u64::MAX as u128 || pn > u64::MAX as u128 {
            truncated = true;
            break;
        }
        quotients.push(a as u64);
        convergents.push((pn as u64, qn as u64));
        (p_prev, q_prev, p, q) = (p, q, pn, qn);
        let frac = rest - a_dd;
        // the remainder carries an error near 1e-32 q^2, so stop well before q^2 reaches 1e30
        if frac.hi <= 1e-30 * (qn as f64) * (qn as f64) || qn > 100_000_000_000_000 {
            truncated = k + 1 < depth;
            break;
        }
        rest = one / frac;
    }

    let mut m = f64::INFINITY;
    for &(p, q) in &convergents {
        let qd = DoubleDouble::from_u64(q);
        let err = (x * qd - DoubleDouble::from_u64(p)).abs().to_f64();
        let v = err * q as f64;
        if err > 0.0 && v < m {
            m = v;
        }
    }
    Ok(ConvergentTable {
        x: x.to_f64(),
        partial_quotients: quotients,
        convergents,
        m_alpha_estimate: m,
        truncated,
    })
}
