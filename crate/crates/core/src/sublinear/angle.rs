//! Double-double arithmetic and rotation angles stored in turns.
//!
//! `sin(n alpha)` for `n` up to about `10^12` needs the fractional part of
//! `n alpha / 2pi` to far more bits than a double holds; an unevaluated sum
//! of two doubles gives roughly 106 bits.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact for `n < 2^106`.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn floor(self) -> Self {
        let f = self.hi.floor();
        if f == self.hi {
            Self::norm(f, self.lo.floor())
        } else {
            Self::from_f64(f)
        }
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(self) -> Self {
        let r = self - self.floor();
        if r.hi > 1.0 || (r.hi == 1.0 && r.lo >= 0.0) {
            r - Self::from_f64(1.0)
        } else if r.hi < 0.0 || (r.hi == 0.0 && r.lo < 0.0) {
            r + Self::from_f64(1.0)
        } else {
            r
        }
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::default();
        }
        let y = self.hi.sqrt();
        let (p, e) = two_prod(y, y);
        let r = (self - Self::new(p, e)).hi;
        Self::norm(y, r / (2.0 * y))
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Self::norm(s, e + f)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.hi, -self.lo)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        Self::norm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::from_f64(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::from_f64(q2);
        let q3 = r.hi / o.hi;
        Self::norm(q1, q2) + Self::from_f64(q3)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

/// `2 pi` to double-double precision.
pub const TAU_DD: DoubleDouble = DoubleDouble::new(TAU, 2.449_293_598_294_706_4e-16);

/// Rotation angle `alpha`, held as `alpha / 2pi` in double-double.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha {
    turns: DoubleDouble,
    label: AlphaLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AlphaLabel {
    PiSqrt2,
    PiPhi,
    Radians,
}

impl Alpha {
    /// `alpha = pi sqrt(2)`, so `alpha / 2pi = sqrt(2) / 2`.
    pub fn pi_sqrt2() -> Self {
        let s = DoubleDouble::from_f64(2.0).sqrt();
        Self {
            turns: DoubleDouble::new(s.hi / 2.0, s.lo / 2.0),
            label: AlphaLabel::PiSqrt2,
        }
    }

    /// `alpha = pi (1 + sqrt 5) / 2`, so `alpha / 2pi = (1 + sqrt 5) / 4`.
    pub fn pi_phi() -> Self {
        let s = DoubleDouble::from_f64(5.0).sqrt() + DoubleDouble::from_f64(1.0);
        Self {
            turns: DoubleDouble::new(s.hi / 4.0, s.lo / 4.0),
            label: AlphaLabel::PiPhi,
        }
    }

    pub fn from_radians(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return invalid(format!("angle must be finite, got {alpha}"));
        }
        Ok(Self {
            turns: DoubleDouble::from_f64(alpha) / TAU_DD,
            label: AlphaLabel::Radians,
        })
    }

    pub fn radians(&self) -> f64 {
        (self.turns * TAU_DD).to_f64()
    }

    /// `alpha / 2pi`
    pub fn turns(&self) -> DoubleDouble {
        self.turns
    }

    /// `alpha / pi`
    pub fn over_pi(&self) -> DoubleDouble {
        DoubleDouble::new(2.0 * self.turns.hi, 2.0 * self.turns.lo)
    }

    /// Fractional part of `n alpha / 2pi`.
    pub fn frac_turns(&self, n: u64) -> f64 {
        (DoubleDouble::from_u64(n) * self.turns).fract().to_f64()
    }

    /// Representative of `n alpha` modulo `2pi` in `[-pi, pi)`.
    pub fn reduced(&self, n: u64) -> f64 {
        let mut f = self.frac_turns(n);
        if f >= 0.5 {
            f -= 1.0;
        }
        TAU * f
    }

    pub fn sin_n(&self, n: u64) -> f64 {
        self.reduced(n).sin()
    }

    pub fn cos_n(&self, n: u64) -> f64 {
        self.reduced(n).cos()
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            AlphaLabel::PiSqrt2 => write!(f, "pi*sqrt2"),
            AlphaLabel::PiPhi => write!(f, "pi*phi"),
            AlphaLabel::Radians => write!(f, "{}", self.radians()),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// `pi*sqrt2`, `pi*phi`, or an angle in radians.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(' ', "").as_str() {
            "pi*sqrt2" | "pi*sqrt(2)" => Ok(Self::pi_sqrt2()),
            "pi*phi" => Ok(Self::pi_phi()),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("cannot read angle {s:?}")))
                .and_then(Self::from_radians),
        }
    }
}

/// `1 - cos t` without cancellation.
pub(crate) fn one_minus_cos(t: f64) -> f64 {
    let h = (0.5 * t).sin();
    2.0 * h * h
}

/// `cos(t)^k` for large integral `k` (passed as a float so that `k = n^2`
/// may exceed the `u64` range), accurate when `cos t` is close to `+-1`.
pub(crate) fn cos_pow(t: f64, k: f64) -> f64 {
    let t = t.rem_euclid(TAU);
    let c = t.cos();
    if c == 0.0 {
        return 0.0;
    }
    // log|cos t| through whichever half-angle form avoids cancellation
    let log_abs = if c > 0.0 {
        (-one_minus_cos(t)).ln_1p()
    } else {
        let h = (0.5 * (t - PI)).sin();
        (-2.0 * h * h).ln_1p()
    };
    let mag = (k * log_abs).exp();
    if c < 0.0 && k % 2.0 == 1.0 {
        -mag
    } else {
        mag
    }
}
