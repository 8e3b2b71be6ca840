//! Continuous-time switching `x' = A(t) x` under piecewise-constant laws.
//!
//! Propagation is exact up to matrix-exponential accuracy. The Lyapunov
//! function `f(x) = sup_{t >= 0} |exp(t A) x|` of a flow with bounded
//! semigroup is approximated by a maximum over a finite time grid.

use std::f64::consts::PI;
use std::fmt;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::growth::MatrixFamily;
use crate::matlib::{euclidean_norm, matrix_exp, Matrix};

/// Sequence of `(duration, letter)` pieces.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SwitchingLaw {
    segments: Vec<(f64, usize)>,
}

impl SwitchingLaw {
    pub fn new(segments: Vec<(f64, usize)>) -> Result<Self> {
        if let Some((d, _)) = segments.iter().find(|(d, _)| !(*d > 0.0) || !d.is_finite()) {
            return invalid(format!("segment durations must be positive and finite, got {d}"));
        }
        Ok(Self { segments })
    }

    pub fn constant(letter: usize, duration: f64) -> Result<Self> {
        Self::new(vec![(duration, letter)])
    }

    /// `count` segments with durations uniform in `[lo, hi]` and uniformly
    /// drawn letters, reproducible from `seed`.
    pub fn random(seed: u64, count: usize, lo: f64, hi: f64, letters: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) || letters == 0 {
            return invalid("random law needs 0 < lo <= hi and at least one letter");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let segments = (0..count)
            .map(|_| (rng.gen_range(lo..=hi), rng.gen_range(0..letters)))
            .collect();
        Self::new(segments)
    }

    pub fn segments(&self) -> &[(f64, usize)] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.0).sum()
    }

    pub fn concat(&self, other: &SwitchingLaw) -> SwitchingLaw {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        SwitchingLaw { segments }
    }

    /// The law restricted to `[0, t_end]`.
    pub fn truncated(&self, t_end: f64) -> SwitchingLaw {
        let mut out = Vec::new();
        let mut t = 0.0;
        for &(d, l) in &self.segments {
            if t >= t_end {
                break;
            }
            let keep = d.min(t_end - t);
            if keep > 0.0 {
                out.push((keep, l));
            }
            t += d;
        }
        SwitchingLaw { segments: out }
    }
}

/// Sampled solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Sample index at the end of each segment.
    pub boundaries: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Rows `t,x1,...,xd,f`.
    pub fn write_csv<W: io::Write>(&self, out: W, f: &LyapunovF) -> Result<()> {
        let d = self.states.first().map_or(0, |x| x.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.push("f".into());
        w.write_record(&header).map_err(csv_err)?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:.6}")];
            row.extend(x.iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{:.12e}", f.eval(x)));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv output failed: {e}"))
}

/// Solution of `x' = A(t) x`, `x(0) = x0`, sampled at most `dt` apart.
///
/// Each segment is cut into equal steps no longer than `dt`; interior samples
/// come from powers of the step exponential, segment ends from the exponential
/// over the whole duration.
pub fn propagate(fam: &MatrixFamily, law: &SwitchingLaw, x0: &[f64], dt: f64) -> Result<Trajectory> {
    let d = fam.dim();
    if x0.len() != d {
        return invalid(format!("initial state has length {}, family dimension is {d}", x0.len()));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return invalid(format!("sampling step must be positive, got {dt}"));
    }
    if let Some(&(dmin, _)) = law.segments.iter().min_by(|a, b| a.0.total_cmp(&b.0)) {
        if dt > dmin {
            return invalid(format!("sampling step {dt} exceeds the shortest segment {dmin}"));
        }
    }
    if let Some(&(_, l)) = law.segments.iter().find(|s| s.1 >= fam.len()) {
        return invalid(format!("letter {l} outside a family of {} matrices", fam.len()));
    }

    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut boundaries = Vec::with_capacity(law.segments.len());
    let mut t0 = 0.0;
    for &(dur, letter) in &law.segments {
        let a = fam.get(letter);
        let steps = (dur / dt).ceil().max(1.0) as usize;
        let h = dur / steps as f64;
        let step = matrix_exp(a, h)?;
        let start = states.last().unwrap().clone();
        let mut x = start.clone();
        for i in 1..steps {
            x = step.mul_vec(&x);
            times.push(t0 + i as f64 * h);
            states.push(x.clone());
        }
        let end = matrix_exp(a, dur)?.mul_vec(&start);
        if end.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow("trajectory left the floating-point range".into()));
        }
        t0 += dur;
        times.push(t0);
        states.push(end);
        boundaries.push(states.len() - 1);
    }
    Ok(Trajectory {
        times,
        states,
        boundaries,
    })
}

/// Grid approximation of `f(x) = sup_{t >= 0} |exp(t A) x|`.
#[derive(Clone, Debug)]
pub struct LyapunovF {
    grid: Vec<Matrix>,
    pub t_max: f64,
    pub dt: f64,
}

impl LyapunovF {
    /// Precomputes `exp(t a)` on `{0, dt, ..., t_max}`.
    pub fn new(a: &Matrix, t_max: f64, dt: f64) -> Result<Self> {
        a.require_square()?;
        if !(t_max > 0.0 && dt > 0.0) || !t_max.is_finite() {
            return invalid("grid horizon and step must be positive");
        }
        let count = (t_max / dt).floor() as usize;
        let grid = (0..=count)
            .into_par_iter()
            .map(|i| matrix_exp(a, i as f64 * dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, t_max, dt })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.grid
            .iter()
            .map(|e| euclidean_norm(&e.mul_vec(x)))
            .fold(0.0, f64::max)
    }
}

/// `max` over the grid `{0, dt, ..., t_max}` of `|exp(t a1) x|`.
pub fn lyapunov_f(a1: &Matrix, x: &[f64], t_max: f64, dt: f64) -> Result<f64> {
    if x.len() != a1.cols() {
        return invalid("state dimension differs from the matrix");
    }
    Ok(LyapunovF::new(a1, t_max, dt)?.eval(x))
}

/// Summary of one simulated trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CtReport {
    pub sup_norm: f64,
    /// `max (1/t) log |x(t)|` over samples with `t >= t_max / 2`.
    pub sigma_estimate: f64,
    /// Non-flow segments along which `f` grew by more than `1e-6 f(x0)`.
    pub f_monotone_violations: usize,
    pub f_initial: f64,
    pub f_final: f64,
    /// Largest `log(f_end / f_start) / duration` over non-flow segments;
    /// negative when `f` contracts on each of them.
    pub worst_f_rate: f64,
}

impl fmt::Display for CtReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sup_norm: {:.9}", self.sup_norm)?;
        writeln!(f, "sigma_estimate: {:.6e}", self.sigma_estimate)?;
        writeln!(f, "f_monotone_violations: {}", self.f_monotone_violations)?;
        writeln!(f, "f_initial: {:.9}", self.f_initial)?;
        writeln!(f, "f_final: {:.9e}", self.f_final)?;
        write!(f, "worst_f_rate: {:.6}", self.worst_f_rate)
    }
}

/// Settings for the Lyapunov-function monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CtOptions {
    /// Letter whose flow defines `f`.
    pub flow_letter: usize,
    /// Grid horizon for the supremum defining `f`.
    pub f_horizon: f64,
    pub f_step: f64,
    /// Relative slack, in units of `f(x0)`, before an increase counts.
    pub f_tol: f64,
}

impl Default for CtOptions {
    fn default() -> Self {
        Self {
            flow_letter: 0,
            f_horizon: 4.0 * PI,
            f_step: 1e-2,
            f_tol: 1e-6,
        }
    }
}

/// Simulates `law` up to `t_max` and monitors `f` at segment boundaries.
pub fn check_f_decreasing(
    fam: &MatrixFamily,
    law: &SwitchingLaw,
    x0: &[f64],
    t_max: f64,
    dt: f64,
    opts: &CtOptions,
) -> Result<CtReport> {
    if opts.flow_letter >= fam.len() {
        return invalid("flow letter outside the family");
    }
    let f = LyapunovF::new(fam.get(opts.flow_letter), opts.f_horizon, opts.f_step)?;
    check_f_decreasing_with(fam, law, x0, t_max, dt, opts, &f)
}

/// As [`check_f_decreasing`] with a prebuilt `f`.
pub fn check_f_decreasing_with(
    fam: &MatrixFamily,
    law: &SwitchingLaw,
    x0: &[f64],
    t_max: f64,
    dt: f64,
    opts: &CtOptions,
    f: &LyapunovF,
) -> Result<CtReport> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return invalid(format!("simulation horizon must be positive, got {t_max}"));
    }
    let law = law.truncated(t_max);
    // truncation may leave a final piece shorter than `dt`
    let shortest = law.segments.iter().map(|s| s.0).fold(dt, f64::min);
    let traj = propagate(fam, &law, x0, shortest)?;

    let sup_norm = traj
        .states
        .iter()
        .map(|x| euclidean_norm(x))
        .fold(0.0, f64::max);
    let horizon = law.total_duration();
    let sigma_estimate = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t > 0.0 && **t >= horizon / 2.0)
        .map(|(t, x)| euclidean_norm(x).ln() / t)
        .fold(f64::NEG_INFINITY, f64::max);

    let f_initial = f.eval(x0);
    let mut f_prev = f_initial;
    let mut violations = 0;
    let mut worst_f_rate = f64::NEG_INFINITY;
    for (&(dur, letter), &idx) in law.segments.iter().zip(&traj.boundaries) {
        let f_now = f.eval(&traj.states[idx]);
        if letter != opts.flow_letter {
            if f_now > f_prev + opts.f_tol * f_initial {
                violations += 1;
            }
            if f_prev > 0.0 && f_now > 0.0 {
                worst_f_rate = worst_f_rate.max((f_now / f_prev).ln() / dur);
            }
        }
        f_prev = f_now;
    }
    Ok(CtReport {
        sup_norm,
        sigma_estimate: if sigma_estimate.is_finite() { sigma_estimate } else { 0.0 },
        f_monotone_violations: violations,
        f_initial,
        f_final: f_prev,
        worst_f_rate,
    })
}

/// Independent trials in parallel, one report per law, sharing one `f` grid.
pub fn run_trials(
    fam: &MatrixFamily,
    laws: &[SwitchingLaw],
    x0: &[f64],
    t_max: f64,
    dt: f64,
    opts: &CtOptions,
) -> Result<Vec<CtReport>> {
    if opts.flow_letter >= fam.len() {
        return invalid("flow letter outside the family");
    }
    let f = LyapunovF::new(fam.get(opts.flow_letter), opts.f_horizon, opts.f_step)?;
    laws.par_iter()
        .map(|law| check_f_decreasing_with(fam, law, x0, t_max, dt, opts, &f))
        .collect()
}
