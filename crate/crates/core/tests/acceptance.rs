//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line;
//! run with `--nocapture --test-threads=1` to see them with honest timings.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::*;
use marginal::catalog;
use marginal::classifier::{assemble, classify, coupling_sum, BlockFamily, Growth, Verdict};
use marginal::ctsim::{run_trials, CtOptions, SwitchingLaw};
use marginal::dominance::{candidate_dominant, verify_dominance, verify_dominance_with};
use marginal::growth::{exact_mk, max_normalized_radius};
use marginal::matlib::{euclidean_norm, operator_norm};
use marginal::polynorm::{build_parallelotope, is_barabanov};
use marginal::sublinear::*;
use marginal::words::{self, partition, SegmentColor};
use marginal::{Matrix, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const A: f64 = 2.0;
const S: f64 = 0.1;
const Q: f64 = 0.95;
const HORIZON: usize = 12;
const TOL: f64 = 1e-8;
const BARABANOV_TOL: f64 = 1e-9;
const SAMPLES: usize = 360;

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
    let within = elapsed <= limit;
    let tag = if ok && within { "PASS" } else { "FAIL" };
    println!(
        "{tag} criterion {id:>2} {name}: {detail}; {:.2}s (limit {}s)",
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(within, "criterion {id} exceeded its time limit");
}

/// Barabanov check, classification and bounded `M_k`, for one `(a, b12)` choice.
fn example1_verdict(a: f64, b12: f64) -> (bool, String) {
    let b = Matrix::from_rows(&[[1.0, b12], [0.0, 1.0]]).unwrap();
    let fam = catalog::example1(a, &b, S).unwrap();
    let norm = build_parallelotope(a).unwrap();
    let bar = is_barabanov(&norm, &fam, SAMPLES, BARABANOV_TOL).unwrap();
    let bf = BlockFamily::from_family(&fam, 1).unwrap();
    let c = classify(&bf, HORIZON, Q, TOL).unwrap();
    let mk: Vec<f64> = (1..=12).map(|k| exact_mk(&fam, k).unwrap().0).collect();
    let hi = mk.iter().copied().fold(0.0, f64::max);
    let lo = mk.iter().copied().fold(f64::INFINITY, f64::min);
    let l1 = c.evidence.lambda1.re;
    let l2 = c.evidence.lambda2.re;
    let ok = bar.holds
        && c.verdict == Verdict::MarginallyStable
        && c.growth == Growth::Bounded
        && !c.evidence.eigen_match
        && (l1 - 1.0).abs() < 1e-9
        && (l2 + 1.0).abs() < 1e-9
        && hi / lo <= 3.0;
    let detail = format!(
        "barabanov deviation {:.1e}, verdict {:?}, lambda {l1:+.3} vs {l2:+.3}, max/min M_k {:.3}",
        bar.max_deviation,
        c.verdict,
        hi / lo
    );
    (ok, detail)
}

#[test]
fn criterion_01_example1_reproduction() {
    let t = Instant::now();
    let (ok, detail) = example1_verdict(A, 1.0);
    report(1, "example 1 is marginally stable", ok, t.elapsed(), Duration::from_secs(10), detail);
}

#[test]
fn criterion_02_example1_perturbations() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for _ in 0..20 {
        let a = A + rng.gen_range(-0.05..=0.05);
        let b12 = 1.0 + rng.gen_range(-0.05..=0.05);
        let (ok, detail) = example1_verdict(a, b12);
        if !ok {
            failures.push(format!("a={a:.4} b12={b12:.4}: {detail}"));
        }
    }
    let detail = format!("{} of 20 perturbations changed the verdict {failures:?}", failures.len());
    report(2, "example 1 verdict survives perturbation", failures.is_empty(), t.elapsed(), Duration::from_secs(60), detail);
}

#[test]
fn criterion_03_resonant_variant_grows_linearly() {
    let t = Instant::now();
    let bf = catalog::example1_resonant_blocks(A, &catalog::unit_jordan(), S).unwrap();
    let c = classify(&bf, HORIZON, Q, TOL).unwrap();
    let fam = assemble(&bf).unwrap();
    let per_k: Vec<f64> = (8..=16).map(|k| exact_mk(&fam, k).unwrap().0 / k as f64).collect();
    let c1 = per_k.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = per_k.iter().copied().fold(0.0, f64::max);
    let ok = c.verdict == Verdict::MarginallyUnstable && c.growth == Growth::Linear && c1 > 0.0 && c2 / c1 <= 3.0;
    let detail = format!("verdict {:?}, M_k/k in [{c1:.4}, {c2:.4}], spread {:.3}", c.verdict, c2 / c1);
    report(3, "resonant variant grows linearly", ok, t.elapsed(), Duration::from_secs(30), detail);
}

/// Largest entrywise error of `coupling_sum` against the top-right block of
/// the naive product, relative to that block's size.
fn coupling_error(bf: &BlockFamily, segs: &[Word]) -> f64 {
    let fam = assemble(bf).unwrap();
    let mats: Vec<Vec<Vec<f64>>> = fam.matrices().iter().map(|m| m.to_rows()).collect();
    let letters: Vec<u8> = segs.iter().flat_map(|s| s.letters().to_vec()).collect();
    let d1 = bf.dims().0;
    let p = naive_word_product(&mats, &letters);
    let want: Vec<Vec<f64>> = p[..d1].iter().map(|r| r[d1..].to_vec()).collect();
    let got = coupling_sum(bf, segs).unwrap().to_rows();
    let scale = want.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    max_abs_diff(&got, &want) / scale
}

fn random_segments(rng: &mut ChaCha8Rng, letters: u8, max_total: usize) -> Vec<Word> {
    let total = rng.gen_range(1..=max_total);
    let word: Vec<u8> = (0..total).map(|_| rng.gen_range(0..letters)).collect();
    let mut cuts: Vec<usize> = (1..total).filter(|_| rng.gen_bool(0.2)).collect();
    cuts.insert(0, 0);
    cuts.push(total);
    cuts.windows(2).map(|c| Word::new(word[c[0]..c[1]].to_vec())).collect()
}

#[test]
fn criterion_04_coupling_identity() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ex1 = catalog::example1_blocks(A, &catalog::unit_jordan(), S).unwrap();
    let cubic = BlockFamily::from_family(&CubicPair::build_pair(Alpha::pi_sqrt2()).family(), 1).unwrap();
    let mut worst: f64 = 0.0;
    for bf in [&ex1, &cubic] {
        for _ in 0..100 {
            let segs = random_segments(&mut rng, 2, 50);
            worst = worst.max(coupling_error(bf, &segs));
        }
    }
    let detail = format!("worst relative error {worst:.2e} over 200 words (tol 1e-9)");
    report(4, "coupling sum equals the direct block", worst <= 1e-9, t.elapsed(), Duration::from_secs(5), detail);
}

fn naive_pow(a: &[Vec<f64>], n: u64) -> Vec<Vec<f64>> {
    let mut out = naive_identity(a.len());
    for _ in 0..n {
        out = naive_mul(&out, a);
    }
    out
}

#[test]
fn criterion_05_closed_forms() {
    let t = Instant::now();
    let alpha = Alpha::pi_sqrt2();
    let pair = CubicPair::build_pair(alpha);
    let a0 = pair.a0.to_rows();
    let a1 = pair.a1.to_rows();
    let r = pair.r.to_rows();
    let p = pair.p.to_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut e_single, mut e_proj, mut e_multi): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..200 {
        let n = rng.gen_range(1..=2_000u64);
        e_single = e_single.max((qn_e1(&alpha, n) - naive_pow(&a1, n)[0][1]).abs());
        let pr = naive_mul(&p, &naive_pow(&r, n));
        let want = (n as f64 * alpha.radians()).cos();
        e_proj = e_proj.max((pr[0][0] - want).abs()).max(pr[1][0].abs());
        let k = rng.gen_range(1..=6);
        let ns: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=300)).collect();
        let mut m = naive_identity(3);
        for &ni in &ns {
            m = naive_mul(&naive_mul(&m, &naive_pow(&a1, ni)), &a0);
        }
        e_multi = e_multi.max((coupling_closed_form(&alpha, &ns).unwrap() - m[0][1]).abs());
    }
    let worst = e_single.max(e_proj).max(e_multi);
    let detail = format!("errors {e_single:.1e} / {e_proj:.1e} / {e_multi:.1e} (tol 1e-9)");
    report(5, "cubic pair closed forms", worst <= 1e-9, t.elapsed(), Duration::from_secs(10), detail);
}

#[test]
fn criterion_06_cube_root_exponent() {
    let t = Instant::now();
    let fit = fit_cubic_exponent(&Alpha::pi_sqrt2(), &[3, 17, 99, 577]).unwrap();
    let ok = (0.28..=0.40).contains(&fit.slope);
    let detail = format!("slope {:.4} (window [0.28, 0.40])", fit.slope);
    report(6, "growth exponent near one third", ok, t.elapsed(), Duration::from_secs(120), detail);
}

#[test]
fn criterion_07_cube_root_upper_bound() {
    let t = Instant::now();
    let alpha = Alpha::pi_sqrt2();
    let pair = CubicPair::build_pair(alpha);
    let fam = pair.family();
    // constant fitted on lengths up to 10^3: exact maxima and witnesses
    let mut fitted: f64 = 0.0;
    for k in 1..=16 {
        fitted = fitted.max(exact_mk(&fam, k).unwrap().0 / (k as f64).cbrt());
    }
    for n in 1..=9 {
        let w = growth_witness(&alpha, n).unwrap();
        fitted = fitted.max(w.ratio());
    }
    let c_hat = 2.0 * fitted;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let good = good_n_sequence(&alpha, 4).unwrap().ns;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let mut m = Matrix::identity(3);
        let mut len = 0u64;
        let target = rng.gen_range(10..=10_000u64);
        while len < target {
            // half the patterns stress resonant exponents
            let n = if i % 2 == 0 {
                good[rng.gen_range(0..good.len() - 1)]
            } else {
                rng.gen_range(1..=200)
            };
            if len + n + 1 > 10_000 {
                break;
            }
            m = m.mul(&pair.a1.pow(n)).mul(&pair.a0);
            len += n + 1;
        }
        if len == 0 {
            continue;
        }
        let ratio = operator_norm(&m).unwrap() / (len as f64).cbrt();
        worst = worst.max(ratio);
        if ratio > c_hat {
            violations += 1;
        }
    }
    let detail = format!("C = {c_hat:.4}, worst norm/N^(1/3) {worst:.4}, {violations} violations");
    report(7, "norms stay below C N^(1/3)", violations == 0, t.elapsed(), Duration::from_secs(120), detail);
}

#[test]
fn criterion_08_increment_inequality_grid() {
    let t = Instant::now();
    let mut bad = 0;
    for i in 0..500 {
        let p = 2.0 + 98.0 * i as f64 / 499.0;
        for j in 1..=500 {
            let x = PI / 2.0 * j as f64 / 500.0;
            if !increment_bound_check(p, x).unwrap() {
                bad += 1;
            }
        }
    }
    let detail = format!("{bad} failures on 500x500 grid p in [2, 100], t in (0, pi/2]");
    report(8, "increment inequality grid", bad == 0, t.elapsed(), Duration::from_secs(1), detail);
}

/// Random binary word of length `len`: long runs of `01` mixed with noise.
fn mixed_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(1..40);
            for _ in 0..k {
                out.extend_from_slice(&[0, 1]);
            }
        } else {
            let k = rng.gen_range(1..30);
            out.extend((0..k).map(|_| rng.gen_range(0..2u8)));
        }
    }
    out.truncate(len);
    Word::new(out)
}

#[test]
fn criterion_09_partition_properties() {
    let t = Instant::now();
    let pi: Word = "01".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for i in 0..1000 {
        let word = if i % 2 == 0 {
            Word::new((0..10_000).map(|_| rng.gen_range(0..2u8)).collect())
        } else {
            mixed_word(&mut rng, 10_000)
        };
        let m = if i % 4 < 2 { 0 } else { 2 };
        let part = partition(&word, &pi, m).unwrap();
        let check = part.check(&word);
        // white segments must also pass the independent color test
        let colors_ok = part.segments.iter().all(|s| {
            s.color != SegmentColor::White || words::classify(&s.word, &pi, m).unwrap().is_white()
        });
        if !check.all() || !colors_ok {
            bad += 1;
        }
    }
    let detail = format!("{bad} of 1000 partitions break a condition");
    report(9, "partition structure", bad == 0, t.elapsed(), Duration::from_secs(30), detail);
}

#[test]
fn criterion_10_continuous_time_simulation() {
    let t = Instant::now();
    let c = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
    let b = Matrix::from_rows(&[
        [1.0, 1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    .unwrap();
    let fam = catalog::example2(&c, &b, 10.0).unwrap();
    let laws: Vec<SwitchingLaw> = (0..50).map(|seed| SwitchingLaw::random(seed, 20, 2.5, 7.5, 2).unwrap()).collect();
    let x0 = [0.5, 0.5, 0.5, 0.5];
    let reports = run_trials(&fam, &laws, &x0, 100.0, 0.05, &CtOptions::default()).unwrap();
    let sup = reports.iter().map(|r| r.sup_norm).fold(0.0, f64::max);
    let sigma = reports.iter().map(|r| r.sigma_estimate).fold(f64::NEG_INFINITY, f64::max);
    let violations: usize = reports.iter().map(|r| r.f_monotone_violations).sum();
    let ok = sup <= 10.0 * euclidean_norm(&x0) && violations == 0 && sigma <= 0.02;
    let detail = format!("sup |x| {sup:.4}, f violations {violations}, max sigma {sigma:.4} (limit 0.02)");
    report(10, "switched flow stays bounded", ok, t.elapsed(), Duration::from_secs(60), detail);
}

#[test]
fn criterion_11_dominance_certificates() {
    let t = Instant::now();
    let ex1 = catalog::example1_default(A, S).unwrap();
    let one: Word = "1".parse().unwrap();
    let c1 = verify_dominance(&ex1, &one, HORIZON, Q).unwrap();
    let golden = catalog::golden_pair();
    let (rho, best) = max_normalized_radius(&golden, 10).unwrap();
    let pi: Word = "01".parse().unwrap();
    let c2 = verify_dominance_with(&golden, &pi, 10, Q, Some(rho), TOL).unwrap();
    let cand = candidate_dominant(&golden, 10).unwrap();
    let ok = c1.certified() && c2.certified() && words::cyclically_equal(&best, &pi) && cand.pi == pi;
    let detail = format!(
        "example 1 violations {}, golden violations {} (rho {rho:.6}, worst ratio {:.4} at {}, q {Q})",
        c1.violations.len(),
        c2.violations.len(),
        c2.worst_ratio,
        c2.worst_word
    );
    report(11, "dominance certificates", ok, t.elapsed(), Duration::from_secs(60), detail);
}
