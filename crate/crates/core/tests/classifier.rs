mod common;

use common::*;
use marginal::catalog;
use marginal::classifier::{assemble, classify, coupling_sum, BlockFamily, Growth, Verdict};
use marginal::growth::exact_mk;
use marginal::matlib::jordan_order;
use marginal::sublinear::{Alpha, CubicPair};
use marginal::{Matrix, MatrixFamily, Word};
use proptest::prelude::*;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

/// Top-right `d1 x d2` block of the naive product of the assembled matrices.
fn direct_top_right(fam: &MatrixFamily, d1: usize, letters: &[u8]) -> Vec<Vec<f64>> {
    let mats: Vec<Vec<Vec<f64>>> = fam.matrices().iter().map(|m| m.to_rows()).collect();
    let p = naive_word_product(&mats, letters);
    p[..d1].iter().map(|r| r[d1..].to_vec()).collect()
}

fn check_segments(bf: &BlockFamily, segs: &[Word], tol: f64) {
    let fam = assemble(bf).unwrap();
    let letters: Vec<u8> = segs.iter().flat_map(|s| s.letters().to_vec()).collect();
    let got = coupling_sum(bf, segs).unwrap().to_rows();
    let want = direct_top_right(&fam, bf.dims().0, &letters);
    let scale = want.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    assert!(max_abs_diff(&got, &want) <= tol * scale, "{segs:?}: {got:?} vs {want:?}");
}

fn cubic_blocks() -> BlockFamily {
    BlockFamily::from_family(&CubicPair::build_pair(Alpha::pi_sqrt2()).family(), 1).unwrap()
}

#[test]
fn named_coupling_sums() {
    let ex1 = catalog::example1_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap();
    check_segments(&ex1, &[w("1"), w("0"), w("1")], 1e-12);
    check_segments(&ex1, &[w("0110")], 1e-12);
    check_segments(&cubic_blocks(), &[w("011"), w("0"), w("11")], 1e-10);
    assert!(coupling_sum(&ex1, &[]).is_err());
}

#[test]
fn cubic_pair_decomposes_into_projection_and_rotation() {
    let pair = CubicPair::build_pair(Alpha::pi_sqrt2());
    let bf = cubic_blocks();
    assert_eq!(bf.block2.get(0), &pair.p);
    assert_eq!(bf.block2.get(1), &pair.r);
    assert_eq!(bf.couplings[1].as_slice(), &pair.a_vec);
    assert_eq!(bf.couplings[0].as_slice(), &[0.0, 0.0]);
    assert_eq!(assemble(&bf).unwrap().matrices(), pair.family().matrices());
}

#[test]
fn example1_is_marginally_stable_and_bounded() {
    let bf = catalog::example1_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap();
    let c = classify(&bf, 12, 0.95, 1e-8).unwrap();
    assert_eq!(c.verdict, Verdict::MarginallyStable);
    assert_eq!(c.growth, Growth::Bounded);
    assert!(c.evidence.cyclic_match && !c.evidence.eigen_match);
    let fam = assemble(&bf).unwrap();
    let fitted = (1..=8).map(|k| exact_mk(&fam, k).unwrap().0).fold(0.0, f64::max);
    for k in 9..=16 {
        assert!(exact_mk(&fam, k).unwrap().0 <= fitted * (1.0 + 1e-9), "k = {k}");
    }
}

#[test]
fn resonant_variant_grows_linearly() {
    let bf = catalog::example1_resonant_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap();
    let c = classify(&bf, 12, 0.95, 1e-8).unwrap();
    assert_eq!(c.verdict, Verdict::MarginallyUnstable);
    assert_eq!(c.growth, Growth::Linear);
    let fam = assemble(&bf).unwrap();
    let per_k: Vec<f64> = (8..=16).map(|k| exact_mk(&fam, k).unwrap().0 / k as f64).collect();
    let lo = per_k.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = per_k.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo <= 3.0, "{per_k:?}");
}

#[test]
fn coupling_scaling_keeps_jordan_order() {
    let bf = catalog::example1_resonant_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap();
    let pi = w("1");
    let lambda = num_complex::Complex64::new(1.0, 0.0);
    let base = jordan_order(&assemble(&bf).unwrap().product(&pi).unwrap(), lambda, 1e-8).unwrap();
    assert_eq!(base, 2);
    for c in [-3.0, -0.2, 0.5, 7.0] {
        let scaled = assemble(&bf.with_scaled_couplings(c)).unwrap();
        assert_eq!(jordan_order(&scaled.product(&pi).unwrap(), lambda, 1e-8).unwrap(), base);
    }
}

/// Swapping the letter order of a family renames every word; the verdict
/// must not depend on which rotation of the dominant word is canonical.
fn relabel(bf: &BlockFamily) -> BlockFamily {
    let rev = |f: &MatrixFamily| MatrixFamily::new(f.matrices().iter().rev().cloned().collect()).unwrap();
    BlockFamily::new(rev(&bf.block1), rev(&bf.block2), bf.couplings.iter().rev().cloned().collect()).unwrap()
}

#[test]
fn verdict_invariant_under_rotation_of_dominant_word() {
    for (bf, expect) in [
        (catalog::example1_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap(), Verdict::MarginallyStable),
        (catalog::example1_resonant_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap(), Verdict::MarginallyUnstable),
    ] {
        let a = classify(&bf, 10, 0.95, 1e-8).unwrap();
        let b = classify(&relabel(&bf), 10, 0.95, 1e-8).unwrap();
        assert_eq!(a.verdict, expect);
        assert_eq!(b.verdict, expect);
    }
    // products over "01" and "10" are similar, so their Jordan data agree
    let s = |v: &[f64]| MatrixFamily::new(v.iter().map(|&x| Matrix::scalar(x)).collect()).unwrap();
    let bf = BlockFamily::new(s(&[2.0, 0.5]), s(&[3.0, 1.0 / 3.0]), vec![Matrix::scalar(1.0), Matrix::scalar(1.0)]).unwrap();
    let full = assemble(&bf).unwrap();
    let one = num_complex::Complex64::new(1.0, 0.0);
    let j01 = jordan_order(&full.product(&w("01")).unwrap(), one, 1e-8).unwrap();
    let j10 = jordan_order(&full.product(&w("10")).unwrap(), one, 1e-8).unwrap();
    assert_eq!(j01, j10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn coupling_sum_equals_direct_block(
        letters in prop::collection::vec(0u8..2, 1..=50),
        cuts in prop::collection::vec(any::<prop::sample::Index>(), 0..8),
        cubic in any::<bool>(),
    ) {
        let bf = if cubic {
            cubic_blocks()
        } else {
            catalog::example1_blocks(2.0, &catalog::unit_jordan(), 0.1).unwrap()
        };
        let mut points: Vec<usize> = cuts.iter().map(|i| i.index(letters.len())).filter(|&p| p > 0).collect();
        points.sort_unstable();
        points.dedup();
        let mut segs = Vec::new();
        let mut prev = 0;
        for p in points.into_iter().chain(std::iter::once(letters.len())) {
            segs.push(Word::new(letters[prev..p].to_vec()));
            prev = p;
        }
        check_segments(&bf, &segs, 1e-9);
    }

    /// Perturbing the upper entries of the bounded example keeps its verdict,
    /// and scaling the couplings never changes it either.
    #[test]
    fn stable_verdict_survives_perturbation_and_scaling(da in -0.05f64..0.05, db in -0.05f64..0.05, c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let b = Matrix::from_rows(&[[1.0, 1.0 + db / 0.1], [0.0, 1.0]]).unwrap();
        let bf = catalog::example1_blocks(2.0 + da, &b, 0.1).unwrap();
        let v = classify(&bf, 12, 0.95, 1e-8).unwrap();
        prop_assert_eq!(v.verdict, Verdict::MarginallyStable);
        prop_assert!(!v.evidence.eigen_match);
        let scaled = classify(&bf.with_scaled_couplings(c), 12, 0.95, 1e-8).unwrap();
        prop_assert_eq!(scaled.verdict, Verdict::MarginallyStable);
    }
}
