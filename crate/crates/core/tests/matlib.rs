mod common;

use common::*;
use marginal::matlib::{eigenvalues, jordan_order, matrix_exp, operator_norm, spectral_radius, spectrum};
use marginal::Matrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn square(max_dim: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_dim).prop_flat_map(|d| {
        prop::collection::vec(-3.0f64..3.0, d * d).prop_map(move |v| Matrix::new(d, d, v).unwrap())
    })
}

#[test]
fn named_values() {
    assert_eq!(spectral_radius(&Matrix::identity(2)).unwrap(), 1.0);
    assert!((spectral_radius(&mat(&[&[1.0, 2.0], &[0.0, -1.0]])).unwrap() - 1.0).abs() < 1e-15);
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((operator_norm(&mat(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap() - golden).abs() < 1e-12);
    assert!((operator_norm(&mat(&[&[1.0, 2.0], &[0.0, -1.0]])).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    let j = mat(&[&[1.0, 1.0], &[0.0, 1.0]]);
    assert_eq!(jordan_order(&j, Complex64::new(1.0, 0.0), 1e-8).unwrap(), 2);
    assert_eq!(jordan_order(&Matrix::identity(2), Complex64::new(1.0, 0.0), 1e-8).unwrap(), 1);
    assert_eq!(jordan_order(&j, Complex64::new(2.0, 0.0), 1e-8).unwrap(), 0);
    assert!(jordan_order(&j, Complex64::new(1.0, 0.0), 0.0).is_err());
    let rot = mat(&[&[0.0, -1.0], &[1.0, 0.0]]);
    let q = matrix_exp(&rot, std::f64::consts::FRAC_PI_2).unwrap();
    assert!(q.max_abs_diff(&rot) < 1e-14);
    assert_eq!(matrix_exp(&Matrix::zeros(3, 3), 7.0).unwrap(), Matrix::identity(3));
}

#[test]
fn eigenvalues_match_characteristic_polynomial_in_dim_two() {
    for (a, b, c, d) in [(1.0, 2.0, 3.0, 4.0), (0.0, -1.0, 1.0, 0.0), (2.0, 1.0, 0.0, 2.0), (0.3, -5.0, 0.7, 0.1)] {
        let m = mat(&[&[a, b], &[c, d]]);
        let tr: f64 = a + d;
        let det = a * d - b * c;
        let disc = Complex64::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let mut want = [(Complex64::new(tr, 0.0) + disc) / 2.0, (Complex64::new(tr, 0.0) - disc) / 2.0];
        let mut got = eigenvalues(&m).unwrap();
        let key = |z: &Complex64| (z.re, z.im);
        got.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        want.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-7, "{g} vs {w}");
        }
    }
}

#[test]
fn clusters_collect_multiplicities() {
    let s = spectrum(&Matrix::diag(&[2.0, 2.0, -1.0, 0.5])).unwrap();
    assert_eq!(s.spectral_radius, 2.0);
    assert!(s.eigenvalues.iter().any(|(l, k)| (l.re - 2.0).abs() < 1e-9 && *k == 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operator_norm_matches_power_iteration(m in square(4)) {
        let want = power_norm(&m.to_rows());
        let got = operator_norm(&m).unwrap();
        prop_assert!((got - want).abs() <= 1e-6 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn spectral_radius_below_operator_norm(m in square(4)) {
        prop_assert!(spectral_radius(&m).unwrap() <= operator_norm(&m).unwrap() * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn spectral_radius_of_powers(m in square(4), k in 1u64..=8) {
        let r = spectral_radius(&m).unwrap();
        let rk = spectral_radius(&m.pow(k)).unwrap();
        let want = r.powi(k as i32);
        prop_assert!((rk - want).abs() <= 1e-8 * want.max(1e-300) + 1e-12, "{} vs {}", rk, want);
    }

    #[test]
    fn exponential_matches_taylor_and_semigroup(m in square(4), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let e = matrix_exp(&m, t).unwrap();
        let oracle = taylor_exp(&m.to_rows(), t);
        let scale = oracle.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        prop_assert!(max_abs_diff(&e.to_rows(), &oracle) <= 1e-9 * scale);
        let lhs = matrix_exp(&m, s + t).unwrap();
        let rhs = matrix_exp(&m, s).unwrap().mul(&e);
        let scale = lhs.as_slice().iter().fold(1.0f64, |a, x| a.max(x.abs()));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * scale);
    }

    #[test]
    fn products_match_naive(a in square(3), k in 0u64..6) {
        let rows = a.to_rows();
        let mut want = naive_identity(rows.len());
        for _ in 0..k {
            want = naive_mul(&want, &rows);
        }
        let scale = want.iter().flatten().fold(1.0f64, |s, x| s.max(x.abs()));
        prop_assert!(max_abs_diff(&a.pow(k).to_rows(), &want) <= 1e-12 * scale);
    }

    /// Jordan structure survives a similarity by a well-conditioned matrix.
    #[test]
    fn jordan_order_similarity_invariant(
        lambda in prop_oneof![Just(1.0f64), Just(-1.0), Just(0.5), Just(2.0)],
        sizes in prop::sample::select(vec![vec![1usize], vec![2], vec![3], vec![2, 1], vec![1, 1], vec![3, 1], vec![2, 2]]),
        other in 3.0f64..4.0,
        noise in prop::collection::vec(-0.15f64..0.15, 25),
    ) {
        let total: usize = sizes.iter().sum();
        let d = total + 1;
        let mut j = Matrix::zeros(d, d);
        let mut at = 0;
        for &s in &sizes {
            for i in 0..s {
                j[(at + i, at + i)] = lambda;
                if i + 1 < s {
                    j[(at + i, at + i + 1)] = 1.0;
                }
            }
            at += s;
        }
        j[(total, total)] = other;
        let mut s = Matrix::identity(d);
        for r in 0..d {
            for c in 0..d {
                s[(r, c)] += noise[r * 5 + c];
            }
        }
        let sinv = s.inverse().unwrap();
        let cond = operator_norm(&s).unwrap() * operator_norm(&sinv).unwrap();
        prop_assume!(cond < 10.0);
        let similar = s.mul(&j).mul(&sinv);
        let expected = *sizes.iter().max().unwrap();
        let l = Complex64::new(lambda, 0.0);
        prop_assert_eq!(jordan_order(&j, l, 1e-8).unwrap(), expected);
        prop_assert_eq!(jordan_order(&similar, l, 1e-8 * cond).unwrap(), expected);
    }
}
