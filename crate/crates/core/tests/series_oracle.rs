use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use unitary_ring::kernel::{decompose_real_imag, pointwise_mul, Kernel, PrimeSet};
use unitary_ring::random::{self, Family};
use unitary_ring::series::{
    series_eval, tail_bound, verify_orthproduct, verify_primecompfactor, verify_realimsplit,
    verify_refactorization,
};
use unitary_ring::{Error, Growth};

/// Euler–Maclaurin: partial sum to `n - 1` plus corrections through `B_2`.
fn zeta_em(s: Complex64, n: u64) -> Complex64 {
    let nf = n as f64;
    let head: Complex64 = (1..n).map(|k| (-s * (k as f64).ln()).exp()).sum();
    let np = |e: Complex64| (e * nf.ln()).exp();
    head + np(1.0 - s) / (s - 1.0) + np(-s) / 2.0 + s * np(-s - 1.0) / 12.0
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn oracle_hits_known_values() {
    assert!((zeta_em(c(2.0, 0.0), 1000).re - PI * PI / 6.0).abs() < 1e-12);
    assert!((zeta_em(c(4.0, 0.0), 1000).re - PI.powi(4) / 90.0).abs() < 1e-12);
}

#[test]
fn tail_bounds_cover_the_truth_and_shrink() {
    let cases = [
        (Kernel::one(), c(2.0, 0.0)),
        (Kernel::one(), c(3.0, 1.0)),
        (Kernel::two_omega(), c(2.0, 0.0)),
        (Kernel::id(), c(3.5, -2.0)),
    ];
    for (f, s) in cases {
        let truth = match f.name().as_str() {
            "one" => zeta_em(s, 20_000),
            "twoomega" => zeta_em(s, 20_000).powu(2) / zeta_em(2.0 * s, 20_000),
            "id" => zeta_em(s - 1.0, 20_000),
            other => panic!("{other}"),
        };
        let mut last = f64::INFINITY;
        for n in [1_000u64, 10_000, 100_000] {
            let v = series_eval(&f, s, n).unwrap();
            let err = (v.value - truth).norm();
            assert!(err <= v.tail_bound + 1e-9, "{} at {s}, N={n}: {err} > {}", f.name(), v.tail_bound);
            assert!(v.tail_bound < last);
            last = v.tail_bound;
        }
    }
}

#[test]
fn hardy_series_approaches_five_halves() {
    let v = series_eval(&Kernel::two_omega(), c(2.0, 0.0), 1_000_000).unwrap();
    assert!((v.value.re - 2.5).abs() <= v.tail_bound);
    assert!(v.value.re < 2.5);
}

#[test]
fn divergent_series_rejected() {
    assert!(matches!(series_eval(&Kernel::one(), c(1.0, 5.0), 100), Err(Error::Domain(_))));
    assert!(matches!(series_eval(&Kernel::id(), c(1.9, 0.0), 100), Err(Error::Domain(_))));
    assert!(tail_bound(Growth::new(0.0, 0.0), 0.5, 10).unwrap() == 0.0);
}

#[test]
fn refactorization_needs_complete_multiplicativity() {
    let f = random::kernel(Family::Complex, 3);
    assert!(verify_refactorization(&f, &Kernel::one(), c(3.0, 0.0), 1000).is_err());
}

#[test]
fn orthogonal_supports_factor() {
    let odd = Kernel::prime_indicator(PrimeSet::new([2]).unwrap().complement());
    let even = Kernel::prime_indicator(PrimeSet::new([2]).unwrap());
    let f = pointwise_mul(&Kernel::id(), &odd);
    let g = pointwise_mul(&Kernel::mobrad(), &even);
    assert!(verify_orthproduct(&f, &g, c(3.0, 0.5), 50_000).unwrap().passed());
    assert!(matches!(
        verify_orthproduct(&Kernel::one(), &Kernel::one(), c(3.0, 0.0), 100),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn prime_complement_factorization() {
    let set = PrimeSet::new([2, 3, 7]).unwrap();
    let r = verify_primecompfactor(&set, &Kernel::two_omega(), c(2.5, 1.0), 100_000).unwrap();
    assert!(r.passed(), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refactorization_for_random_pairs(a in any::<u64>(), b in any::<u64>(), t in -5.0f64..5.0) {
        let f = random::kernel(Family::CompletelyMultiplicative, a);
        let g = random::kernel(Family::CompletelyMultiplicative, b);
        let r = verify_refactorization(&f, &g, c(2.5, t), 20_000).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn real_imaginary_split(a in any::<u64>(), b in any::<u64>()) {
        let f = random::kernel(Family::CompletelyMultiplicative, a);
        let g = random::kernel(Family::CompletelyMultiplicative, b);
        let r = verify_realimsplit(&f, &g, c(3.0, 0.0), 20_000).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
        let (re, im) = decompose_real_imag(&f);
        for n in [2u64, 9, 25, 49] {
            let v = f.eval(n).unwrap();
            let (p, e) = match n { 2 => (2, 1), 9 => (3, 2), 25 => (5, 2), _ => (7, 2) };
            prop_assert_eq!(re.rule(p, e).re, f.rule(p, e).re);
            prop_assert_eq!(im.rule(p, e).re, f.rule(p, e).im);
            prop_assert_eq!(v, f.rule(p, e));
        }
    }

    #[test]
    fn series_within_tail_of_oracle(re in 2.2f64..5.0, im in -10.0f64..10.0) {
        let s = c(re, im);
        let v = series_eval(&Kernel::one(), s, 5000).unwrap();
        prop_assert!((v.value - zeta_em(s, 20_000)).norm() <= v.tail_bound + 1e-9);
    }
}
