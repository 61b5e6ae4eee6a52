use std::sync::Arc;

use num_complex::Complex64;
use unitary_ring::characters::{
    box_sum_all_characters, char_power_principal, character, character_table_csv, characters,
    derivation_certificate, is_unit, zero_set_indicator, UnitGroup,
};
use unitary_ring::identities::totient_by_count;
use unitary_ring::integer::gcd;

#[test]
fn group_orders_match_totient() {
    for k in 2..=200 {
        let g = UnitGroup::new(k).unwrap();
        assert_eq!(g.order(), totient_by_count(k), "k = {k}");
        assert_eq!(g.orders().iter().product::<u64>(), g.order());
        assert_eq!(characters(k).unwrap().len() as u64, g.order());
    }
}

#[test]
fn characters_are_periodic_and_completely_multiplicative() {
    for k in 2..=30 {
        for chi in characters(k).unwrap() {
            for n in 1..=3 * k {
                assert_eq!(chi.value(n), chi.value(n + k), "k={k} n={n}");
                assert_eq!(chi.value(n).is_zero(), gcd(n, k) != 1);
                if gcd(n, k) == 1 {
                    assert!((chi.eval(n).norm() - 1.0).abs() < 1e-12);
                }
                for m in 1..=k {
                    let lhs = chi.eval(n * m);
                    let rhs = chi.eval(n) * chi.eval(m);
                    assert!((lhs - rhs).norm() < 1e-12, "k={k} {n}*{m}");
                }
            }
        }
    }
}

#[test]
fn second_orthogonality_relation() {
    for k in 2..=30 {
        let chars = characters(k).unwrap();
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let s: Complex64 = (1..=k).map(|n| a.eval(n) * b.eval(n).conj()).sum();
                let expect = if i == j { chars.len() as f64 } else { 0.0 };
                assert!((s - expect).norm() < 1e-9, "k={k} {i},{j}");
            }
        }
    }
}

#[test]
fn power_to_group_order_is_principal() {
    for k in [3, 8, 15, 16, 21, 24, 29] {
        for chi in characters(k).unwrap() {
            let r = char_power_principal(&Arc::new(chi), 2000).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }
}

#[test]
fn zero_set_is_primes_dividing_modulus() {
    let chi = character(30, 3).unwrap();
    let z = zero_set_indicator(&chi).unwrap();
    assert_eq!(z.primes, vec![2, 3, 5]);
    for n in 1..200u64 {
        let smooth = unitary_ring::integer::factorize(n).unwrap().iter().all(|pp| 30 % pp.p == 0);
        assert_eq!(z.kernel.eval_int(n).unwrap(), smooth as i128, "{n}");
        if n > 1 && smooth {
            assert!(!is_unit(n, 30));
        }
    }
}

#[test]
fn certificate_covers_every_prime_power() {
    let chi = Arc::new(character(12, 1).unwrap());
    let cert = derivation_certificate(&chi, 1000).unwrap();
    assert!(cert.passed);
    let brute = (2..=1000u64).filter(|&n| unitary_ring::integer::omega(n).unwrap() == 1).count();
    assert_eq!(cert.prime_powers_checked, brute as u64);
}

#[test]
fn sumchar_separates_closed_forms() {
    let r = box_sum_all_characters(5, 6).unwrap();
    assert!(r.s_equals_v1);
    assert!(!r.s_equals_v2);
    let r = box_sum_all_characters(7, 8).unwrap();
    assert!(r.s_equals_v1 && r.s_equals_v2);
}

#[test]
fn table_csv_shape() {
    let csv = character_table_csv(5).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "character,0,1,2,3,4");
    assert!(lines[1].starts_with("[0],"));
}

#[test]
fn bad_moduli_rejected() {
    assert!(UnitGroup::new(1).is_err());
    assert!(character(5, 4).is_err());
}
