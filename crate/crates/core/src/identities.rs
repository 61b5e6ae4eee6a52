//! Pointwise identities of the ring, checked on every `n` (or every prime
//! power) up to a bound.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{domain, Result};
use crate::integer::{self, gcd};
use crate::kernel::{
    box_add, close, decompose_real_imag, pointwise_mul, pow_pointwise, scalar_ext, Kernel, Rational,
};
use crate::report::IdentityReport;

/// Every prime power `p^e <= bound` as `(p, e)`.
pub fn prime_powers(bound: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for p in integer::primes_up_to(bound) {
        let mut pe = p;
        let mut e = 1;
        loop {
            out.push((p, e));
            match pe.checked_mul(p) {
                Some(next) if next <= bound => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    out
}

/// First `n` in `1..=bound` where `f(n)` is false.
fn first_failure(bound: u64, f: impl Fn(u64) -> Result<bool> + Sync) -> Result<Option<u64>> {
    let results: Vec<Result<Option<u64>>> = (1..=bound)
        .into_par_iter()
        .map(|n| f(n).map(|ok| (!ok).then_some(n)))
        .collect();
    for r in results {
        if let Some(n) = r? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn exact_report(identity: &str, bound: u64, failure: Option<u64>, extra: serde_json::Value) -> IdentityReport {
    let mut details = json!({ "checked": bound, "first_failure": failure });
    if let (Some(obj), serde_json::Value::Object(more)) = (details.as_object_mut(), extra) {
        obj.extend(more);
    }
    IdentityReport::check(identity, Some(bound), failure.is_none(), details)
}

/// Number of `1 <= r <= n` coprime to `n`, counted directly.
pub fn totient_by_count(n: u64) -> u64 {
    (1..=n).filter(|&r| gcd(r, n) == 1).count() as u64
}

/// `phi = Id x [1 box (-1)^omega / rad]`, exactly, against a direct count
/// of coprime residues.
pub fn eulerchar(bound: u64) -> Result<IdentityReport> {
    let ring_phi = pointwise_mul(&Kernel::id(), &box_add(&Kernel::one(), &Kernel::mobrad()));
    let failure = first_failure(bound, |n| {
        Ok(ring_phi.eval_exact(n)? == Rational::from_integer(totient_by_count(n) as i128))
    })?;
    Ok(exact_report("eulerchar", bound, failure, json!({ "kernel": ring_phi.name() })))
}

/// `(Id box 1)(m) = sum of a over unitary pairs ab = m, gcd(a,b) = 1`.
pub fn ideplusone(bound: u64) -> Result<IdentityReport> {
    let k = box_add(&Kernel::id(), &Kernel::one());
    let failure = first_failure(bound, |m| {
        let unitary_sum: u64 = integer::unitary_divisor_pairs(m)?.iter().map(|p| p.0).sum();
        Ok(k.eval_int(m)? == unitary_sum as i128)
    })?;
    Ok(exact_report("ideplusone", bound, failure, json!({ "kernel": k.name() })))
}

/// `(F box F)(m) = 2^omega(m) F(m)`, exact when `F` is, else to `1e-12`.
pub fn twotime(f: &Kernel, bound: u64) -> Result<IdentityReport> {
    let doubled = box_add(f, f);
    let failure = first_failure(bound, |m| {
        let w = 1i128 << integer::omega(m)?;
        match (doubled.eval_exact(m), f.eval_exact(m)) {
            (Ok(lhs), Ok(v)) => Ok(lhs == v * Rational::from_integer(w)),
            _ => Ok(close(doubled.eval(m)?, f.eval(m)? * w as f64, 1e-12)),
        }
    })?;
    Ok(exact_report("twotime", bound, failure, json!({ "F": f.name() })))
}

/// `Cosa_y^2 box Sina_y^2 = 1` at every prime power `<= bound`.
pub fn cosasina(y: f64, bound: u64) -> Result<IdentityReport> {
    let k = box_add(&pow_pointwise(&Kernel::cosa(y), 2)?, &pow_pointwise(&Kernel::sina(y), 2)?);
    let worst = prime_powers(bound)
        .into_iter()
        .map(|(p, e)| (k.rule(p, e) - 1.0).norm())
        .fold(0.0f64, f64::max);
    Ok(IdentityReport::check(
        "cosasina",
        Some(bound),
        worst <= 1e-12,
        json!({ "y": y, "max_error": worst, "tolerance": 1e-12 }),
    ))
}

/// Largest deviation in each vector-space law, over prime powers.
#[derive(Debug, Clone, Serialize)]
pub struct VectorSpaceReport {
    pub scalar_distributes_over_box: f64,
    pub scalar_sum_distributes: f64,
    pub scalar_product_compatible: f64,
    pub unit_scalar: f64,
    pub decomposition_round_trip: f64,
    pub passed: bool,
}

/// `l o (F box G) = (l o F) box (l o G)`, `(l + m) o F = (l o F) box (m o F)`,
/// `(l m) o F = l o (m o F)`, `1 o F = F`, and `F = A box (i o B)` with
/// `(A, B) = decompose_real_imag(F)`, at every prime power `<= bound`.
pub fn vector_space_axioms(
    lambda: Complex64,
    mu: Complex64,
    f: &Kernel,
    g: &Kernel,
    bound: u64,
) -> Result<VectorSpaceReport> {
    if bound < 2 {
        return Err(domain("bound must be at least 2"));
    }
    let i = Complex64::new(0.0, 1.0);
    let pairs = [
        (scalar_ext(lambda, &box_add(f, g)), box_add(&scalar_ext(lambda, f), &scalar_ext(lambda, g))),
        (scalar_ext(lambda + mu, f), box_add(&scalar_ext(lambda, f), &scalar_ext(mu, f))),
        (scalar_ext(lambda * mu, f), scalar_ext(lambda, &scalar_ext(mu, f))),
        (scalar_ext(Complex64::new(1.0, 0.0), f), f.clone()),
    ];
    let (a, b) = decompose_real_imag(f);
    let rebuilt = box_add(&a, &scalar_ext(i, &b));
    let powers = prime_powers(bound);
    let rel = |x: Complex64, y: Complex64| (x - y).norm() / 1f64.max(x.norm()).max(y.norm());
    let mut worst = [0.0f64; 4];
    let mut round_trip = 0.0f64;
    for &(p, e) in &powers {
        for (w, (l, r)) in worst.iter_mut().zip(&pairs) {
            *w = w.max(rel(l.rule(p, e), r.rule(p, e)));
        }
        let (x, y) = (f.rule(p, e), rebuilt.rule(p, e));
        round_trip = round_trip.max((x.re - y.re).abs().max((x.im - y.im).abs()));
        let (ar, br) = (a.rule(p, e), b.rule(p, e));
        if ar.im != 0.0 || br.im != 0.0 {
            round_trip = f64::INFINITY;
        }
    }
    let passed = worst.iter().all(|w| *w <= 1e-12) && round_trip <= 1e-15;
    Ok(VectorSpaceReport {
        scalar_distributes_over_box: worst[0],
        scalar_sum_distributes: worst[1],
        scalar_product_compatible: worst[2],
        unit_scalar: worst[3],
        decomposition_round_trip: round_trip,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_identities_pass() {
        assert!(eulerchar(2000).unwrap().passed());
        assert!(ideplusone(2000).unwrap().passed());
        assert!(twotime(&Kernel::id(), 2000).unwrap().passed());
        assert!(twotime(&Kernel::cosa(0.7), 2000).unwrap().passed());
        assert!(cosasina(3.3, 5000).unwrap().passed());
    }

    #[test]
    fn totient_count() {
        assert_eq!(totient_by_count(12), 4);
        assert_eq!(totient_by_count(1), 1);
        assert_eq!(totient_by_count(97), 96);
    }

    #[test]
    fn vector_space_simple() {
        let r = vector_space_axioms(
            Complex64::new(0.5, -1.0),
            Complex64::new(2.0, 0.25),
            &Kernel::id_pow(Complex64::new(0.0, 1.5)),
            &Kernel::mobrad(),
            500,
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
    }
}
