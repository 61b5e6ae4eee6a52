//! Truncated Dirichlet series `D(F, s) = sum_{n <= N} F(n) / n^s` with
//! certified tail bounds, and verifiers for the series identities of the
//! ring.
//!
//! Sums are accumulated with Neumaier compensation in fixed-size chunks that
//! are reduced in ascending order, so a result does not depend on the number
//! of worker threads.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::integer::{self, FactorTable};
use crate::kernel::{
    box_add, dirichlet_convolve, pointwise_mul, Growth, Kernel, PrimeSet, Rational,
};
use crate::report::{IdentityReport, Side};

pub const CHUNK: usize = 1 << 14;

/// Slack added to every combined tolerance for floating-point error.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Tolerance for identities that are finite rearrangements.
pub const REARRANGEMENT_TOL: f64 = 1e-10;

/// Neumaier's improved Kahan–Babuška summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: ComplexSum) {
        self.re.merge(other.re);
        self.im.merge(other.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// `sum_{lo <= n <= hi} term(n)` in fixed chunks, reduced in order.
pub fn chunked_sum<F>(lo: u64, hi: u64, term: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    if hi < lo {
        return Complex64::new(0.0, 0.0);
    }
    let chunks = ((hi - lo) as usize) / CHUNK + 1;
    let partials: Vec<ComplexSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = lo + (c * CHUNK) as u64;
            let end = (start + CHUNK as u64 - 1).min(hi);
            let mut acc = ComplexSum::default();
            for n in start..=end {
                acc.add(term(n));
            }
            acc
        })
        .collect();
    let mut total = ComplexSum::default();
    for p in partials {
        total.merge(p);
    }
    total.total()
}

/// `n^(-s)`.
#[inline]
pub fn inverse_power(n: u64, s: Complex64) -> Complex64 {
    let x = n as f64;
    if s.im == 0.0 {
        if s.re == s.re.round() && s.re.abs() <= 64.0 {
            return Complex64::new(x.powi(-(s.re as i32)), 0.0);
        }
        return Complex64::new(x.powf(-s.re), 0.0);
    }
    let ln = x.ln();
    Complex64::from_polar(x.powf(-s.re), -s.im * ln)
}

static TABLE: Mutex<Option<Arc<FactorTable>>> = Mutex::new(None);

/// A shared factor table covering at least `1..=n`.
pub fn factor_table(n: u64) -> Result<Arc<FactorTable>> {
    let mut guard = TABLE.lock().expect("factor table lock");
    if let Some(t) = guard.as_ref() {
        if t.limit() >= n {
            return Ok(t.clone());
        }
    }
    let t = Arc::new(FactorTable::new(n.max(1 << 16))?);
    *guard = Some(t.clone());
    Ok(t)
}

/// Certified bound on `sum_{n > N} |F(n)| n^(-sigma)` from the growth
/// certificate `|F(p^e)| <= A p^(ec)`.
///
/// * `A <= 1`: `|F(n)| <= n^c`, integral test.
/// * `A <= 2`: `|F(n)| <= d(n) n^c` and `sum_{n<=x} d(n) <= x (ln x + 1)`.
/// * any `A`: `A^omega(n) <= C(delta) n^delta` with
///   `C(delta) = prod_{p^delta < A} A / p^delta`, minimized over `delta`.
pub fn tail_bound(growth: Growth, sigma: f64, n: u64) -> Result<f64> {
    let Growth { exponent: c, amplitude: a } = growth;
    if a == 0.0 {
        return Ok(0.0);
    }
    if !(sigma > c + 1.0) {
        return Err(domain(format!(
            "Re(s) = {sigma} is outside the certified convergence region Re(s) > {}",
            c + 1.0
        )));
    }
    if n == 0 {
        return Err(domain("truncation point must be at least 1"));
    }
    let nf = n as f64;
    let excess = sigma - c - 1.0;
    let mut best = f64::INFINITY;
    if a <= 1.0 {
        best = nf.powf(-excess) / excess;
    }
    if a <= 2.0 {
        let sp = sigma - c;
        let u = excess;
        best = best.min(sp * nf.powf(-u) * ((nf.ln() + 1.0) / u + 1.0 / (u * u)));
    }
    if a > 1.0 {
        for i in 1..=64 {
            let delta = excess * i as f64 / 65.0;
            let reach = a.powf(1.0 / delta);
            if !(reach <= 1e6) {
                continue;
            }
            let log_c: f64 = integer::primes_up_to(reach.ceil() as u64)
                .into_iter()
                .filter(|&p| (p as f64).powf(delta) < a)
                .map(|p| a.ln() - delta * (p as f64).ln())
                .sum();
            let rest = excess - delta;
            best = best.min(log_c.exp() * nf.powf(-rest) / rest);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(domain(format!("no certified tail bound for amplitude {a} at Re(s) = {sigma}")))
    }
}

/// A partial sum and a certified bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub n: u64,
    pub sigma: f64,
    pub growth: Growth,
}

impl SeriesValue {
    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, tail: self.tail_bound }
    }
}

/// A value known to within `tail` of the true quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub tail: f64,
}

impl Estimate {
    pub fn exact(value: Complex64) -> Self {
        Estimate { value, tail: 0.0 }
    }

    pub fn mul(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value * other.value,
            tail: self.value.norm() * other.tail + other.value.norm() * self.tail + self.tail * other.tail,
        }
    }

    pub fn side(&self) -> Side {
        Side::approx(self.value, self.tail)
    }
}

/// `D(F, s)` truncated at `n`.
pub fn series_eval(f: &Kernel, s: Complex64, n: u64) -> Result<SeriesValue> {
    let growth = f.growth();
    let tail = tail_bound(growth, s.re, n)?;
    if growth.amplitude == 0.0 {
        return Ok(SeriesValue { value: Complex64::new(1.0, 0.0), tail_bound: 0.0, n, sigma: s.re, growth });
    }
    let table = factor_table(n)?;
    let values = f.tabulate(&table, n)?;
    let value = chunked_sum(1, n, |m| {
        let v = values[m as usize];
        if v == Complex64::new(0.0, 0.0) {
            v
        } else {
            v * inverse_power(m, s)
        }
    });
    Ok(SeriesValue { value, tail_bound: tail, n, sigma: s.re, growth })
}

fn est(f: &Kernel, s: Complex64, n: u64) -> Result<Estimate> {
    Ok(series_eval(f, s, n)?.estimate())
}

fn combined(lhs: &Estimate, rhs: &Estimate) -> f64 {
    lhs.tail + rhs.tail + FLOAT_SLACK
}

fn compare(identity: &str, s: Complex64, n: u64, lhs: Estimate, rhs: Estimate) -> IdentityReport {
    IdentityReport::compare(identity, Some(s), Some(n), lhs.side(), rhs.side(), combined(&lhs, &rhs))
}

fn require_cm(f: &Kernel, n: u64) -> Result<()> {
    f.require_completely_multiplicative(n.clamp(2, 1 << 20))
}

/// `D(F,s) D(G,s) = D(F x G, 2s) D(F box G, s)` for completely
/// multiplicative `F`, `G`.
pub fn verify_refactorization(f: &Kernel, g: &Kernel, s: Complex64, n: u64) -> Result<IdentityReport> {
    require_cm(f, n)?;
    require_cm(g, n)?;
    let lhs = est(f, s, n)?.mul(est(g, s, n)?);
    let rhs = est(&pointwise_mul(f, g), 2.0 * s, n)?.mul(est(&box_add(f, g), s, n)?);
    Ok(compare("refactor", s, n, lhs, rhs).with_details(json!({ "F": f.name(), "G": g.name() })))
}

/// For every `m <= n`: `(F * G)(m) = sum_{r^2 | m} F(r) G(r) (F box G)(m / r^2)`,
/// in exact arithmetic.
pub fn coefficient_identity(f: &Kernel, g: &Kernel, n: u64) -> Result<IdentityReport> {
    require_cm(f, n)?;
    require_cm(g, n)?;
    let fg = box_add(f, g);
    let check = |m: u64| -> Result<Option<(u64, Rational, Rational)>> {
        let lhs: Rational = dirichlet_convolve(f, g, m)?;
        let mut rhs = Rational::from_integer(0);
        let mut r = 1u64;
        while r * r <= m {
            if m.is_multiple_of(r * r) {
                let term = f.eval_exact(r)? * g.eval_exact(r)? * fg.eval_exact(m / (r * r))?;
                rhs += term;
            }
            r += 1;
        }
        Ok((lhs != rhs).then_some((m, lhs, rhs)))
    };
    let mismatch = (1..=n)
        .into_par_iter()
        .map(check)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    let details = match &mismatch {
        Some((m, l, r)) => json!({ "F": f.name(), "G": g.name(), "first_mismatch": m, "lhs": l.to_string(), "rhs": r.to_string() }),
        None => json!({ "F": f.name(), "G": g.name(), "checked": n }),
    };
    Ok(IdentityReport::check("coefficient", Some(n), mismatch.is_none(), details))
}

/// `D(F,s) D(G,conj s) = D(F x G, 2x) D(F x Id^(-iy) box G x Id^(iy), x)`
/// with `s = x + iy`.
pub fn verify_realimsplit(f: &Kernel, g: &Kernel, s: Complex64, n: u64) -> Result<IdentityReport> {
    require_cm(f, n)?;
    require_cm(g, n)?;
    let x = Complex64::new(s.re, 0.0);
    let twist = |k: &Kernel, y: f64| pointwise_mul(k, &Kernel::id_pow(Complex64::new(0.0, y)));
    let lhs = est(f, s, n)?.mul(est(g, s.conj(), n)?);
    let q = box_add(&twist(f, -s.im), &twist(g, s.im));
    let rhs = est(&pointwise_mul(f, g), 2.0 * x, n)?.mul(est(&q, x, n)?);
    Ok(compare("realimsplit", s, n, lhs, rhs).with_details(json!({ "F": f.name(), "G": g.name(), "Q": q.name() })))
}

/// `|zeta(z)|^2 = zeta(2x) sum_m 2^omega(m) m^(-x) prod_{p|m} cos(y ln p^v)`.
pub fn hardy_general(z: Complex64, n: u64) -> Result<IdentityReport> {
    if !(z.re > 1.0) {
        return Err(domain("the Hardy identity needs Re(z) > 1"));
    }
    let one = Kernel::one();
    let x = Complex64::new(z.re, 0.0);
    let lhs = est(&one, z, n)?.mul(est(&one, z.conj(), n)?);
    let weighted = box_add(&Kernel::cosa(z.im), &Kernel::cosa(z.im));
    let sum = est(&weighted, x, n)?;
    let rhs = est(&one, 2.0 * x, n)?.mul(sum);
    Ok(compare("hardy", z, n, lhs, rhs).with_details(json!({
        "weighted_sum": { "re": sum.value.re, "im": sum.value.im },
        "weighted_sum_tail": sum.tail,
    })))
}

/// `zeta(x)^2 = zeta(2x) sum_m 2^omega(m) m^(-x)`; `details.ratio` is the
/// truncated sum (2.5 in the limit at `x = 2`).
pub fn hardy_classic(x: f64, n: u64) -> Result<IdentityReport> {
    let s = Complex64::new(x, 0.0);
    let one = Kernel::one();
    let lhs = est(&one, s, n)?.mul(est(&one, s, n)?);
    let ratio = series_eval(&Kernel::two_omega(), s, n)?;
    let rhs = est(&one, 2.0 * s, n)?.mul(ratio.estimate());
    Ok(compare("hardy-classic", s, n, lhs, rhs)
        .with_details(json!({ "ratio": ratio.value.re, "ratio_tail": ratio.tail_bound })))
}

/// `F x G = delta_1` implies `D(F,s) D(G,s) = D(F box G, s)`.
pub fn verify_orthproduct(f: &Kernel, g: &Kernel, s: Complex64, n: u64) -> Result<IdentityReport> {
    let product = pointwise_mul(f, g);
    for p in integer::primes_up_to(n) {
        let mut e = 1;
        let mut pe = p;
        loop {
            if product.rule(p, e) != Complex64::new(0.0, 0.0) {
                return Err(Error::Precondition(format!(
                    "{} x {} is nonzero at {p}^{e}",
                    f.name(),
                    g.name()
                )));
            }
            match pe.checked_mul(p) {
                Some(next) if next <= n => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    let lhs = est(f, s, n)?.mul(est(g, s, n)?);
    let rhs = est(&box_add(f, g), s, n)?;
    Ok(compare("orthproduct", s, n, lhs, rhs).with_details(json!({ "F": f.name(), "G": g.name() })))
}

/// `D(1_A x F, s) D(1_{A'} x F, s) = D(F, s)` for complementary prime sets.
pub fn verify_primecompfactor(a: &PrimeSet, f: &Kernel, s: Complex64, n: u64) -> Result<IdentityReport> {
    let on = pointwise_mul(&Kernel::prime_indicator(a.clone()), f);
    let off = pointwise_mul(&Kernel::prime_indicator(a.complement()), f);
    let lhs = est(&on, s, n)?.mul(est(&off, s, n)?);
    let rhs = est(f, s, n)?;
    Ok(compare("primecomp", s, n, lhs, rhs).with_details(json!({ "A": a.to_string(), "F": f.name() })))
}

fn check_rearrangement_args(s: Complex64, n: u64) -> Result<()> {
    if !(s.re > 1.0) {
        return Err(domain("Re(s) must exceed 1"));
    }
    if n == 0 {
        return Err(domain("truncation point must be at least 1"));
    }
    Ok(())
}

/// `sum_n sum_p n^-s p^-s / omega(np)` over `np <= N`.
fn double_sum_omega_np(s: Complex64, n: u64, table: &FactorTable) -> Complex64 {
    let primes = integer::primes_up_to(n);
    chunked_sum(1, n / 2, |m| {
        let lim = n / m;
        let base = inverse_power(m, s);
        let mut acc = ComplexSum::default();
        for &p in primes.iter().take_while(|&&p| p <= lim) {
            let w = table.omega(m * p) as f64;
            acc.add(base * inverse_power(p, s) / w);
        }
        acc.total()
    })
}

/// `sum_n n^-s / omega(np)` rearranged: both sides cover the pairs
/// `(n, p)` with `np <= N`, so they agree up to rounding.
pub fn zeta_minus_one(s: Complex64, n: u64) -> Result<IdentityReport> {
    check_rearrangement_args(s, n)?;
    let table = factor_table(n)?;
    let lhs = double_sum_omega_np(s, n, &table);
    let rhs = chunked_sum(2, n, |m| inverse_power(m, s));
    Ok(IdentityReport::compare(
        "zeta-minus-one",
        Some(s),
        Some(n),
        Side::approx(lhs, 0.0),
        Side::approx(rhs, 0.0),
        REARRANGEMENT_TOL,
    ))
}

/// `sum_n n^-s / (omega(n)+1) [sum_p p^-s + (1/omega(n)) sum_{p|n} p^-s]`
/// on the pairs `np <= N`; at `n = 1` the second inner sum is empty and
/// contributes 0.
pub fn zeta_minus_one_next(s: Complex64, n: u64) -> Result<IdentityReport> {
    check_rearrangement_args(s, n)?;
    let table = factor_table(n)?;
    let primes = integer::primes_up_to(n);
    let lhs = chunked_sum(1, n / 2, |m| {
        let lim = n / m;
        let omega = table.omega(m) as f64;
        let mut all = ComplexSum::default();
        let mut dividing = ComplexSum::default();
        for &p in primes.iter().take_while(|&&p| p <= lim) {
            let t = inverse_power(p, s);
            all.add(t);
            if m % p == 0 {
                dividing.add(t);
            }
        }
        let own = if m == 1 { Complex64::new(0.0, 0.0) } else { dividing.total() / omega };
        inverse_power(m, s) * (all.total() + own) / (omega + 1.0)
    });
    let rhs = double_sum_omega_np(s, n, &table);
    let plain = chunked_sum(2, n, |m| inverse_power(m, s));
    Ok(IdentityReport::compare(
        "zeta-minus-one-next",
        Some(s),
        Some(n),
        Side::approx(lhs, 0.0),
        Side::approx(rhs, 0.0),
        REARRANGEMENT_TOL,
    )
    .with_details(json!({ "zeta_minus_one_partial": { "re": plain.re, "im": plain.im } })))
}
