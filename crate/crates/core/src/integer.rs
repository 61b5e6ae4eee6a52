//! Exact 64-bit integer arithmetic: factorization, multiplicative-structure
//! queries and (unitary) divisor enumeration.
//!
//! Factorization trial-divides by the sieved primes below 10^6 and hands any
//! remaining cofactor to a deterministic Miller-Rabin test plus a Brent-style
//! Pollard rho splitter. Every multiplication that could leave 64 bits is
//! checked.

use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Trial-division limit; cofactors left after dividing out every prime below
/// this are either 1, prime, or a product of primes larger than it.
pub const TRIAL_LIMIT: u64 = 1_000_000;

/// Largest accepted input (exclusive): 2^63.
pub const MAX_INPUT: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub e: u32,
}

impl PrimePower {
    pub fn value(&self) -> Result<u64> {
        checked_pow(self.p, self.e)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.e == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}^{}", self.p, self.e)
        }
    }
}

/// Canonical prime-power decomposition; primes strictly increasing, empty
/// iff `n == 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Factorization {
    n: u64,
    parts: Vec<PrimePower>,
}

impl Factorization {
    /// Builds a factorization from parts, validating the invariants.
    pub fn from_parts(mut parts: Vec<PrimePower>) -> Result<Self> {
        parts.sort();
        let mut n = 1u64;
        for (i, pp) in parts.iter().enumerate() {
            if pp.e == 0 {
                return Err(domain("prime power with exponent 0"));
            }
            if i > 0 && parts[i - 1].p == pp.p {
                return Err(domain(format!("repeated prime {}", pp.p)));
            }
            if !is_prime(pp.p) {
                return Err(domain(format!("{} is not prime", pp.p)));
            }
            n = n
                .checked_mul(pp.value()?)
                .ok_or(Error::Overflow("Factorization::from_parts"))?;
        }
        Ok(Factorization { n, parts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn parts(&self) -> &[PrimePower] {
        &self.parts
    }

    pub fn iter(&self) -> impl Iterator<Item = PrimePower> + '_ {
        self.parts.iter().copied()
    }

    pub fn omega(&self) -> u32 {
        self.parts.len() as u32
    }

    pub fn rad(&self) -> u64 {
        self.parts.iter().map(|pp| pp.p).product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.parts.iter().map(|pp| pp.e as u64 + 1).product()
    }

    /// Recomputes the product of the parts with checked arithmetic.
    pub fn reconstruct(&self) -> Result<u64> {
        self.parts.iter().try_fold(1u64, |acc, pp| {
            acc.checked_mul(pp.value()?)
                .ok_or(Error::Overflow("Factorization::reconstruct"))
        })
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "1");
        }
        for (i, pp) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{pp}")?;
        }
        Ok(())
    }
}

pub fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or(Error::Overflow("checked_pow"))
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| sieve(TRIAL_LIMIT as usize))
}

fn sieve(limit: usize) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u32);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= TRIAL_LIMIT {
        let cached = small_primes();
        let end = cached.partition_point(|&p| (p as u64) <= limit);
        cached[..end].iter().map(|&p| p as u64).collect()
    } else {
        sieve(limit as usize).into_iter().map(u64::from).collect()
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test valid for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Finds a nontrivial factor of an odd composite `n` (Brent's variant of
/// Pollard rho, deterministic sequence of increments).
fn rho_split(n: u64) -> u64 {
    use num_integer::Integer;
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, m) = (2u64, 128u64);
        let (mut g, mut r, mut q) = (1u64, 1u64, 1u64);
        let (mut x, mut ys) = (0u64, 0u64);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("rho increments exhausted")
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = rho_split(n);
    split_large(d, out);
    split_large(n / d, out);
}

/// Prime factorization of `1 <= n < 2^63`.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(domain("cannot factorize 0"));
    }
    if n >= MAX_INPUT {
        return Err(domain(format!("{n} is outside the supported range [1, 2^63)")));
    }
    let mut parts = Vec::new();
    let mut rest = n;
    for &p in small_primes() {
        let p = p as u64;
        if p * p > rest {
            break;
        }
        if rest.is_multiple_of(p) {
            let mut e = 0;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            parts.push(PrimePower { p, e });
        }
    }
    if rest > 1 {
        if rest < TRIAL_LIMIT * TRIAL_LIMIT || is_prime(rest) {
            // Below 10^12 with no factor under 10^6 means prime.
            parts.push(PrimePower { p: rest, e: 1 });
        } else {
            let mut large = Vec::new();
            split_large(rest, &mut large);
            large.sort_unstable();
            for p in large {
                match parts.last_mut() {
                    Some(last) if last.p == p => last.e += 1,
                    _ => parts.push(PrimePower { p, e: 1 }),
                }
            }
        }
    }
    Ok(Factorization { n, parts })
}

/// Number of distinct prime divisors.
pub fn omega(n: u64) -> Result<u32> {
    Ok(factorize(n)?.omega())
}

/// Exponent of the prime `p` in `n`.
pub fn v_p(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(domain("v_p of 0 is undefined"));
    }
    if !is_prime(p) {
        return Err(domain(format!("{p} is not prime")));
    }
    let (mut n, mut e) = (n, 0);
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

pub fn rad(n: u64) -> Result<u64> {
    Ok(factorize(n)?.rad())
}

/// Largest `i` with `p^i <= n` (`p >= 2`, `n >= 1`).
pub fn floor_log(n: u64, p: u64) -> u32 {
    let mut i = 0;
    let mut x = n;
    while x >= p {
        x /= p;
        i += 1;
    }
    i
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(Error::Overflow("lcm"))
}

/// All divisors of `n`, ascending.
pub fn divisors(n: u64) -> Result<Vec<u64>> {
    Ok(divisors_of(&factorize(n)?))
}

pub fn divisors_of(f: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for pp in f.iter() {
        let len = out.len();
        let mut power = 1u64;
        for _ in 0..pp.e {
            // p^e divides n < 2^63, so neither product can overflow.
            power *= pp.p;
            for i in 0..len {
                out.push(out[i] * power);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Ordered pairs `(a, b)` with `a * b == n` and `gcd(a, b) == 1`, sorted by
/// `a`. There are exactly `2^omega(n)` of them.
pub fn unitary_divisor_pairs(n: u64) -> Result<Vec<(u64, u64)>> {
    Ok(unitary_pairs_of(&factorize(n)?))
}

pub fn unitary_pairs_of(f: &Factorization) -> Vec<(u64, u64)> {
    let powers: Vec<u64> = f.iter().map(|pp| pp.p.pow(pp.e)).collect();
    let n = f.n();
    let mut a_values: Vec<u64> = (0u64..1 << powers.len())
        .map(|mask| {
            powers
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, q)| *q)
                .product()
        })
        .collect();
    a_values.sort_unstable();
    a_values.into_iter().map(|a| (a, n / a)).collect()
}

/// Smallest-prime-factor table for bulk factorization of `1..=limit`.
///
/// Besides the raw sieve it records, for every `n >= 2`, the full power of
/// its smallest prime so multiplicative functions can be tabulated in one
/// pass as `F(n) = F(p^e) * F(n / p^e)`.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
    lead_exp: Vec<u8>,
    lead_power: Vec<u32>,
}

impl FactorTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit > u32::MAX as u64 {
            return Err(domain(format!("factor table limit {limit} exceeds 2^32")));
        }
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        for i in 2..len {
            if spf[i] == 0 {
                let mut j = i;
                while j < len {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut lead_exp = vec![0u8; len];
        let mut lead_power = vec![1u32; len];
        for n in 2..len {
            let p = spf[n] as usize;
            let q = n / p;
            if q >= 2 && spf[q] as usize == p {
                lead_exp[n] = lead_exp[q] + 1;
                lead_power[n] = lead_power[q] * p as u32;
            } else {
                lead_exp[n] = 1;
                lead_power[n] = p as u32;
            }
        }
        Ok(FactorTable { spf, lead_exp, lead_power })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// `(p, e, p^e)` for the smallest prime of `n >= 2`.
    #[inline]
    pub fn leading(&self, n: u64) -> (u64, u32, u64) {
        let i = n as usize;
        (self.spf[i] as u64, self.lead_exp[i] as u32, self.lead_power[i] as u64)
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 || n > self.limit() {
            return Err(domain(format!("{n} outside factor table 1..={}", self.limit())));
        }
        let mut parts = Vec::new();
        let mut rest = n;
        while rest > 1 {
            let (p, e, pe) = self.leading(rest);
            parts.push(PrimePower { p, e });
            rest /= pe;
        }
        Ok(Factorization { n, parts })
    }

    pub fn omega(&self, n: u64) -> u32 {
        let mut rest = n;
        let mut count = 0;
        while rest > 1 {
            rest /= self.leading(rest).2;
            count += 1;
        }
        count
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// Values of a multiplicative function on `0..=upto` (index 0 holds
    /// `one` as a placeholder), built from its prime-power rule. The rule is
    /// called once per prime power.
    pub fn tabulate<T, R, M>(&self, upto: u64, one: T, mut rule: R, mul: M) -> Result<Vec<T>>
    where
        T: Clone,
        R: FnMut(u64, u32) -> T,
        M: Fn(&T, &T) -> T,
    {
        if upto > self.limit() {
            return Err(domain(format!("{upto} outside factor table 1..={}", self.limit())));
        }
        let len = upto as usize + 1;
        let mut out: Vec<T> = Vec::with_capacity(len);
        out.push(one.clone());
        if len > 1 {
            out.push(one);
        }
        for n in 2..len {
            let (p, e, pe) = self.leading(n as u64);
            let pe = pe as usize;
            let v = if pe == n { rule(p, e) } else { mul(&out[pe], &out[n / pe]) };
            out.push(v);
        }
        Ok(out)
    }
}
