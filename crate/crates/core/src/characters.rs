//! Dirichlet characters modulo `k`.
//!
//! `(Z/kZ)*` is split by CRT into prime-power components, each cyclic except
//! `2^a` with `a >= 3`, which is `<-1> x <5>`. A character is an exponent
//! vector against these generators; values are kept as exact root indices
//! `t` standing for `exp(2 pi i t / L)`, `L` the exponent of the group.

use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::integer::{self, gcd};
use crate::kernel::{self, box_add, pointwise_mul, pow_pointwise, Kernel, PrimeSet, Rational};
use crate::report::{fmt_significant, Cplx};

/// Largest modulus accepted for a single character.
pub const MAX_MODULUS: u64 = 10_000_000;

const NOT_A_UNIT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharValue {
    Zero,
    /// `exp(2 pi i t / L)` for the stored `t < L`.
    Root(u32),
}

impl CharValue {
    pub fn mul(self, other: CharValue, level: u32) -> CharValue {
        match (self, other) {
            (CharValue::Root(a), CharValue::Root(b)) => {
                CharValue::Root(((a as u64 + b as u64) % level as u64) as u32)
            }
            _ => CharValue::Zero,
        }
    }

    pub fn pow(self, k: u64, level: u32) -> CharValue {
        match self {
            CharValue::Zero if k == 0 => CharValue::Root(0),
            CharValue::Zero => CharValue::Zero,
            CharValue::Root(t) => CharValue::Root(((t as u128 * k as u128) % level as u128) as u32),
        }
    }

    pub fn is_zero(self) -> bool {
        self == CharValue::Zero
    }

    /// Quarter turns are converted exactly; other roots through `cis`.
    pub fn to_complex(self, level: u32) -> Complex64 {
        match self {
            CharValue::Zero => Complex64::new(0.0, 0.0),
            CharValue::Root(t) => {
                let (t, l) = (t as u64, level as u64);
                if (4 * t) % l == 0 {
                    match 4 * t / l {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / l as f64)
                }
            }
        }
    }

    /// Exact value when it is rational (0 or +-1).
    pub fn to_exact(self, level: u32) -> Option<Rational> {
        match self {
            CharValue::Zero => Some(Rational::from_integer(0)),
            CharValue::Root(0) => Some(Rational::from_integer(1)),
            CharValue::Root(t) if 2 * t as u64 == level as u64 => Some(Rational::from_integer(-1)),
            CharValue::Root(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    modulus: u64,
    generators: Vec<u64>,
    orders: Vec<u64>,
    exponent: u32,
    phi: u64,
    // Residue -> mixed-radix packed exponent vector, NOT_A_UNIT off the units.
    dlog: Vec<u32>,
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(m as i128));
    e.x.rem_euclid(m as i128) as u64
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = integer::factorize(p - 1).expect("p - 1 >= 1");
    (2..p)
        .find(|&g| factors.iter().all(|pp| integer::pow_mod(g, (p - 1) / pp.p, p) != 1))
        .expect("every prime has a primitive root")
}

/// Generators and orders of `(Z/q^a Z)*`.
fn component_generators(q: u64, a: u32) -> Vec<(u64, u64)> {
    let qa = q.pow(a);
    if q == 2 {
        return match a {
            1 => vec![],
            2 => vec![(3, 2)],
            _ => vec![(qa - 1, 2), (5, qa / 4)],
        };
    }
    let mut g = primitive_root(q);
    if a >= 2 && integer::pow_mod(g, q - 1, q * q) == 1 {
        g += q;
    }
    vec![(g % qa, qa / q * (q - 1))]
}

impl UnitGroup {
    pub fn new(k: u64) -> Result<Self> {
        if k < 2 {
            return Err(domain("character modulus must be at least 2"));
        }
        if k > MAX_MODULUS {
            return Err(domain(format!("character modulus {k} exceeds {MAX_MODULUS}")));
        }
        let f = integer::factorize(k)?;
        let mut generators = Vec::new();
        let mut orders = Vec::new();
        for pp in f.iter() {
            let qa = pp.p.pow(pp.e);
            let rest = k / qa;
            let lift = (rest * mod_inverse(rest % qa, qa)) % k;
            for (g, ord) in component_generators(pp.p, pp.e) {
                // x = g mod q^a, x = 1 mod k / q^a
                let x = (1 + ((g + qa - 1) % qa) as u128 * lift as u128) % k as u128;
                generators.push(x as u64);
                orders.push(ord);
            }
        }
        let phi: u64 = orders.iter().product();
        let exponent = orders.iter().fold(1u64, |l, &o| l.lcm(&o));
        let mut dlog = vec![NOT_A_UNIT; k as usize];
        let powers: Vec<Vec<u64>> = generators
            .iter()
            .zip(&orders)
            .map(|(&g, &o)| {
                let mut v = Vec::with_capacity(o as usize);
                let mut x = 1 % k;
                for _ in 0..o {
                    v.push(x);
                    x = integer::mul_mod(x, g, k);
                }
                v
            })
            .collect();
        for packed in 0..phi {
            let mut rest = packed;
            let mut x = 1 % k;
            for (pw, &o) in powers.iter().zip(&orders) {
                x = integer::mul_mod(x, pw[(rest % o) as usize], k);
                rest /= o;
            }
            if dlog[x as usize] != NOT_A_UNIT {
                return Err(Error::Certificate(format!("generators of (Z/{k}Z)* are dependent")));
            }
            dlog[x as usize] = packed as u32;
        }
        Ok(UnitGroup { modulus: k, generators, orders, exponent: exponent as u32, phi, dlog })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// `phi(k)`, the group order.
    pub fn order(&self) -> u64 {
        self.phi
    }

    /// Least common multiple of the generator orders.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    fn unpack(&self, mut packed: u64) -> Vec<u64> {
        self.orders
            .iter()
            .map(|&o| {
                let d = packed % o;
                packed /= o;
                d
            })
            .collect()
    }

    /// Exponent vector of `n` against the generators, `None` off the units.
    pub fn dlog(&self, n: u64) -> Option<Vec<u64>> {
        let packed = self.dlog[(n % self.modulus) as usize];
        (packed != NOT_A_UNIT).then(|| self.unpack(packed as u64))
    }
}

#[derive(Debug, Clone)]
pub struct Character {
    group: Arc<UnitGroup>,
    exponents: Vec<u64>,
    index: usize,
    values: Vec<u32>,
}

impl Character {
    fn new(group: Arc<UnitGroup>, index: usize) -> Result<Self> {
        if index as u64 >= group.phi {
            return Err(domain(format!(
                "character index {index} out of range for modulus {} ({} characters)",
                group.modulus, group.phi
            )));
        }
        let exponents = group.unpack(index as u64);
        let level = group.exponent as u64;
        // chi(g_i) = exp(2 pi i e_i / ord_i) = root index e_i * L / ord_i.
        let steps: Vec<u64> =
            exponents.iter().zip(&group.orders).map(|(&e, &o)| e * (level / o)).collect();
        let values = group
            .dlog
            .iter()
            .map(|&packed| {
                if packed == NOT_A_UNIT {
                    return NOT_A_UNIT;
                }
                let mut rest = packed as u64;
                let mut t = 0u64;
                for (&o, &s) in group.orders.iter().zip(&steps) {
                    t = (t + (rest % o) * s) % level;
                    rest /= o;
                }
                t as u32
            })
            .collect();
        Ok(Character { group, exponents, index, values })
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    /// Root-of-unity level `L` of the stored indices.
    pub fn level(&self) -> u32 {
        self.group.exponent
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.exponents.iter().map(|e| e.to_string()).collect();
        format!("[{}]", parts.join(" "))
    }

    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    pub fn is_real(&self) -> bool {
        self.exponents.iter().zip(&self.group.orders).all(|(&e, &o)| (2 * e) % o == 0)
    }

    pub fn value(&self, n: u64) -> CharValue {
        match self.values[(n % self.group.modulus) as usize] {
            NOT_A_UNIT => CharValue::Zero,
            t => CharValue::Root(t),
        }
    }

    pub fn value_at_prime_power(&self, p: u64, e: u32) -> CharValue {
        self.value(p).pow(e as u64, self.level())
    }

    pub fn eval(&self, n: u64) -> Complex64 {
        self.value(n).to_complex(self.level())
    }

    pub fn kernel(self: &Arc<Self>) -> Kernel {
        Kernel::character(self.clone())
    }
}

/// The character of the given mixed-radix index; index 0 is principal.
pub fn character(k: u64, index: usize) -> Result<Character> {
    Character::new(Arc::new(UnitGroup::new(k)?), index)
}

/// All `phi(k)` characters modulo `k`, in index order.
pub fn characters(k: u64) -> Result<Vec<Character>> {
    let group = Arc::new(UnitGroup::new(k)?);
    if group.phi.saturating_mul(k) > 100_000_000 {
        return Err(domain(format!("character table for modulus {k} is too large")));
    }
    (0..group.phi as usize).map(|i| Character::new(group.clone(), i)).collect()
}

pub fn principal_character(k: u64) -> Result<Character> {
    character(k, 0)
}

/// `Sum_chi chi(a)` computed directly from the table.
pub fn orthogonality_sum(k: u64, a: u64) -> Result<Complex64> {
    Ok(characters(k)?.iter().map(|c| c.eval(a)).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerCheck {
    pub modulus: u64,
    pub index: usize,
    pub bound: u64,
    pub passed: bool,
    pub first_mismatch: Option<u64>,
}

/// Checks `pow_pointwise(chi, phi(k)) = chi_0` at every `n <= bound`.
pub fn char_power_principal(chi: &Arc<Character>, bound: u64) -> Result<PowerCheck> {
    let k = chi.modulus();
    let powered = pow_pointwise(&chi.kernel(), chi.group().order() as u32)?;
    let principal = Kernel::character(Arc::new(principal_character(k)?));
    let mut first_mismatch = None;
    for n in 1..=bound {
        if powered.eval_exact(n)? != principal.eval_exact(n)? {
            first_mismatch = Some(n);
            break;
        }
    }
    Ok(PowerCheck { modulus: k, index: chi.index(), bound, passed: first_mismatch.is_none(), first_mismatch })
}

/// The indicator `1_{Z_chi}` of the prime powers where `chi` vanishes.
#[derive(Debug, Clone)]
pub struct ZeroSetIndicator {
    pub kernel: Kernel,
    pub primes: Vec<u64>,
}

pub fn zero_set_indicator(chi: &Character) -> Result<ZeroSetIndicator> {
    let primes: Vec<u64> = integer::factorize(chi.modulus())?.iter().map(|pp| pp.p).collect();
    let kernel = Kernel::prime_indicator(PrimeSet::new(primes.iter().copied())?);
    Ok(ZeroSetIndicator { kernel, primes })
}

/// The box-sum of all characters mod `k` evaluated at `a`, against the two
/// closed forms `v1 = phi(k)^omega(a) prod_{p|a} [p^v = 1 mod k]` and
/// `v2 = phi(k)^omega(a) [k | a - 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct SumcharReport {
    pub k: u64,
    pub a: u64,
    pub s: Cplx,
    pub s_rounded: i128,
    pub v1: i128,
    pub v2: i128,
    pub s_equals_v1: bool,
    pub s_equals_v2: bool,
}

pub fn box_sum_kernel(k: u64) -> Result<Kernel> {
    let chars = characters(k)?;
    let mut iter = chars.into_iter().map(|c| Kernel::character(Arc::new(c)));
    let first = iter.next().expect("phi(k) >= 1");
    Ok(iter.fold(first, |acc, c| box_add(&acc, &c)))
}

pub fn box_sum_all_characters(k: u64, a: u64) -> Result<SumcharReport> {
    box_sum_with(&box_sum_kernel(k)?, k, a)
}

/// As [`box_sum_all_characters`] with a prebuilt [`box_sum_kernel`].
pub fn box_sum_with(sum: &Kernel, k: u64, a: u64) -> Result<SumcharReport> {
    if a < 2 {
        return Err(domain("sumchar requires a >= 2"));
    }
    let phi = UnitGroup::new(k)?.order() as i128;
    let f = integer::factorize(a)?;
    let s = sum.eval_factored::<Complex64>(&f)?;
    let s_rounded = s.re.round();
    if (s - Complex64::new(s_rounded, 0.0)).norm() > 1e-9 * 1f64.max(s.norm()) {
        return Err(Error::Certificate(format!("character box-sum at {a} mod {k} is not an integer: {s}")));
    }
    let scale = phi.checked_pow(f.omega()).ok_or(Error::Overflow("phi(k)^omega(a)"))?;
    let per_prime = f.iter().all(|pp| pp.value().map(|q| q % k == 1 % k).unwrap_or(false));
    let v1 = scale * per_prime as i128;
    let v2 = scale * (a - 1).is_multiple_of(k) as i128;
    let s_rounded = s_rounded as i128;
    Ok(SumcharReport {
        k,
        a,
        s: s.into(),
        s_rounded,
        v1,
        v2,
        s_equals_v1: s_rounded == v1,
        s_equals_v2: s_rounded == v2,
    })
}

/// Per prime power facts behind the vanishing of derivations on `chi`.
#[derive(Debug, Clone, Serialize)]
pub struct DerivationCertificate {
    pub modulus: u64,
    pub index: usize,
    pub principal: bool,
    pub bound: u64,
    pub prime_powers_checked: u64,
    pub passed: bool,
    pub failures: Vec<String>,
    /// `g(p^e) = (chi box 1_Z)(p^e)` at the first few prime powers.
    pub multiplier_samples: Vec<(u64, Cplx)>,
}

/// Verifies at every `p^e <= bound`:
/// `g = chi box 1_Z` is nonzero, `chi x 1_Z` vanishes, `h = g^phi(k)` and
/// `1_Z` are idempotent, and the multipliers `1 - 2h`, `phi(k) g^(phi(k)-1)`
/// and `1 - 2 1_Z` (plus `2 chi - 1` for principal `chi`) are nonzero. Any
/// derivation then vanishes on `h`, hence on `g`, hence on `chi`.
pub fn derivation_certificate(chi: &Arc<Character>, bound: u64) -> Result<DerivationCertificate> {
    let k = chi.modulus();
    let phi = chi.group().order();
    let level = chi.level();
    let zero_set = zero_set_indicator(chi)?;
    let chi_k = chi.kernel();
    let g = box_add(&chi_k, &zero_set.kernel);
    let annihilated = pointwise_mul(&chi_k, &zero_set.kernel);
    let h = pow_pointwise(&g, phi as u32)?;

    let mut failures = Vec::new();
    let mut samples = Vec::new();
    let mut checked = 0u64;
    let fail = |msg: String, failures: &mut Vec<String>| {
        if failures.len() < 16 {
            failures.push(msg);
        }
    };
    for p in integer::primes_up_to(bound) {
        let in_z = k.is_multiple_of(p);
        let mut pe = p;
        let mut e = 1u32;
        loop {
            checked += 1;
            let chi_v = chi.value_at_prime_power(p, e);
            let g_exact = match (chi_v, in_z) {
                (CharValue::Zero, true) => CharValue::Root(0),
                (CharValue::Root(t), false) => CharValue::Root(t),
                _ => {
                    fail(format!("{p}^{e}: character zero set disagrees with the primes of {k}"), &mut failures);
                    CharValue::Zero
                }
            };
            let g_float = g.rule(p, e);
            if g_exact.is_zero() || !kernel::close(g_float, g_exact.to_complex(level), 1e-12) {
                fail(format!("{p}^{e}: g vanishes or disagrees with its exact value"), &mut failures);
            }
            if annihilated.rule(p, e) != Complex64::new(0.0, 0.0) {
                fail(format!("{p}^{e}: chi x 1_Z does not vanish"), &mut failures);
            }
            let h_exact = g_exact.pow(phi, level);
            let h_float = h.rule(p, e);
            if h_exact.mul(h_exact, level) != h_exact || !kernel::close(h_float * h_float, h_float, 1e-9) {
                fail(format!("{p}^{e}: h = g^phi(k) is not idempotent"), &mut failures);
            }
            let z = zero_set.kernel.rule(p, e);
            if z * z != z {
                fail(format!("{p}^{e}: 1_Z is not idempotent"), &mut failures);
            }
            // h is exactly 0 or 1 from here on.
            let h_int = match h_exact {
                CharValue::Root(0) => 1i64,
                _ => 0,
            };
            if 1 - 2 * h_int == 0 || g_exact.pow(phi - 1, level).is_zero() || 1.0 - 2.0 * z.re == 0.0 {
                fail(format!("{p}^{e}: a forcing multiplier vanishes"), &mut failures);
            }
            if chi.is_principal() {
                let c = chi_v.to_exact(level).map(|r| *r.numer()).unwrap_or(2);
                if !matches!(2 * c - 1, 1 | -1) {
                    fail(format!("{p}^{e}: 2 chi - 1 is not a unit"), &mut failures);
                }
            }
            if samples.len() < 8 {
                samples.push((pe, Cplx::from(g_float)));
            }
            match pe.checked_mul(p) {
                Some(next) if next <= bound => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    Ok(DerivationCertificate {
        modulus: k,
        index: chi.index(),
        principal: chi.is_principal(),
        bound,
        prime_powers_checked: checked,
        passed: failures.is_empty(),
        failures,
        multiplier_samples: samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterRow {
    pub index: usize,
    pub label: String,
    pub real: bool,
    pub values: Vec<Cplx>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterTable {
    pub modulus: u64,
    pub order: u64,
    pub generators: Vec<u64>,
    pub generator_orders: Vec<u64>,
    pub characters: Vec<CharacterRow>,
}

pub fn character_table(k: u64) -> Result<CharacterTable> {
    let chars = characters(k)?;
    let group = chars[0].group().clone();
    Ok(CharacterTable {
        modulus: k,
        order: group.order(),
        generators: group.generators().to_vec(),
        generator_orders: group.orders().to_vec(),
        characters: chars
            .iter()
            .map(|c| CharacterRow {
                index: c.index(),
                label: c.label(),
                real: c.is_real(),
                values: (0..k).map(|n| c.eval(n).into()).collect(),
            })
            .collect(),
    })
}

/// CSV table: one row per character, one `re,im` column per residue.
pub fn character_table_csv(k: u64) -> Result<String> {
    let table = character_table(k)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["character".to_string()];
    header.extend((0..k).map(|n| n.to_string()));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for row in &table.characters {
        let mut rec = vec![row.label.clone()];
        rec.extend(
            row.values
                .iter()
                .map(|z| format!("{},{}", fmt_significant(z.re, 12), fmt_significant(z.im, 12))),
        );
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn is_unit(n: u64, k: u64) -> bool {
    gcd(n, k) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_structure() {
        let g = UnitGroup::new(8).unwrap();
        assert_eq!(g.orders(), &[2, 2]);
        let g = UnitGroup::new(5).unwrap();
        assert_eq!(g.generators(), &[2]);
        let g = UnitGroup::new(2).unwrap();
        assert_eq!(g.order(), 1);
        for k in 2..=300u64 {
            let g = UnitGroup::new(k).unwrap();
            let units = (0..k).filter(|&n| is_unit(n, k)).count() as u64;
            assert_eq!(g.order(), units, "k = {k}");
            assert!((0..k).all(|n| g.dlog(n).is_some() == is_unit(n, k)));
        }
        assert!(UnitGroup::new(1).is_err());
    }

    #[test]
    fn counts_and_values() {
        assert_eq!(characters(3).unwrap().len(), 2);
        let c5 = characters(5).unwrap();
        assert_eq!(c5.len(), 4);
        let mut at2: Vec<Complex64> = c5.iter().map(|c| c.eval(2)).collect();
        for z in &at2 {
            assert_eq!(z.powu(4), Complex64::new(1.0, 0.0));
        }
        at2.dedup();
        assert_eq!(at2.len(), 4);
        assert!(characters(8).unwrap().iter().all(|c| c.is_real()));
    }

    #[test]
    fn principal_values() {
        let c = principal_character(6).unwrap();
        assert_eq!(c.eval(5), Complex64::new(1.0, 0.0));
        assert_eq!(c.eval(4), Complex64::new(0.0, 0.0));
        let k = Kernel::character(Arc::new(c));
        let sq = pointwise_mul(&k, &k);
        for n in 1..500 {
            assert_eq!(sq.eval_exact(n).unwrap(), k.eval_exact(n).unwrap());
        }
    }

    #[test]
    fn sumchar_examples() {
        let r = box_sum_all_characters(5, 11).unwrap();
        assert_eq!((r.s_rounded, r.v1, r.v2), (4, 4, 4));
        let r = box_sum_all_characters(5, 6).unwrap();
        assert_eq!((r.s_rounded, r.v1, r.v2), (0, 0, 16));
        assert!(r.s_equals_v1 && !r.s_equals_v2);
        let r = box_sum_all_characters(3, 4).unwrap();
        assert_eq!((r.s_rounded, r.v1, r.v2), (2, 2, 2));
        assert!(box_sum_all_characters(3, 1).is_err());
    }

    #[test]
    fn zero_sets() {
        let z = zero_set_indicator(&character(12, 1).unwrap()).unwrap();
        assert_eq!(z.primes, vec![2, 3]);
        assert_eq!(z.kernel.eval_int(8).unwrap(), 1);
        assert_eq!(z.kernel.eval_int(5).unwrap(), 0);
    }

    #[test]
    fn certificate_examples() {
        let nontrivial = Arc::new(character(3, 1).unwrap());
        let cert = derivation_certificate(&nontrivial, 10_000).unwrap();
        assert!(cert.passed, "{:?}", cert.failures);
        let g = box_add(&nontrivial.kernel(), &zero_set_indicator(&nontrivial).unwrap().kernel);
        for e in 1..10 {
            let expect = if e % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(g.rule(2, e), Complex64::new(expect, 0.0));
        }
        let cert = derivation_certificate(&Arc::new(principal_character(6).unwrap()), 10_000).unwrap();
        assert!(cert.passed);
    }

    #[test]
    fn csv_table() {
        let csv = character_table_csv(3).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "character,0,1,2");
        assert_eq!(lines[1], "[0],\"0,0\",\"1,0\",\"1,0\"");
        assert_eq!(lines[2], "[1],\"0,0\",\"1,0\",\"-1,0\"");
    }
}
