//! Multiplicative functions as prime-power kernels and the ring
//! `(M, box, x)` built on them.
//!
//! A multiplicative function is determined by its values at prime powers, and
//! at a prime power both ring operations act pointwise:
//! `[F box G](p^e) = F(p^e) + G(p^e)` and `[F x G](p^e) = F(p^e) G(p^e)`.
//! A [`Kernel`] therefore stores an expression tree over prime-power rules;
//! evaluation at `n` multiplies the rule over the factorization of `n`. The
//! definitional divisor-pair convolution is kept alongside as a cross-check.
//!
//! Values come in two flavours through the [`Value`] trait: double-precision
//! complex numbers, and exact rationals (`Ratio<i128>`, checked arithmetic)
//! for kernels whose every leaf has an exact rule.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, One, Zero};
use serde::Serialize;

use crate::characters::Character;
use crate::error::{domain, Error, Result};
use crate::integer::{self, Factorization, FactorTable};

pub type Rational = Ratio<i128>;

pub type RuleFn = Arc<dyn Fn(u64, u32) -> Complex64 + Send + Sync>;
pub type ExactRuleFn = Arc<dyn Fn(u64, u32) -> Result<Rational> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub completely_multiplicative: bool,
    pub real_valued: bool,
    pub integer_valued: bool,
}

impl Flags {
    pub const fn new(completely_multiplicative: bool, real_valued: bool, integer_valued: bool) -> Self {
        Flags { completely_multiplicative, real_valued, integer_valued }
    }
}

/// Certified local growth: `|F(p^e)| <= amplitude * p^(e * exponent)` for
/// every prime power, hence `|F(n)| <= amplitude^omega(n) * n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Growth {
    pub exponent: f64,
    pub amplitude: f64,
}

impl Growth {
    pub const fn new(exponent: f64, amplitude: f64) -> Self {
        Growth { exponent, amplitude }
    }

    const BOUNDED: Growth = Growth::new(0.0, 1.0);
}

/// Scalar field of a kernel (the appendix vector-space structure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScalarField {
    Real,
    Complex,
}

/// A set of primes, possibly given by its complement in the primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeSet {
    primes: BTreeSet<u64>,
    complement: bool,
}

impl PrimeSet {
    pub fn new(primes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let primes: BTreeSet<u64> = primes.into_iter().collect();
        if let Some(p) = primes.iter().find(|p| !integer::is_prime(**p)) {
            return Err(domain(format!("{p} is not prime")));
        }
        Ok(PrimeSet { primes, complement: false })
    }

    pub fn complement(&self) -> Self {
        PrimeSet { primes: self.primes.clone(), complement: !self.complement }
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.contains(&p) != self.complement
    }

    pub fn is_complement(&self) -> bool {
        self.complement
    }

    pub fn listed(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complement {
            write!(f, "~")?;
        }
        write!(f, "{{")?;
        for (i, p) in self.primes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone)]
enum Node {
    One,
    Delta1,
    IdPow(Complex64),
    TwoOmega,
    MobRad,
    Phi,
    Cosa(f64),
    Sina(f64),
    Character(Arc<Character>),
    Primes(PrimeSet),
    PrimePowers(BTreeSet<(u64, u32)>),
    Box(Kernel, Kernel),
    Mul(Kernel, Kernel),
    Inv(Kernel),
    Pow(Kernel, u32),
    Scal(Complex64, Kernel),
    Re(Kernel),
    Im(Kernel),
    Custom { name: String, rule: RuleFn, exact: Option<ExactRuleFn> },
}

/// An element of `M`: a multiplicative function given by its prime-power
/// rule. The value at `n = 1` is always 1 and never stored.
#[derive(Clone)]
pub struct Kernel {
    node: Arc<Node>,
    flags: Flags,
    growth: Growth,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.to_string())
            .field("flags", &self.flags)
            .field("growth", &self.growth)
            .finish()
    }
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{}", z.re),
        (true, false) => format!("{}i", z.im),
        (false, false) if z.im < 0.0 => format!("{}-{}i", z.re, -z.im),
        (false, false) => format!("{}+{}i", z.re, z.im),
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.node {
            Node::One => write!(f, "one"),
            Node::Delta1 => write!(f, "delta1"),
            Node::IdPow(s) if *s == Complex64::new(1.0, 0.0) => write!(f, "id"),
            Node::IdPow(s) => write!(f, "idpow({})", fmt_complex(*s)),
            Node::TwoOmega => write!(f, "twoomega"),
            Node::MobRad => write!(f, "mobrad"),
            Node::Phi => write!(f, "phi"),
            Node::Cosa(y) => write!(f, "cosa({y})"),
            Node::Sina(y) => write!(f, "sina({y})"),
            Node::Character(c) => write!(f, "char({},{})", c.modulus(), c.index()),
            Node::Primes(s) => write!(f, "ind({s})"),
            Node::PrimePowers(s) => {
                write!(f, "ppind({{")?;
                for (i, (p, e)) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", p.pow(*e))?;
                }
                write!(f, "}})")
            }
            Node::Box(a, b) => write!(f, "box({a},{b})"),
            Node::Mul(a, b) => write!(f, "mul({a},{b})"),
            Node::Inv(a) => write!(f, "inv({a})"),
            Node::Pow(a, k) => write!(f, "pow({a},{k})"),
            Node::Scal(l, a) => write!(f, "scal({},{a})", fmt_complex(*l)),
            Node::Re(a) => write!(f, "re({a})"),
            Node::Im(a) => write!(f, "im({a})"),
            Node::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

fn exact_int(x: f64) -> Option<i128> {
    (x.fract() == 0.0 && x.abs() < 9.0e15).then_some(x as i128)
}

fn checked_ratio_pow(base: &Rational, k: u32) -> Result<Rational> {
    let mut acc = <Rational as One>::one();
    for _ in 0..k {
        acc = acc.checked_mul(base).ok_or(Error::Overflow("exact pow"))?;
    }
    Ok(acc)
}

fn int_pow_ratio(p: u64, exp: i64) -> Result<Rational> {
    let mag = (p as i128)
        .checked_pow(exp.unsigned_abs() as u32)
        .ok_or(Error::Overflow("exact prime power"))?;
    Ok(if exp >= 0 { Rational::from_integer(mag) } else { Rational::new(1, mag) })
}

impl Kernel {
    fn leaf(node: Node, flags: Flags, growth: Growth) -> Self {
        Kernel { node: Arc::new(node), flags, growth }
    }

    /// The constant function `1`; zeta's coefficients and the identity of `x`.
    pub fn one() -> Self {
        Self::leaf(Node::One, Flags::new(true, true, true), Growth::BOUNDED)
    }

    /// `delta_1`: 1 at `n = 1`, 0 elsewhere; the identity of `box`.
    pub fn delta1() -> Self {
        Self::leaf(Node::Delta1, Flags::new(true, true, true), Growth::new(0.0, 0.0))
    }

    pub fn id() -> Self {
        Self::id_pow(Complex64::new(1.0, 0.0))
    }

    /// `n -> n^s`.
    pub fn id_pow(s: Complex64) -> Self {
        let real = s.im == 0.0;
        let int = real && s.re >= 0.0 && s.re.fract() == 0.0;
        Self::leaf(Node::IdPow(s), Flags::new(true, real, int), Growth::new(s.re, 1.0))
    }

    /// `n -> 2^omega(n)`.
    pub fn two_omega() -> Self {
        Self::leaf(Node::TwoOmega, Flags::new(false, true, true), Growth::new(0.0, 2.0))
    }

    /// `n -> (-1)^omega(n) / rad(n)`.
    pub fn mobrad() -> Self {
        Self::leaf(Node::MobRad, Flags::new(false, true, false), Growth::BOUNDED)
    }

    /// Euler's totient.
    pub fn phi() -> Self {
        Self::leaf(Node::Phi, Flags::new(false, true, true), Growth::new(1.0, 1.0))
    }

    /// `Cosa_y`: `p^e -> cos(y ln p^e)`.
    pub fn cosa(y: f64) -> Self {
        Self::leaf(Node::Cosa(y), Flags::new(y == 0.0, true, y == 0.0), Growth::BOUNDED)
    }

    /// `Sina_y`: `p^e -> sin(y ln p^e)`.
    pub fn sina(y: f64) -> Self {
        Self::leaf(Node::Sina(y), Flags::new(y == 0.0, true, y == 0.0), Growth::BOUNDED)
    }

    pub fn character(chi: Arc<Character>) -> Self {
        let real = chi.is_real();
        Self::leaf(Node::Character(chi), Flags::new(true, real, real), Growth::BOUNDED)
    }

    /// Completely multiplicative indicator of a prime set: `p^e -> [p in A]`.
    pub fn prime_indicator(set: PrimeSet) -> Self {
        Self::leaf(Node::Primes(set), Flags::new(true, true, true), Growth::BOUNDED)
    }

    /// Multiplicative indicator `1_S` of a set of prime powers: 1 at `p^e`
    /// exactly when `p^e` is listed.
    pub fn prime_power_indicator(powers: impl IntoIterator<Item = (u64, u32)>) -> Result<Self> {
        let set: BTreeSet<(u64, u32)> = powers.into_iter().collect();
        for &(p, e) in &set {
            if !integer::is_prime(p) || e == 0 {
                return Err(domain(format!("({p}, {e}) is not a prime power")));
            }
        }
        // Only the empty set is completely multiplicative (it is delta_1).
        let cm = set.is_empty();
        Ok(Self::leaf(Node::PrimePowers(set), Flags::new(cm, true, true), Growth::BOUNDED))
    }

    /// The indicator `1_s` of the integer `s`: the prime powers of `s`.
    pub fn integer_indicator(s: u64) -> Result<Self> {
        let f = integer::factorize(s)?;
        Self::prime_power_indicator(f.iter().map(|pp| (pp.p, pp.e)))
    }

    /// A kernel from an arbitrary prime-power rule. Flags and growth are the
    /// caller's claim; [`Kernel::verify_flags`] checks them up to a bound.
    pub fn from_rule(
        name: impl Into<String>,
        flags: Flags,
        growth: Growth,
        rule: impl Fn(u64, u32) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::leaf(
            Node::Custom { name: name.into(), rule: Arc::new(rule), exact: None },
            flags,
            growth,
        )
    }

    /// Like [`Kernel::from_rule`] with an exact rational rule; the complex
    /// rule is derived from it.
    pub fn from_exact_rule(
        name: impl Into<String>,
        flags: Flags,
        growth: Growth,
        exact: impl Fn(u64, u32) -> Rational + Send + Sync + 'static,
    ) -> Self {
        let exact = Arc::new(exact);
        let float = exact.clone();
        let rule: RuleFn = Arc::new(move |p, e| {
            let r = float(p, e);
            Complex64::new(*r.numer() as f64 / *r.denom() as f64, 0.0)
        });
        let exact: ExactRuleFn = Arc::new(move |p, e| Ok(exact(p, e)));
        Self::leaf(Node::Custom { name: name.into(), rule, exact: Some(exact) }, flags, growth)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth.exponent
    }

    pub fn field(&self) -> ScalarField {
        if self.flags.real_valued {
            ScalarField::Real
        } else {
            ScalarField::Complex
        }
    }

    /// True when the kernel is syntactically the zero element `delta_1`.
    fn is_delta1(&self) -> bool {
        match &*self.node {
            Node::Delta1 => true,
            Node::Scal(l, _) => *l == <Complex64 as Zero>::zero(),
            _ => false,
        }
    }

    /// Value at the prime power `p^e` (`e >= 1`).
    pub fn rule(&self, p: u64, e: u32) -> Complex64 {
        match &*self.node {
            Node::One => <Complex64 as One>::one(),
            Node::Delta1 => <Complex64 as Zero>::zero(),
            Node::IdPow(s) => {
                if s.im == 0.0 && s.re.fract() == 0.0 && s.re.abs() < 1e6 {
                    Complex64::new((p as f64).powi(e as i32 * s.re as i32), 0.0)
                } else {
                    (s * (e as f64 * (p as f64).ln())).exp()
                }
            }
            Node::TwoOmega => Complex64::new(2.0, 0.0),
            Node::MobRad => Complex64::new(-1.0 / p as f64, 0.0),
            Node::Phi => {
                let lower = (p as f64).powi(e as i32 - 1);
                Complex64::new(lower * p as f64 - lower, 0.0)
            }
            Node::Cosa(y) => Complex64::new((y * e as f64 * (p as f64).ln()).cos(), 0.0),
            Node::Sina(y) => Complex64::new((y * e as f64 * (p as f64).ln()).sin(), 0.0),
            Node::Character(c) => c.value_at_prime_power(p, e).to_complex(c.level()),
            Node::Primes(s) => Complex64::new(if s.contains(p) { 1.0 } else { 0.0 }, 0.0),
            Node::PrimePowers(s) => Complex64::new(if s.contains(&(p, e)) { 1.0 } else { 0.0 }, 0.0),
            Node::Box(a, b) => a.rule(p, e) + b.rule(p, e),
            Node::Mul(a, b) => a.rule(p, e) * b.rule(p, e),
            Node::Inv(a) => -a.rule(p, e),
            Node::Pow(a, k) => match &*a.node {
                Node::Character(c) => c.value_at_prime_power(p, e).pow(*k as u64, c.level()).to_complex(c.level()),
                _ => a.rule(p, e).powu(*k),
            },
            Node::Scal(l, a) => l * a.rule(p, e),
            Node::Re(a) => Complex64::new(a.rule(p, e).re, 0.0),
            Node::Im(a) => Complex64::new(a.rule(p, e).im, 0.0),
            Node::Custom { rule, .. } => rule(p, e),
        }
    }

    /// Exact rational value at `p^e`, when every leaf has an exact rule.
    pub fn exact_rule(&self, p: u64, e: u32) -> Result<Rational> {
        let not_exact = || Error::NotExact(self.to_string());
        match &*self.node {
            Node::One => Ok(<Rational as One>::one()),
            Node::Delta1 => Ok(<Rational as Zero>::zero()),
            Node::IdPow(s) => {
                if s.im != 0.0 || s.re.fract() != 0.0 || s.re.abs() > 64.0 {
                    return Err(not_exact());
                }
                int_pow_ratio(p, s.re as i64 * e as i64)
            }
            Node::TwoOmega => Ok(Rational::from_integer(2)),
            Node::MobRad => Ok(Rational::new(-1, p as i128)),
            Node::Phi => {
                let lower = int_pow_ratio(p, e as i64 - 1)?;
                let p_minus_1 = Rational::from_integer(p as i128 - 1);
                lower.checked_mul(&p_minus_1).ok_or(Error::Overflow("exact phi"))
            }
            Node::Cosa(y) if *y == 0.0 => Ok(<Rational as One>::one()),
            Node::Sina(y) if *y == 0.0 => Ok(<Rational as Zero>::zero()),
            Node::Cosa(_) | Node::Sina(_) => Err(not_exact()),
            Node::Character(c) => c
                .value_at_prime_power(p, e)
                .to_exact(c.level())
                .ok_or_else(not_exact),
            Node::Primes(s) => Ok(Rational::from_integer(s.contains(p) as i128)),
            Node::PrimePowers(s) => Ok(Rational::from_integer(s.contains(&(p, e)) as i128)),
            Node::Box(a, b) => a
                .exact_rule(p, e)?
                .checked_add(&b.exact_rule(p, e)?)
                .ok_or(Error::Overflow("exact box")),
            Node::Mul(a, b) => a
                .exact_rule(p, e)?
                .checked_mul(&b.exact_rule(p, e)?)
                .ok_or(Error::Overflow("exact mul")),
            Node::Inv(a) => Ok(-a.exact_rule(p, e)?),
            Node::Pow(a, k) => match &*a.node {
                Node::Character(c) => c
                    .value_at_prime_power(p, e)
                    .pow(*k as u64, c.level())
                    .to_exact(c.level())
                    .ok_or_else(not_exact),
                _ => checked_ratio_pow(&a.exact_rule(p, e)?, *k),
            },
            Node::Scal(l, a) => {
                let lambda = (l.im == 0.0).then(|| exact_int(l.re)).flatten().ok_or_else(not_exact)?;
                a.exact_rule(p, e)?
                    .checked_mul(&Rational::from_integer(lambda))
                    .ok_or(Error::Overflow("exact scal"))
            }
            Node::Re(a) => a.exact_rule(p, e),
            Node::Im(a) => a.exact_rule(p, e).map(|_| <Rational as Zero>::zero()),
            Node::Custom { exact: Some(f), .. } => f(p, e),
            Node::Custom { exact: None, .. } => Err(not_exact()),
        }
    }

    pub fn eval_as<V: Value>(&self, n: u64) -> Result<V> {
        self.eval_factored(&integer::factorize(n)?)
    }

    pub fn eval_factored<V: Value>(&self, f: &Factorization) -> Result<V> {
        f.iter().try_fold(V::one_value(), |acc, pp| acc.mul(&V::rule(self, pp.p, pp.e)?))
    }

    /// `F(n)` as a complex double.
    pub fn eval(&self, n: u64) -> Result<Complex64> {
        self.eval_as(n)
    }

    pub fn eval_exact(&self, n: u64) -> Result<Rational> {
        self.eval_as(n)
    }

    /// Exact integer value; errors when the value is not an integer.
    pub fn eval_int(&self, n: u64) -> Result<i128> {
        let r = self.eval_exact(n)?;
        if r.is_integer() {
            Ok(r.to_integer())
        } else {
            Err(Error::NotExact(format!("{self} at {n} is {r}, not an integer")))
        }
    }

    /// Values at `0..=upto` (index 0 is a placeholder).
    pub fn tabulate(&self, table: &FactorTable, upto: u64) -> Result<Vec<Complex64>> {
        table.tabulate(upto, <Complex64 as One>::one(), |p, e| self.rule(p, e), |a, b| a * b)
    }

    /// Checks the claimed flags at every prime power `p^e <= bound`.
    pub fn verify_flags(&self, bound: u64) -> Vec<FlagViolation> {
        let mut out = Vec::new();
        for p in integer::primes_up_to(bound) {
            let first = self.rule(p, 1);
            let mut pe = p;
            let mut e = 1u32;
            loop {
                let v = self.rule(p, e);
                if self.flags.completely_multiplicative && !close(v, first.powu(e), 1e-12) {
                    out.push(FlagViolation { flag: "completely_multiplicative", p, e, value: v.into() });
                }
                if self.flags.real_valued && v.im != 0.0 {
                    out.push(FlagViolation { flag: "real_valued", p, e, value: v.into() });
                }
                if self.flags.integer_valued && (v.im != 0.0 || v.re.fract() != 0.0) {
                    out.push(FlagViolation { flag: "integer_valued", p, e, value: v.into() });
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
        out
    }

    /// Errors unless the kernel claims complete multiplicativity and the
    /// claim survives [`Kernel::verify_flags`] up to `bound`.
    pub fn require_completely_multiplicative(&self, bound: u64) -> Result<()> {
        if !self.flags.completely_multiplicative {
            return Err(Error::Precondition(format!("{self} is not flagged completely multiplicative")));
        }
        match self
            .verify_flags(bound)
            .into_iter()
            .find(|v| v.flag == "completely_multiplicative")
        {
            Some(v) => Err(Error::Precondition(format!(
                "{self} violates complete multiplicativity at {}^{}",
                v.p, v.e
            ))),
            None => Ok(()),
        }
    }
}

/// A flag claim contradicted at a prime power.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagViolation {
    pub flag: &'static str,
    pub p: u64,
    pub e: u32,
    pub value: crate::report::Cplx,
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * 1f64.max(a.norm()).max(b.norm())
}

/// Scalar types a kernel can be evaluated in.
pub trait Value: Clone + PartialEq + fmt::Debug + Send + Sync + Sized {
    fn one_value() -> Self;
    fn zero_value() -> Self;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn rule(kernel: &Kernel, p: u64, e: u32) -> Result<Self>;
}

impl Value for Complex64 {
    fn one_value() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn zero_value() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn rule(kernel: &Kernel, p: u64, e: u32) -> Result<Self> {
        Ok(kernel.rule(p, e))
    }
}

impl Value for Rational {
    fn one_value() -> Self {
        <Rational as One>::one()
    }
    fn zero_value() -> Self {
        <Rational as Zero>::zero()
    }
    fn add(&self, other: &Self) -> Result<Self> {
        self.checked_add(other).ok_or(Error::Overflow("exact add"))
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        self.checked_mul(other).ok_or(Error::Overflow("exact mul"))
    }
    fn rule(kernel: &Kernel, p: u64, e: u32) -> Result<Self> {
        kernel.exact_rule(p, e)
    }
}

fn combine(node: Node, flags: Flags, growth: Growth) -> Kernel {
    Kernel::leaf(node, flags, growth)
}

/// `F box G`: pointwise sum of the prime-power rules.
pub fn box_add(f: &Kernel, g: &Kernel) -> Kernel {
    let (ff, gf) = (f.flags, g.flags);
    let cm = if f.is_delta1() {
        gf.completely_multiplicative
    } else if g.is_delta1() {
        ff.completely_multiplicative
    } else {
        false
    };
    let exponent = match (f.growth.amplitude > 0.0, g.growth.amplitude > 0.0) {
        (true, true) => f.growth.exponent.max(g.growth.exponent),
        (true, false) => f.growth.exponent,
        (false, true) => g.growth.exponent,
        (false, false) => 0.0,
    };
    combine(
        Node::Box(f.clone(), g.clone()),
        Flags::new(cm, ff.real_valued && gf.real_valued, ff.integer_valued && gf.integer_valued),
        Growth::new(exponent, f.growth.amplitude + g.growth.amplitude),
    )
}

/// `F x G`: pointwise product.
pub fn pointwise_mul(f: &Kernel, g: &Kernel) -> Kernel {
    let (ff, gf) = (f.flags, g.flags);
    combine(
        Node::Mul(f.clone(), g.clone()),
        Flags::new(
            ff.completely_multiplicative && gf.completely_multiplicative,
            ff.real_valued && gf.real_valued,
            ff.integer_valued && gf.integer_valued,
        ),
        Growth::new(f.growth.exponent + g.growth.exponent, f.growth.amplitude * g.growth.amplitude),
    )
}

/// Inverse for `box`: `I_F(p^e) = -F(p^e)`, i.e. `I_F(n) = (-1)^omega(n) F(n)`.
pub fn box_inverse(f: &Kernel) -> Kernel {
    let flags = Flags { completely_multiplicative: f.is_delta1(), ..f.flags };
    combine(Node::Inv(f.clone()), flags, f.growth)
}

/// External operation `lambda o F`: `p^e -> lambda * F(p^e)`.
pub fn scalar_ext(lambda: Complex64, f: &Kernel) -> Kernel {
    let ff = f.flags;
    let real = lambda.im == 0.0;
    let cm = lambda == <Complex64 as Zero>::zero()
        || (lambda == <Complex64 as One>::one() && ff.completely_multiplicative)
        || f.is_delta1();
    let int = real && lambda.re.fract() == 0.0 && ff.integer_valued;
    combine(
        Node::Scal(lambda, f.clone()),
        Flags::new(cm, real && ff.real_valued, int),
        Growth::new(f.growth.exponent, lambda.norm() * f.growth.amplitude),
    )
}

/// Real-field restriction of [`scalar_ext`].
pub fn scalar_ext_real(lambda: f64, f: &Kernel) -> Kernel {
    scalar_ext(Complex64::new(lambda, 0.0), f)
}

/// `F^k` under `x`.
pub fn pow_pointwise(f: &Kernel, k: u32) -> Result<Kernel> {
    if k == 0 {
        return Err(domain("pointwise power requires k >= 1"));
    }
    Ok(combine(
        Node::Pow(f.clone(), k),
        f.flags,
        Growth::new(f.growth.exponent * k as f64, f.growth.amplitude.powi(k as i32)),
    ))
}

/// `F = A box (i o B)` with `A`, `B` real kernels.
pub fn decompose_real_imag(f: &Kernel) -> (Kernel, Kernel) {
    let flags = Flags::new(f.is_delta1(), true, f.flags.integer_valued);
    (
        combine(Node::Re(f.clone()), flags, f.growth),
        combine(Node::Im(f.clone()), Flags::new(true, true, true).min_with(flags), f.growth),
    )
}

impl Flags {
    fn min_with(self, other: Flags) -> Flags {
        Flags::new(
            self.completely_multiplicative && other.completely_multiplicative,
            self.real_valued && other.real_valued,
            self.integer_valued && other.integer_valued,
        )
    }
}

/// `[F box G](m)` computed from the definition: the sum of `F(a) G(b)` over
/// unitary divisor pairs `ab = m`, `gcd(a, b) = 1`.
pub fn box_convolve_definitional<V: Value>(f: &Kernel, g: &Kernel, m: u64) -> Result<V> {
    let pairs = integer::unitary_divisor_pairs(m)?;
    pairs.into_iter().try_fold(V::zero_value(), |acc, (a, b)| {
        acc.add(&f.eval_as::<V>(a)?.mul(&g.eval_as::<V>(b)?)?)
    })
}

/// `[F * G](n)`: the full Dirichlet divisor sum.
pub fn dirichlet_convolve<V: Value>(f: &Kernel, g: &Kernel, n: u64) -> Result<V> {
    let divisors = integer::divisors(n)?;
    divisors.into_iter().try_fold(V::zero_value(), |acc, a| {
        acc.add(&f.eval_as::<V>(a)?.mul(&g.eval_as::<V>(n / a)?)?)
    })
}

/// Named catalog entry with numeric parameters, as used by the expression
/// grammar: `one`, `delta1`, `id`, `idpow(re[,im])`, `twoomega`, `mobrad`,
/// `phi`, `cosa(y)`, `sina(y)`, `char(k,index)`, `ind(p,...)`.
pub fn catalog(name: &str, params: &[f64]) -> Result<Kernel> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(domain(format!("`{name}` takes {n} parameter(s), got {}", params.len())))
        }
    };
    let as_u64 = |x: f64| -> Result<u64> {
        if x >= 0.0 && x.fract() == 0.0 && x < 9.0e15 {
            Ok(x as u64)
        } else {
            Err(domain(format!("`{name}` expects a non-negative integer, got {x}")))
        }
    };
    match name {
        "one" => arity(0).map(|_| Kernel::one()),
        "delta1" => arity(0).map(|_| Kernel::delta1()),
        "id" => arity(0).map(|_| Kernel::id()),
        "twoomega" => arity(0).map(|_| Kernel::two_omega()),
        "mobrad" => arity(0).map(|_| Kernel::mobrad()),
        "phi" => arity(0).map(|_| Kernel::phi()),
        "idpow" => match params {
            [re] => Ok(Kernel::id_pow(Complex64::new(*re, 0.0))),
            [re, im] => Ok(Kernel::id_pow(Complex64::new(*re, *im))),
            _ => Err(domain("`idpow` takes 1 or 2 parameters")),
        },
        "cosa" => arity(1).map(|_| Kernel::cosa(params[0])),
        "sina" => arity(1).map(|_| Kernel::sina(params[0])),
        "char" => {
            arity(2)?;
            let chi = crate::characters::character(as_u64(params[0])?, as_u64(params[1])? as usize)?;
            Ok(Kernel::character(Arc::new(chi)))
        }
        "ind" => {
            let primes = params.iter().map(|x| as_u64(*x)).collect::<Result<Vec<_>>>()?;
            Ok(Kernel::prime_indicator(PrimeSet::new(primes)?))
        }
        _ => Err(domain(format!("unknown kernel `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Kernel::one().eval(97).unwrap(), c(1.0));
        assert_eq!(Kernel::one().eval(1).unwrap(), c(1.0));
        assert_eq!(Kernel::two_omega().eval_int(12).unwrap(), 4);
        assert_eq!(Kernel::phi().eval_int(12).unwrap(), 4);
        assert_eq!(Kernel::delta1().eval_int(1).unwrap(), 1);
        assert_eq!(Kernel::delta1().eval_int(7).unwrap(), 0);
        assert!(Kernel::one().eval(0).is_err());
    }

    #[test]
    fn box_add_examples() {
        let one = Kernel::one();
        assert_eq!(box_add(&one, &one).eval_int(12).unwrap(), 4);
        assert_eq!(box_add(&Kernel::id(), &one).eval_int(12).unwrap(), 20);
        let zero = box_add(&one, &box_inverse(&one));
        for n in 1..200 {
            assert_eq!(zero.eval_int(n).unwrap(), (n == 1) as i128);
        }
    }

    #[test]
    fn definitional_examples() {
        let (one, id) = (Kernel::one(), Kernel::id());
        assert_eq!(box_convolve_definitional::<Rational>(&one, &one, 16).unwrap(), Rational::from(2));
        assert_eq!(box_convolve_definitional::<Rational>(&id, &one, 12).unwrap(), Rational::from(20));
        let delta = Kernel::delta1();
        for m in 1..100 {
            let v: Rational = box_convolve_definitional(&delta, &id, m).unwrap();
            assert_eq!(v, id.eval_exact(m).unwrap());
        }
    }

    #[test]
    fn dirichlet_examples() {
        let one = Kernel::one();
        assert_eq!(dirichlet_convolve::<Rational>(&one, &one, 12).unwrap(), Rational::from(6));
        assert_eq!(dirichlet_convolve::<Rational>(&one, &one, 16).unwrap(), Rational::from(5));
        let id = Kernel::id();
        let v: Rational = dirichlet_convolve(&id, &Kernel::two_omega(), 13).unwrap();
        // F(1)G(p) + F(p)G(1) = 2 + 13
        assert_eq!(v, Rational::from(15));
    }

    #[test]
    fn inverse_examples() {
        let inv_delta = box_inverse(&Kernel::delta1());
        assert!(inv_delta.flags().completely_multiplicative);
        for n in 1..50 {
            assert_eq!(inv_delta.eval_int(n).unwrap(), (n == 1) as i128);
        }
        assert_eq!(box_inverse(&Kernel::id()).eval_int(12).unwrap(), 12);
        assert_eq!(box_inverse(&Kernel::id()).eval_int(30).unwrap(), -30);
    }

    #[test]
    fn scalar_and_power_examples() {
        let one = Kernel::one();
        assert_eq!(scalar_ext_real(2.0, &one).eval_int(12).unwrap(), 4);
        let zeroed = scalar_ext_real(0.0, &Kernel::id());
        assert!(zeroed.flags().completely_multiplicative);
        assert_eq!(zeroed.eval_int(1).unwrap(), 1);
        assert_eq!(zeroed.eval_int(6).unwrap(), 0);
        let sign = box_inverse(&one);
        let sq = pow_pointwise(&sign, 2).unwrap();
        for n in 1..100 {
            assert_eq!(sq.eval_int(n).unwrap(), 1);
        }
        assert!(pow_pointwise(&one, 0).is_err());
    }

    #[test]
    fn decompose_idpow() {
        let y = 0.7;
        let f = Kernel::id_pow(Complex64::new(0.0, y));
        let (a, b) = decompose_real_imag(&f);
        let (cosa, sina) = (Kernel::cosa(y), Kernel::sina(y));
        for (p, e) in [(2, 1), (3, 2), (5, 3), (97, 1)] {
            assert!((a.rule(p, e) - cosa.rule(p, e)).norm() < 1e-15);
            assert!((b.rule(p, e) - sina.rule(p, e)).norm() < 1e-15);
        }
        let (a, b) = decompose_real_imag(&Kernel::one());
        assert_eq!(a.eval_int(6).unwrap(), 1);
        assert_eq!(b.eval_int(6).unwrap(), 0);
        assert_eq!(b.eval_int(1).unwrap(), 1);
    }

    #[test]
    fn catalog_flags_hold() {
        let kernels = [
            Kernel::one(),
            Kernel::delta1(),
            Kernel::id(),
            Kernel::id_pow(Complex64::new(0.5, 2.0)),
            Kernel::two_omega(),
            Kernel::mobrad(),
            Kernel::phi(),
            Kernel::cosa(1.3),
            Kernel::sina(1.3),
            catalog("char", &[5.0, 1.0]).unwrap(),
            catalog("char", &[8.0, 3.0]).unwrap(),
            catalog("ind", &[2.0, 3.0]).unwrap(),
            Kernel::integer_indicator(12).unwrap(),
        ];
        for k in &kernels {
            assert!(k.verify_flags(5000).is_empty(), "{k}: {:?}", k.verify_flags(5000));
        }
        assert!(!catalog("char", &[5.0, 1.0]).unwrap().flags().real_valued);
        assert!(catalog("char", &[8.0, 3.0]).unwrap().flags().real_valued);
    }

    #[test]
    fn flag_claims_are_checked() {
        let lying = Kernel::from_rule("liar", Flags::new(true, true, true), Growth::BOUNDED, |_, e| {
            Complex64::new(e as f64 + 0.5, 0.0)
        });
        let violations = lying.verify_flags(100);
        assert!(violations.iter().any(|v| v.flag == "completely_multiplicative"));
        assert!(violations.iter().any(|v| v.flag == "integer_valued"));
        assert!(lying.require_completely_multiplicative(100).is_err());
        assert!(Kernel::two_omega().require_completely_multiplicative(100).is_err());
        assert!(Kernel::id().require_completely_multiplicative(10_000).is_ok());
    }

    #[test]
    fn totient_via_ring_operations_exact() {
        let phi_ring = pointwise_mul(&Kernel::id(), &box_add(&Kernel::one(), &Kernel::mobrad()));
        assert_eq!(phi_ring.eval_int(12).unwrap(), 4);
        for n in 1..=2000u64 {
            assert_eq!(phi_ring.eval_exact(n).unwrap(), Kernel::phi().eval_exact(n).unwrap());
        }
    }

    #[test]
    fn display_is_grammar() {
        let k = scalar_ext(
            Complex64::new(0.5, -2.0),
            &pow_pointwise(&box_add(&Kernel::id(), &Kernel::cosa(1.5)), 3).unwrap(),
        );
        assert_eq!(k.to_string(), "scal(0.5-2i,pow(box(id,cosa(1.5)),3))");
        let ind = Kernel::prime_indicator(PrimeSet::new([3, 2]).unwrap().complement());
        assert_eq!(ind.to_string(), "ind(~{2,3})");
    }

    #[test]
    fn growth_propagates() {
        let k = pointwise_mul(&Kernel::id(), &box_add(&Kernel::one(), &Kernel::two_omega()));
        assert_eq!(k.growth(), Growth::new(1.0, 3.0));
        assert_eq!(box_add(&Kernel::delta1(), &Kernel::id()).growth(), Growth::new(1.0, 1.0));
        assert_eq!(pow_pointwise(&Kernel::two_omega(), 3).unwrap().growth(), Growth::new(0.0, 8.0));
    }
}
