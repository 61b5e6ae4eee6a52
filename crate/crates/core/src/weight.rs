//! Weighted convolutions `[F box_W G](m) = sum_{ab=m} F(a) G(b) W(a,b)` and
//! the axiom checkers showing that, among weights, only the coprimality
//! indicator makes `(M, box_W, x)` a commutative ring.
//!
//! Every checker scans a finite domain and reports the lexicographically
//! least violation, so parallel scans stay deterministic.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::integer::{self, gcd};
use crate::kernel::{self, pointwise_mul, Kernel};
use crate::report::{Cplx, Status};

pub type WeightRule = Arc<dyn Fn(u64, u64) -> Complex64 + Send + Sync>;

/// A weight `W(a, b)` certified on `a * b <= domain_bound`.
#[derive(Clone)]
pub struct WeightFn {
    name: String,
    rule: WeightRule,
    domain_bound: u64,
    table: HashMap<(u64, u64), Complex64>,
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFn")
            .field("name", &self.name)
            .field("domain_bound", &self.domain_bound)
            .field("table_entries", &self.table.len())
            .finish()
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl WeightFn {
    pub fn from_fn(
        name: impl Into<String>,
        domain_bound: u64,
        rule: impl Fn(u64, u64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        WeightFn { name: name.into(), rule: Arc::new(rule), domain_bound, table: HashMap::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain_bound(&self) -> u64 {
        self.domain_bound
    }

    /// Replaces the value at `(a, b)`, leaving every other entry alone.
    pub fn with_entry(mut self, a: u64, b: u64, value: Complex64) -> Result<Self> {
        self.check_domain(a, b)?;
        self.table.insert((a, b), value);
        self.name = format!("{}[W({a},{b})={}]", self.name, kernel::fmt_complex(value));
        Ok(self)
    }

    fn check_domain(&self, a: u64, b: u64) -> Result<()> {
        match a.checked_mul(b) {
            Some(ab) if a >= 1 && b >= 1 && ab <= self.domain_bound => Ok(()),
            _ => Err(Error::OutsideWeightDomain { a, b, bound: self.domain_bound }),
        }
    }

    pub fn get(&self, a: u64, b: u64) -> Result<Complex64> {
        self.check_domain(a, b)?;
        Ok(self.get_unchecked(a, b))
    }

    fn get_unchecked(&self, a: u64, b: u64) -> Complex64 {
        match self.table.get(&(a, b)) {
            Some(v) => *v,
            None => (self.rule)(a, b),
        }
    }

    /// Loads a weight from text: `a b value` lines (value `re` or `re,im`),
    /// an optional `default coprime|ones` line (coprime when absent), an
    /// optional `bound N` line (else `fallback_bound`), `#` comments.
    pub fn parse(text: &str, fallback_bound: u64) -> Result<Self> {
        let mut default = "coprime";
        let mut bound = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| domain(format!("weight file line {}: {what}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["default", d] if *d == "coprime" || *d == "ones" => default = if *d == "ones" { "ones" } else { "coprime" },
                ["default", _] => return Err(bad("default must be `coprime` or `ones`")),
                ["bound", n] => bound = Some(n.parse::<u64>().map_err(|_| bad("invalid bound"))?),
                [a, b, v] => {
                    let a = a.parse::<u64>().map_err(|_| bad("invalid a"))?;
                    let b = b.parse::<u64>().map_err(|_| bad("invalid b"))?;
                    let value = match v.split_once(',') {
                        Some((re, im)) => Complex64::new(
                            re.parse().map_err(|_| bad("invalid value"))?,
                            im.parse().map_err(|_| bad("invalid value"))?,
                        ),
                        None => real(v.parse().map_err(|_| bad("invalid value"))?),
                    };
                    entries.push((a, b, value));
                }
                _ => return Err(bad("expected `a b value`, `default ...` or `bound N`")),
            }
        }
        let bound = bound.unwrap_or(fallback_bound);
        let mut w = if default == "ones" { ones(bound) } else { coprime_weight(bound) };
        w.name = format!("file({default})");
        for (a, b, v) in entries {
            w.check_domain(a, b)?;
            w.table.insert((a, b), v);
        }
        Ok(w)
    }

    pub fn from_file(path: impl AsRef<Path>, fallback_bound: u64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, fallback_bound)
    }
}

/// `W(a, b) = [gcd(a, b) = 1]`.
pub fn coprime_weight(domain_bound: u64) -> WeightFn {
    WeightFn::from_fn("coprime", domain_bound, |a, b| real((gcd(a, b) == 1) as u8 as f64))
}

/// `W = 1`, the Dirichlet weight.
pub fn ones(domain_bound: u64) -> WeightFn {
    WeightFn::from_fn("ones", domain_bound, |_, _| real(1.0))
}

/// A stable weight built prime by prime:
/// `W(a, b) = prod_p table(p, v_p(a), v_p(b))`, with `table(p, 0, 0) = 1`.
pub fn weight_from_prime_table(
    name: impl Into<String>,
    domain_bound: u64,
    table: impl Fn(u64, u32, u32) -> Complex64 + Send + Sync + 'static,
) -> WeightFn {
    WeightFn::from_fn(name, domain_bound, move |a, b| {
        let fa = integer::factorize(a).expect("a >= 1");
        let fb = integer::factorize(b).expect("b >= 1");
        let mut primes: Vec<u64> = fa.iter().chain(fb.iter()).map(|pp| pp.p).collect();
        primes.sort_unstable();
        primes.dedup();
        primes.into_iter().fold(real(1.0), |acc, p| {
            let va = fa.iter().find(|pp| pp.p == p).map_or(0, |pp| pp.e);
            let vb = fb.iter().find(|pp| pp.p == p).map_or(0, |pp| pp.e);
            acc * table(p, va, vb)
        })
    })
}

/// Weighted convolution at `m` from the definition.
pub fn w_convolve(f: &Kernel, g: &Kernel, w: &WeightFn, m: u64) -> Result<Complex64> {
    if m > w.domain_bound {
        return Err(Error::OutsideWeightDomain { a: 1, b: m, bound: w.domain_bound });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in integer::divisors(m)? {
        let b = m / a;
        acc += f.eval(a)? * g.eval(b)? * w.get_unchecked(a, b);
    }
    Ok(acc)
}

fn is_exact(z: Complex64) -> bool {
    z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() < 9.0e15
}

/// Exact comparison for integer values, `1e-12` relative otherwise.
pub fn weights_equal(x: Complex64, y: Complex64) -> bool {
    if is_exact(x) && is_exact(y) {
        x == y
    } else {
        kernel::close(x, y, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Commutativity,
    Stability,
    Identity,
    Associativity,
    Distributivity,
    Factorization,
}

impl Axiom {
    pub const RING: [Axiom; 5] = [
        Axiom::Commutativity,
        Axiom::Stability,
        Axiom::Identity,
        Axiom::Associativity,
        Axiom::Distributivity,
    ];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("axiom serializes");
        write!(f, "{}", s.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Meaning depends on the axiom: `(a,b)`, `(a,b,c,d)`, `(a,b,c)`,
    /// `(p,n,l)` for the probe at `p^n` with `l + f = n`, or `(n,q)`.
    pub witness: Vec<u64>,
    pub lhs: Cplx,
    pub rhs: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub status: Status,
    pub bound: u64,
    pub witness: Option<Violation>,
}

impl AxiomReport {
    fn from_scan(axiom: Axiom, bound: u64, found: Option<Violation>) -> Self {
        AxiomReport { axiom, status: Status::from_bool(found.is_none()), bound, witness: found }
    }

    pub fn passed(&self) -> bool {
        self.status.is_pass()
    }

    /// Re-evaluates the witness against `w`: true when it still violates
    /// the axiom. A report without a witness never rechecks.
    pub fn recheck(&self, w: &WeightFn) -> Result<bool> {
        let Some(v) = &self.witness else { return Ok(false) };
        Ok(evaluate_witness(self.axiom, w, &v.witness)?.is_some())
    }
}

/// Evaluates one equation of `axiom`; `Some` when it is violated.
fn evaluate_witness(axiom: Axiom, w: &WeightFn, t: &[u64]) -> Result<Option<Violation>> {
    let arity = match axiom {
        Axiom::Commutativity | Axiom::Identity | Axiom::Factorization => 2,
        Axiom::Stability => 4,
        Axiom::Associativity | Axiom::Distributivity => 3,
    };
    if t.len() != arity {
        return Err(domain(format!("{axiom} witness needs {arity} entries")));
    }
    let (lhs, rhs) = match axiom {
        Axiom::Commutativity => (w.get(t[0], t[1])?, w.get(t[1], t[0])?),
        Axiom::Stability => {
            let (a, b, c, d) = (t[0], t[1], t[2], t[3]);
            if gcd(a * b, c * d) != 1 {
                return Ok(None);
            }
            (w.get(a, b)? * w.get(c, d)?, w.get(a * c, b * d)?)
        }
        Axiom::Identity => {
            if t[0] != 1 && t[1] != 1 {
                return Err(domain("identity witness must have an entry equal to 1"));
            }
            (w.get(t[0], t[1])?, real(1.0))
        }
        Axiom::Associativity => {
            let (a, b, c) = (t[0], t[1], t[2]);
            (w.get(a, b)? * w.get(a * b, c)?, w.get(b, c)? * w.get(b * c, a)?)
        }
        Axiom::Distributivity => distributivity_probe(w, t[0], t[1] as u32, t[2] as u32)?,
        Axiom::Factorization => {
            let (n, q) = (t[0], t[1]);
            let g = integer::factorize(gcd(n, q))?;
            let mut prod = real(1.0);
            for pp in g.iter() {
                let pv = pp.value()?;
                prod *= w.get(pv, pv)?;
            }
            (w.get(n, q)?, prod)
        }
    };
    Ok((!weights_equal(lhs, rhs)).then(|| Violation { witness: t.to_vec(), lhs: lhs.into(), rhs: rhs.into() }))
}

/// `[1_{p^l} box_W 1_{p^f}] x 1_{p^n}` against
/// `[1_{p^l} x 1_{p^n}] box_W [1_{p^f} x 1_{p^n}]` at `p^n`, `f = n - l`.
fn distributivity_probe(w: &WeightFn, p: u64, n: u32, l: u32) -> Result<(Complex64, Complex64)> {
    if l > n || !integer::is_prime(p) {
        return Err(domain("distributivity probe needs a prime p and l <= n"));
    }
    let m = integer::checked_pow(p, n)?;
    let f = Kernel::integer_indicator(p.pow(l))?;
    let g = Kernel::integer_indicator(p.pow(n - l))?;
    let h = Kernel::integer_indicator(m)?;
    let lhs = w_convolve(&f, &g, w, m)? * h.eval(m)?;
    let rhs = w_convolve(&pointwise_mul(&f, &h), &pointwise_mul(&g, &h), w, m)?;
    Ok((lhs, rhs))
}

fn violation(t: Vec<u64>, lhs: Complex64, rhs: Complex64) -> Option<Violation> {
    (!weights_equal(lhs, rhs)).then(|| Violation { witness: t, lhs: lhs.into(), rhs: rhs.into() })
}

fn effective_bound(w: &WeightFn, bound: u64) -> Result<u64> {
    if bound > w.domain_bound {
        return Err(Error::OutsideWeightDomain { a: 1, b: bound, bound: w.domain_bound });
    }
    Ok(bound)
}

/// `W(a,b) = W(b,a)` for `ab <= bound`.
pub fn check_commutativity(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let found = (1..=bound).into_par_iter().find_map_first(|a| {
        (1..=bound / a)
            .find_map(|b| violation(vec![a, b], w.get_unchecked(a, b), w.get_unchecked(b, a)))
    });
    Ok(AxiomReport::from_scan(Axiom::Commutativity, bound, found))
}

/// `W(a,b) W(c,d) = W(ac,bd)` whenever `gcd(ab, cd) = 1`, `abcd <= bound`.
pub fn check_stability(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let found = (1..=bound).into_par_iter().find_map_first(|a| {
        for b in 1..=bound / a {
            let ab = a * b;
            for c in 1..=bound / ab {
                for d in 1..=bound / (ab * c) {
                    if gcd(ab, c * d) != 1 {
                        continue;
                    }
                    let lhs = w.get_unchecked(a, b) * w.get_unchecked(c, d);
                    if let Some(v) = violation(vec![a, b, c, d], lhs, w.get_unchecked(a * c, b * d)) {
                        return Some(v);
                    }
                }
            }
        }
        None
    });
    Ok(AxiomReport::from_scan(Axiom::Stability, bound, found))
}

fn prime_powers_up_to(bound: u64) -> Vec<(u64, u32, u64)> {
    let mut out = Vec::new();
    for p in integer::primes_up_to(bound) {
        let (mut pe, mut e) = (p, 1u32);
        loop {
            out.push((p, e, pe));
            match pe.checked_mul(p) {
                Some(next) if next <= bound => {
                    pe = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|t| t.2);
    out
}

/// `W(1,1) = 1`, then `W(1,p^e) = 1` and `W(p^e,1) = 1` for `p^e <= bound`:
/// exactly what makes `delta_1` neutral on both sides at prime powers.
pub fn check_identity(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let one = real(1.0);
    let powers = prime_powers_up_to(bound);
    let found = violation(vec![1, 1], w.get_unchecked(1, 1), one)
        .or_else(|| {
            powers.par_iter().find_map_first(|&(_, _, q)| violation(vec![1, q], w.get_unchecked(1, q), one))
        })
        .or_else(|| {
            powers.par_iter().find_map_first(|&(_, _, q)| violation(vec![q, 1], w.get_unchecked(q, 1), one))
        });
    Ok(AxiomReport::from_scan(Axiom::Identity, bound, found))
}

/// `W(a,b) W(ab,c) = W(b,c) W(bc,a)` for `abc <= bound`.
pub fn check_associativity(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let found = (1..=bound).into_par_iter().find_map_first(|a| {
        for b in 1..=bound / a {
            for c in 1..=bound / (a * b) {
                let lhs = w.get_unchecked(a, b) * w.get_unchecked(a * b, c);
                let rhs = w.get_unchecked(b, c) * w.get_unchecked(b * c, a);
                if let Some(v) = violation(vec![a, b, c], lhs, rhs) {
                    return Some(v);
                }
            }
        }
        None
    });
    Ok(AxiomReport::from_scan(Axiom::Associativity, bound, found))
}

/// Distributivity of `x` over `box_W` on the indicator probes
/// `1_{p^l}, 1_{p^f}, 1_{p^n}` with `l + f = n`, `p^n <= bound`, scanned by
/// increasing `p^n`, then `l`.
pub fn check_distributivity(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let powers = prime_powers_up_to(bound);
    let found = powers
        .par_iter()
        .map(|&(p, n, _)| -> Result<Option<Violation>> {
            for l in 0..=n {
                let (lhs, rhs) = distributivity_probe(w, p, n, l)?;
                if let Some(v) = violation(vec![p, n as u64, l as u64], lhs, rhs) {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(AxiomReport::from_scan(Axiom::Distributivity, bound, found))
}

/// `W(n,q) = prod_{p | gcd(n,q)} W(p^v, p^v)`, `v = v_p(gcd(n,q))`, for
/// `nq <= bound`.
pub fn verify_weight_factorization(w: &WeightFn, bound: u64) -> Result<AxiomReport> {
    let bound = effective_bound(w, bound)?;
    let found = (1..=bound)
        .into_par_iter()
        .map(|n| -> Result<Option<Violation>> {
            for q in 1..=bound / n {
                if let Some(v) = evaluate_witness(Axiom::Factorization, w, &[n, q])? {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(AxiomReport::from_scan(Axiom::Factorization, bound, found))
}

/// All five ring-axiom checkers, in a fixed order.
pub fn check_all(w: &WeightFn, bound: u64) -> Result<Vec<AxiomReport>> {
    Ok(vec![
        check_commutativity(w, bound)?,
        check_stability(w, bound)?,
        check_identity(w, bound)?,
        check_associativity(w, bound)?,
        check_distributivity(w, bound)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    /// `W(p^i, p^j)`, `i, j >= 1`.
    PrimePowerPair,
    /// `W(1, p^e)` or `W(p^e, 1)`.
    Unit,
    /// Any `(a, b)` with `ab <= bound`.
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub a: u64,
    pub b: u64,
    pub old: Cplx,
    pub new: Cplx,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnicityTrial {
    pub perturbation: Perturbation,
    pub reports: Vec<AxiomReport>,
    pub failed: Vec<Axiom>,
    /// Every failing report's witness still violates the perturbed weight.
    pub witnesses_recheck: bool,
    pub detected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnicityReport {
    pub bound: u64,
    pub seed: u64,
    pub baseline: Vec<AxiomReport>,
    pub baseline_passes: bool,
    pub trials: Vec<UnicityTrial>,
    pub all_detected: bool,
    pub status: Status,
}

fn random_perturbation(rng: &mut ChaCha8Rng, base: &WeightFn, bound: u64, powers: &[(u64, u32, u64)]) -> Perturbation {
    let kind = match rng.random_range(0..3) {
        0 => PerturbationKind::PrimePowerPair,
        1 => PerturbationKind::Unit,
        _ => PerturbationKind::General,
    };
    let (a, b) = match kind {
        PerturbationKind::PrimePowerPair => loop {
            let (p, _, _) = powers[rng.random_range(0..powers.len())];
            let i = rng.random_range(1..=integer::floor_log(bound, p));
            let max_j = integer::floor_log(bound / p.pow(i), p);
            if max_j >= 1 {
                break (p.pow(i), p.pow(rng.random_range(1..=max_j)));
            }
        },
        PerturbationKind::Unit => {
            let (_, _, q) = powers[rng.random_range(0..powers.len())];
            if rng.random_bool(0.5) {
                (1, q)
            } else {
                (q, 1)
            }
        }
        PerturbationKind::General => {
            let a = rng.random_range(1..=bound);
            (a, rng.random_range(1..=bound / a))
        }
    };
    let old = base.get_unchecked(a, b);
    let new = match rng.random_range(0..4) {
        0 => Complex64::new(0.5, rng.random_range(-1.0..1.0)),
        _ if old == real(0.0) => real(1.0),
        _ => real(0.0),
    };
    Perturbation { kind, a, b, old: old.into(), new: new.into() }
}

/// Runs every ring checker on `perturbations` seeded single-entry
/// perturbations of the coprime weight, and on the weight itself.
pub fn unicity_search(perturbations: usize, bound: u64, seed: u64) -> Result<UnicityReport> {
    if bound < 4 {
        return Err(domain("unicity search needs bound >= 4"));
    }
    let base = coprime_weight(bound);
    let baseline = check_all(&base, bound)?;
    let baseline_passes = baseline.iter().all(AxiomReport::passed);
    let powers: Vec<_> = prime_powers_up_to(bound);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planned: Vec<Perturbation> =
        (0..perturbations).map(|_| random_perturbation(&mut rng, &base, bound, &powers)).collect();
    let trials = planned
        .into_par_iter()
        .map(|perturbation| -> Result<UnicityTrial> {
            let w = base.clone().with_entry(perturbation.a, perturbation.b, perturbation.new.into())?;
            let reports = check_all(&w, bound)?;
            let failed: Vec<Axiom> = reports.iter().filter(|r| !r.passed()).map(|r| r.axiom).collect();
            let mut witnesses_recheck = true;
            for r in reports.iter().filter(|r| !r.passed()) {
                witnesses_recheck &= r.recheck(&w)?;
            }
            let detected = !failed.is_empty() && witnesses_recheck;
            Ok(UnicityTrial { perturbation, reports, failed, witnesses_recheck, detected })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_detected = trials.iter().all(|t| t.detected);
    Ok(UnicityReport {
        bound,
        seed,
        baseline,
        baseline_passes,
        status: Status::from_bool(baseline_passes && all_detected),
        trials,
        all_detected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coprime_values() {
        let w = coprime_weight(100);
        assert_eq!(w.get(3, 4).unwrap(), real(1.0));
        assert_eq!(w.get(2, 2).unwrap(), real(0.0));
        assert_eq!(w.get(1, 97).unwrap(), real(1.0));
        assert!(matches!(w.get(11, 10), Err(Error::OutsideWeightDomain { .. })));
    }

    #[test]
    fn convolution_matches_named_rings() {
        let (one, id) = (Kernel::one(), Kernel::id());
        let (cw, ow) = (coprime_weight(500), ones(500));
        for m in 1..=500 {
            let unitary: Complex64 = kernel::box_convolve_definitional(&id, &one, m).unwrap();
            assert_eq!(w_convolve(&id, &one, &cw, m).unwrap(), unitary);
            let dirichlet: Complex64 = kernel::dirichlet_convolve(&id, &one, m).unwrap();
            assert_eq!(w_convolve(&id, &one, &ow, m).unwrap(), dirichlet);
        }
        let (a, b) = (4, 9);
        let w = WeightFn::from_fn("probe", 100, |a, b| real((10 * a + b) as f64));
        let ia = Kernel::integer_indicator(a).unwrap();
        let ib = Kernel::integer_indicator(b).unwrap();
        // Only (a,b) and (1,ab), (ab,1) contribute.
        let v = w_convolve(&ia, &ib, &w, a * b).unwrap();
        assert_eq!(v, w.get(a, b).unwrap());
    }

    #[test]
    fn coprime_passes_all() {
        let w = coprime_weight(500);
        for r in check_all(&w, 500).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
        assert!(verify_weight_factorization(&w, 500).unwrap().passed());
    }

    #[test]
    fn ones_weight() {
        let w = ones(100);
        let reports = check_all(&w, 100).unwrap();
        let failed: Vec<Axiom> = reports.iter().filter(|r| !r.passed()).map(|r| r.axiom).collect();
        assert_eq!(failed, vec![Axiom::Distributivity]);
        let d = &reports[4];
        assert_eq!(d.witness.as_ref().unwrap().witness, vec![2, 2, 1]);
        assert!(d.recheck(&w).unwrap());
        assert!(verify_weight_factorization(&w, 100).unwrap().passed());
    }

    #[test]
    fn failing_examples() {
        let w = WeightFn::from_fn("a", 100, |a, _| real(a as f64));
        let r = check_commutativity(&w, 100).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().witness, vec![1, 2]);

        let w = WeightFn::from_fn("sum", 100, |a, b| real((a + b) as f64));
        let r = check_stability(&w, 100).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().witness, vec![1, 1, 1, 1]);

        let parity = WeightFn::from_fn("even", 300, |a, b| real(((a + b) % 2 == 0) as u8 as f64));
        assert!(check_stability(&parity, 300).unwrap().passed());

        let w = coprime_weight(100).with_entry(1, 4, real(0.0)).unwrap();
        let r = check_identity(&w, 100).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().witness, vec![1, 4]);

        let w = WeightFn::from_fn("gcd2", 300, |a, b| real((gcd(a, b) <= 2) as u8 as f64));
        let r = check_associativity(&w, 300).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().witness, vec![2, 2, 4]);
        assert!(r.recheck(&w).unwrap());

        let w = coprime_weight(100).with_entry(2, 2, real(1.0)).unwrap();
        let r = check_distributivity(&w, 100).unwrap();
        assert_eq!(r.witness.as_ref().unwrap().witness, vec![2, 2, 1]);

        let w = coprime_weight(100).with_entry(1, 8, real(0.0)).unwrap();
        assert!(!check_identity(&w, 100).unwrap().passed());
    }

    #[test]
    fn prime_table_weights_factor() {
        let w = weight_from_prime_table("min-table", 400, |p, i, j| {
            if i.min(j) == 0 {
                real(1.0)
            } else {
                Complex64::new(p as f64, i.min(j) as f64)
            }
        });
        for r in [check_stability(&w, 400).unwrap(), verify_weight_factorization(&w, 400).unwrap()] {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn parses_weight_files() {
        let text = "# perturbed\ndefault coprime\nbound 200\n2 2 1\n3 1 0.5,-1\n";
        let w = WeightFn::parse(text, 10).unwrap();
        assert_eq!(w.domain_bound(), 200);
        assert_eq!(w.get(2, 2).unwrap(), real(1.0));
        assert_eq!(w.get(3, 1).unwrap(), Complex64::new(0.5, -1.0));
        assert_eq!(w.get(4, 4).unwrap(), real(0.0));
        assert!(WeightFn::parse("2 2", 10).is_err());
        assert!(WeightFn::parse("default nope", 10).is_err());
        assert!(WeightFn::parse("20 20 1", 10).is_err());
        let w = WeightFn::parse("default ones\n", 50).unwrap();
        assert_eq!(w.get(6, 4).unwrap(), real(1.0));
    }

    #[test]
    fn small_unicity_search() {
        let r = unicity_search(30, 200, 7).unwrap();
        assert!(r.baseline_passes);
        assert!(r.all_detected, "{:?}", r.trials.iter().find(|t| !t.detected));
        let again = unicity_search(30, 200, 7).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }
}
