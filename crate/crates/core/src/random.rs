//! Seeded random kernels for property checks.
//!
//! A kernel's value at `p^e` is drawn from a ChaCha stream keyed by
//! `(seed, p, e)`, so values are reproducible and independent of the order
//! in which prime powers are visited.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kernel::{Flags, Growth, Kernel, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Integers in `-3..=3` at every prime power, exact.
    Integer,
    /// Reals in `[-1, 1]`.
    Real,
    /// Complex values in the closed unit disk.
    Complex,
    /// `F(p^e) = F(p)^e` with `F(p)` in the closed unit disk.
    CompletelyMultiplicative,
}

fn stream(seed: u64, p: u64, e: u32, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&p.to_le_bytes());
    key[16..24].copy_from_slice(&(e as u64).to_le_bytes());
    key[24..].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn unit_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, theta)
}

pub fn kernel(family: Family, seed: u64) -> Kernel {
    let tag = family as u64;
    match family {
        Family::Integer => Kernel::from_exact_rule(
            format!("rand_int#{seed}"),
            Flags::new(false, true, true),
            Growth::new(0.0, 3.0),
            move |p, e| Rational::from_integer(stream(seed, p, e, tag).random_range(-3..=3)),
        ),
        Family::Real => Kernel::from_rule(
            format!("rand_real#{seed}"),
            Flags::new(false, true, false),
            Growth::new(0.0, 1.0),
            move |p, e| Complex64::new(stream(seed, p, e, tag).random_range(-1.0..=1.0), 0.0),
        ),
        Family::Complex => Kernel::from_rule(
            format!("rand_complex#{seed}"),
            Flags::new(false, false, false),
            Growth::new(0.0, 1.0),
            move |p, e| unit_disk(&mut stream(seed, p, e, tag)),
        ),
        Family::CompletelyMultiplicative => Kernel::from_rule(
            format!("rand_cm#{seed}"),
            Flags::new(true, false, false),
            Growth::new(0.0, 1.0),
            move |p, e| unit_disk(&mut stream(seed, p, 1, tag)).powu(e),
        ),
    }
}

/// A random scalar in the square `[-2, 2] x [-2, 2]`.
pub fn scalar(seed: u64) -> Complex64 {
    let mut rng = stream(seed, 0, 0, 99);
    Complex64::new(rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0))
}
