//! The unitary-convolution ring `(M, box, x)` of multiplicative functions.
//!
//! * [`integer`]: factorization and the arithmetic functions everything else
//!   is built on.
//! * [`kernel`]: multiplicative functions as prime-power kernels, with the
//!   ring operations and a catalog of named functions.
//! * [`expr`]: a text grammar for kernels.
//! * [`weight`]: general weighted convolutions and the axiom checkers that
//!   single out the coprimality weight.
//! * [`characters`]: Dirichlet characters and their idempotence machinery.
//! * [`series`]: truncated Dirichlet series with certified tails and the
//!   identity verifiers.

pub mod characters;
pub mod error;
pub mod expr;
pub mod identities;
pub mod integer;
pub mod kernel;
pub mod random;
pub mod report;
pub mod series;
pub mod weight;

pub use error::{Error, Result};
pub use kernel::{Flags, Growth, Kernel, Rational};
pub use num_complex::Complex64;
