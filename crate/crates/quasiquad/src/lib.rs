//! Exact dynamics of the quasi-quadratic map `x -> x*ceil(x)` on the rationals.
//!
//! The crate is organised around one question: starting from a reduced
//! fraction `a/M`, how many applications of the map does it take to reach an
//! integer? That count is the *order* of the fraction. Everything here is
//! exact integer / rational arithmetic — no floating point is involved in any
//! result.
//!
//! Modules:
//! - [`chi`]: the map itself, orbits, and a naive order computation used as a
//!   ground-truth oracle.
//! - [`order`]: the bounded-modulus order algorithm, the workhorse for scans —
//!   it decides `ord(a/M) <= N` touching only residues modulo powers of `M`.
//! - [`classes`]: constructive enumeration of the congruence classes of
//!   order-`n` numerators (quadratic congruences, Hensel lifting, CRT),
//!   denominator-chain witnesses, and the covering-gap construction.
//! - [`counting`]: exact class counts `A(n, M)`, the prime-power closed form,
//!   finite-order probability series and the random divisor process.
//! - [`survey`]: range scans over numerators (smallest numerator per order,
//!   empirical densities, order-`n` family checks). Data-parallel when the
//!   `parallel` feature (default) is enabled.
//! - [`padic`]: truncated p-adic arithmetic, the p-adic variant of the map,
//!   and finite-level enumeration of the sets that keep a fixed denominator.

pub mod chi;
pub mod classes;
pub mod counting;
pub mod order;
pub mod padic;
pub mod survey;

pub use chi::OrderResult;
pub use classes::ResidueClassSet;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Errors shared by all modules of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on the arguments does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The request is well-formed but would exceed a configured resource cap.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    /// An iterate grew past the configured decimal-digit limit.
    #[error("digit limit exceeded: an iterate grew past ~{limit} decimal digits")]
    DigitLimit { limit: u64 },
    /// Not enough p-adic digits are known to produce the requested result.
    #[error("p-adic precision exhausted: {0}")]
    PrecisionExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::ResourceCap(msg.into())
    }
}
