//! Exact counting of order-`n` congruence classes and the probabilities
//! built from those counts.
//!
//! `A(n, M)` counts the congruence classes modulo `M^(n+1)` formed by the
//! numerators `a` coprime to `M` with `ord(a/M) = n`. It obeys
//!
//! ```text
//! A(n, M) = phi(M) * sum over d | M of A(n-1, d) * (M/d)^(n-1)
//! ```
//!
//! with `A(0, 1) = 1`, `A(n, 1) = 0` for `n >= 1`, and `A(0, M) = 0` for
//! `M > 1`. For prime powers there is the closed form
//! `A(n, p^k) = C(n+k-2, n-1) * phi(p^k)^n`. Everything in this module is an
//! exact integer or rational; no floating point appears in any value.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Euler's totient by trial-division factorization.
pub fn totient(m: u64) -> u64 {
    assert!(m >= 1, "totient is defined for positive integers");
    let mut result = m;
    for (p, _) in factorize(m) {
        result -= result / p;
    }
    result
}

/// `phi(m^exp)` as an exact big integer, using `phi(m^(k+1)) = m^k * phi(m)`.
pub fn totient_power(m: u64, exp: u32) -> BigUint {
    assert!(m >= 1 && exp >= 1);
    BigUint::from(m).pow(exp - 1) * BigUint::from(totient(m))
}

/// Sorted list of all positive divisors of `m`.
pub fn divisors(m: u64) -> Vec<u64> {
    assert!(m >= 1);
    let mut ds = vec![1u64];
    for (p, e) in factorize(m) {
        let snapshot = ds.clone();
        let mut pe = 1u64;
        for _ in 0..e {
            pe *= p;
            ds.extend(snapshot.iter().map(|d| d * pe));
        }
    }
    ds.sort_unstable();
    ds
}

/// Prime factorization `m = prod p^e` by trial division, smallest prime first.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Deterministic primality by trial division; fine for the word-sized bases
/// used here.
pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Binomial coefficient by the multiplicative formula, exact.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * BigUint::from(n - k + i) / BigUint::from(i);
    }
    acc
}

/// Memo table for `A(n, M)` over the divisor lattice.
#[derive(Debug, Default)]
pub struct CountTable {
    memo: HashMap<(u32, u64), BigUint>,
}

impl CountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `A(n, M)`, memoized.
    pub fn count(&mut self, n: u32, m: u64) -> BigUint {
        assert!(m >= 1);
        if m == 1 {
            return if n == 0 { BigUint::one() } else { BigUint::zero() };
        }
        if n == 0 {
            return BigUint::zero();
        }
        if let Some(hit) = self.memo.get(&(n, m)) {
            return hit.clone();
        }
        let mut sum = BigUint::zero();
        for d in divisors(m) {
            let sub = self.count(n - 1, d);
            if sub.is_zero() {
                continue;
            }
            sum += sub * BigUint::from(m / d).pow(n - 1);
        }
        let value = sum * BigUint::from(totient(m));
        self.memo.insert((n, m), value.clone());
        value
    }
}

/// `A(n, M)` through a fresh memo table. Use [`CountTable`] directly when
/// evaluating many entries.
pub fn count_a(n: u32, m: u64) -> BigUint {
    CountTable::new().count(n, m)
}

/// Closed form `A(n, p^k) = C(n+k-2, n-1) * phi(p^k)^n` for prime `p`.
pub fn count_a_prime_power(n: u32, p: u64, k: u32) -> Result<BigUint> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if k < 1 || n < 1 {
        return Err(Error::invalid("need k >= 1 and n >= 1"));
    }
    let phi = totient_power(p, k);
    Ok(binomial(n as u64 + k as u64 - 2, n as u64 - 1) * phi.pow(n))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Partial sum `S_N = sum_{n=0..=N} A(n, M) / phi(M^(n+1))` of the
/// finite-order probability series, as an exact rational.
///
/// The full series sums to 1 for every `M`; each `S_N` is strictly below 1
/// while classes keep appearing.
pub fn series_partial_sum(m: u64, terms: u32) -> BigRational {
    assert!(m >= 1);
    let mut table = CountTable::new();
    let mut sum = BigRational::zero();
    for n in 0..=terms {
        let a = table.count(n, m);
        if a.is_zero() {
            continue;
        }
        sum += ratio(a, totient_power(m, n + 1));
    }
    sum
}

/// Probability that the random divisor process started at `M` first reaches
/// 1 after exactly `n` halvings:
/// `P(n, M) = sum over d | M of phi(d)/M * P(n-1, d)`, with `P(0, 1) = 1`
/// and `P(0, M) = 0` for `M > 1`.
///
/// Once at 1 the process has ended, so `P(n, 1) = 0` for `n >= 1`; with that
/// reading `P(n, M) * phi(M^(n+1)) = A(n, M)` holds for every `n` and `M`.
pub fn random_process_prob(n: u32, m: u64) -> BigRational {
    assert!(m >= 1);
    fn go(memo: &mut HashMap<(u32, u64), BigRational>, n: u32, m: u64) -> BigRational {
        if m == 1 {
            return if n == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            };
        }
        if n == 0 {
            return BigRational::zero();
        }
        if let Some(hit) = memo.get(&(n, m)) {
            return hit.clone();
        }
        let mut sum = BigRational::zero();
        for d in divisors(m) {
            let sub = go(memo, n - 1, d);
            if sub.is_zero() {
                continue;
            }
            sum += sub * ratio(totient(d).into(), m.into());
        }
        memo.insert((n, m), sum.clone());
        sum
    }
    go(&mut HashMap::new(), n, m)
}

/// Asymptotic density `A(n, M) / M^(n+1)` of order-`n` numerators among all
/// integers, as an exact rational.
pub fn class_density(n: u32, m: u64) -> BigRational {
    assert!(m >= 1);
    ratio(count_a(n, m), BigUint::from(m).pow(n + 1))
}
