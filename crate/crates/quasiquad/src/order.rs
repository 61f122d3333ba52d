//! Bounded-modulus order computation.
//!
//! Whether `ord(a/M) = n` depends on `a` only through its class modulo
//! `M^(n+1)`, so deciding `ord(a/M) <= N` never needs integers larger than
//! `M^(N+1)`: start from `r_0 = a mod M^(N+1)` and iterate
//! `r_{s+1} = (r_s * ceil(r_s / M)) mod M^(N-s)`; the order is the first `s`
//! with `M | r_s`. Each step shrinks the working modulus by one factor of
//! `M`.
//!
//! When the moduli fit in fixed-width integers the whole loop runs on `u128`
//! (this is the hot kernel behind the scans in [`crate::survey`]); otherwise
//! it falls back to arbitrary precision transparently.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::chi::{order_naive, OrderResult};
use crate::{Error, Result};

/// A validated `ord(a/M) <= N?` query: `gcd(a, M) = 1`, `M >= 2`, `N >= 1`.
#[derive(Debug, Clone)]
pub struct BoundedOrderQuery {
    numerator: BigInt,
    base: u64,
    bound: u32,
}

impl BoundedOrderQuery {
    pub fn new(numerator: BigInt, base: u64, bound: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::invalid(format!("base must be >= 2, got {base}")));
        }
        if bound < 1 {
            return Err(Error::invalid("bound must be >= 1"));
        }
        let residue = numerator
            .mod_floor(&BigInt::from(base))
            .to_u64()
            .expect("residue fits u64");
        if residue.gcd(&base) != 1 {
            return Err(Error::invalid(format!(
                "numerator must be coprime to the base {base}"
            )));
        }
        Ok(Self {
            numerator,
            base,
            bound,
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }
}

/// Decides whether `ord(a/M) <= N`.
///
/// Returns `Finite(k)` with `k <= N` exactly when the order is `k`, and
/// `ExceedsBound(N)` when every iterate up to the bound still has a
/// denominator. Only residues below `M^(N+1)` are ever touched.
pub fn order_bounded(query: &BoundedOrderQuery) -> OrderResult {
    OrderKernel::new(query.base, query.bound)
        .expect("query already validated")
        .order_of(&query.numerator)
}

/// Convenience wrapper validating and running a query in one call.
pub fn order_bounded_of(numerator: impl Into<BigInt>, base: u64, bound: u32) -> Result<OrderResult> {
    Ok(order_bounded(&BoundedOrderQuery::new(
        numerator.into(),
        base,
        bound,
    )?))
}

/// `true` iff the bounded algorithm and the naive oracle classify `a/M`
/// identically up to `bound`. Keep the parameters small: the oracle iterates
/// the map literally.
pub fn order_agreement_check(numerator: &BigInt, base: u64, bound: u32) -> Result<bool> {
    let query = BoundedOrderQuery::new(numerator.clone(), base, bound)?;
    let fast = order_bounded(&query);
    let x = BigRational::new(numerator.clone(), BigInt::from(base));
    let slow = order_naive(&x, bound)?;
    Ok(fast == slow)
}

enum Pows {
    /// `pows[i] = M^i`, with `M^bound <= u64::MAX` so every product of two
    /// reduced residues fits in `u128`.
    Machine(Vec<u128>),
    Big(Vec<BigUint>),
}

/// Reusable order engine for a fixed `(M, N)`; precomputes the modulus
/// ladder once so scans over millions of numerators pay no setup per call.
pub struct OrderKernel {
    base: u64,
    bound: u32,
    pows: Pows,
}

impl OrderKernel {
    pub fn new(base: u64, bound: u32) -> Result<Self> {
        Self::validate(base, bound)?;
        if let Some(pows) = machine_pows(base, bound) {
            return Ok(Self {
                base,
                bound,
                pows: Pows::Machine(pows),
            });
        }
        Self::new_bigint(base, bound)
    }

    /// Arbitrary-precision kernel regardless of operand size. The automatic
    /// constructor prefers fixed-width arithmetic; this one exists for tests
    /// and benchmarks comparing the two paths.
    pub fn new_bigint(base: u64, bound: u32) -> Result<Self> {
        Self::validate(base, bound)?;
        let m = BigUint::from(base);
        let mut pows = Vec::with_capacity(bound as usize + 2);
        let mut p = BigUint::one();
        for _ in 0..=(bound + 1) {
            pows.push(p.clone());
            p *= &m;
        }
        Ok(Self {
            base,
            bound,
            pows: Pows::Big(pows),
        })
    }

    fn validate(base: u64, bound: u32) -> Result<()> {
        if base < 2 {
            return Err(Error::invalid(format!("base must be >= 2, got {base}")));
        }
        if bound < 1 {
            return Err(Error::invalid("bound must be >= 1"));
        }
        Ok(())
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Whether the fixed-width path is active.
    pub fn is_fixed_width(&self) -> bool {
        matches!(self.pows, Pows::Machine(_))
    }

    /// Order of `a/M` for a machine-word numerator with `gcd(a, M) = 1`.
    pub fn order_of_u64(&self, a: u64) -> OrderResult {
        debug_assert_eq!(a.gcd(&self.base), 1, "numerator must be coprime to base");
        match &self.pows {
            Pows::Machine(pows) => {
                let r0 = (a as u128) % pows[self.bound as usize + 1];
                self.run_machine(pows, r0)
            }
            Pows::Big(pows) => {
                let r0 = BigUint::from(a) % &pows[self.bound as usize + 1];
                self.run_big(pows, r0)
            }
        }
    }

    /// Order of `a/M` for an arbitrary (possibly negative) numerator with
    /// `gcd(a, M) = 1`; `a` is first reduced to its least non-negative
    /// residue modulo `M^(N+1)`.
    pub fn order_of(&self, a: &BigInt) -> OrderResult {
        match &self.pows {
            Pows::Machine(pows) => {
                let modulus = BigInt::from(pows[self.bound as usize + 1]);
                let r0 = a
                    .mod_floor(&modulus)
                    .to_u128()
                    .expect("canonical residue below a u128 modulus");
                self.run_machine(pows, r0)
            }
            Pows::Big(pows) => {
                let modulus = BigInt::from(pows[self.bound as usize + 1].clone());
                let r0 = a
                    .mod_floor(&modulus)
                    .to_biguint()
                    .expect("canonical residue is non-negative");
                self.run_big(pows, r0)
            }
        }
    }

    fn run_machine(&self, pows: &[u128], mut r: u128) -> OrderResult {
        let m = self.base as u128;
        for s in 0..=self.bound {
            debug_assert!(r < pows[(self.bound + 1 - s) as usize]);
            if r % m == 0 {
                return OrderResult::Finite(s);
            }
            if s == self.bound {
                break;
            }
            let target = pows[(self.bound - s) as usize];
            let c = r / m + 1;
            r = ((r % target) * (c % target)) % target;
        }
        OrderResult::ExceedsBound(self.bound)
    }

    fn run_big(&self, pows: &[BigUint], mut r: BigUint) -> OrderResult {
        for s in 0..=self.bound {
            debug_assert!(r < pows[(self.bound + 1 - s) as usize]);
            if (&r % self.base).is_zero() {
                return OrderResult::Finite(s);
            }
            if s == self.bound {
                break;
            }
            let target = &pows[(self.bound - s) as usize];
            let c = &r / self.base + 1u32;
            r = ((r % target) * (c % target)) % target;
        }
        OrderResult::ExceedsBound(self.bound)
    }
}

/// Power ladder `M^0..=M^(N+1)` in `u128`, provided `M^N` also fits `u64`
/// (which keeps every reduced product inside `u128`). `None` when too large.
fn machine_pows(base: u64, bound: u32) -> Option<Vec<u128>> {
    let mut pows = Vec::with_capacity(bound as usize + 2);
    let mut p: u128 = 1;
    for _ in 0..=(bound + 1) {
        pows.push(p);
        p = p.checked_mul(base as u128)?;
    }
    if pows[bound as usize] <= u64::MAX as u128 {
        Some(pows)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ord(a: i64, m: u64, n: u32) -> OrderResult {
        order_bounded_of(a, m, n).unwrap()
    }

    #[test]
    fn published_examples() {
        assert_eq!(ord(28, 3, 25), OrderResult::Finite(22));
        assert_eq!(ord(7, 3, 5), OrderResult::Finite(1));
        assert_eq!(ord(1025, 2, 15), OrderResult::Finite(10));
        assert_eq!(ord(1, 3, 8), OrderResult::ExceedsBound(8));
    }

    #[test]
    fn rejects_invalid_queries() {
        assert!(BoundedOrderQuery::new(BigInt::from(6), 3, 5).is_err());
        assert!(BoundedOrderQuery::new(BigInt::from(5), 1, 5).is_err());
        assert!(BoundedOrderQuery::new(BigInt::from(5), 0, 5).is_err());
        assert!(BoundedOrderQuery::new(BigInt::from(5), 3, 0).is_err());
        // negative numerators are fine as long as they are coprime
        assert!(BoundedOrderQuery::new(BigInt::from(-5), 3, 5).is_ok());
    }

    #[test]
    fn agreement_with_naive_oracle_exhaustive() {
        for m in 2..=10u64 {
            let top = m.pow(4);
            for a in 1..=top {
                if a.gcd(&m) != 1 {
                    continue;
                }
                assert!(
                    order_agreement_check(&BigInt::from(a), m, 3).unwrap(),
                    "disagreement at a={a}, M={m}"
                );
            }
        }
    }

    #[test]
    fn agreement_examples() {
        assert!(order_agreement_check(&BigInt::from(17), 2, 6).unwrap());
        assert!(order_agreement_check(&BigInt::from(5), 4, 4).unwrap());
    }

    #[test]
    fn machine_and_bigint_paths_agree() {
        let auto = OrderKernel::new(3, 12).unwrap();
        let big = OrderKernel::new_bigint(3, 12).unwrap();
        assert!(auto.is_fixed_width());
        assert!(!big.is_fixed_width());
        for a in (1..5000u64).filter(|a| a % 3 != 0) {
            assert_eq!(auto.order_of_u64(a), big.order_of_u64(a), "a={a}");
        }
    }

    #[test]
    fn large_bound_falls_back_to_bigint() {
        // 2^200 does not fit u128: construction must still work.
        let kernel = OrderKernel::new(2, 200).unwrap();
        assert!(!kernel.is_fixed_width());
        // 2^100 + 1 has order 100.
        let a = (BigInt::one() << 100) + 1;
        assert_eq!(kernel.order_of(&a), OrderResult::Finite(100));
    }

    #[test]
    fn negative_numerators_reduce_canonically() {
        // -2 = 7 mod 9: both classes have order 1 over base 3.
        assert_eq!(ord(-2, 3, 5), ord(7, 3, 5));
    }

    proptest! {
        #[test]
        fn residue_determinism(a in 1u64..4000, t in -50i64..50, m in 2u64..8, n in 1u32..5) {
            prop_assume!(a.gcd(&m) == 1);
            let shift = BigInt::from(m).pow(n + 1) * BigInt::from(t);
            let base_case = order_bounded_of(a as i64, m, n).unwrap();
            let shifted = order_bounded(
                &BoundedOrderQuery::new(BigInt::from(a) + shift, m, n).unwrap(),
            );
            prop_assert_eq!(base_case, shifted);
        }

        #[test]
        fn monotone_in_bound(a in 1u64..20_000, m in 2u64..10, n in 1u32..8) {
            prop_assume!(a.gcd(&m) == 1);
            if let OrderResult::Finite(k) = order_bounded_of(a as i64, m, n).unwrap() {
                for extra in [0u32, 1, 3, 7] {
                    let wider = order_bounded_of(a as i64, m, k.max(1) + extra).unwrap();
                    prop_assert_eq!(wider, OrderResult::Finite(k));
                }
            }
        }
    }
}
