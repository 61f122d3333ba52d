//! Constructive enumeration of the congruence classes of order-`n`
//! numerators.
//!
//! For `M >= 2` the numerators of order 1 are exactly `a = -r mod M^2` with
//! `1 <= r <= M-1` coprime to `M`. Higher orders are built by inverting one
//! map step: a numerator `a` of order `n` determines (and is determined by)
//! the pair "class of its image at order `n-1`" plus "residue of `a` mod
//! `M`". Undoing that step solves the quadratic congruence
//!
//! ```text
//! (M^2/d) k^2 + (c - M) k = r  (mod M^(n-1) d)
//! ```
//!
//! prime power by prime power — the quadratic coefficient vanishes mod `p`,
//! so each factor has a unique solution found by a linear solve mod `p`
//! followed by digit-by-digit Hensel lifting — and glues the pieces with the
//! Chinese Remainder Theorem. The same machinery produces witnesses for
//! prescribed denominator chains and the covering-gap construction.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::chi::chi;
use crate::counting::{self, CountTable};
use crate::{Error, Result};

/// Upper bound on class counts accepted by [`ClassEnumerator::new`]; the
/// number of classes grows exponentially with the level.
pub const DEFAULT_CLASS_CAP: u64 = 1_000_000;

/// Highest level accepted by [`covering_gap_demo`]; the greedy selection
/// sieves an array of size `3^(n_max+1)`.
pub const COVERING_DEMO_MAX_LEVEL: u32 = 15;

/// A complete set of congruence classes at one level: the canonical residues
/// modulo `base^(level+1)` of the numerators `a` with `ord(a/base) = level`
/// (or, for the p-adic sets, of the points that keep their denominator for
/// `level` steps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueClassSet {
    base: u64,
    level: u32,
    modulus: BigUint,
    residues: Vec<BigUint>,
}

impl ResidueClassSet {
    pub(crate) fn from_sorted(
        base: u64,
        level: u32,
        modulus: BigUint,
        residues: Vec<BigUint>,
    ) -> Self {
        debug_assert!(residues.windows(2).all(|w| w[0] < w[1]), "must be sorted");
        debug_assert!(residues.iter().all(|r| *r < modulus));
        debug_assert!(residues
            .iter()
            .all(|r| r.gcd(&BigUint::from(base)).is_one()));
        Self {
            base,
            level,
            modulus,
            residues,
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// Sorted canonical residues in `[0, modulus)`.
    pub fn residues(&self) -> &[BigUint] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Membership of an arbitrary integer, reduced canonically first.
    pub fn contains(&self, a: &BigInt) -> bool {
        let r = a
            .mod_floor(&BigInt::from(self.modulus.clone()))
            .to_biguint()
            .expect("canonical residue is non-negative");
        self.residues.binary_search(&r).is_ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigUint> {
        self.residues.iter()
    }
}

/// The order-1 classes: `{M^2 - r : 1 <= r <= M-1, gcd(r, M) = 1}` modulo
/// `M^2`.
pub fn base_classes(m: u64) -> Result<ResidueClassSet> {
    if m < 2 {
        return Err(Error::invalid(format!("base must be >= 2, got {m}")));
    }
    let m_sq = BigUint::from(m) * m;
    let residues: Vec<BigUint> = (1..m)
        .rev()
        .filter(|r| r.gcd(&m) == 1)
        .map(|r| &m_sq - r)
        .collect();
    Ok(ResidueClassSet::from_sorted(m, 1, m_sq, residues))
}

/// Extended-Euclid inverse of `a` modulo `p` (word-sized, `p` prime).
fn mod_inverse_u64(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(p as i128) as u64)
}

fn mod_inverse_big(a: &BigUint, modulus: &BigUint) -> BigUint {
    let eg = BigInt::from(a.clone()).extended_gcd(&BigInt::from(modulus.clone()));
    debug_assert!(eg.gcd.is_one(), "operand not invertible");
    eg.x.mod_floor(&BigInt::from(modulus.clone()))
        .to_biguint()
        .expect("canonical residue is non-negative")
}

/// Combined residue for pairwise-coprime moduli, canonical in `[0, prod)`.
fn crt_combine(parts: &[(BigUint, BigUint)]) -> BigUint {
    let mut x = BigUint::zero();
    let mut m = BigUint::one();
    for (r, mi) in parts {
        let xi = &x % mi;
        let diff = (r % mi + mi - xi) % mi;
        let t = diff * mod_inverse_big(&(&m % mi), mi) % mi;
        x += &m * t;
        m *= mi;
    }
    x
}

/// Unique `k` modulo `p^exp` with `quad*k^2 + lin*k = target (mod p^exp)`.
///
/// Requires `quad = 0 (mod p)` and `lin != 0 (mod p)`: the congruence then
/// reduces to a linear one modulo `p` and lifts uniquely digit by digit,
/// because the derivative `2*quad*k + lin` stays a unit. The quadratic
/// formula does not apply here — the leading coefficient is not invertible.
pub fn solve_quadratic_congruence(
    quad: &BigUint,
    lin: &BigInt,
    target: &BigUint,
    p: u64,
    exp: u32,
) -> Result<BigUint> {
    if !counting::is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if exp < 1 {
        return Err(Error::invalid("exponent must be >= 1"));
    }
    let modulus = BigUint::from(p).pow(exp);
    let a = quad % &modulus;
    let b = lin
        .mod_floor(&BigInt::from(modulus.clone()))
        .to_biguint()
        .expect("canonical residue is non-negative");
    let r = target % &modulus;
    if !(&a % p).is_zero() {
        return Err(Error::invalid(
            "quadratic coefficient must be divisible by p",
        ));
    }
    let b_mod_p = (&b % p).to_u64().expect("residue fits u64");
    if b_mod_p == 0 {
        return Err(Error::invalid("linear coefficient must be a unit mod p"));
    }
    let b_inv = mod_inverse_u64(b_mod_p, p).expect("unit mod a prime");

    // Linear solve mod p, then one digit per lift.
    let r_mod_p = (&r % p).to_u64().expect("residue fits u64");
    let mut k = BigUint::from((r_mod_p as u128 * b_inv as u128 % p as u128) as u64);
    let mut pe = BigUint::from(p);
    for _ in 1..exp {
        let pe_next = &pe * p;
        let value = (&a * &k * &k + &b * &k) % &pe_next;
        let diff = (&value + &pe_next - target % &pe_next) % &pe_next;
        debug_assert!((&diff % &pe).is_zero(), "previous digit must already fit");
        let t = (&diff / &pe % p).to_u64().expect("digit fits u64");
        let delta = ((p - t) % p) as u128 * b_inv as u128 % p as u128;
        k += &pe * delta as u64;
        pe = pe_next;
    }
    debug_assert_eq!((&a * &k * &k + &b * &k) % &modulus, &r % &modulus);
    Ok(k)
}

/// One inverse step of the map at the class level: which order-`n` numerator
/// class maps onto a given order-`(n-1)` target class with a prescribed
/// residue mod `M`?
#[derive(Debug, Clone)]
pub struct PreimageQuery {
    target: BigUint,
    divisor: u64,
    unit: u64,
    base: u64,
    level: u32,
}

impl PreimageQuery {
    /// `target` is a lift of an order-`(n-1)` residue over denominator
    /// `divisor` into `[1, base^(level-1)*divisor)`; `unit` is the wanted
    /// residue of the preimage modulo `base`.
    pub fn new(target: BigUint, divisor: u64, unit: u64, base: u64, level: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::invalid("base must be >= 2"));
        }
        if divisor < 2 || base % divisor != 0 {
            return Err(Error::invalid(format!(
                "divisor must satisfy 1 < d and d | {base}, got {divisor}"
            )));
        }
        if level < 2 {
            return Err(Error::invalid("level must be >= 2"));
        }
        if unit == 0 || unit >= base || unit.gcd(&base) != 1 {
            return Err(Error::invalid(format!(
                "unit must lie in [1, {base}) and be coprime to {base}, got {unit}"
            )));
        }
        if target.is_zero() || target >= BigUint::from(base).pow(level - 1) * divisor {
            return Err(Error::invalid(
                "target residue out of range [1, base^(level-1)*divisor)",
            ));
        }
        let t_mod_d = (&target % divisor).to_u64().expect("residue fits u64");
        if t_mod_d.gcd(&divisor) != 1 {
            return Err(Error::invalid(
                "target residue must be coprime to the divisor",
            ));
        }
        Ok(Self {
            target,
            divisor,
            unit,
            base,
            level,
        })
    }

    pub fn target(&self) -> &BigUint {
        &self.target
    }

    pub fn divisor(&self) -> u64 {
        self.divisor
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }
}

/// The unique `a` in `[1, M^(n+1))` whose map image lies in the target class
/// and whose residue mod `M` is the requested unit.
///
/// Solves the quadratic congruence prime power by prime power, CRT-combines
/// the unique solutions into `k`, and returns `a = (M^2/d)k - M + c`.
pub fn invert_phi(query: &PreimageQuery) -> Result<BigUint> {
    let m = query.base;
    let d = query.divisor;
    let n = query.level;
    let quad = BigUint::from(m) * (m / d);
    let lin = BigInt::from(query.unit) - BigInt::from(m);

    let d_exponents: HashMap<u64, u32> = counting::factorize(d).into_iter().collect();
    let mut parts = Vec::new();
    for (p, e) in counting::factorize(m) {
        let t = (n - 1) * e + d_exponents.get(&p).copied().unwrap_or(0);
        let solution = solve_quadratic_congruence(&quad, &lin, &query.target, p, t)?;
        parts.push((solution, BigUint::from(p).pow(t)));
    }
    let k = crt_combine(&parts);
    debug_assert!(!k.is_zero());
    debug_assert!(k < BigUint::from(m).pow(n - 1) * d);

    let a = quad * k + query.unit - m;
    debug_assert!(a < BigUint::from(m).pow(n + 1));
    Ok(a)
}

/// Memoizing enumerator for the class sets; sub-level sets over the divisor
/// lattice are computed once and shared.
#[derive(Debug)]
pub struct ClassEnumerator {
    class_cap: u64,
    memo: HashMap<(u32, u64), Arc<ResidueClassSet>>,
    counts: CountTable,
}

impl Default for ClassEnumerator {
    fn default() -> Self {
        Self::new()
    }
}

impl ClassEnumerator {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_CLASS_CAP)
    }

    pub fn with_cap(class_cap: u64) -> Self {
        Self {
            class_cap,
            memo: HashMap::new(),
            counts: CountTable::new(),
        }
    }

    /// The complete sorted class set at level `n` over base `m`.
    ///
    /// Level 1 is the closed-form base case; deeper levels lift every
    /// order-`(n-1)` representative over every divisor `d > 1` of `m` into
    /// `[1, m^(n-1) d)` and run one [`invert_phi`] per (lift, unit) pair.
    pub fn enumerate(&mut self, n: u32, m: u64) -> Result<Arc<ResidueClassSet>> {
        if m < 2 {
            return Err(Error::invalid(format!("base must be >= 2, got {m}")));
        }
        if n < 1 {
            return Err(Error::invalid("level must be >= 1"));
        }
        if let Some(hit) = self.memo.get(&(n, m)) {
            return Ok(hit.clone());
        }
        let expected = self.counts.count(n, m);
        if expected > BigUint::from(self.class_cap) {
            return Err(Error::cap(format!(
                "enumerating {expected} classes at level {n} over base {m} \
                 exceeds the cap of {}",
                self.class_cap
            )));
        }
        let set = if n == 1 {
            base_classes(m)?
        } else {
            let units: Vec<u64> = (1..m).filter(|c| c.gcd(&m) == 1).collect();
            let mut pairs: Vec<(BigUint, u64, u64)> = Vec::new();
            for d in counting::divisors(m) {
                if d == 1 {
                    continue;
                }
                let sub = self.enumerate(n - 1, d)?;
                let period = BigUint::from(d).pow(n);
                let top = BigUint::from(m).pow(n - 1) * d;
                for rep in sub.residues() {
                    let mut lift = rep.clone();
                    while lift < top {
                        for &c in &units {
                            pairs.push((lift.clone(), d, c));
                        }
                        lift += &period;
                    }
                }
            }
            let mut residues = solve_pairs(pairs, m, n)?;
            residues.sort_unstable();
            debug_assert_eq!(BigUint::from(residues.len() as u64), expected);
            ResidueClassSet::from_sorted(m, n, BigUint::from(m).pow(n + 1), residues)
        };
        let arc = Arc::new(set);
        self.memo.insert((n, m), arc.clone());
        Ok(arc)
    }
}

#[cfg(feature = "parallel")]
fn solve_pairs(pairs: Vec<(BigUint, u64, u64)>, m: u64, n: u32) -> Result<Vec<BigUint>> {
    pairs
        .into_par_iter()
        .map(|(target, d, c)| invert_phi(&PreimageQuery::new(target, d, c, m, n)?))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_pairs(pairs: Vec<(BigUint, u64, u64)>, m: u64, n: u32) -> Result<Vec<BigUint>> {
    pairs
        .into_iter()
        .map(|(target, d, c)| invert_phi(&PreimageQuery::new(target, d, c, m, n)?))
        .collect()
}

/// One-shot enumeration with the default cap; see [`ClassEnumerator`].
pub fn enumerate_classes(n: u32, m: u64) -> Result<ResidueClassSet> {
    let arc = ClassEnumerator::new().enumerate(n, m)?;
    Ok(Arc::try_unwrap(arc).unwrap_or_else(|a| (*a).clone()))
}

/// A rational whose orbit realizes a prescribed denominator chain.
///
/// Given `q_0 >= 2` and `q_{j+1} | q_j`, returns `x = p/q_0` such that the
/// `j`-th iterate has denominator exactly `q_j` for every `j`. Works
/// backwards: the requirement at each level is one congruence class for the
/// numerator, and each inverse step solves the same quadratic congruence as
/// [`invert_phi`] with unit residue 1, widening the class modulus by one
/// factor. The result is re-verified against the actual orbit before being
/// returned.
pub fn chain_witness(chain: &[u64]) -> Result<BigRational> {
    if chain.is_empty() {
        return Err(Error::invalid("chain must be non-empty"));
    }
    if chain[0] < 2 {
        return Err(Error::invalid("chain must start at a denominator >= 2"));
    }
    for w in chain.windows(2) {
        if w[1] == 0 || w[0] % w[1] != 0 {
            return Err(Error::invalid(format!(
                "{} does not divide {}: not a denominator chain",
                w[1], w[0]
            )));
        }
    }

    let deepest = chain
        .iter()
        .rposition(|&q| q >= 2)
        .expect("first entry is >= 2");
    // Class requirement (residue mod q^exp) at the deepest non-trivial level:
    // "order exactly 1" when the chain ends in integers, else just coprimality.
    let (mut residue, mut exp): (BigUint, u32) = if deepest < chain.len() - 1 {
        (BigUint::from(chain[deepest]) * chain[deepest] - 1u32, 2)
    } else {
        (BigUint::one(), 1)
    };

    for j in (0..deepest).rev() {
        let m = chain[j];
        let d = chain[j + 1];
        let quad = BigUint::from(m) * (m / d);
        let lin = BigInt::one() - BigInt::from(m);
        let mut parts = Vec::new();
        for (p, e) in counting::factorize(d) {
            let t = e * exp;
            let solution = solve_quadratic_congruence(&quad, &lin, &residue, p, t)?;
            parts.push((solution, BigUint::from(p).pow(t)));
        }
        let k = crt_combine(&parts);
        debug_assert!(!k.is_zero());
        residue = quad * k + 1u32 - m;
        exp += 1;
    }

    let witness = BigRational::new(BigInt::from(residue), BigInt::from(chain[0]));
    let mut x = witness.clone();
    for (j, &q) in chain.iter().enumerate() {
        if j > 0 {
            x = chi(&x);
        }
        assert_eq!(
            x.denom(),
            &BigInt::from(q),
            "chain witness verification failed at step {j}"
        );
    }
    Ok(witness)
}

/// One level of the covering-gap construction over base 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringLevel {
    pub level: u32,
    pub modulus: u64,
    pub residues: Vec<u64>,
}

/// Greedily selects, for each level `n <= n_max`, `2^n` residues in
/// `[1, 3^(n+1)]` whose classes are pairwise disjoint across all levels and
/// avoid every number `1 + 3^j`.
///
/// The chosen class densities sum to `1 - (2/3)^(n_max+1)`, arbitrarily close
/// to 1, yet the union misses an infinite set: densities alone cannot decide
/// whether a family of classes covers everything.
pub fn covering_gap_demo(n_max: u32) -> Result<Vec<CoveringLevel>> {
    if n_max > COVERING_DEMO_MAX_LEVEL {
        return Err(Error::cap(format!(
            "covering demo sieves 3^(n_max+1) slots; n_max {n_max} exceeds {COVERING_DEMO_MAX_LEVEL}"
        )));
    }
    let mut levels: Vec<CoveringLevel> = Vec::new();
    for n in 0..=n_max {
        let modulus = 3u64.pow(n + 1);
        // Slots already taken by classes picked at coarser levels.
        let mut used = vec![false; modulus as usize + 1];
        for earlier in &levels {
            let r = earlier.modulus;
            for &x in &earlier.residues {
                let mut v = x % r;
                if v == 0 {
                    v = r;
                }
                while v <= modulus {
                    used[v as usize] = true;
                    v += r;
                }
            }
        }
        // Classes through 1 + 3^j (j <= n) or through 1 itself would hit the
        // avoided set at some scale.
        let mut forbidden: Vec<u64> = (0..=n).map(|j| (1 + 3u64.pow(j)) % modulus).collect();
        forbidden.push(1 % modulus);

        let want = 1usize << n;
        let mut picks = Vec::with_capacity(want);
        for x in 1..=modulus {
            if picks.len() == want {
                break;
            }
            if used[x as usize] || forbidden.contains(&(x % modulus)) {
                continue;
            }
            picks.push(x);
        }
        assert_eq!(picks.len(), want, "selection is always feasible");
        levels.push(CoveringLevel {
            level: n,
            modulus,
            residues: picks,
        });
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chi::rational;
    use crate::order::order_bounded_of;
    use crate::OrderResult;

    fn set_of(values: &[u64]) -> Vec<BigUint> {
        values.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn base_class_examples() {
        let c3 = base_classes(3).unwrap();
        assert_eq!(c3.residues(), &set_of(&[7, 8])[..]);
        assert_eq!(c3.modulus(), &BigUint::from(9u32));

        let c5 = base_classes(5).unwrap();
        assert_eq!(c5.residues(), &set_of(&[21, 22, 23, 24])[..]);

        let c2 = base_classes(2).unwrap();
        assert_eq!(c2.residues(), &set_of(&[3])[..]);
        assert!(base_classes(1).is_err());
    }

    /// Brute-force oracle: all k in [0, modulus) with a*k^2 + b*k = r.
    fn quad_solutions(a: i64, b: i64, r: i64, modulus: i64) -> Vec<i64> {
        (0..modulus)
            .filter(|k| (a * k * k + b * k - r).rem_euclid(modulus) == 0)
            .collect()
    }

    #[test]
    fn quadratic_solver_matches_brute_force() {
        assert_eq!(quad_solutions(3, -2, 7, 9), vec![7]);
        let k = solve_quadratic_congruence(
            &BigUint::from(3u32),
            &BigInt::from(-2),
            &BigUint::from(7u32),
            3,
            2,
        )
        .unwrap();
        assert_eq!(k, BigUint::from(7u32));

        assert_eq!(quad_solutions(3, -1, 7, 9), vec![5]);
        let k = solve_quadratic_congruence(
            &BigUint::from(3u32),
            &BigInt::from(-1),
            &BigUint::from(7u32),
            3,
            2,
        )
        .unwrap();
        assert_eq!(k, BigUint::from(5u32));

        // Deeper lift against the oracle.
        for t in 1..=6u32 {
            let modulus = 3i64.pow(t);
            let expect = quad_solutions(6, 2, 5, modulus);
            let got = solve_quadratic_congruence(
                &BigUint::from(6u32),
                &BigInt::from(2),
                &BigUint::from(5u32),
                3,
                t,
            )
            .unwrap();
            assert_eq!(expect, vec![got.to_u64().unwrap() as i64], "t={t}");
        }
    }

    #[test]
    fn quadratic_solver_rejects_bad_coefficients() {
        // quadratic coefficient not divisible by p
        assert!(solve_quadratic_congruence(
            &BigUint::from(2u32),
            &BigInt::from(-2),
            &BigUint::from(7u32),
            3,
            2
        )
        .is_err());
        // linear coefficient divisible by p
        assert!(solve_quadratic_congruence(
            &BigUint::from(3u32),
            &BigInt::from(-3),
            &BigUint::from(7u32),
            3,
            2
        )
        .is_err());
        // composite modulus base
        assert!(solve_quadratic_congruence(
            &BigUint::from(6u32),
            &BigInt::from(-1),
            &BigUint::from(5u32),
            6,
            2
        )
        .is_err());
    }

    #[test]
    fn preimage_query_enforces_coprimality() {
        // gcd(target, divisor) != 1 must be rejected upstream of the solver.
        assert!(PreimageQuery::new(BigUint::from(3u32), 3, 1, 3, 2).is_err());
        assert!(PreimageQuery::new(BigUint::zero(), 3, 1, 3, 2).is_err());
        assert!(PreimageQuery::new(BigUint::from(7u32), 3, 3, 3, 2).is_err());
        assert!(PreimageQuery::new(BigUint::from(7u32), 2, 1, 3, 2).is_err());
        assert!(PreimageQuery::new(BigUint::from(7u32), 3, 1, 3, 1).is_err());
    }

    #[test]
    fn invert_phi_worked_examples() {
        let a = |r: u64, c: u64| {
            invert_phi(&PreimageQuery::new(BigUint::from(r), 3, c, 3, 2).unwrap()).unwrap()
        };
        assert_eq!(a(7, 1), BigUint::from(19u32));
        assert_eq!(a(8, 1), BigUint::from(4u32));
        assert_eq!(a(7, 2), BigUint::from(14u32));
    }

    #[test]
    fn published_class_lists() {
        let check = |n: u32, m: u64, want: &[u64], modulus: u64| {
            let set = enumerate_classes(n, m).unwrap();
            assert_eq!(set.residues(), &set_of(want)[..], "n={n} M={m}");
            assert_eq!(set.modulus(), &BigUint::from(modulus));
        };
        check(1, 3, &[7, 8], 9);
        check(2, 3, &[4, 11, 14, 19], 27);
        check(3, 3, &[13, 22, 55, 56, 59, 64, 74, 77], 81);
        check(
            2,
            5,
            &[18, 29, 32, 37, 44, 52, 56, 58, 66, 78, 86, 92, 101, 109, 113, 114],
            125,
        );
    }

    #[test]
    fn enumeration_matches_brute_force_small() {
        for m in 2..=6u64 {
            for n in 1..=3u32 {
                let set = enumerate_classes(n, m).unwrap();
                let brute: Vec<BigUint> = (1..=m.pow(n + 1))
                    .filter(|a| a.gcd(&m) == 1)
                    .filter(|&a| {
                        order_bounded_of(a as i64, m, n).unwrap() == OrderResult::Finite(n)
                    })
                    .map(|a| BigUint::from(a % m.pow(n + 1)))
                    .collect();
                assert_eq!(set.residues(), &brute[..], "M={m} n={n}");
                assert_eq!(
                    BigUint::from(set.len() as u64),
                    counting::count_a(n, m),
                    "cardinality M={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn phi_round_trip() {
        // Recover (target, unit) from each enumerated numerator and invert.
        for (n, m) in [(2u32, 3u64), (3, 3), (2, 5), (2, 6), (3, 6), (2, 10)] {
            let set = enumerate_classes(n, m).unwrap();
            for residue in set.residues() {
                let a = BigInt::from(residue.clone());
                let image = chi(&BigRational::new(a.clone(), BigInt::from(m)));
                let d = image.denom().to_u64().unwrap();
                let span = BigUint::from(m).pow(n - 1) * d;
                let target = image
                    .numer()
                    .mod_floor(&BigInt::from(span))
                    .to_biguint()
                    .unwrap();
                let unit = a.mod_floor(&BigInt::from(m)).to_u64().unwrap();
                let query = PreimageQuery::new(target, d, unit, m, n).unwrap();
                assert_eq!(&invert_phi(&query).unwrap(), residue);
            }
        }
    }

    #[test]
    fn enumerator_rejects_exploding_requests() {
        let mut small = ClassEnumerator::with_cap(10);
        assert!(matches!(
            small.enumerate(3, 9),
            Err(Error::ResourceCap(_))
        ));
        // A(3,9) = 648 > 10, but A(1,9) = 6 still fits.
        assert!(small.enumerate(1, 9).is_ok());
    }

    #[test]
    fn chain_witness_examples() {
        let w = chain_witness(&[2, 2, 2, 1]).unwrap();
        assert_eq!(w, rational(9, 2));

        let w = chain_witness(&[10, 5, 5, 5, 1]).unwrap();
        assert_eq!(w.denom(), &BigInt::from(10));

        let w = chain_witness(&[3, 1]).unwrap();
        assert!(base_classes(3).unwrap().contains(w.numer()));
    }

    #[test]
    fn chain_witness_more_chains() {
        for chain in [
            &[12, 6, 3, 1][..],
            &[8, 4, 2, 2, 1],
            &[9, 9, 3, 1],
            &[5, 5, 5],
            &[6, 1],
            &[7, 7, 7, 7, 1],
            &[30, 15, 5, 1],
            &[4, 2],
            &[2, 1, 1, 1],
        ] {
            // chain_witness verifies its own output against the orbit.
            let w = chain_witness(chain).unwrap();
            assert_eq!(w.denom(), &BigInt::from(chain[0]));
        }
    }

    #[test]
    fn chain_witness_rejects_bad_chains() {
        assert!(chain_witness(&[]).is_err());
        assert!(chain_witness(&[1, 1]).is_err());
        assert!(chain_witness(&[4, 3]).is_err());
        assert!(chain_witness(&[4, 0]).is_err());
        assert!(chain_witness(&[4, 1, 2]).is_err());
    }

    #[test]
    fn covering_demo_small() {
        let levels = covering_gap_demo(2).unwrap();
        assert_eq!(levels[0].residues, vec![3]);
        assert_eq!(levels[1].residues.len(), 2);
        assert_eq!(levels[2].residues.len(), 4);

        // Pairwise disjoint at the coarser modulus.
        let flat: Vec<(u64, u64)> = levels
            .iter()
            .flat_map(|lv| lv.residues.iter().map(|&x| (lv.modulus, x)))
            .collect();
        for i in 0..flat.len() {
            for j in (i + 1)..flat.len() {
                let m = flat[i].0.min(flat[j].0);
                assert_ne!(flat[i].1 % m, flat[j].1 % m);
            }
        }
        // Avoidance of 1 + 3^j by direct scan up to 3^4.
        for j in 0..4u32 {
            let y = 1 + 3u64.pow(j);
            for &(m, x) in &flat {
                assert_ne!(y % m, x % m, "class ({x} mod {m}) contains {y}");
            }
        }
        assert!(covering_gap_demo(COVERING_DEMO_MAX_LEVEL + 1).is_err());
    }
}
