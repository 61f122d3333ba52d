//! Truncated p-adic arithmetic and the p-adic variant of the map.
//!
//! A p-adic number is stored as `p^valuation * unit` with the unit known to a
//! fixed number of base-`p` digits. The ceiling analogue keeps the digits at
//! non-negative exponents and adds one:
//! `ceil_p(x) = 1 + sum of a_j p^j over j >= 0`, and the map becomes
//! `chi_p(x) = x * ceil_p(x)`. On positive non-integer rationals whose
//! denominator is a power of `p` this agrees with the rational map; on
//! integers it deliberately does not (`ceil_p(n) = n + 1`), which is what
//! makes it continuous.
//!
//! Operations track how many digits remain valid and return
//! [`Error::PrecisionExhausted`] instead of silently truncating. The
//! fixed-denominator sets ([`lambda_classes`]) avoid the question entirely by
//! working with exact residues modulo `p^((n+1)k)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::classes::ResidueClassSet;
use crate::counting;
use crate::{Error, Result};

/// Default cap on the working modulus `p^((n+1)k)` of [`lambda_classes`];
/// the enumeration walks every residue class below it.
pub const DEFAULT_LAMBDA_MODULUS_CAP: u128 = 1 << 30;

// Above this the squared residues used by the iteration would overflow u128.
const LAMBDA_MODULUS_LIMIT: u128 = 1 << 63;

/// A p-adic number truncated to a fixed count of significant digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedPadic {
    prime: u64,
    precision: u32,
    repr: Repr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    /// The distinguished exact zero.
    Zero,
    /// `p^valuation * unit`, `unit` coprime to `p`, canonical modulo
    /// `p^precision`.
    Value { valuation: i64, unit: BigUint },
}

impl TruncatedPadic {
    /// The exact zero, carrying a working precision for derived values.
    pub fn zero(prime: u64, precision: u32) -> Result<Self> {
        Self::validate(prime, precision)?;
        Ok(Self {
            prime,
            precision,
            repr: Repr::Zero,
        })
    }

    /// Embeds an integer, truncated to `precision` significant digits.
    pub fn from_integer(value: &BigInt, prime: u64, precision: u32) -> Result<Self> {
        Self::validate(prime, precision)?;
        if value.is_zero() {
            return Self::zero(prime, precision);
        }
        let (val, unit_int) = split_valuation(value, prime);
        let unit = canonical(&unit_int, prime, precision);
        Ok(Self {
            prime,
            precision,
            repr: Repr::Value {
                valuation: val,
                unit,
            },
        })
    }

    /// Embeds a rational, truncated to `precision` significant digits. Any
    /// rational embeds: the denominator's unit part is inverted modulo
    /// `p^precision`.
    pub fn from_rational(x: &BigRational, prime: u64, precision: u32) -> Result<Self> {
        Self::validate(prime, precision)?;
        if x.is_zero() {
            return Self::zero(prime, precision);
        }
        let (vn, nu) = split_valuation(x.numer(), prime);
        let (vd, du) = split_valuation(x.denom(), prime);
        let modulus = BigUint::from(prime).pow(precision);
        let den_inv = invert_unit(&canonical(&du, prime, precision), &modulus);
        let unit = canonical(&nu, prime, precision) * den_inv % &modulus;
        Ok(Self {
            prime,
            precision,
            repr: Repr::Value {
                valuation: vn - vd,
                unit,
            },
        })
    }

    fn validate(prime: u64, precision: u32) -> Result<()> {
        if !counting::is_prime(prime) {
            return Err(Error::invalid(format!("{prime} is not prime")));
        }
        if precision < 1 {
            return Err(Error::invalid("precision must be >= 1"));
        }
        Ok(())
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Significant digits carried by this value.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    /// `v_p(x)`; `None` for the zero value.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Value { valuation, .. } => Some(*valuation),
        }
    }

    /// The unit part, canonical modulo `p^precision`; `None` for zero.
    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Value { unit, .. } => Some(unit),
        }
    }

    /// Exponent up to which (exclusively) the digits of this value are known.
    fn known_to(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None, // exact: known everywhere
            Repr::Value { valuation, .. } => Some(valuation + self.precision as i64),
        }
    }

    /// Digit at `p^exponent`, failing when it lies beyond the known range.
    pub fn digit(&self, exponent: i64) -> Result<u64> {
        match &self.repr {
            Repr::Zero => Ok(0),
            Repr::Value { valuation, unit } => {
                if exponent < *valuation {
                    return Ok(0);
                }
                if exponent >= valuation + self.precision as i64 {
                    return Err(Error::PrecisionExhausted(format!(
                        "digit at exponent {exponent} lies beyond the {} known digits",
                        self.precision
                    )));
                }
                let shift = (exponent - valuation) as u32;
                let d = unit / BigUint::from(self.prime).pow(shift) % self.prime;
                Ok(d.to_u64().expect("digit fits u64"))
            }
        }
    }

    /// Canonical residue modulo `p^exp` for p-adic integers.
    pub fn integer_residue(&self, exp: u32) -> Result<BigUint> {
        match &self.repr {
            Repr::Zero => Ok(BigUint::zero()),
            Repr::Value { valuation, unit } => {
                if *valuation < 0 {
                    return Err(Error::invalid(
                        "value has negative valuation: not a p-adic integer",
                    ));
                }
                if (valuation + self.precision as i64) < exp as i64 {
                    return Err(Error::PrecisionExhausted(format!(
                        "residue mod p^{exp} needs more digits than the {} available",
                        self.precision
                    )));
                }
                let modulus = BigUint::from(self.prime).pow(exp);
                Ok(unit * BigUint::from(self.prime).pow(*valuation as u32) % modulus)
            }
        }
    }

    /// Product; valuations add, digits survive to the smaller precision.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_prime(rhs)?;
        let precision = self.precision.min(rhs.precision);
        match (&self.repr, &rhs.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => TruncatedPadic::zero(self.prime, precision),
            (
                Repr::Value {
                    valuation: v1,
                    unit: u1,
                },
                Repr::Value {
                    valuation: v2,
                    unit: u2,
                },
            ) => {
                let modulus = BigUint::from(self.prime).pow(precision);
                Ok(Self {
                    prime: self.prime,
                    precision,
                    repr: Repr::Value {
                        valuation: v1 + v2,
                        unit: u1 * u2 % modulus,
                    },
                })
            }
        }
    }

    /// Sum. Leading digits may cancel; when every known digit cancels the
    /// result's valuation is undeterminable and the call fails.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_prime(rhs)?;
        match (&self.repr, &rhs.repr) {
            (Repr::Zero, _) => Ok(rhs.clone()),
            (_, Repr::Zero) => Ok(self.clone()),
            (
                Repr::Value {
                    valuation: v1,
                    unit: u1,
                },
                Repr::Value {
                    valuation: v2,
                    unit: u2,
                },
            ) => {
                let v = (*v1).min(*v2);
                let known = self
                    .known_to()
                    .unwrap()
                    .min(rhs.known_to().unwrap());
                let digits = u32::try_from(known - v)
                    .map_err(|_| Error::PrecisionExhausted("valuation gap too large".into()))?;
                let modulus = BigUint::from(self.prime).pow(digits);
                let lift = |vi: i64, ui: &BigUint| {
                    ui * BigUint::from(self.prime).pow((vi - v) as u32) % &modulus
                };
                let sum = (lift(*v1, u1) + lift(*v2, u2)) % &modulus;
                if sum.is_zero() {
                    return Err(Error::PrecisionExhausted(
                        "all known digits cancelled in addition".into(),
                    ));
                }
                let (strip, unit_int) = split_valuation(&BigInt::from(sum), self.prime);
                Ok(Self {
                    prime: self.prime,
                    precision: digits - strip as u32,
                    repr: Repr::Value {
                        valuation: v + strip,
                        unit: unit_int.to_biguint().expect("non-negative"),
                    },
                })
            }
        }
    }

    /// Additive inverse; precision is preserved.
    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Value { valuation, unit } => {
                let modulus = BigUint::from(self.prime).pow(self.precision);
                Self {
                    prime: self.prime,
                    precision: self.precision,
                    repr: Repr::Value {
                        valuation: *valuation,
                        unit: &modulus - unit,
                    },
                }
            }
        }
    }

    fn check_same_prime(&self, rhs: &Self) -> Result<()> {
        if self.prime != rhs.prime {
            return Err(Error::invalid(format!(
                "mixed primes {} and {}",
                self.prime, rhs.prime
            )));
        }
        Ok(())
    }
}

/// Digitwise agreement of `a` and `b` below `p^exp`, i.e.
/// `v_p(a - b) >= exp`. Fails when either operand has unknown digits in the
/// compared range.
pub fn agree_below(a: &TruncatedPadic, b: &TruncatedPadic, exp: i64) -> Result<bool> {
    if a.prime() != b.prime() {
        return Err(Error::invalid("mixed primes"));
    }
    let lo = a
        .valuation()
        .unwrap_or(exp)
        .min(b.valuation().unwrap_or(exp));
    for e in lo..exp {
        if a.digit(e)? != b.digit(e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ceil_p(x) = 1 +` (digits of `x` at non-negative exponents).
pub fn padic_ceil(x: &TruncatedPadic) -> Result<TruncatedPadic> {
    let p = x.prime();
    match &x.repr {
        Repr::Zero => TruncatedPadic::from_integer(&BigInt::one(), p, x.precision),
        Repr::Value { valuation, unit } => {
            // Known absolute range of the integer part: up to p^avail.
            let avail = valuation + x.precision as i64;
            if avail < 1 {
                return Err(Error::PrecisionExhausted(
                    "no digit of the integer part is determined".into(),
                ));
            }
            let int_part = if *valuation >= 0 {
                unit * BigUint::from(p).pow(*valuation as u32)
            } else {
                unit / BigUint::from(p).pow((-valuation) as u32)
            };
            let avail = u32::try_from(avail).expect("checked positive");
            let modulus = BigUint::from(p).pow(avail);
            let s = (int_part + 1u32) % &modulus;
            if s.is_zero() {
                return Err(Error::PrecisionExhausted(
                    "ceiling is divisible by every known power of p".into(),
                ));
            }
            let (strip, unit_int) = split_valuation(&BigInt::from(s), p);
            Ok(TruncatedPadic {
                prime: p,
                precision: avail - strip as u32,
                repr: Repr::Value {
                    valuation: strip,
                    unit: unit_int.to_biguint().expect("non-negative"),
                },
            })
        }
    }
}

/// The p-adic map `chi_p(x) = x * ceil_p(x)`. The output valuation is at
/// least the input valuation.
pub fn chi_p(x: &TruncatedPadic) -> Result<TruncatedPadic> {
    if x.is_zero() {
        return Ok(x.clone());
    }
    x.mul(&padic_ceil(x)?)
}

/// Options for [`lambda_classes_with`].
#[derive(Debug, Clone)]
pub struct LambdaOptions {
    /// Refuse enumerations whose modulus `p^((n+1)k)` exceeds this.
    pub modulus_cap: u128,
    /// Worker threads (0 = rayon default); ignored without `parallel`.
    pub threads: usize,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        Self {
            modulus_cap: DEFAULT_LAMBDA_MODULUS_CAP,
            threads: 0,
        }
    }
}

/// The set of `a` (coprime to `p`) for which `a/p^k` still has denominator
/// exactly `p^k` after `n` applications of the map: a union of congruence
/// classes modulo `p^((n+1)k)`, returned as the full residue list.
pub fn lambda_classes(p: u64, k: u32, n: u32) -> Result<ResidueClassSet> {
    lambda_classes_with(p, k, n, &LambdaOptions::default())
}

pub fn lambda_classes_with(
    p: u64,
    k: u32,
    n: u32,
    opts: &LambdaOptions,
) -> Result<ResidueClassSet> {
    if !counting::is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if k < 1 || n < 1 {
        return Err(Error::invalid("need k >= 1 and n >= 1"));
    }
    let digits = (n as u64 + 1) * k as u64;
    let modulus = u32::try_from(digits)
        .ok()
        .and_then(|d| (p as u128).checked_pow(d))
        .filter(|&m| m <= opts.modulus_cap.min(LAMBDA_MODULUS_LIMIT))
        .ok_or_else(|| {
            Error::cap(format!(
                "lambda enumeration needs p^((n+1)k) = {p}^{digits} residues, \
                 above the cap of {}",
                opts.modulus_cap.min(LAMBDA_MODULUS_LIMIT)
            ))
        })?;

    // pows[i] = p^(i*k): the modulus ladder, one rung per map step.
    let pk = (p as u128).pow(k);
    let mut pows = Vec::with_capacity(n as usize + 2);
    let mut cur = 1u128;
    for _ in 0..=(n + 1) {
        pows.push(cur);
        cur = cur.saturating_mul(pk);
    }
    debug_assert_eq!(pows[n as usize + 1], modulus);

    let survives = |a: u128| -> bool {
        let mut b = a;
        for step in 0..n {
            let target = pows[(n - step) as usize];
            let c = 1 + b / pk;
            b = ((b % target) * (c % target)) % target;
            if b % p as u128 == 0 {
                return false;
            }
        }
        true
    };
    let sweep = |lo: u128, hi: u128| -> Vec<u64> {
        (lo..hi)
            .filter(|a| a % p as u128 != 0)
            .filter(|&a| survives(a))
            .map(|a| a as u64)
            .collect()
    };

    #[cfg(feature = "parallel")]
    let survivors: Vec<u64> = {
        let block = (modulus >> 12).max(1 << 16);
        let run = || {
            let blocks: Vec<(u128, u128)> = (0..modulus)
                .step_by(block as usize)
                .map(|lo| (lo, (lo + block).min(modulus)))
                .collect();
            blocks
                .into_par_iter()
                .map(|(lo, hi)| sweep(lo, hi))
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect()
        };
        if opts.threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(opts.threads)
                .build()
                .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?
                .install(run)
        } else {
            run()
        }
    };
    #[cfg(not(feature = "parallel"))]
    let survivors: Vec<u64> = sweep(0, modulus);

    let base = u64::try_from(pk).expect("p^k below the modulus cap");
    Ok(ResidueClassSet::from_sorted(
        base,
        n,
        BigUint::from(modulus),
        survivors.into_iter().map(BigUint::from).collect(),
    ))
}

/// `(v_p(x), x / p^v)` for nonzero `x`.
fn split_valuation(x: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!x.is_zero());
    let mut v = 0i64;
    let mut rest = x.clone();
    let big_p = BigInt::from(p);
    loop {
        let (q, r) = rest.div_rem(&big_p);
        if !r.is_zero() {
            return (v, rest);
        }
        rest = q;
        v += 1;
    }
}

/// Canonical residue of a (possibly negative) unit modulo `p^precision`.
fn canonical(x: &BigInt, p: u64, precision: u32) -> BigUint {
    let modulus = BigInt::from(p).pow(precision);
    x.mod_floor(&modulus)
        .to_biguint()
        .expect("canonical residue is non-negative")
}

/// Inverse of a unit modulo `p^precision`.
fn invert_unit(u: &BigUint, modulus: &BigUint) -> BigUint {
    let eg = BigInt::from(u.clone()).extended_gcd(&BigInt::from(modulus.clone()));
    debug_assert!(eg.gcd.is_one(), "unit must be coprime to the modulus");
    eg.x.mod_floor(&BigInt::from(modulus.clone()))
        .to_biguint()
        .expect("canonical residue is non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chi::{ceil_rational, chi, rational};
    use crate::classes::{base_classes, enumerate_classes};

    fn embed(num: i64, den: i64, p: u64, prec: u32) -> TruncatedPadic {
        TruncatedPadic::from_rational(&rational(num, den), p, prec).unwrap()
    }

    #[test]
    fn construction_and_digits() {
        let x = embed(7, 9, 3, 6); // 7/9 = 3^-2 * 7
        assert_eq!(x.valuation(), Some(-2));
        assert_eq!(x.digit(-2).unwrap(), 1); // 7 = 1 + 2*3
        assert_eq!(x.digit(-1).unwrap(), 2);
        assert_eq!(x.digit(0).unwrap(), 0);
        assert!(x.digit(4).is_err());

        // 1/2 in Q_3: unit is the inverse of 2 mod 3^6 = 365.
        let h = embed(1, 2, 3, 6);
        assert_eq!(h.valuation(), Some(0));
        assert_eq!(h.unit().unwrap(), &BigUint::from(365u32));

        assert!(TruncatedPadic::from_integer(&BigInt::from(4), 6, 5).is_err());
        assert!(TruncatedPadic::from_integer(&BigInt::from(4), 3, 0).is_err());
    }

    #[test]
    fn negative_values_canonicalize() {
        let m = embed(-1, 1, 5, 4);
        assert_eq!(m.valuation(), Some(0));
        // -1 mod 5^4 = 624
        assert_eq!(m.unit().unwrap(), &BigUint::from(624u32));
        let sum = m.add(&embed(2, 1, 5, 4)).unwrap();
        assert_eq!(sum.integer_residue(3).unwrap(), BigUint::one());
    }

    #[test]
    fn add_detects_full_cancellation() {
        let x = embed(7, 1, 3, 4);
        let err = x.add(&x.neg()).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted(_)));
    }

    #[test]
    fn ceil_of_zero_and_integers() {
        let z = TruncatedPadic::zero(3, 6).unwrap();
        let one = padic_ceil(&z).unwrap();
        assert_eq!(one.integer_residue(6).unwrap(), BigUint::one());

        // Integer x: ceil_p(x) = 1 + x, unlike the rational ceiling.
        for v in [0i64, 5, 12, 26] {
            let x = TruncatedPadic::from_integer(&BigInt::from(v), 3, 8).unwrap();
            let c = padic_ceil(&x).unwrap();
            assert_eq!(
                c.integer_residue(6).unwrap(),
                BigUint::from((v + 1) as u64) % BigUint::from(3u32).pow(6)
            );
        }
    }

    #[test]
    fn ceil_matches_rational_ceiling_on_prime_denominators() {
        for p in [2u64, 3, 5] {
            let prec = 8u32;
            let check_mod = BigUint::from(p).pow(prec - 1);
            for a in 1..p.pow(4) {
                if a % p == 0 {
                    continue;
                }
                let x = rational(a as i64, p as i64);
                let expect = ceil_rational(&x)
                    .mod_floor(&BigInt::from(check_mod.clone()))
                    .to_biguint()
                    .unwrap();
                let got = padic_ceil(&TruncatedPadic::from_rational(&x, p, prec).unwrap())
                    .unwrap()
                    .integer_residue(prec - 1)
                    .unwrap();
                assert_eq!(got, expect, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn ceil_fails_loudly_without_integer_digits() {
        // 1/9 at 2 digits: digits live at exponents -2 and -1 only.
        let x = embed(1, 9, 3, 2);
        assert!(matches!(
            padic_ceil(&x),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn chi_p_agrees_with_chi_off_the_integers() {
        let prec = 12u32;
        for p in [2u64, 3, 5] {
            for k in 1..=2u32 {
                let pk = p.pow(k);
                for a in 1..p.pow(5) {
                    if a % p == 0 {
                        continue;
                    }
                    let x = rational(a as i64, pk as i64);
                    if x.is_integer() {
                        continue;
                    }
                    let lhs = chi_p(&TruncatedPadic::from_rational(&x, p, prec).unwrap()).unwrap();
                    let rhs = TruncatedPadic::from_rational(&chi(&x), p, prec).unwrap();
                    // prec digits in, k lost to the ceiling, k to the product
                    let exp = prec as i64 - 2 * k as i64;
                    assert!(
                        agree_below(&lhs, &rhs, exp).unwrap(),
                        "p={p} k={k} a={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn chi_p_is_x_squared_plus_x_on_integers() {
        for v in [0i64, 1, 2, 7, 25, -4, -13] {
            let x = TruncatedPadic::from_integer(&BigInt::from(v), 3, 9).unwrap();
            let got = chi_p(&x).unwrap();
            let expect =
                TruncatedPadic::from_integer(&BigInt::from(v * v + v), 3, 9).unwrap();
            assert!(agree_below(&got, &expect, 8).unwrap(), "v={v}");
        }
        let zero = TruncatedPadic::zero(3, 9).unwrap();
        assert!(chi_p(&zero).unwrap().is_zero());
    }

    #[test]
    fn lambda_examples() {
        let l = lambda_classes(3, 1, 1).unwrap();
        assert_eq!(
            l.residues(),
            &[1u32, 2, 4, 5].map(BigUint::from)[..]
        );
        assert_eq!(l.modulus(), &BigUint::from(9u32));

        assert_eq!(lambda_classes(3, 1, 2).unwrap().len(), 8);

        let l221 = lambda_classes(2, 2, 1).unwrap();
        assert!(!l221.is_empty());
        assert_eq!(l221.modulus(), &BigUint::from(16u32));
        assert_eq!(
            l221.residues(),
            &[1u32, 3, 9, 11].map(BigUint::from)[..]
        );
    }

    #[test]
    fn lambda_matches_unit_complement_at_k1() {
        // Lambda_{1,n} = units mod p^(n+1) minus all lifts of the order-j
        // classes for j <= n.
        for p in [2u64, 3, 5] {
            for n in 1..=3u32 {
                let modulus = p.pow(n + 1);
                let lam = lambda_classes(p, 1, n).unwrap();
                let mut expected: Vec<u64> = (1..modulus).filter(|a| a % p != 0).collect();
                for j in 1..=n {
                    let span = p.pow(j + 1);
                    for rep in enumerate_classes(j, p).unwrap().residues() {
                        let rep = rep.to_u64().unwrap();
                        expected.retain(|&a| a % span != rep);
                    }
                }
                let got: Vec<u64> = lam.residues().iter().map(|r| r.to_u64().unwrap()).collect();
                assert_eq!(got, expected, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn lambda_base_level_is_units_minus_order_one() {
        let lam = lambda_classes(5, 1, 1).unwrap();
        let ord1 = base_classes(5).unwrap();
        let all_units: Vec<BigUint> = (1u64..25)
            .filter(|a| a % 5 != 0)
            .map(BigUint::from)
            .filter(|a| !ord1.residues().contains(a))
            .collect();
        assert_eq!(lam.residues(), &all_units[..]);
    }

    #[test]
    fn lambda_respects_cap() {
        let opts = LambdaOptions {
            modulus_cap: 1000,
            threads: 0,
        };
        assert!(matches!(
            lambda_classes_with(5, 2, 3, &opts),
            Err(Error::ResourceCap(_))
        ));
    }
}
