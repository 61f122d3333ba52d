//! Range scans over numerators: smallest numerator of each order, empirical
//! densities, and the closed-form order-`n` families.
//!
//! Scans partition `[1, a_max]` into contiguous blocks and classify every
//! coprime numerator with a shared [`OrderKernel`]. Per-order minima merge
//! associatively, so results are identical for any block schedule and thread
//! count. With the `parallel` feature (default) blocks run on rayon;
//! [`scan_smallest_seq`] is the single-threaded kernel and always available.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::chi::OrderResult;
use crate::counting;
use crate::order::OrderKernel;
use crate::{Error, Result};

/// Default order bound for scans; numerators classified above it count as
/// "order unknown", never as infinite.
pub const DEFAULT_ORDER_BOUND: u32 = 40;

const SCAN_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Order bound `N`; the scan records minima for orders `1..=N`.
    pub order_bound: u32,
    /// Worker threads (0 = rayon default); ignored when built without the
    /// `parallel` feature.
    pub threads: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            order_bound: DEFAULT_ORDER_BOUND,
            threads: 0,
        }
    }
}

/// Result of a smallest-numerator scan over `[1, a_max]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    base: u64,
    order_bound: u32,
    scanned: u64,
    classified: u64,
    smallest: Vec<Option<u64>>,
}

impl ScanReport {
    fn empty(base: u64, order_bound: u32) -> Self {
        Self {
            base,
            order_bound,
            scanned: 0,
            classified: 0,
            smallest: vec![None; order_bound as usize],
        }
    }

    fn absorb(&mut self, order: u32, a: u64) {
        debug_assert!((1..=self.order_bound).contains(&order));
        let slot = &mut self.smallest[order as usize - 1];
        match slot {
            Some(prev) if *prev <= a => {}
            _ => *slot = Some(a),
        }
    }

    fn merge(mut self, other: Self) -> Self {
        debug_assert_eq!(self.base, other.base);
        debug_assert_eq!(self.order_bound, other.order_bound);
        self.scanned += other.scanned;
        self.classified += other.classified;
        for (mine, theirs) in self.smallest.iter_mut().zip(other.smallest) {
            *mine = match (*mine, theirs) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        self
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn order_bound(&self) -> u32 {
        self.order_bound
    }

    /// Numerators examined (the size of the scanned range).
    pub fn scanned(&self) -> u64 {
        self.scanned
    }

    /// Deterministic work measure: coprime numerators actually classified.
    pub fn classified(&self) -> u64 {
        self.classified
    }

    /// Smallest numerator of order exactly `order` found in range, if any.
    pub fn smallest_for(&self, order: u32) -> Option<u64> {
        let idx = (order as usize).checked_sub(1)?;
        self.smallest.get(idx).copied().flatten()
    }

    /// All `(order, smallest numerator)` pairs found, by increasing order.
    pub fn found(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.smallest
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|a| (i as u32 + 1, a)))
    }
}

fn scan_block(kernel: &OrderKernel, lo: u64, hi: u64) -> ScanReport {
    let base = kernel.base();
    let mut report = ScanReport::empty(base, kernel.bound());
    for a in lo..=hi {
        report.scanned += 1;
        if a.gcd(&base) != 1 {
            continue;
        }
        report.classified += 1;
        if let OrderResult::Finite(order) = kernel.order_of_u64(a) {
            // order 0 cannot occur: a is coprime to base >= 2
            report.absorb(order, a);
        }
    }
    report
}

/// Single-threaded smallest-numerator scan over `[1, a_max]`.
pub fn scan_smallest_seq(base: u64, a_max: u64, opts: &ScanOptions) -> Result<ScanReport> {
    if a_max < 1 {
        return Err(Error::invalid("a_max must be >= 1"));
    }
    let kernel = OrderKernel::new(base, opts.order_bound)?;
    Ok(scan_block(&kernel, 1, a_max))
}

/// Smallest-numerator scan over `[1, a_max]`, parallel over blocks when the
/// `parallel` feature is enabled. Output is independent of thread count.
#[cfg(feature = "parallel")]
pub fn scan_smallest(base: u64, a_max: u64, opts: &ScanOptions) -> Result<ScanReport> {
    if a_max < 1 {
        return Err(Error::invalid("a_max must be >= 1"));
    }
    if opts.threads == 1 {
        return scan_smallest_seq(base, a_max, opts);
    }
    let kernel = OrderKernel::new(base, opts.order_bound)?;
    let run = || {
        blocks(a_max)
            .into_par_iter()
            .map(|(lo, hi)| scan_block(&kernel, lo, hi))
            .reduce(
                || ScanReport::empty(base, opts.order_bound),
                ScanReport::merge,
            )
    };
    in_pool(opts.threads, run)
}

#[cfg(not(feature = "parallel"))]
pub fn scan_smallest(base: u64, a_max: u64, opts: &ScanOptions) -> Result<ScanReport> {
    scan_smallest_seq(base, a_max, opts)
}

#[cfg(feature = "parallel")]
fn blocks(a_max: u64) -> Vec<(u64, u64)> {
    (1..=a_max)
        .step_by(SCAN_BLOCK as usize)
        .map(|lo| (lo, (lo + SCAN_BLOCK - 1).min(a_max)))
        .collect()
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(threads: usize, run: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(run());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(run))
}

/// Least `a in [1, a_max]` coprime to `base` with `ord(a/base) = order`, or
/// `None` if the range holds no such numerator. Stops at the first hit.
pub fn smallest_numerator(base: u64, order: u32, a_max: u64) -> Result<Option<u64>> {
    let kernel = OrderKernel::new(base, order)?;
    for a in 1..=a_max {
        if a.gcd(&base) != 1 {
            continue;
        }
        if kernel.order_of_u64(a) == OrderResult::Finite(order) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Fraction of `a in [1, k_max]` with `gcd(a, base) = 1` and
/// `ord(a/base) = order`, as an exact rational.
///
/// The order-`order` numerators form a periodic set with period
/// `base^(order+1)`, so this differs from the class density
/// [`crate::counting::class_density`] by at most `base^(order+1) / k_max` —
/// an exact discrepancy bound, not a statistical one.
pub fn empirical_density(base: u64, order: u32, k_max: u64) -> Result<BigRational> {
    empirical_density_with(base, order, k_max, &ScanOptions::default())
}

pub fn empirical_density_with(
    base: u64,
    order: u32,
    k_max: u64,
    opts: &ScanOptions,
) -> Result<BigRational> {
    if k_max < 1 {
        return Err(Error::invalid("k_max must be >= 1"));
    }
    let kernel = OrderKernel::new(base, order)?;
    let count_block = |lo: u64, hi: u64| -> u64 {
        (lo..=hi)
            .filter(|a| a.gcd(&base) == 1)
            .filter(|&a| kernel.order_of_u64(a) == OrderResult::Finite(order))
            .count() as u64
    };
    #[cfg(feature = "parallel")]
    let count = if opts.threads == 1 {
        count_block(1, k_max)
    } else {
        in_pool(opts.threads, || {
            blocks(k_max)
                .into_par_iter()
                .map(|(lo, hi)| count_block(lo, hi))
                .sum::<u64>()
        })?
    };
    #[cfg(not(feature = "parallel"))]
    let count = {
        let _ = opts;
        count_block(1, k_max)
    };
    Ok(BigRational::new(BigInt::from(count), BigInt::from(k_max)))
}

/// Checks the three closed-form families over an odd prime `p`:
/// `((p-1)p^n + 1)/p`, `((-1)^n p^n + p - 1)/p`, and (for `n >= 2`)
/// `(-(n+1)p^n + p^(n-1) + 1)/p` must all have order exactly `n`.
pub fn verify_family(p: u64, n: u32) -> Result<bool> {
    if p == 2 || !counting::is_prime(p) {
        return Err(Error::invalid(format!("{p} is not an odd prime")));
    }
    let pn = BigInt::from(p).pow(n);
    if n == 0 {
        // Both applicable members collapse to the integer 1.
        let first: BigInt = (&pn * (p - 1) + 1u32) / BigInt::from(p);
        let second: BigInt = (&pn + (p - 1)) / BigInt::from(p);
        return Ok(first.is_one() && second.is_one());
    }
    let kernel = OrderKernel::new(p, n)?;
    let mut members = vec![
        &pn * (p - 1) + 1u32,
        if n % 2 == 0 {
            &pn + (p - 1)
        } else {
            BigInt::from(p - 1) - &pn
        },
    ];
    if n >= 2 {
        members.push(BigInt::from(p).pow(n - 1) + 1u32 - &pn * (n as u64 + 1));
    }
    Ok(members
        .iter()
        .all(|a| kernel.order_of(a) == OrderResult::Finite(n)))
}
