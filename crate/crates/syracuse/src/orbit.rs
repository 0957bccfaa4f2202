//! The compressed map and orbit generation.
//!
//! One step takes odd `n` to `(3n+1) / 2^{v2(3n+1)}`, which is odd again.
//! A step is a *burst* when `n ≡ 1 (mod 4)` — equivalently `v2(3n+1) ≥ 2` —
//! and a *gap* when `n ≡ 3 (mod 4)`.

use num_bigint::BigUint;
use num_traits::One;

use crate::Error;

/// Default bound on recorded steps; every orbit tested at desk scale
/// terminates in far fewer.
pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// Odd positive integer, the only values the compressed map acts on.
/// Oddness is checked once at construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Odd(BigUint);

impl Odd {
    pub fn new(value: impl Into<BigUint>) -> Result<Self, Error> {
        let value = value.into();
        if value.bit(0) {
            Ok(Odd(value))
        } else {
            Err(Error::NotOdd(value.to_string()))
        }
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }
}

impl std::fmt::Display for Odd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// 2-adic valuation: the largest `k` with `2^k | m`.
///
/// Panics on `m = 0`, where the valuation is undefined; no caller here can
/// produce a zero (`3n+1 ≥ 4`).
pub fn v2(m: &BigUint) -> u64 {
    m.trailing_zeros().expect("v2 of zero is undefined")
}

/// One compressed step: returns `((3n+1)/2^v, v)` with `v = v2(3n+1)`.
pub fn syracuse_step(n: &Odd) -> (Odd, u64) {
    let x = n.get() * 3u32 + 1u32;
    let v = v2(&x);
    (Odd(x >> v), v)
}

/// Bit `j` of `n`: `⌊n/2^j⌋ mod 2`.
pub fn bit(n: &BigUint, j: u64) -> u8 {
    n.bit(j) as u8
}

/// Full record of a compressed orbit.
///
/// `values` has one more entry than `valuations`/`bursts`: step `t` maps
/// `values[t]` to `values[t+1]` shedding `valuations[t]` powers of two, and
/// `bursts[t]` flags `values[t] ≡ 1 (mod 4)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitTrace {
    pub values: Vec<BigUint>,
    pub valuations: Vec<u32>,
    pub bursts: Vec<u8>,
    /// True iff the trace reached the value 1 (no steps are recorded past it).
    pub terminated: bool,
}

impl OrbitTrace {
    pub fn n0(&self) -> &BigUint {
        &self.values[0]
    }

    /// Number of odd-to-odd steps recorded.
    pub fn steps(&self) -> usize {
        self.valuations.len()
    }

    pub fn final_value(&self) -> &BigUint {
        self.values.last().unwrap()
    }
}

// 3n+1 stays inside u128 below this.
const FAST_LIMIT: u128 = (u128::MAX - 1) / 3;

#[inline]
pub(crate) fn step_u128(n: u128) -> Option<(u128, u32)> {
    if n > FAST_LIMIT {
        return None;
    }
    let x = 3 * n + 1;
    let v = x.trailing_zeros();
    Some((x >> v, v))
}

/// Iterate the compressed map from `n0` until the value 1 is produced or
/// `step_cap` steps are recorded. Hitting the cap is not an error: the trace
/// simply reports `terminated = false`.
pub fn orbit(n0: &Odd, step_cap: usize) -> OrbitTrace {
    let mut values = vec![n0.get().clone()];
    let mut valuations: Vec<u32> = Vec::new();
    let mut bursts: Vec<u8> = Vec::new();

    // Stay in u128 while the value fits; the external contract is still
    // arbitrary precision.
    let mut small: Option<u128> = to_u128(n0.get());
    while {
        let cur = values.last().unwrap();
        !cur.is_one() && valuations.len() < step_cap
    } {
        if let Some(n) = small {
            if let Some((next, v)) = step_u128(n) {
                bursts.push((n % 4 == 1) as u8);
                debug_assert_eq!(n % 4 == 1, v >= 2);
                valuations.push(v);
                values.push(BigUint::from(next));
                small = Some(next);
                continue;
            }
        }
        let cur = values.last().unwrap();
        bursts.push(!cur.bit(1) as u8);
        let x = cur * 3u32 + 1u32;
        let v = v2(&x) as u32;
        debug_assert_eq!(!values.last().unwrap().bit(1), v >= 2);
        valuations.push(v);
        let next = x >> v;
        small = to_u128(&next);
        values.push(next);
    }

    let terminated = values.last().unwrap().is_one();
    OrbitTrace {
        values,
        valuations,
        bursts,
        terminated,
    }
}

fn to_u128(n: &BigUint) -> Option<u128> {
    if n.bits() <= 126 {
        let digits = n.to_u64_digits();
        let mut v: u128 = 0;
        for (i, d) in digits.iter().enumerate() {
            v |= (*d as u128) << (64 * i);
        }
        Some(v)
    } else {
        None
    }
}
