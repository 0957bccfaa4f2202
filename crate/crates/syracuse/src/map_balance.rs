//! Exhaustive residue enumeration behind the map-balance counts.
//!
//! For depth `K ≥ 5`, scan the canonical representatives `r ∈ [1, 2^K]` with
//! `r ≡ 1 (mod 4)` and keep those whose image `T(r) ≡ 3 (mod 4)`; the kept
//! set splits by `T(r) mod 8` into the C3/C7 counts and by `r mod 8` into
//! the subclass columns. The map is evaluated on the integer representative,
//! not the residue class: for classes with `v2(3r+1) ≥ K−2` the image class
//! mod 8 is not determined by `r mod 2^K`, and the representative convention
//! is the one the frozen reference rows were produced under.

use std::ops::RangeInclusive;

use crate::Error;

/// Depth ceiling; keeps the `2^{K-2}`-candidate scan instant.
pub const MAX_DEPTH: u32 = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapBalanceRow {
    pub k: u32,
    /// Number of residues kept: `2^{K−3} − 1`.
    pub s_size: u64,
    pub c3: u64,
    pub c7: u64,
    /// `c3 − c7`; alternates `+1, −1` starting at `+1` for `K = 5`,
    /// i.e. `(−1)^{K+1}`.
    pub diff: i64,
    /// Split of C3/C7 over `r ≡ 1 (mod 8)`; both equal `2^{K−5}`.
    pub c3_1: u64,
    pub c7_1: u64,
    /// Split over `r ≡ 5 (mod 8)`; carries the whole imbalance.
    pub c3_5: u64,
    pub c7_5: u64,
}

#[inline]
fn step_u64(n: u64) -> u64 {
    let x = 3 * n + 1;
    x >> x.trailing_zeros()
}

pub fn enumerate_row(k: u32) -> Result<MapBalanceRow, Error> {
    if !(5..=MAX_DEPTH).contains(&k) {
        return Err(Error::DepthOutOfRange {
            got: k,
            min: 5,
            max: MAX_DEPTH,
        });
    }
    let mut row = MapBalanceRow {
        k,
        s_size: 0,
        c3: 0,
        c7: 0,
        diff: 0,
        c3_1: 0,
        c7_1: 0,
        c3_5: 0,
        c7_5: 0,
    };
    let mut r = 1u64;
    let top = 1u64 << k;
    while r <= top {
        let t = step_u64(r);
        if t % 4 == 3 {
            row.s_size += 1;
            let is3 = t % 8 == 3;
            let one_class = r % 8 == 1;
            match (is3, one_class) {
                (true, true) => row.c3_1 += 1,
                (true, false) => row.c3_5 += 1,
                (false, true) => row.c7_1 += 1,
                (false, false) => row.c7_5 += 1,
            }
        }
        r += 4;
    }
    row.c3 = row.c3_1 + row.c3_5;
    row.c7 = row.c7_1 + row.c7_5;
    row.diff = row.c3 as i64 - row.c7 as i64;
    debug_assert_eq!(row.s_size, row.c3 + row.c7);
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremFailure {
    pub k: u32,
    pub part: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub rows: Vec<MapBalanceRow>,
    pub failures: Vec<TheoremFailure>,
}

impl TheoremReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks, per depth: the size formula `|S| = 2^{K−3} − 1`, the alternating
/// unit difference `diff = (−1)^{K+1}`, and the balanced 1-mod-8 subclass
/// `c3_1 = c7_1 = 2^{K−5}`.
pub fn verify_theorem(k_range: RangeInclusive<u32>) -> Result<TheoremReport, Error> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for k in k_range {
        let row = enumerate_row(k)?;
        let want_size = (1u64 << (k - 3)) - 1;
        if row.s_size != want_size {
            failures.push(TheoremFailure {
                k,
                part: "size",
                detail: format!("|S| = {} ≠ {want_size}", row.s_size),
            });
        }
        let want_diff = if k % 2 == 1 { 1 } else { -1 };
        if row.diff != want_diff {
            failures.push(TheoremFailure {
                k,
                part: "alternation",
                detail: format!("diff = {} ≠ {want_diff}", row.diff),
            });
        }
        let want_sub = 1u64 << (k - 5);
        if row.c3_1 != want_sub || row.c7_1 != want_sub {
            failures.push(TheoremFailure {
                k,
                part: "subclass",
                detail: format!("(c3_1, c7_1) = ({}, {}) ≠ {want_sub}", row.c3_1, row.c7_1),
            });
        }
        rows.push(row);
    }
    Ok(TheoremReport { rows, failures })
}

/// `(K, C3, C7, diff)` rows, ready for CSV.
pub fn figure1_data(k_range: RangeInclusive<u32>) -> Result<Vec<(u32, u64, u64, i64)>, Error> {
    k_range
        .map(|k| enumerate_row(k).map(|r| (k, r.c3, r.c7, r.diff)))
        .collect()
}

/// Recomputes the depth-`K+1` census through the two lifts `r` and
/// `r + 2^K` of every depth-`K` candidate and compares with the direct
/// enumeration — the binary-tree recursion the closed forms rest on.
pub fn lift_consistency(k: u32) -> Result<bool, Error> {
    let direct = enumerate_row(k + 1)?;
    let mut via_lifts = (0u64, 0u64); // (c3, c7)
    let mut r = 1u64;
    let top = 1u64 << k;
    while r <= top {
        for lift in [r, r + top] {
            let t = step_u64(lift);
            if t % 4 == 3 {
                if t % 8 == 3 {
                    via_lifts.0 += 1;
                } else {
                    via_lifts.1 += 1;
                }
            }
        }
        r += 4;
    }
    Ok(via_lifts == (direct.c3, direct.c7))
}

/// The explicitly published reference rows `(K, |S|, C3, C7, diff)`.
pub const REFERENCE_ROWS: [(u32, u64, u64, u64, i64); 10] = [
    (5, 3, 2, 1, 1),
    (6, 7, 3, 4, -1),
    (7, 15, 8, 7, 1),
    (8, 31, 15, 16, -1),
    (9, 63, 32, 31, 1),
    (10, 127, 63, 64, -1),
    (11, 255, 128, 127, 1),
    (12, 511, 255, 256, -1),
    (15, 4095, 2048, 2047, 1),
    (19, 65535, 32768, 32767, 1),
];
