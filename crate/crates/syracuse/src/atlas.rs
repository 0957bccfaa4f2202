//! Fixed-modulus structure of the map: the gap-length law mod 8, the
//! gap-step permutation mod 32, closed-form cycle classifiers for the
//! sixteen burst-start classes mod 64, and the reachable burst-end states.
//!
//! Every classifier here is a case analysis on a residue class, written
//! out as algebra on `64a + r`. The simulators run the actual orbit
//! segment; tests check the two against each other exhaustively, which is
//! the point — the closed forms are claims to be falsified, not cached
//! simulations.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::orbit::{bit, syracuse_step, v2, Odd};
use crate::Error;

/// Gap simulations stop counting here and report the bound instead; the
/// geometric tail makes longer gaps vanishingly rare at tested scales.
pub const GAP_CAP: u32 = 64;

/// Default modulus exponent for [`burst_end_states`]: instant to
/// enumerate, and the census is stable from 8 up.
pub const DEFAULT_BURST_END_EXPONENT: u32 = 10;

/// Length of the burst run a residue class commits to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunLen {
    Exactly(u32),
    /// Still ≡ 1 (mod 4) after the first step; the class does not resolve
    /// the burst end (fine-grained behaviour depends on higher bits).
    Continues,
}

/// Length of the gap run following the burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapLen {
    Exactly(u32),
    AtLeast(u32),
    /// Not determined: the class leaves the gap open, or a simulation hit
    /// [`GAP_CAP`].
    UnknownBeyondBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mixing {
    NonMixing,
    Partial,
    Full,
}

/// Outcome of one burst/gap cycle, as far as a residue class (or a
/// simulation) determines it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleOutcome {
    pub burst: RunLen,
    pub gap: GapLen,
    /// Burst-end value mod 32, when the class pins it.
    pub end_mod32: Option<u8>,
    pub mixing: Option<Mixing>,
}

impl CycleOutcome {
    fn resolved(burst_len: u32, gap: GapLen, end_mod32: u8) -> Self {
        let burst = RunLen::Exactly(burst_len);
        CycleOutcome {
            burst,
            gap,
            end_mod32: Some(end_mod32),
            mixing: mixing_of(burst, gap),
        }
    }

    fn continues() -> Self {
        CycleOutcome {
            burst: RunLen::Continues,
            gap: GapLen::UnknownBeyondBound,
            end_mod32: None,
            mixing: Some(Mixing::Full), // L ≥ 2 already forces full mixing
        }
    }
}

/// full ⟺ L ≥ 2 or G ≥ 3; non_mixing ⟺ L = 1 and G = 1; the single
/// in-between shape (1, 2) is partial. `None` when the gap information
/// cannot separate partial from full.
fn mixing_of(burst: RunLen, gap: GapLen) -> Option<Mixing> {
    match burst {
        RunLen::Continues => Some(Mixing::Full),
        RunLen::Exactly(l) if l >= 2 => Some(Mixing::Full),
        RunLen::Exactly(_) => match gap {
            GapLen::Exactly(1) => Some(Mixing::NonMixing),
            GapLen::Exactly(2) => Some(Mixing::Partial),
            GapLen::Exactly(_) => Some(Mixing::Full),
            GapLen::AtLeast(k) if k >= 3 => Some(Mixing::Full),
            GapLen::AtLeast(_) => None,
            GapLen::UnknownBeyondBound => Some(Mixing::Full), // G > GAP_CAP ≥ 3
        },
    }
}

/// Whether a gap step `n ≡ 3 (mod 4)` is the last of its run: true iff
/// `n ≡ 3 (mod 8)`. Cross-validated against one actual application of the
/// map — `8k+3 → 12k+5` rejoins the bursts, `8k+7 → 12k+11` does not.
pub fn gap_mod8_law(n: &Odd) -> Result<bool, Error> {
    let v = n.get();
    if bit(v, 1) == 0 {
        return Err(Error::ResidueOutOfRange {
            residue: 1,
            modulus: 4,
        });
    }
    let unit = bit(v, 2) == 0;
    let (succ, valuation) = syracuse_step(n);
    debug_assert_eq!(valuation, 1);
    let successor_bursts = bit(succ.get(), 1) == 0;
    assert_eq!(
        unit, successor_bursts,
        "static and dynamic gap classifications disagree at {v}"
    );
    Ok(unit)
}

/// One gap step acts on residues mod 32: the published table.
pub const GAP_PERMUTATION_REFERENCE: [(u8, u8); 8] = [
    (3, 5),
    (7, 11),
    (11, 17),
    (15, 23),
    (19, 29),
    (23, 3),
    (27, 9),
    (31, 15),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapPermutation {
    pub mapping: [(u8, u8); 8],
}

impl GapPermutation {
    pub fn image(&self, r: u8) -> Option<u8> {
        self.mapping
            .iter()
            .find(|&&(from, _)| from == r)
            .map(|&(_, to)| to)
    }
}

/// Computes `n → (3n+1)/2 mod 32` on the eight gap classes and checks the
/// result against [`GAP_PERMUTATION_REFERENCE`] entry by entry, plus the
/// structural facts: all images distinct, classes ≡ 3 (mod 8) land on
/// bursts, classes ≡ 7 (mod 8) stay in the gap, and each image half splits
/// evenly between its two mod-8 classes.
pub fn gap_permutation() -> GapPermutation {
    let mut mapping = [(0u8, 0u8); 8];
    for (slot, k) in mapping.iter_mut().zip(0u16..) {
        let r = 4 * k + 3;
        *slot = (r as u8, ((3 * r + 1) / 2 % 32) as u8);
    }
    assert_eq!(mapping, GAP_PERMUTATION_REFERENCE);

    let mut seen = BTreeSet::new();
    let mut split = BTreeMap::new();
    for &(from, to) in &mapping {
        assert!(seen.insert(to), "image {to} repeated");
        if from % 8 == 3 {
            assert_eq!(to % 4, 1, "{from} must map onto a burst class");
        } else {
            assert_eq!(to % 4, 3, "{from} must stay in the gap");
        }
        *split.entry(to % 8).or_insert(0u32) += 1;
    }
    assert!(
        split.values().all(|&c| c == 2),
        "each mod-8 image class must appear exactly twice: {split:?}"
    );
    GapPermutation { mapping }
}

#[inline]
fn step_u128(n: u128) -> u128 {
    let x = 3 * n + 1;
    x >> x.trailing_zeros()
}

fn oddpart_u128(m: u128) -> u128 {
    m >> m.trailing_zeros()
}

/// `m / 2^{v2(m)}`.
pub fn oddpart(m: &BigUint) -> Result<Odd, Error> {
    if m.is_zero() {
        return Err(Error::ParameterTooSmall {
            what: "oddpart argument",
            min: 1,
            got: 0,
        });
    }
    let shifted = m >> v2(m);
    Ok(Odd::new(shifted).expect("shifting out the 2-valuation leaves an odd number"))
}

/// Closed-form cycle outcome for `n = 64a + r` with `r ≡ 5 (mod 8)`.
pub fn classify_5mod8(r: u64, a: u64) -> Result<CycleOutcome, Error> {
    let out = match r {
        // 3(64a+29)+1 = 8(24a+11); 24a+11 ≡ 3 (mod 8): unit gap every time.
        29 => CycleOutcome::resolved(1, GapLen::Exactly(1), 29),
        // 3(64a+21)+1 = 64(3a+1): the image is oddpart(3a+1) outright, so
        // the burst ends iff that is ≡ 3 (mod 4) and the mod-8 law reads
        // the gap off the same number.
        21 => {
            let u = oddpart_u128(3 * u128::from(a) + 1);
            if u % 4 == 1 {
                CycleOutcome::continues()
            } else if u % 8 == 3 {
                CycleOutcome::resolved(1, GapLen::Exactly(1), 21)
            } else {
                CycleOutcome::resolved(1, GapLen::AtLeast(2), 21)
            }
        }
        // 3(64a+37)+1 = 16(12a+7); 12a+7 ≡ 3 (mod 4) always, and ≡ 3
        // (mod 8) exactly when a is odd.
        37 => {
            let gap = if a % 2 == 1 {
                GapLen::Exactly(1)
            } else {
                GapLen::AtLeast(2)
            };
            CycleOutcome::resolved(1, gap, 5)
        }
        // 3(64a+53)+1 = 32(6a+5); 6a+5 ≡ 1 (mod 4) for even a; odd a gives
        // 24c+11 ≡ 3 (mod 8) at a = 4c+1 and 24c+23 ≡ 7 (mod 8) at a = 4c+3.
        53 => match a % 4 {
            0 | 2 => CycleOutcome::continues(),
            1 => CycleOutcome::resolved(1, GapLen::Exactly(1), 21),
            _ => CycleOutcome::resolved(1, GapLen::AtLeast(2), 21),
        },
        // 3(64a+61)+1 = 8(24a+23); 24a+23 ≡ 7 (mod 8): gap at least 2.
        61 => CycleOutcome::resolved(1, GapLen::AtLeast(2), 29),
        // Images 12a+1, 24a+5, 24a+17 — all ≡ 1 (mod 4).
        5 | 13 | 45 => CycleOutcome::continues(),
        _ => {
            return Err(Error::ResidueOutOfRange {
                residue: r,
                modulus: 64,
            })
        }
    };
    Ok(out)
}

/// Closed-form cycle outcome for `n = 64a + r` with `r ≡ 1 (mod 8)`.
pub fn l1_symmetry(r: u64, a: u64) -> Result<CycleOutcome, Error> {
    let _ = a; // every class answers uniformly in a — that is the symmetry
    let out = match r {
        // (3(64a+r)+1)/4 = 48a + {1, 13, 25, 37} — all ≡ 1 (mod 4).
        1 | 17 | 33 | 49 => CycleOutcome::continues(),
        // T = 48a+7 ≡ 7 (mod 8) opens the gap; T² = 72a+11 ≡ 3 (mod 8)
        // closes it: G = 2 exactly, for every a.
        9 => CycleOutcome::resolved(1, GapLen::Exactly(2), 9),
        // T = 48a+31 ≡ 7 (mod 8) and T² = 72a+47 ≡ 7 (mod 8): the gap
        // survives the law twice, so G ≥ 3.
        41 => CycleOutcome::resolved(1, GapLen::AtLeast(3), 9),
        // T = 48a+19 resp. 48a+43, both ≡ 3 (mod 8): unit gap.
        25 | 57 => CycleOutcome::resolved(1, GapLen::Exactly(1), 25),
        _ => {
            return Err(Error::ResidueOutOfRange {
                residue: r,
                modulus: 64,
            })
        }
    };
    Ok(out)
}

/// Runs the actual orbit segment from a burst step `start ≡ 1 (mod 4)`:
/// measures the burst run, the gap after it, and the burst-end class.
/// Bursts shrink the value so they need no cap — only the trivial fixed
/// point 1 is caught specially; gaps are capped at [`GAP_CAP`].
pub fn simulate_outcome(start: u128) -> Result<CycleOutcome, Error> {
    if start % 4 != 1 {
        return Err(Error::ResidueOutOfRange {
            residue: (start % 4) as u64,
            modulus: 4,
        });
    }
    let mut cur = start;
    let mut end = 0u128;
    let mut burst_len = 0u32;
    while cur % 4 == 1 {
        if cur == 1 {
            return Ok(CycleOutcome::continues());
        }
        burst_len += 1;
        end = cur;
        cur = step_u128(cur);
    }
    let mut gap_len = 0u32;
    let gap = loop {
        if cur % 4 == 1 {
            break GapLen::Exactly(gap_len);
        }
        gap_len += 1;
        if gap_len > GAP_CAP {
            break GapLen::UnknownBeyondBound;
        }
        cur = step_u128(cur);
    };
    Ok(CycleOutcome::resolved(burst_len, gap, (end % 32) as u8))
}

/// Whether a closed-form claim is consistent with a measured outcome:
/// exact lengths must match, lower bounds must be met, and `Continues`
/// means the measured burst ran at least 2 steps.
pub fn outcome_agrees(closed: &CycleOutcome, measured: &CycleOutcome) -> bool {
    let burst_ok = match closed.burst {
        RunLen::Exactly(k) => measured.burst == RunLen::Exactly(k),
        RunLen::Continues => !matches!(measured.burst, RunLen::Exactly(k) if k < 2),
    };
    let gap_ok = match closed.gap {
        GapLen::Exactly(k) => measured.gap == GapLen::Exactly(k),
        GapLen::AtLeast(k) => match measured.gap {
            GapLen::Exactly(j) | GapLen::AtLeast(j) => j >= k,
            GapLen::UnknownBeyondBound => true,
        },
        GapLen::UnknownBeyondBound => true,
    };
    let end_ok = match (closed.end_mod32, measured.end_mod32) {
        (Some(c), Some(m)) => c == m,
        (Some(_), None) => false,
        (None, _) => true,
    };
    // a gap/end claim only binds once the closed form pins the burst
    let claims_bind = matches!(closed.burst, RunLen::Exactly(_));
    burst_ok && (!claims_bind || (gap_ok && end_ok))
}

const CENSUS_SPAN: u64 = 1 << 12;

/// Buckets the sixteen burst-start classes mod 64 by whether their closed
/// form yields (L, G) = (1, 1) for every `a`, for some `a`, or never.
/// Returns (unconditional, conditional) and asserts the known answer
/// ({25, 29, 57}, {21, 37, 53}).
pub fn nonmixing_census() -> (BTreeSet<u64>, BTreeSet<u64>) {
    let mut unconditional = BTreeSet::new();
    let mut conditional = BTreeSet::new();
    for r in (1..64).step_by(4) {
        let hits = (0..CENSUS_SPAN)
            .filter(|&a| {
                let out = if r % 8 == 5 {
                    classify_5mod8(r, a)
                } else {
                    l1_symmetry(r, a)
                }
                .expect("r ranges over the burst-start classes");
                out.mixing == Some(Mixing::NonMixing)
            })
            .count() as u64;
        if hits == CENSUS_SPAN {
            unconditional.insert(r);
        } else if hits > 0 {
            conditional.insert(r);
        }
    }
    assert_eq!(unconditional, BTreeSet::from([25, 29, 57]));
    assert_eq!(conditional, BTreeSet::from([21, 37, 53]));
    (unconditional, conditional)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapCensus {
    pub counts: BTreeMap<u32, u64>,
    /// Starts whose gap outran [`GAP_CAP`].
    pub beyond_cap: u64,
    pub a_max: u64,
}

impl GapCensus {
    pub fn total(&self) -> u64 {
        self.counts.values().sum::<u64>() + self.beyond_cap
    }
}

/// Gap-length histogram over the class 41 mod 64: simulates the gap after
/// the (single-step) burst of `n = 64a + 41` for `a < a_max`. The G = 2
/// bin is whatever the simulation measures — the claimed law only starts
/// at G = 3.
pub fn r41_gap_census(a_max: u64) -> Result<GapCensus, Error> {
    if a_max < 1 << 10 {
        return Err(Error::ParameterTooSmall {
            what: "a_max",
            min: 1 << 10,
            got: a_max,
        });
    }
    let mut counts = BTreeMap::new();
    let mut beyond_cap = 0u64;
    for a in 0..a_max {
        let start = 64 * u128::from(a) + 41;
        match simulate_outcome(start).expect("64a+41 ≡ 1 (mod 4)").gap {
            GapLen::Exactly(g) => *counts.entry(g).or_insert(0) += 1,
            _ => beyond_cap += 1,
        }
    }
    Ok(GapCensus {
        counts,
        beyond_cap,
        a_max,
    })
}

/// Which burst classes mod 32 can end a burst: enumerates `n ≡ 1 (mod 4)`
/// over residues mod `2^B` and keeps `n mod 32` whenever the image on the
/// representative leaves the bursts.
pub fn burst_end_states(modulus_exponent: u32) -> Result<BTreeSet<u8>, Error> {
    if modulus_exponent < 6 {
        return Err(Error::ParameterTooSmall {
            what: "modulus_exponent",
            min: 6,
            got: u64::from(modulus_exponent),
        });
    }
    let mut reachable = BTreeSet::new();
    let top = 1u128 << modulus_exponent;
    let mut n = 1u128;
    while n < top {
        if step_u128(n) % 4 == 3 {
            reachable.insert((n % 32) as u8);
        }
        n += 4;
    }
    Ok(reachable)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd(n: u64) -> Odd {
        Odd::new(BigUint::from(n)).unwrap()
    }

    #[test]
    fn gap_law_examples() {
        assert!(gap_mod8_law(&odd(3)).unwrap());
        assert!(!gap_mod8_law(&odd(7)).unwrap());
        assert!(gap_mod8_law(&odd(11)).unwrap());
        assert!(gap_mod8_law(&odd(5)).is_err());
    }

    #[test]
    fn gap_law_exhaustive_below_million() {
        // the internal assert compares the static class against one real
        // application of the map for every input
        for n in (3..1_000_000u64).step_by(4) {
            let unit = gap_mod8_law(&odd(n)).unwrap();
            assert_eq!(unit, n % 8 == 3);
        }
    }

    #[test]
    fn permutation_matches_reference() {
        let p = gap_permutation();
        assert_eq!(p.mapping, GAP_PERMUTATION_REFERENCE);
        assert_eq!(p.image(23), Some(3));
        assert_eq!(p.image(27), Some(9));
        assert_eq!(p.image(3), Some(5));
        assert_eq!(p.image(5), None);
    }

    #[test]
    fn permutation_split_is_balanced() {
        let p = gap_permutation();
        let burst_images: Vec<u8> = p
            .mapping
            .iter()
            .filter(|(from, _)| from % 8 == 3)
            .map(|&(_, to)| to % 8)
            .collect();
        let gap_images: Vec<u8> = p
            .mapping
            .iter()
            .filter(|(from, _)| from % 8 == 7)
            .map(|&(_, to)| to % 8)
            .collect();
        assert_eq!(burst_images.iter().filter(|&&m| m == 1).count(), 2);
        assert_eq!(burst_images.iter().filter(|&&m| m == 5).count(), 2);
        assert_eq!(gap_images.iter().filter(|&&m| m == 3).count(), 2);
        assert_eq!(gap_images.iter().filter(|&&m| m == 7).count(), 2);
    }

    #[test]
    fn five_mod_eight_closed_forms() {
        let o = classify_5mod8(29, 0).unwrap();
        assert_eq!(o.burst, RunLen::Exactly(1));
        assert_eq!(o.gap, GapLen::Exactly(1));
        assert_eq!(o.end_mod32, Some(29));
        assert_eq!(o.mixing, Some(Mixing::NonMixing));

        // a = 9: oddpart(28) = 7 ≡ 7 (mod 8), so the gap is ≥ 2
        let o = classify_5mod8(21, 9).unwrap();
        assert_eq!(o.burst, RunLen::Exactly(1));
        assert_eq!(o.gap, GapLen::AtLeast(2));

        for a in 0..64 {
            let o = classify_5mod8(37, a).unwrap();
            assert_eq!(o.mixing == Some(Mixing::NonMixing), a % 2 == 1, "a={a}");
        }
        for a in [0u64, 2, 4, 100] {
            assert_eq!(classify_5mod8(53, a).unwrap().burst, RunLen::Continues);
        }
        assert!(classify_5mod8(9, 0).is_err());
        assert!(classify_5mod8(3, 0).is_err());
    }

    #[test]
    fn one_mod_eight_closed_forms() {
        // 9 → 7 → 11 → 17: burst ends at 9, gap is exactly 2
        let o = l1_symmetry(9, 0).unwrap();
        assert_eq!(o.burst, RunLen::Exactly(1));
        assert_eq!(o.gap, GapLen::Exactly(2));
        assert_eq!(o.end_mod32, Some(9));
        assert_eq!(o.mixing, Some(Mixing::Partial));

        // 25 → 19 → 29: unit gap
        let o = l1_symmetry(25, 0).unwrap();
        assert_eq!(o.gap, GapLen::Exactly(1));
        assert_eq!(o.end_mod32, Some(25));

        let o = l1_symmetry(41, 7).unwrap();
        assert_eq!(o.gap, GapLen::AtLeast(3));
        assert_eq!(o.mixing, Some(Mixing::Full));

        for a in 0..1 << 12 {
            assert_eq!(l1_symmetry(17, a).unwrap().burst, RunLen::Continues);
        }
        assert!(l1_symmetry(5, 0).is_err());
    }

    #[test]
    fn closed_forms_match_simulation_exhaustively() {
        for r in (1u64..64).step_by(4) {
            for a in 0..1 << 12 {
                let closed = if r % 8 == 5 {
                    classify_5mod8(r, a)
                } else {
                    l1_symmetry(r, a)
                }
                .unwrap();
                let measured = simulate_outcome(64 * u128::from(a) + u128::from(r)).unwrap();
                assert!(
                    outcome_agrees(&closed, &measured),
                    "r={r} a={a}: {closed:?} vs {measured:?}"
                );
            }
        }
    }

    #[test]
    fn census_sets() {
        let (unconditional, conditional) = nonmixing_census();
        assert_eq!(unconditional, BTreeSet::from([25, 29, 57]));
        assert_eq!(conditional, BTreeSet::from([21, 37, 53]));
    }

    #[test]
    fn no_nonmixing_outside_census() {
        let allowed = BTreeSet::from([21u64, 25, 29, 37, 53, 57]);
        for r in (1u64..64).step_by(4) {
            for a in 0..1 << 12 {
                let measured = simulate_outcome(64 * a + u128::from(r)).unwrap();
                if measured.mixing == Some(Mixing::NonMixing) {
                    assert!(allowed.contains(&r), "unexpected (1,1) at r={r} a={a}");
                }
            }
        }
    }

    #[test]
    fn oddpart_examples() {
        assert_eq!(oddpart(&BigUint::from(12u32)).unwrap().get(), &BigUint::from(3u32));
        assert_eq!(oddpart(&BigUint::from(7u32)).unwrap().get(), &BigUint::from(7u32));
        assert_eq!(
            oddpart(&(BigUint::from(1u32) << 100)).unwrap().get(),
            &BigUint::from(1u32)
        );
        assert!(oddpart(&BigUint::zero()).is_err());
    }

    #[test]
    fn r41_histogram_is_dyadic() {
        let census = r41_gap_census(1 << 16).unwrap();
        assert_eq!(census.total(), 1 << 16);
        assert_eq!(census.beyond_cap, 0);
        // the closed form guarantees G ≥ 3; each extra gap step costs one
        // power of two in the offset a
        assert_eq!(census.counts.keys().next(), Some(&3));
        assert_eq!(census.counts[&3], 32768);
        assert_eq!(census.counts[&4], 16384);
        assert_eq!(census.counts[&5], 8192);
        for k in 3..=8u32 {
            let ratio = census.counts[&k] as f64 / census.counts[&(k + 1)] as f64;
            assert!((1.8..=2.2).contains(&ratio), "G={k}: ratio {ratio}");
        }
        assert!(r41_gap_census(1000).is_err());
    }

    #[test]
    fn burst_end_state_set_is_stable() {
        let expected = BTreeSet::from([5u8, 9, 21, 25, 29]);
        assert_eq!(burst_end_states(10).unwrap(), expected);
        for b in 8..=12 {
            assert_eq!(burst_end_states(b).unwrap(), expected, "B={b}");
        }
        assert!(burst_end_states(5).is_err());
    }

    #[test]
    fn dominant_channel_algebra() {
        // 64a+25 ≡ 1 (mod 8) and its image 48a+19 ≡ 3 (mod 8)
        for a in 0..1000u128 {
            let n = 64 * a + 25;
            assert_eq!(n % 8, 1);
            assert_eq!(step_u128(n), 48 * a + 19);
            assert_eq!((48 * a + 19) % 8, 3);
        }
    }
}
