//! Per-orbit cycle extraction and the dominant-channel balance ledger.
//!
//! A complete cycle is a burst run followed by its gap run. Cycles whose
//! burst ends ≡ 1 (mod 8) feed the dominant channel; the ledger splits
//! those endings into the 9-vs-25 (mod 32) counters and attributes each
//! to either an unconditionally non-mixing source class (start ≡ 25 or 57
//! mod 64) or to mixing. The split identities hold exactly under the
//! complete-cycle convention, so they are asserted hard: a violation
//! falsifies either the implementation or the theory, and both are worth
//! knowing about.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::atlas::Mixing;
use crate::orbit::{bit, OrbitTrace};
use crate::runs::{ratio, RunDecomposition};
use crate::Error;

/// Low `bits` bits of `v` (callers only need moduli up to 64).
fn mod_pow2(v: &BigUint, bits: u32) -> u8 {
    (0..bits).fold(0, |acc, j| acc | (bit(v, u64::from(j)) << j))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub index: usize,
    /// First burst step; the cycle covers `l + g` consecutive steps.
    pub start_step: usize,
    /// Last burst step; the gap occupies the following `g` steps.
    pub end_step: usize,
    pub l: u32,
    pub g: u32,
    /// Valuation shed across the cycle: Σ v₂ over its `l + g` steps.
    pub v: u64,
    pub start_mod64: u8,
    pub start_mod8: u8,
    pub end_mod32: u8,
    pub end_mod8: u8,
    /// Burst end ≡ 1 (mod 8).
    pub dominant: bool,
    /// Burst start ≡ 25 or 57 (mod 64) — the classes that force (1, 1).
    pub uncond_nonmixing: bool,
    pub mixing: Mixing,
}

/// One record per complete (burst, gap) pair of the decomposition; a
/// trailing burst with no gap is not a cycle. Residues are read off the
/// trace values at the burst-start and burst-end steps.
pub fn cycles(trace: &OrbitTrace, d: &RunDecomposition) -> Vec<CycleRecord> {
    debug_assert_eq!(
        d.total_len(),
        trace.steps(),
        "decomposition must come from this trace"
    );
    let mut out = Vec::with_capacity(d.m());
    let mut step = d.leading_gap;
    for (index, &(l, g)) in d.complete().iter().enumerate() {
        let start_step = step;
        let end_step = step + l - 1;
        let v = trace.valuations[start_step..start_step + l + g]
            .iter()
            .map(|&x| u64::from(x))
            .sum();
        let start = &trace.values[start_step];
        let end = &trace.values[end_step];
        let end_mod8 = mod_pow2(end, 3);
        let start_mod64 = mod_pow2(start, 6);
        let mixing = if l >= 2 || g >= 3 {
            Mixing::Full
        } else if g == 2 {
            Mixing::Partial
        } else {
            Mixing::NonMixing
        };
        out.push(CycleRecord {
            index,
            start_step,
            end_step,
            l: l as u32,
            g: g as u32,
            v,
            start_mod64,
            start_mod8: mod_pow2(start, 3),
            end_mod32: mod_pow2(end, 5),
            end_mod8,
            dominant: end_mod8 == 1,
            uncond_nonmixing: start_mod64 == 25 || start_mod64 == 57,
            mixing,
        });
        step += l + g;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiasLedger {
    /// Dominant-channel burst ends ≡ 9 (mod 32).
    pub b9: u64,
    /// Dominant-channel burst ends ≡ 25 (mod 32).
    pub b25: u64,
    /// Dominant cycles sourced in the unconditional classes.
    pub u: u64,
    /// Mixing-sourced contributions to each ending.
    pub m9: u64,
    pub m25: u64,
    /// Complete-cycle burst starts ≡ 25 resp. 57 (mod 64).
    pub s25: u64,
    pub s57: u64,
    pub cycles: Vec<CycleRecord>,
}

fn violation(identity: &'static str, c: &CycleRecord) -> Error {
    Error::LedgerViolation {
        identity,
        witness: format!(
            "cycle {} (steps {}..={}, L={}, G={}, start ≡ {} mod 64, end ≡ {} mod 32)",
            c.index, c.start_step, c.end_step, c.l, c.g, c.start_mod64, c.end_mod32
        ),
    }
}

/// Aggregates one orbit's cycles and hard-checks every exact identity:
/// the per-cycle structure (V ≥ 2L + G, unconditional classes force
/// (1, 1) and an ending of 25), the reachable dominant endings, and the
/// four split identities between the counters.
pub fn ledger(cycle_list: &[CycleRecord]) -> Result<BiasLedger, Error> {
    let mut led = BiasLedger {
        cycles: cycle_list.to_vec(),
        ..BiasLedger::default()
    };
    for c in cycle_list {
        if c.v < 2 * u64::from(c.l) + u64::from(c.g) {
            return Err(violation("v_lower_bound", c));
        }
        if c.dominant != (c.end_mod8 == 1) {
            return Err(violation("dominant_flag", c));
        }
        if c.uncond_nonmixing && !(c.l == 1 && c.g == 1 && c.end_mod32 == 25) {
            return Err(violation("one_sidedness", c));
        }
        if c.dominant && !(c.end_mod32 == 9 || c.end_mod32 == 25) {
            return Err(violation("dominant_end_states", c));
        }
        match c.start_mod64 {
            25 => led.s25 += 1,
            57 => led.s57 += 1,
            _ => {}
        }
        if !c.dominant {
            continue;
        }
        if c.end_mod32 == 9 {
            led.b9 += 1;
            if c.uncond_nonmixing {
                return Err(violation("nine_from_mixing", c));
            }
            led.m9 += 1;
        } else {
            led.b25 += 1;
            if c.uncond_nonmixing {
                led.u += 1;
            } else {
                led.m25 += 1;
            }
        }
    }
    let checks: [(&'static str, bool); 4] = [
        ("b25_split", led.b25 == led.u + led.m25),
        ("b9_split", led.b9 == led.m9),
        (
            "signed_split",
            led.b9 as i64 - led.b25 as i64 == (led.m9 as i64 - led.m25 as i64) - led.u as i64,
        ),
        ("u_from_starts", led.u == led.s25 + led.s57),
    ];
    for (identity, holds) in checks {
        if !holds {
            return Err(Error::LedgerViolation {
                identity,
                witness: format!(
                    "B9={} B25={} U={} M9={} M25={} S25={} S57={}",
                    led.b9, led.b25, led.u, led.m9, led.m25, led.s25, led.s57
                ),
            });
        }
    }
    Ok(led)
}

/// |B9/(B9+B25) − 1/2|, or `None` when the orbit never feeds the
/// dominant channel.
pub fn open_problem_deviation(led: &BiasLedger) -> Option<BigRational> {
    let total = led.b9 + led.b25;
    if total == 0 {
        return None;
    }
    let frac = ratio(led.b9 as usize, total as usize);
    Some((frac - ratio(1, 2)).abs())
}

/// Fraction of cycles with L ≥ 2 or G ≥ 3.
pub fn mixing_fraction(cycle_list: &[CycleRecord]) -> Result<BigRational, Error> {
    if cycle_list.is_empty() {
        return Err(Error::EmptyCycles);
    }
    let full = cycle_list
        .iter()
        .filter(|c| c.mixing == Mixing::Full)
        .count();
    Ok(ratio(full, cycle_list.len()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancePoint {
    /// Ordinal among dominant-channel cycles, 1-based.
    pub k: u64,
    /// Cumulative share of 9-endings.
    pub fraction: BigRational,
    pub lo1: f64,
    pub hi1: f64,
    pub lo2: f64,
    pub hi2: f64,
}

/// Running 9-vs-25 balance after each dominant-channel cycle, with the
/// fair-coin ±1σ and ±2σ envelopes 1/2 ± c/(2√k). Bands are emitted
/// unclamped; the k = 1 two-sigma band deliberately spills past [0, 1].
pub fn running_balance(cycle_list: &[CycleRecord]) -> Vec<BalancePoint> {
    let mut nines = 0u64;
    let mut k = 0u64;
    let mut out = Vec::new();
    for c in cycle_list.iter().filter(|c| c.dominant) {
        k += 1;
        if c.end_mod32 == 9 {
            nines += 1;
        }
        let sigma = 0.5 / (k as f64).sqrt();
        out.push(BalancePoint {
            k,
            fraction: ratio(nines as usize, k as usize),
            lo1: 0.5 - sigma,
            hi1: 0.5 + sigma,
            lo2: 0.5 - 2.0 * sigma,
            hi2: 0.5 + 2.0 * sigma,
        });
    }
    out
}

/// Default stand-in for the unspecified additive constant in the
/// bit-growth floor; calibrated so that no orbit in the test corpus
/// violates the diagnostic (worst observed deficit ≈ 7.3).
pub const DEFAULT_GROWTH_SLACK: f64 = 16.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BitGrowthPoint {
    pub t: usize,
    /// Burst density of the prefix (or the caller's override).
    pub rho: f64,
    pub bits: u64,
    /// `B₀ + (ρ + log₂3 − 2)·t − log₂t`, before subtracting the slack.
    pub floor: f64,
    pub deficit: f64,
    /// The floor only binds where ρ clears 2 − log₂3 ≈ 0.415.
    pub applicable: bool,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BitGrowthReport {
    pub threshold: f64,
    pub slack: f64,
    pub points: Vec<BitGrowthPoint>,
    pub violations: usize,
    /// Worst deficit over applicable prefixes.
    pub max_deficit: Option<f64>,
}

/// Bit-length floor diagnostic: for each prefix length t ≥ 1, compare the
/// value's bit length against `B₀ + (ρ + log₂3 − 2)·t − log₂t − slack`.
/// With `rho0 = None` the prefix's realized burst density is used; a
/// `Some` value pins ρ for every prefix instead.
pub fn bit_growth_diagnostic(trace: &OrbitTrace, rho0: Option<f64>, slack: f64) -> BitGrowthReport {
    let log2_3 = 3f64.log2();
    let threshold = 2.0 - log2_3;
    let b0 = trace.values[0].bits() as f64;
    let mut burst_prefix = 0u64;
    let mut points = Vec::with_capacity(trace.steps());
    let mut violations = 0;
    let mut max_deficit: Option<f64> = None;
    for t in 1..=trace.steps() {
        burst_prefix += u64::from(trace.bursts[t - 1]);
        let rho = rho0.unwrap_or(burst_prefix as f64 / t as f64);
        let applicable = rho > threshold;
        let bits = trace.values[t].bits();
        let floor = b0 + (rho + log2_3 - 2.0) * t as f64 - (t as f64).log2();
        let deficit = floor - bits as f64;
        let violated = applicable && deficit > slack;
        if violated {
            violations += 1;
        }
        if applicable {
            max_deficit = Some(max_deficit.map_or(deficit, |d| d.max(deficit)));
        }
        points.push(BitGrowthPoint {
            t,
            rho,
            bits,
            floor,
            deficit,
            applicable,
            violated,
        });
    }
    BitGrowthReport {
        threshold,
        slack,
        points,
        violations,
        max_deficit,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionCensus {
    pub k: u32,
    pub b: u64,
    /// Visits bucketed by `(n_t − b)/2^K mod 8`.
    pub bins: [u64; 8],
    pub visits: u64,
}

impl ExtensionCensus {
    /// Largest |bin share − 1/8|; `None` with no visits.
    pub fn max_deviation(&self) -> Option<BigRational> {
        if self.visits == 0 {
            return None;
        }
        self.bins
            .iter()
            .map(|&c| (ratio(c as usize, self.visits as usize) - ratio(1, 8)).abs())
            .max()
    }
}

/// Census of the spectator bits above a fixed low window: collects every
/// trace value ≡ b (mod 2^K) and buckets the next three bits up.
pub fn extension_indices(trace: &OrbitTrace, k: u32, b: u64) -> Result<ExtensionCensus, Error> {
    if !(3..=63).contains(&k) {
        return Err(Error::DepthOutOfRange {
            got: k,
            min: 3,
            max: 63,
        });
    }
    let b = b % (1u64 << k);
    let mut bins = [0u64; 8];
    let mut visits = 0;
    for v in &trace.values {
        let low = (0..k).fold(0u64, |acc, j| {
            acc | (u64::from(bit(v, u64::from(j))) << j)
        });
        if low == b {
            let e = (0..3u32).fold(0u8, |acc, j| {
                acc | (bit(v, u64::from(k + j)) << j)
            });
            bins[usize::from(e)] += 1;
            visits += 1;
        }
    }
    Ok(ExtensionCensus { k, b, bins, visits })
}

/// log₂ with enough headroom for values past f64 range.
fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        v.to_f64().expect("fits in f64 range").log2()
    } else {
        let shift = bits - 53;
        let top = (v >> shift).to_f64().expect("53 bits fit");
        top.log2() + shift as f64
    }
}

/// |Σ v_t − T·log₂3 − log₂(n₀/n_T)| — the telescoped valuation identity;
/// stays below 1 on terminated orbits because each step's correction is
/// log₂(1 + 1/(3n_t)) and the small values are visited at most once.
/// `None` for traces cut off by the step cap.
pub fn v_conservation_defect(trace: &OrbitTrace) -> Option<f64> {
    if !trace.terminated {
        return None;
    }
    let sum_v: f64 = trace.valuations.iter().map(|&v| f64::from(v)).sum();
    let t = trace.steps() as f64;
    let log_ratio = log2_big(trace.n0()) - log2_big(trace.final_value());
    Some((sum_v - t * 3f64.log2() - log_ratio).abs())
}
