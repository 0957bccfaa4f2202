//! Empirical block frequencies and the exact depth-3/4/5 identities.
//!
//! Two window conventions coexist and are both load-bearing:
//!
//! * Sliding, non-wrapping windows over the whole sequence (`T − K + 2` of
//!   them). The pair/triple identities hold here up to an explicit boundary
//!   constant: residual ≤ 2/T at depth 3 and ≤ 3/T at depth 4.
//! * Cyclic windows over the complete-block core `1^{L_1} 0^{G_1} … 0^{G_m}`
//!   (leading gap and trailing partial burst dropped, wrap-around allowed).
//!   Under this convention the expanding-set identities and envelopes are
//!   exact integer statements with zero residual.
//!
//! Words are `K−1` bits packed MSB-first into a `usize` index.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::runs::{ratio, RunStats};
use crate::Error;

/// Sliding-window residual bound at depth 3: `max |ν(w) − pred| ≤ 2/T`.
pub const K3_BOUND: usize = 2;
/// Sliding-window residual bound at depth 4: `≤ 3/T`.
pub const K4_BOUND: usize = 3;
/// Depth-5 reconstruction residual bound: `≤ 4/T`.
pub const K5_BOUND: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFrequencyTable {
    /// Depth `K`; the table counts `(K−1)`-bit words.
    pub k: usize,
    /// `counts[w]` for each of the `2^{K−1}` words.
    pub counts: Vec<usize>,
    /// Window count: `T − K + 2` sliding, core length cyclic.
    pub denom: usize,
    /// Bernoulli reference parameter (the sequence's burst density unless
    /// overridden).
    pub rho_ref: BigRational,
    /// True for cyclic complete-block-core tables.
    pub cyclic: bool,
}

impl BlockFrequencyTable {
    pub fn word_bits(&self) -> usize {
        self.k - 1
    }

    pub fn nu(&self, w: usize) -> BigRational {
        ratio(self.counts[w], self.denom)
    }

    /// `ρ^{s(w)} (1−ρ)^{K−1−s(w)}` for the reference parameter.
    pub fn bernoulli_ref(&self, w: usize) -> BigRational {
        let ones = (w & ((1 << self.word_bits()) - 1)).count_ones() as i32;
        let rho = &self.rho_ref;
        let co = BigRational::one() - rho;
        rho.pow(ones) * co.pow(self.word_bits() as i32 - ones)
    }

    pub fn with_rho_ref(mut self, rho: BigRational) -> Self {
        self.rho_ref = rho;
        self
    }

    /// Largest marginal mismatch `|Σ_c ν(cw) − Σ_c ν(wc)|` over `(K−2)`-bit
    /// words; at most `1/denom` for sliding tables, exactly 0 for cyclic.
    pub fn consistency_defect(&self) -> BigRational {
        let wb = self.word_bits();
        let mut worst = BigRational::zero();
        for w in 0..(1usize << (wb - 1)) {
            let left: usize = (0..2).map(|c| self.counts[(c << (wb - 1)) | w]).sum();
            let right: usize = (0..2).map(|c| self.counts[(w << 1) | c]).sum();
            let d = (ratio(left, self.denom) - ratio(right, self.denom)).abs();
            worst = worst.max(d);
        }
        worst
    }
}

/// Sliding `(K−1)`-bit window counts over `bits`; needs `len ≥ K−1`.
pub fn block_frequencies(bits: &[u8], k: usize) -> Result<BlockFrequencyTable, Error> {
    assert!(k >= 3, "depth starts at 3");
    let w = k - 1;
    if bits.len() < w {
        return Err(Error::TooShort {
            len: bits.len(),
            depth: k,
        });
    }
    let mut counts = vec![0usize; 1 << w];
    let mut word: usize = 0;
    let mask = (1 << w) - 1;
    for (i, &b) in bits.iter().enumerate() {
        word = ((word << 1) | b as usize) & mask;
        if i + 1 >= w {
            counts[word] += 1;
        }
    }
    let denom = bits.len() - k + 2;
    debug_assert_eq!(counts.iter().sum::<usize>(), denom);
    let ones = bits.iter().filter(|&&b| b == 1).count();
    Ok(BlockFrequencyTable {
        k,
        counts,
        denom,
        rho_ref: ratio(ones, bits.len()),
        cyclic: false,
    })
}

/// Cyclic `(K−1)`-bit window counts over the complete-block core. Returns
/// `None` when there are no complete blocks. `rho_ref` is the core density
/// `Σ L_i / T_c`.
pub fn complete_block_table(blocks: &[(usize, usize)], k: usize) -> Option<BlockFrequencyTable> {
    assert!(k >= 3, "depth starts at 3");
    if blocks.is_empty() {
        return None;
    }
    let mut core: Vec<u8> = Vec::new();
    for &(l, g) in blocks {
        core.extend(std::iter::repeat(1).take(l));
        core.extend(std::iter::repeat(0).take(g));
    }
    let tc = core.len();
    let w = k - 1;
    let mut counts = vec![0usize; 1 << w];
    for t in 0..tc {
        let mut word = 0usize;
        for j in 0..w {
            word = (word << 1) | core[(t + j) % tc] as usize;
        }
        counts[word] += 1;
    }
    let ones = blocks.iter().map(|&(l, _)| l).sum::<usize>();
    Some(BlockFrequencyTable {
        k,
        counts,
        denom: tc,
        rho_ref: ratio(ones, tc),
        cyclic: true,
    })
}

/// Total-variation distance `½ Σ_w |ν(w) − ρ^{s(w)}(1−ρ)^{K−1−s(w)}|`.
pub fn block_tv(f: &BlockFrequencyTable) -> BigRational {
    let mut sum = BigRational::zero();
    for w in 0..f.counts.len() {
        sum += (f.nu(w) - f.bernoulli_ref(w)).abs();
    }
    sum / BigRational::from(BigInt::from(2))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityEntry {
    /// Word rendered MSB-first, e.g. `0b01` at depth 3 is "01".
    pub word: usize,
    pub measured: BigRational,
    pub predicted: BigRational,
    pub residual: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub entries: Vec<IdentityEntry>,
    pub max_residual: BigRational,
    /// `c/T` with the depth's boundary constant.
    pub bound: BigRational,
    pub passes: bool,
}

fn identity_report(
    entries: Vec<IdentityEntry>,
    bound_c: usize,
    t: usize,
) -> IdentityReport {
    let max_residual = entries
        .iter()
        .map(|e| e.residual.clone())
        .max()
        .unwrap_or_else(BigRational::zero);
    let bound = ratio(bound_c, t.max(1));
    IdentityReport {
        passes: max_residual <= bound,
        entries,
        max_residual,
        bound,
    }
}

/// Depth-3 pair identities: `ν(00) = 1−ρ−q`, `ν(01) = ν(10) = q`,
/// `ν(11) = ρ−q`, each within [`K3_BOUND`]`/T` for the sliding table.
pub fn k3_identities(s: &RunStats, f: &BlockFrequencyTable) -> IdentityReport {
    assert_eq!(f.k, 3, "depth-3 table required");
    let rho = s.rho();
    let q = s.q();
    let one = BigRational::one();
    let preds = [
        (0b00, &one - &rho - &q),
        (0b01, q.clone()),
        (0b10, q.clone()),
        (0b11, &rho - &q),
    ];
    let entries = preds
        .into_iter()
        .map(|(w, p)| {
            let measured = f.nu(w);
            let residual = (&measured - &p).abs();
            IdentityEntry {
                word: w,
                measured,
                predicted: p,
                residual,
            }
        })
        .collect();
    identity_report(entries, K3_BOUND, s.t)
}

/// The eight depth-4 frequencies as exact functions of `(ρ, q, a, b)` with
/// `a = ν(000)`, `b = ν(010)`. The eight values sum to 1 identically.
pub fn k4_decomposition(
    rho: &BigRational,
    q: &BigRational,
    a: &BigRational,
    b: &BigRational,
) -> [BigRational; 8] {
    let one = BigRational::one();
    let co = &one - rho;
    let edge = &co - q - a; // ν(001) = ν(100)
    let split = q - b; // ν(011) = ν(110)
    [
        a.clone(),
        edge.clone(),
        b.clone(),
        split.clone(),
        edge,
        q + q - &co + a,
        split,
        rho - q - q + b,
    ]
}

/// Measures `a`, `b` from a sliding depth-4 table and compares the remaining
/// six entries against [`k4_decomposition`]; residuals ≤ [`K4_BOUND`]`/T`.
pub fn k4_identities(s: &RunStats, f: &BlockFrequencyTable) -> IdentityReport {
    assert_eq!(f.k, 4, "depth-4 table required");
    let preds = k4_decomposition(&s.rho(), &s.q(), &f.nu(0b000), &f.nu(0b010));
    let entries = (0..8)
        .filter(|&w| w != 0b000 && w != 0b010)
        .map(|w| {
            let measured = f.nu(w);
            let predicted = preds[w].clone();
            let residual = (&measured - &predicted).abs();
            IdentityEntry {
                word: w,
                measured,
                predicted,
                residual,
            }
        })
        .collect();
    identity_report(entries, K4_BOUND, s.t)
}

/// The four depth-5 frequencies not determined by lower depths:
/// `(ν(0000), ν(0010), ν(0100), ν(0110))`.
pub fn k5_free_parameters(f: &BlockFrequencyTable) -> [BigRational; 4] {
    assert_eq!(f.k, 5, "depth-5 table required");
    [f.nu(0b0000), f.nu(0b0010), f.nu(0b0100), f.nu(0b0110)]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct K5Report {
    pub pins: [BigRational; 4],
    /// All sixteen frequencies reconstructed from `(ρ, q, a, b)` plus the
    /// four pins via the window-marginal constraints.
    pub solved: Vec<BigRational>,
    pub max_residual: BigRational,
    /// Defect of the four marginal equations not consumed by the solve.
    pub marginal_defect: BigRational,
    /// Rank of the 16 marginal constraint rows, computed by elimination.
    pub rank: usize,
    pub bound: BigRational,
    pub passes: bool,
}

/// Rank of the depth-5 marginal system (left and right 3-bit marginals of
/// 4-bit words), computed over the rationals rather than asserted.
pub fn k5_marginal_rank() -> usize {
    // rows: for u in 0..8, Σ_c x[u·c] and Σ_c x[c·u]
    let mut mat: Vec<[i64; 16]> = Vec::new();
    for u in 0..8usize {
        let mut row = [0i64; 16];
        for c in 0..2 {
            row[(u << 1) | c] = 1;
        }
        mat.push(row);
        let mut row = [0i64; 16];
        for c in 0..2 {
            row[(c << 3) | u] = 1;
        }
        mat.push(row);
    }
    // fraction-free elimination is overkill: entries stay tiny
    let mut rank = 0;
    let mut fm: Vec<Vec<BigRational>> = mat
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from(BigInt::from(x))).collect())
        .collect();
    for col in 0..16 {
        let Some(piv) = (rank..fm.len()).find(|&r| !fm[r][col].is_zero()) else {
            continue;
        };
        fm.swap(rank, piv);
        let inv = fm[rank][col].clone();
        for x in fm[rank].iter_mut() {
            *x /= &inv;
        }
        for r in 0..fm.len() {
            if r != rank && !fm[r][col].is_zero() {
                let f = fm[r][col].clone();
                for c in 0..16 {
                    let s = &fm[rank][c] * &f;
                    fm[r][c] -= s;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Reconstructs the full depth-5 table from `(ρ, q, a, b)` and the four free
/// parameters, then compares against the measured table.
///
/// Solve order: the pins give the words `0u0`; the `u·c` marginals with `u`
/// starting in 0 give the words `0u1`; the `c·u` marginals then give every
/// word starting in 1. The four `u·c` marginals with `u` starting in 1 are
/// left over and reported as `marginal_defect`. Marginal right sides use the
/// depth-4 formula values, so the reconstruction exercises the whole
/// parameter chain, not just the depth-5 table.
pub fn k5_reconstruction(
    s: &RunStats,
    f4: &BlockFrequencyTable,
    f5: &BlockFrequencyTable,
) -> K5Report {
    assert_eq!(f4.k, 4, "depth-4 table required");
    assert_eq!(f5.k, 5, "depth-5 table required");
    let nu4 = k4_decomposition(&s.rho(), &s.q(), &f4.nu(0b000), &f4.nu(0b010));
    let pins = k5_free_parameters(f5);

    let mut x: Vec<Option<BigRational>> = vec![None; 16];
    for (i, p) in pins.iter().enumerate() {
        // pin words are 0·i₂i₃·0
        x[i << 1] = Some(p.clone());
    }
    for u in 0..4usize {
        // left marginal of u (leading 0): x[u0] + x[u1] = ν₄(u)
        let known = x[u << 1].clone().unwrap();
        x[(u << 1) | 1] = Some(&nu4[u] - known);
    }
    for u in 0..8usize {
        // right marginal: x[0u] + x[1u] = ν₄(u)
        let known = x[u].clone().unwrap();
        x[0b1000 | u] = Some(&nu4[u] - known);
    }
    let solved: Vec<BigRational> = x.into_iter().map(Option::unwrap).collect();

    let max_residual = (0..16)
        .map(|w| (&solved[w] - f5.nu(w)).abs())
        .max()
        .unwrap();
    let marginal_defect = (4..8)
        .map(|u| (&solved[u << 1] + &solved[(u << 1) | 1] - &nu4[u]).abs())
        .max()
        .unwrap();
    let bound = ratio(K5_BOUND, s.t.max(1));
    K5Report {
        passes: max_residual <= bound,
        pins,
        solved,
        max_residual,
        marginal_defect,
        rank: k5_marginal_rank(),
        bound,
    }
}

/// Cumulative free-parameter count through depth `K`: `2^{K−2}`.
pub fn parameter_count(k: u32) -> u64 {
    assert!(k >= 3);
    1 << (k - 2)
}

/// Parameters first appearing at depth `K`: 2 at the base depth, `2^{K−3}`
/// after.
pub fn new_parameter_count(k: u32) -> u64 {
    assert!(k >= 3);
    if k == 3 {
        2
    } else {
        1 << (k - 3)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandingSet {
    /// Words whose frequency strictly exceeds the Bernoulli reference.
    pub words: Vec<usize>,
    /// Reference parameter was 0 or 1, making the comparison vacuous.
    pub degenerate: bool,
}

/// Words with `ν(w) > ρ^{s(w)}(1−ρ)^{K−1−s(w)}` (strict).
pub fn expanding_set(f: &BlockFrequencyTable) -> ExpandingSet {
    let degenerate = f.rho_ref.is_zero() || f.rho_ref.is_one();
    let words = (0..f.counts.len())
        .filter(|&w| f.nu(w) > f.bernoulli_ref(w))
        .collect();
    ExpandingSet { words, degenerate }
}

/// Depth-4 set with the exact count identity `Σ L + N₁ − M₁`.
pub const E4_CANONICAL: [usize; 4] = [0b101, 0b011, 0b110, 0b111];
/// Depth-5 set with the exact count identity `Σ L − m − M₂ + 2N₁ − C_cyc`.
pub const E5_CANONICAL: [usize; 5] = [0b1111, 0b1110, 0b0111, 0b1101, 0b1011];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandingReport {
    /// Cyclic-core window count of [`E4_CANONICAL`] and its closed form;
    /// equal by construction, the difference is still measured.
    pub e4_count: usize,
    pub e4_closed_form: i64,
    pub e4_residual: BigRational,
    pub e5_count: usize,
    pub e5_closed_form: i64,
    pub e5_residual: BigRational,
    /// Empirically exceeding words from the sliding tables.
    pub e4_empirical: ExpandingSet,
    pub e5_empirical: ExpandingSet,
    pub e4_matches_canonical: bool,
    pub e5_matches_canonical: bool,
    /// Core length; the cyclic frequencies are counts over this.
    pub core_len: usize,
}

fn canonical_counts(s: &RunStats) -> Option<(usize, usize, usize)> {
    let f4c = complete_block_table(&s.blocks, 4)?;
    let f5c = complete_block_table(&s.blocks, 5)?;
    let c4: usize = E4_CANONICAL.iter().map(|&w| f4c.counts[w]).sum();
    let c5: usize = E5_CANONICAL.iter().map(|&w| f5c.counts[w]).sum();
    Some((c4, c5, f4c.denom))
}

/// The two expanding-set identities, exact (zero residual) under the cyclic
/// complete-block convention. Also reports whether the empirically exceeding
/// words of the sliding tables coincide with the canonical sets; on real
/// orbits they typically do not, which is why the identities are stated for
/// the canonical sets. Returns `None` when there are no complete blocks.
pub fn expanding_identities(
    s: &RunStats,
    f4: &BlockFrequencyTable,
    f5: &BlockFrequencyTable,
) -> Option<ExpandingReport> {
    let (e4_count, e5_count, core_len) = canonical_counts(s)?;
    let sl = s.complete_burst_steps() as i64;
    let (m, m1, m2, n1) = (
        s.m as i64,
        s.m_k(1) as i64,
        s.m_k(2) as i64,
        s.n_k(1) as i64,
    );
    let e4_closed_form = sl + n1 - m1;
    let e5_closed_form = sl - m - m2 + 2 * n1 - s.c_cyclic() as i64;
    let e4_empirical = expanding_set(f4);
    let e5_empirical = expanding_set(f5);
    let e4_matches_canonical = {
        let mut canon = E4_CANONICAL.to_vec();
        canon.sort_unstable();
        e4_empirical.words == canon
    };
    let e5_matches_canonical = {
        let mut canon = E5_CANONICAL.to_vec();
        canon.sort_unstable();
        e5_empirical.words == canon
    };
    Some(ExpandingReport {
        e4_residual: ratio(e4_count, core_len) - ratio_i(e4_closed_form, core_len),
        e5_residual: ratio(e5_count, core_len) - ratio_i(e5_closed_form, core_len),
        e4_count,
        e4_closed_form,
        e5_count,
        e5_closed_form,
        e4_empirical,
        e5_empirical,
        e4_matches_canonical,
        e5_matches_canonical,
        core_len,
    })
}

fn ratio_i(num: i64, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeReport {
    /// False when the sequence has no complete blocks and no burst steps
    /// (vacuous case) — the bounds then hold trivially.
    pub defined: bool,
    /// Slacks of `ρ−q ≤ ν(E₄)`, `ν(E₄) ≤ ρ+q`, `ρ−2q ≤ ν(E₅)`,
    /// `ν(E₅) ≤ ρ+q` under the cyclic complete-block convention.
    pub slacks: [BigRational; 4],
    pub holds: bool,
}

/// Envelope bounds on the canonical expanding-set frequencies, evaluated
/// under the same complete-block convention as the identities (density and
/// alternation rate of the core). In integer form:
/// `ΣL − m ≤ count₄ ≤ ΣL + m` and `ΣL − 2m ≤ count₅ ≤ ΣL + m`.
pub fn envelopes(s: &RunStats) -> EnvelopeReport {
    match canonical_counts(s) {
        None => EnvelopeReport {
            defined: false,
            slacks: std::array::from_fn(|_| BigRational::zero()),
            holds: true,
        },
        Some((c4, c5, _)) => {
            let sl = s.complete_burst_steps() as i64;
            let m = s.m as i64;
            let (c4, c5) = (c4 as i64, c5 as i64);
            let slacks_i = [c4 - (sl - m), (sl + m) - c4, c5 - (sl - 2 * m), (sl + m) - c5];
            EnvelopeReport {
                defined: true,
                holds: slacks_i.iter().all(|&x| x >= 0),
                slacks: slacks_i.map(|x| BigRational::from(BigInt::from(x))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{orbit, Odd, DEFAULT_STEP_CAP};
    use crate::runs::{decompose, run_stats};

    fn stats_of(bits: &[u8]) -> RunStats {
        run_stats(&decompose(bits), bits.len()).unwrap()
    }

    fn orbit_bits(n0: u64) -> Vec<u8> {
        orbit(&Odd::new(n0).unwrap(), DEFAULT_STEP_CAP).bursts
    }

    #[test]
    fn sliding_counts_basic() {
        let f = block_frequencies(&[1, 0, 1, 0], 3).unwrap();
        assert_eq!(f.denom, 3);
        assert_eq!(f.counts[0b10], 2);
        assert_eq!(f.counts[0b01], 1);
        assert_eq!(f.counts[0b00] + f.counts[0b11], 0);

        let f = block_frequencies(&[1; 10], 4).unwrap();
        assert_eq!(f.nu(0b111), ratio(8, 8));

        assert!(matches!(
            block_frequencies(&[1, 0], 4),
            Err(Error::TooShort { len: 2, depth: 4 })
        ));
    }

    #[test]
    fn table_consistency_bound() {
        for n0 in [27u64, 97, 703, 837799] {
            let bits = orbit_bits(n0);
            for k in 3..=6 {
                let f = block_frequencies(&bits, k).unwrap();
                assert_eq!(f.counts.iter().sum::<usize>(), f.denom);
                assert!(f.consistency_defect() <= ratio(1, f.denom), "n0={n0} K={k}");
            }
        }
    }

    #[test]
    fn cyclic_table_consistency_is_exact() {
        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        for k in 3..=6 {
            let f = complete_block_table(&s.blocks, k).unwrap();
            assert_eq!(f.denom, s.core_len());
            assert_eq!(f.consistency_defect(), ratio(0, 1), "K={k}");
        }
    }

    #[test]
    fn tv_of_exact_bernoulli_is_zero() {
        // 1/2-density sequence whose sliding pair counts match Bernoulli(1/2)
        // exactly: 4 windows, one of each pair.
        let bits = [1, 1, 0, 0, 1];
        let f = block_frequencies(&bits, 3).unwrap();
        let f = f.with_rho_ref(ratio(1, 2));
        assert_eq!(block_tv(&f), ratio(0, 1));
    }

    #[test]
    fn tv_alternating() {
        let bits: Vec<u8> = (0..20).map(|i| (i % 2 == 0) as u8).collect();
        let f = block_frequencies(&bits, 3).unwrap();
        assert_eq!(f.rho_ref, ratio(1, 2));
        assert_eq!(block_tv(&f), ratio(1, 2));
    }

    #[test]
    fn tv_scalar_cross_check_orbit_27() {
        // ε₃ within 2/T of 2|q − ρ(1−ρ)|
        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        let f = block_frequencies(&bits, 3).unwrap();
        let eps = block_tv(&f);
        let rho = s.rho();
        let scalar = (s.q() - &rho * (BigRational::one() - &rho)).abs()
            * BigRational::from(BigInt::from(2));
        assert!((eps - scalar).abs() <= ratio(2, 41));
    }

    #[test]
    fn k3_identities_cases() {
        let bits: Vec<u8> = (0..14).map(|i| (i % 2 == 0) as u8).collect();
        let s = stats_of(&bits);
        let rep = k3_identities(&s, &block_frequencies(&bits, 3).unwrap());
        assert!(rep.passes);
        assert!(rep.max_residual <= ratio(2, 14));

        let bits = [0u8; 12];
        let s = stats_of(&bits);
        let rep = k3_identities(&s, &block_frequencies(&bits, 3).unwrap());
        assert_eq!(rep.max_residual, ratio(0, 1));

        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        let rep = k3_identities(&s, &block_frequencies(&bits, 3).unwrap());
        assert!(rep.passes);
    }

    #[test]
    fn k4_decomposition_degenerate_rows() {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let t = k4_decomposition(&zero, &zero, &one, &zero);
        assert_eq!(t[0b000], one);
        assert!(t.iter().enumerate().all(|(w, v)| w == 0 || v.is_zero()));

        let t = k4_decomposition(&one, &zero, &zero, &zero);
        assert_eq!(t[0b111], one);
        assert!((0..7).all(|w| t[w].is_zero()));
    }

    #[test]
    fn k4_rows_sum_to_one() {
        // algebraic identity, spot-checked on assorted rationals
        for (rn, qn, an, bn) in [(1i64, 1, 1, 1), (17, 9, 3, 2), (2, 5, 7, 1)] {
            let r = BigRational::new(BigInt::from(rn), BigInt::from(41));
            let q = BigRational::new(BigInt::from(qn), BigInt::from(41));
            let a = BigRational::new(BigInt::from(an), BigInt::from(39));
            let b = BigRational::new(BigInt::from(bn), BigInt::from(39));
            let sum: BigRational = k4_decomposition(&r, &q, &a, &b).iter().sum();
            assert_eq!(sum, BigRational::one());
        }
    }

    #[test]
    fn k4_identities_orbit_27() {
        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        let rep = k4_identities(&s, &block_frequencies(&bits, 4).unwrap());
        assert!(rep.passes, "max {} bound {}", rep.max_residual, rep.bound);
    }

    #[test]
    fn k5_free_parameter_edges() {
        let f = block_frequencies(&[0u8; 12], 5).unwrap();
        let p = k5_free_parameters(&f);
        assert_eq!(p, [ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)]);

        let f = block_frequencies(&[1u8; 12], 5).unwrap();
        let p = k5_free_parameters(&f);
        assert!(p.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn k5_rank_is_twelve() {
        assert_eq!(k5_marginal_rank(), 12);
    }

    #[test]
    fn k5_reconstruction_orbit_27() {
        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        let rep = k5_reconstruction(
            &s,
            &block_frequencies(&bits, 4).unwrap(),
            &block_frequencies(&bits, 5).unwrap(),
        );
        assert!(rep.passes);
        assert_eq!(rep.rank, 12);
        // frozen from the reference computation
        assert_eq!(
            rep.max_residual,
            BigRational::new(BigInt::from(34), BigInt::from(533))
        );
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(parameter_count(3), 2);
        assert_eq!(parameter_count(5), 8);
        assert_eq!(parameter_count(6), 16);
        assert_eq!(new_parameter_count(3), 2);
        assert_eq!(new_parameter_count(4), 2);
        assert_eq!(new_parameter_count(6), 8);
    }

    #[test]
    fn expanding_set_examples() {
        // exact Bernoulli table → empty set
        let f = block_frequencies(&[1, 1, 0, 0, 1], 3)
            .unwrap()
            .with_rho_ref(ratio(1, 2));
        assert!(expanding_set(&f).words.is_empty());

        // all-zero sequence with overridden reference → {000}
        let f = block_frequencies(&[0u8; 10], 4)
            .unwrap()
            .with_rho_ref(ratio(1, 2));
        let e = expanding_set(&f);
        assert_eq!(e.words, vec![0b000]);
        assert!(!e.degenerate);

        // degenerate reference flagged
        let f = block_frequencies(&[0u8; 10], 4).unwrap();
        assert!(expanding_set(&f).degenerate);
    }

    #[test]
    fn expanding_identities_exact_on_orbits() {
        for n0 in [27u64, 97, 703, 871, 159487, 837799] {
            let bits = orbit_bits(n0);
            let s = stats_of(&bits);
            let rep = expanding_identities(
                &s,
                &block_frequencies(&bits, 4).unwrap(),
                &block_frequencies(&bits, 5).unwrap(),
            )
            .unwrap();
            assert_eq!(rep.e4_residual, ratio(0, 1), "n0={n0}");
            assert_eq!(rep.e5_residual, ratio(0, 1), "n0={n0}");
            assert_eq!(rep.e4_count as i64, rep.e4_closed_form, "n0={n0}");
            assert_eq!(rep.e5_count as i64, rep.e5_closed_form, "n0={n0}");
        }
    }

    #[test]
    fn empirical_sets_differ_from_canonical_on_27() {
        let bits = orbit_bits(27);
        let s = stats_of(&bits);
        let rep = expanding_identities(
            &s,
            &block_frequencies(&bits, 4).unwrap(),
            &block_frequencies(&bits, 5).unwrap(),
        )
        .unwrap();
        assert!(!rep.e4_matches_canonical);
    }

    #[test]
    fn envelopes_hold() {
        for n0 in [27u64, 97, 703, 871, 837799, 8400511] {
            let bits = orbit_bits(n0);
            let rep = envelopes(&stats_of(&bits));
            assert!(rep.defined && rep.holds, "n0={n0}");
        }
        // vacuous case
        let rep = envelopes(&stats_of(&[0u8; 8]));
        assert!(!rep.defined && rep.holds);
    }
}
