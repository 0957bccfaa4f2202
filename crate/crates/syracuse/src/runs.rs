//! Run-length structure of a burst-indicator sequence.
//!
//! A sequence splits as `0^{leading_gap} 1^{L_1} 0^{G_1} 1^{L_2} 0^{G_2} …`;
//! a pair `(L_i, G_i)` is a *complete block* when `G_i ≥ 1`. Only the final
//! pair may be incomplete (`G = 0`, the sequence ends inside a burst).
//!
//! Convention used throughout: the histograms `M_k`, `N_k`, the block count
//! `m`, and `C_T` cover complete blocks only. This is the reading under which
//! `M_1 ≤ m` holds for arbitrary binary input (a trailing-inclusive `M_1`
//! breaks already on `101`), and under which the depth-4/5 set identities in
//! [`crate::blocks`] are exact. The burst density `rho` still counts every
//! burst step, trailing run included.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDecomposition {
    pub leading_gap: usize,
    /// `(L_i, G_i)` in order; every `G` positive except possibly the last.
    pub pairs: Vec<(usize, usize)>,
}

impl RunDecomposition {
    /// Complete blocks: every pair except a trailing `G = 0` one.
    pub fn complete(&self) -> &[(usize, usize)] {
        match self.pairs.last() {
            Some(&(_, 0)) => &self.pairs[..self.pairs.len() - 1],
            _ => &self.pairs,
        }
    }

    pub fn m(&self) -> usize {
        self.complete().len()
    }

    /// Length of a trailing burst run with no gap after it (0 if none).
    pub fn trailing_burst(&self) -> usize {
        match self.pairs.last() {
            Some(&(l, 0)) => l,
            _ => 0,
        }
    }

    pub fn total_len(&self) -> usize {
        self.leading_gap + self.pairs.iter().map(|&(l, g)| l + g).sum::<usize>()
    }

    /// Inverse of [`decompose`]; used by round-trip checks.
    pub fn reserialize(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.leading_gap];
        for &(l, g) in &self.pairs {
            out.extend(std::iter::repeat(1).take(l));
            out.extend(std::iter::repeat(0).take(g));
        }
        out
    }
}

/// Exact run-length encoding of a bit sequence.
pub fn decompose(bits: &[u8]) -> RunDecomposition {
    let n = bits.len();
    let mut i = 0;
    while i < n && bits[i] == 0 {
        i += 1;
    }
    let leading_gap = i;
    let mut pairs = Vec::new();
    while i < n {
        let ls = i;
        while i < n && bits[i] == 1 {
            i += 1;
        }
        let gs = i;
        while i < n && bits[i] == 0 {
            i += 1;
        }
        pairs.push((gs - ls, i - gs));
    }
    RunDecomposition { leading_gap, pairs }
}

/// Step index of the last 1 in each burst run (trailing run included).
pub fn burst_ending_times(d: &RunDecomposition) -> Vec<usize> {
    let mut out = Vec::with_capacity(d.pairs.len());
    let mut t = d.leading_gap;
    for &(l, g) in &d.pairs {
        out.push(t + l - 1);
        t += l + g;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStats {
    /// Sequence length.
    pub t: usize,
    /// Complete-block count.
    pub m: usize,
    /// Total burst steps (numerator of `rho`; includes a trailing burst run).
    pub burst_steps: usize,
    /// `M_k`: number of complete blocks with `L_i = k`.
    pub m_hist: BTreeMap<usize, usize>,
    /// `N_k`: number of complete blocks with `G_i = k`.
    pub n_hist: BTreeMap<usize, usize>,
    /// `C_T = Σ_{i<m} (1[L_i=1] + 1[L_{i+1}=1]) · 1[G_i=1]`.
    pub c_t: usize,
    /// All burst runs, trailing one included (`m` or `m + 1`).
    pub burst_runs: usize,
    pub trailing_burst: usize,
    pub leading_gap: usize,
    /// The complete `(L_i, G_i)` blocks themselves; the cyclic-window
    /// identity checks need them, not just the histograms.
    pub blocks: Vec<(usize, usize)>,
}

impl RunStats {
    pub fn rho(&self) -> BigRational {
        ratio(self.burst_steps, self.t.max(1))
    }

    pub fn q(&self) -> BigRational {
        ratio(self.m, self.t.max(1))
    }

    pub fn m_k(&self, k: usize) -> usize {
        self.m_hist.get(&k).copied().unwrap_or(0)
    }

    pub fn n_k(&self, k: usize) -> usize {
        self.n_hist.get(&k).copied().unwrap_or(0)
    }

    /// `Σ k·M_k`: burst steps inside complete blocks.
    pub fn complete_burst_steps(&self) -> usize {
        self.m_hist.iter().map(|(k, c)| k * c).sum()
    }

    /// `Σ k·N_k`: gap steps inside complete blocks.
    pub fn complete_gap_steps(&self) -> usize {
        self.n_hist.iter().map(|(k, c)| k * c).sum()
    }

    /// Length of the complete-block core `1^{L_1} 0^{G_1} … 1^{L_m} 0^{G_m}`.
    pub fn core_len(&self) -> usize {
        self.complete_burst_steps() + self.complete_gap_steps()
    }

    /// `C` summed cyclically (`i = 1..m`, successor index mod `m`); the
    /// depth-5 set identity is exact with this variant, not the linear one.
    pub fn c_cyclic(&self) -> usize {
        let m = self.blocks.len();
        let mut c = 0;
        for i in 0..m {
            if self.blocks[i].1 == 1 {
                c += (self.blocks[i].0 == 1) as usize;
                c += (self.blocks[(i + 1) % m].0 == 1) as usize;
            }
        }
        c
    }
}

pub(crate) fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// All scalar statistics of a decomposition. `t` must equal the
/// underlying sequence length.
pub fn run_stats(d: &RunDecomposition, t: usize) -> Result<RunStats, Error> {
    let total = d.total_len();
    if total != t {
        return Err(Error::LengthMismatch {
            expected: total,
            got: t,
        });
    }
    let complete = d.complete();
    let mut m_hist = BTreeMap::new();
    let mut n_hist = BTreeMap::new();
    for &(l, g) in complete {
        *m_hist.entry(l).or_insert(0) += 1;
        *n_hist.entry(g).or_insert(0) += 1;
    }
    let mut c_t = 0;
    for i in 0..complete.len().saturating_sub(1) {
        if complete[i].1 == 1 {
            c_t += (complete[i].0 == 1) as usize;
            c_t += (complete[i + 1].0 == 1) as usize;
        }
    }
    Ok(RunStats {
        t,
        m: complete.len(),
        burst_steps: d.pairs.iter().map(|&(l, _)| l).sum(),
        m_hist,
        n_hist,
        c_t,
        burst_runs: d.pairs.len(),
        trailing_burst: d.trailing_burst(),
        leading_gap: d.leading_gap,
        blocks: complete.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Right side minus left side; non-negative iff the bound holds.
    pub slack: BigRational,
}

fn bound(name: &'static str, slack: BigRational) -> BoundCheck {
    BoundCheck {
        holds: slack >= BigRational::from(BigInt::from(0)),
        name,
        slack,
    }
}

/// The five deterministic run-bound inequalities; each holds for every
/// binary sequence, so any violation falsifies the implementation.
pub fn check_run_bounds(s: &RunStats) -> Vec<BoundCheck> {
    let rho = s.rho();
    let q = s.q();
    let one = BigRational::from(BigInt::from(1));
    let m = ratio(s.m, 1);
    let t = ratio(s.t.max(1), 1);
    let min_side = (&one - &rho).min(rho.clone());
    vec![
        bound("q_le_min_rho_1mrho", min_side - &q),
        bound("n1_le_m", &m - ratio(s.n_k(1), 1)),
        bound("m1_le_m", &m - ratio(s.m_k(1), 1)),
        bound("m2_le_m", &m - ratio(s.m_k(2), 1)),
        bound("c_le_2n1", ratio(2 * s.n_k(1), 1) - ratio(s.c_t, 1)),
        bound(
            "m1_plus_2m2_le_rho_t",
            &rho * &t - ratio(s.m_k(1) + 2 * s.m_k(2), 1),
        ),
        bound(
            "m1_plus_m2_rate_le_rho",
            &rho - ratio(s.m_k(1) + s.m_k(2), s.t.max(1)),
        ),
    ]
}
