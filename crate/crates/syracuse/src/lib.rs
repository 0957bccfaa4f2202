//! Measurement toolkit for the Syracuse (compressed Collatz) map
//! `T(n) = (3n+1) / 2^{v2(3n+1)}` on odd integers.
//!
//! The crate computes exact orbit traces and the statistics layered on top of
//! them: burst/gap run structure, block-frequency tables with their low-depth
//! identities, residue-class enumerations, and the per-orbit bias ledger.
//! Everything statistical is exact rational arithmetic; floating point only
//! appears in explicitly diagnostic quantities (sigma bands, bit-growth
//! deficits).

pub mod atlas;
pub mod blocks;
pub mod ledger;
pub mod map_balance;
pub mod orbit;
pub mod runs;
pub mod scan;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected an odd positive integer, got {0}")]
    NotOdd(String),
    #[error("sequence length {got} does not match decomposition total {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sequence of length {len} too short for depth {depth}")]
    TooShort { len: usize, depth: usize },
    #[error("depth {got} outside supported range {min}..={max}")]
    DepthOutOfRange { got: u32, min: u32, max: u32 },
    #[error("residue {residue} not in the supported class set mod {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("{what} must be at least {min}, got {got}")]
    ParameterTooSmall {
        what: &'static str,
        min: u64,
        got: u64,
    },
    #[error("no cycles to aggregate")]
    EmptyCycles,
    #[error("ledger identity `{identity}` violated: {witness}")]
    LedgerViolation { identity: &'static str, witness: String },
}
