//! A laboratory for packing indices of subsets in finite Abelian metric groups.
//!
//! The crate computes how many pairwise-disjoint (or almost-disjoint)
//! translates a subset of a finite Abelian group admits, and builds the
//! scale constructions that make that number large or collapse it to one:
//!
//! * [`group`] — cyclic products and dyadic cubes with exact integer
//!   metrics, dense bit-indexed subsets, balls and greedy separated nets.
//! * [`correlation`] — difference sets and translate-intersection tables
//!   (naive, FFT, Walsh–Hadamard), period subgroups, coverage and the
//!   counting/neighborhood bounds.
//! * [`packing`] — exact packing indices by branch-and-bound clique search
//!   on Cayley graphs, heuristic lower bounds, sharp indices and exhaustive
//!   spectrum scans of small groups.
//! * [`constructions`] — the binary-product disjoint-translate generator
//!   and the two-sided scale construction whose union covers the whole
//!   group, with machine-checked certificates for every inequality used.
//! * [`setfile`] — JSON set files and the `Z:6` / `Z:9x9` / `Z2^4` group
//!   string syntax shared with the CLI.
//!
//! All arithmetic is exact: norms are integer grid units (or scaled dyadic
//! levels), correlation tables are integers, and every transform output is
//! verified against direct counting before it is trusted.

pub mod constructions;
pub mod correlation;
pub mod group;
pub mod packing;
pub mod setfile;

pub use group::{DenseSet, Elem, Group, GroupSpec, MetricKind, Norm};

/// Crate-wide error type; variants map onto the CLI exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent input (exit code 2).
    #[error("input error: {0}")]
    Input(String),
    /// A size guard refused the computation (exit code 3).
    #[error("size guard: {0}")]
    SizeGuard(String),
    /// A certificate or verification pass failed (exit code 4). Signals a
    /// bug or precision loss, never a legitimate user error.
    #[error("verification failure: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
