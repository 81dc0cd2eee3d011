//! Succinct range majority encodings.
//!
//! Preprocesses an integer array `A[1..n]` and a rational threshold
//! `tau = p/q` into an `O(n lg(1/tau))`-bit structure that answers range
//! tau-majority queries — report every element occurring more than
//! `tau * (j - i + 1)` times in `A[i..=j]` — in `O(1/tau)` time per query,
//! without retaining the array itself.

pub mod bitvec;
pub mod cli;
pub mod decomposition;
pub mod encoding;
pub mod error;
pub mod oracle;
pub mod reductions;
pub mod sequences;
pub mod stream;

pub use error::{Error, Result};
