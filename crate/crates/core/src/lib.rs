//! Size-preserving entropy expansion with random bit-block permutations.
//!
//! A file is read as a bit string, cut into N-bit chunks, and each chunk is
//! permuted by one of `m` randomly generated N×N permutation matrices
//! (N = 2ⁿ for n qubits). The choice of matrix per chunk comes from fresh
//! entropy and is recorded in a [`KeyTrace`], which makes the transform
//! exactly invertible. An ENT-style battery ([`analysis`]) measures the
//! effect on byte-level randomness.

pub mod analysis;
pub mod bits;
pub mod cli;
pub mod codecs;
pub mod error;
pub mod keyfile;
pub mod perm;
pub mod source;
pub mod transform;

pub use analysis::{analyze, compare, Analyzer, Comparison, RandomnessReport};
pub use bits::BitStream;
pub use error::{Error, Result};
pub use perm::{generate_permutation, generate_set, PermutationMap, PermutationSet, ShuffleMode};
pub use source::{EntropySource, SourceKind};
pub use transform::{expand, invert, invert_all, repeat_expand, KeyTrace, TailPolicy};
