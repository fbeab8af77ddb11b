//! Exact and Monte-Carlo analysis of the longest alternating and longest
//! increasing subsequences of uniformly random permutations avoiding a
//! pattern of length three.
//!
//! * [`permutation`]: permutations, pattern containment, symmetries, statistics
//! * [`enumeration`]: brute-force avoider classes and distributions
//! * [`catalan`]: Catalan numbers and the split law of the maximum
//! * [`distribution`]: exact recurrences, moment generating functions, tails
//! * [`series`]: truncated power series and the closed-form generating functions
//! * [`rate`]: rate functions, Legendre-Fenchel transforms, LDP slopes
//! * [`sampler`]: exact uniform samplers and Monte-Carlo estimators
//! * [`acceptance`]: the end-to-end verification criteria

pub mod acceptance;
pub mod catalan;
pub mod distribution;
pub mod enumeration;
pub mod error;
pub mod logspace;
pub mod permutation;
pub mod rate;
pub mod sampler;
pub mod series;

pub use error::{Error, Result};
