//! Effective Diophantine counting toolkit.
//!
//! Computes the counting functions of metric Diophantine approximation
//! (rational-solution counts, inhomogeneous counts along integer sequences,
//! digit statistics), evaluates the explicit constants of their effective
//! almost-everywhere bounds, and verifies those bounds empirically by
//! seeded, deterministic Monte Carlo with rigorous oracle cross-checks.
//!
//! The crate is data-parallel over samples via rayon (feature `parallel`,
//! on by default) with an always-available sequential path; identical seeds
//! give byte-identical reports at any thread count.

// `!(x > 0.0)` guards reject NaN along with the out-of-range values; the
// positively-phrased comparisons clippy prefers would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod counting;
mod error;
pub mod exec;
pub mod numtheory;
pub mod psi;
pub mod slln;
mod util;
pub mod verify;

pub use error::{Error, Result};
