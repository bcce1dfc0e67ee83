//! Analysis and simulation of symmetric XOR communication problems
//! `F(x, y) = S(|x ^ y|)`.
//!
//! - [`symfun`]: problem instances, classification, gap parameters `r0, r1, r`.
//! - [`spectral`]: exact Fourier spectrum via Krawtchouk sums, `rank(M_F)`,
//!   weight-window checks, deterministic bounds.
//! - [`oracle`]: brute-force Fourier transform and exact matrix rank, lemma scans,
//!   Monte-Carlo error estimates.
//! - [`engine`]: two-party execution with a public-coin tape and bit accounting.
//! - [`protocols`]: parity, full-send, Hamming test, two-way and one-way protocols.

pub mod bits;
pub mod engine;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod protocols;
pub mod spectral;
pub mod symfun;

pub use bits::BitString;
pub use error::{Error, Result};
pub use exec::Execution;
pub use symfun::{GapParams, InputPair, SymmetricProfile, TrivialClass};
