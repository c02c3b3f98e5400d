//! Simulator core for verifiable threshold quantum secret sharing with a
//! single qudit of odd prime dimension.
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`field`]: `Z_d` arithmetic and polynomials.
//! - [`qudit`]: state vectors, mutually unbiased bases, phase operators.
//! - [`vss`]: asymmetric bivariate share dealing and pairwise keys.
//! - [`protocol`]: the dealer/participant state machine with checks, fraud
//!   localization and simultaneous broadcast rounds.
//! - [`adversary`]: attack strategies plugged into the protocol engine.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod field;
pub mod qudit;
pub mod vss;
pub mod protocol;
pub mod adversary;

pub use error::{Error, Result};
pub use field::{BivariatePoly, Fe, Field, UnivariatePoly};
pub use qudit::{Basis, MubLabel, QuditState};
