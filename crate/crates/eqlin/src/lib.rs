//! Explicit linearizations for block operator matrix functions.
//!
//! The crate builds monic linear pencils `T - lambda` that are equivalent
//! (after operator function extension) to block matrix functions whose
//! entries are matrix polynomials, products of matrix polynomials, or Schur
//! complements of polynomial blocks. Every construction returns an
//! [`equivalence::EquivalenceCertificate`] carrying the factor functions
//! `E`, `F` and the extensions `W`, so the claimed identity
//! `S + W_S = E (T + W_T) F` can be re-checked numerically at sample points
//! and the spectra can be compared against an independent determinant-root
//! oracle.

// dense linear algebra routinely walks several co-indexed arrays at once
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod blockfun;
pub mod blocklin;
pub mod companion;
pub mod equivalence;
pub mod error;
pub mod factor;
pub mod formats;
pub mod pipeline;
pub mod presets;
pub mod reduction;
pub mod rng;
pub mod schur_product;
pub mod spectra;

pub use error::{Error, Result};
