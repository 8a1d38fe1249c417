//! Finite-section truncations of structured operators and the spectral
//! classification of the resulting matrix sequences.
//!
//! * [`symbols`]: trigonometric-polynomial symbols on the unit circle.
//! * [`matgen`]: Toeplitz, Hankel, Cuntz, permutation and interlacing
//!   generators, and the [`matgen::MatrixSequence`] abstraction.
//! * [`spectra`]: singular values, eigenvalues, counting, Hausdorff distance.
//! * [`seqlab`]: stability, Fredholm, compactness, fractality and
//!   essential-point detectors.
//! * [`identities`]: finite-n algebraic identity checks.
//! * [`cli`]: the batch experiment runner behind the `finsec` binary.

pub mod cli;
pub mod error;
pub mod identities;
pub mod matgen;
pub mod seqlab;
pub mod spectra;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = faer::Mat<Complex64>;
