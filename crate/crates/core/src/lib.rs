//! Casimir interaction energies and forces by three independent routes:
//! Wick-rotated Lifshitz integrals, imaginary-frequency finite-difference
//! Green's functions, and partial-wave log-determinants.
//!
//! Units are natural (hbar = c = 1) with lengths in micrometres; see [`units`].

pub mod error;
pub mod fd;
pub mod lifshitz;
pub mod materials;
pub mod quadrature;
pub mod scattering;
pub mod special;
pub mod units;

pub use error::{CasimirError, Result};
