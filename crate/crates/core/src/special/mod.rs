//! Special functions for the partial-wave basis.

pub mod bessel;
pub mod wigner;

pub use bessel::{log_cyl_ik, log_sph_ik, LogBessel};
pub use wigner::{three_j_m0, three_j_row};
