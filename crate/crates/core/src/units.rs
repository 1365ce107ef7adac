//! Natural units: hbar = c = 1, lengths in micrometres.
//!
//! A pressure of 1 in these units is hbar c / um^4, a 1d energy is hbar c / um,
//! and so on. Conversion to SI happens only at the reporting layer.

/// hbar * c in J m (CODATA 2018).
pub const HBAR_C_SI: f64 = 3.161_526_773_264_05e-26;

/// hbar * c in eV um.
pub const HBAR_C_EV_UM: f64 = 0.197_326_980_459_302_5;

/// Boltzmann constant in eV/K.
pub const K_B_EV: f64 = 8.617_333_262e-5;

const UM: f64 = 1e-6;

/// Thermal wavelength hbar c / (k_B T) in um.
pub fn thermal_wavelength(kelvin: f64) -> f64 {
    HBAR_C_EV_UM / (K_B_EV * kelvin)
}

/// Matsubara spacing 2 pi k_B T / (hbar c) in 1/um.
pub fn matsubara_spacing(kelvin: f64) -> f64 {
    2.0 * std::f64::consts::PI / thermal_wavelength(kelvin)
}

/// Inverse of [`matsubara_spacing`].
pub fn temperature_for_spacing(spacing: f64) -> f64 {
    spacing * HBAR_C_EV_UM / (2.0 * std::f64::consts::PI * K_B_EV)
}

/// SI factor for a quantity carrying hbar c / um^k.
///
/// k = 4 gives Pa, k = 1 gives J, k = 2 gives J/m (2d energy) or N, k = 3 gives N/m.
pub fn si_factor(length_power: i32) -> f64 {
    HBAR_C_SI / UM.powi(length_power)
}
