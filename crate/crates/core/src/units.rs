//! Unit constants for the GHz / ns / Kelvin convention.

/// 1 cm⁻¹ expressed as an ordinary frequency in GHz (c in cm/ns).
pub const GHZ_PER_CM1: f64 = 29.979_245_8;

/// Boltzmann constant over Planck constant, GHz per Kelvin.
pub const KB_OVER_H_GHZ_PER_K: f64 = 20.836_619;

pub fn cm1_to_ghz(x: f64) -> f64 {
    x * GHZ_PER_CM1
}

pub fn ghz_to_cm1(x: f64) -> f64 {
    x / GHZ_PER_CM1
}

/// Thermal energy `k_B T / h` in GHz.
pub fn thermal_ghz(kelvin: f64) -> f64 {
    kelvin * KB_OVER_H_GHZ_PER_K
}
