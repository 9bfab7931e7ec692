//! CODATA physical constants in SI units.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_8128e-12;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ¹⁷¹Yb⁺ ion in atomic mass units.
pub const YB171_MASS_AMU: f64 = 170.936_323;

/// Electron gyromagnetic factor, (2π)·2.8 MHz/G expressed in rad s⁻¹ T⁻¹.
pub const GAMMA_E: f64 = 2.0 * PI * 2.8e10;

/// ¹⁷¹Yb⁺ hyperfine splitting, (2π)·12.6 GHz.
pub const YB171_HYPERFINE: f64 = 2.0 * PI * 12.6e9;

/// Converts a frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn two_pi(hz: f64) -> f64 {
    2.0 * PI * hz
}
