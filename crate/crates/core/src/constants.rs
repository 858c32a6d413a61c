//! Physical constants (CODATA-2018), embedded as a single table so that all
//! derived outputs are bit-reproducible.

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Vacuum electric permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum magnetic permeability, N/A^2.
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;

/// mu_B / h in Hz/T: converts g * B directly to a frequency.
pub const MU_B_OVER_H: f64 = BOHR_MAGNETON / PLANCK;
/// k_B / h in Hz/K.
pub const K_B_OVER_H: f64 = BOLTZMANN / PLANCK;

/// Version tag recorded in run manifests.
pub const CONSTANTS_VERSION: &str = "codata-2018";

/// Oscillator-strength prefactor 4 eps0 m_e c / e^2 in s/m^2.
///
/// f = ABSORPTION_PREFACTOR * (1/N) * factor * integral(alpha dnu), with N in
/// m^-3, the integral in Hz/m, and factor = n/chi_L (ED) or 1/n (MD).
pub const ABSORPTION_PREFACTOR: f64 =
    4.0 * VACUUM_PERMITTIVITY * ELECTRON_MASS * SPEED_OF_LIGHT
        / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

/// Radiative-rate prefactor 2 pi e^2 / (eps0 m_e c) in m^2/s.
pub const RATE_PREFACTOR: f64 = 2.0 * std::f64::consts::PI * ELEMENTARY_CHARGE
    * ELEMENTARY_CHARGE
    / (VACUUM_PERMITTIVITY * ELECTRON_MASS * SPEED_OF_LIGHT);
