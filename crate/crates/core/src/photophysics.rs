//! Oscillator strengths, dipole moments, radiative rates and branching ratios
//! from integrated absorption coefficients.
//!
//! Refractive-index convention (the unique assignment that reproduces every
//! published channel for this material class, propagation along a): ED
//! channels use the index along the optical E-field (sigma -> n_a, pi -> n_c);
//! MD channels use the index along the AC magnetic field (sigma -> n_c,
//! pi -> n_a).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{
    ABSORPTION_PREFACTOR, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, RATE_PREFACTOR, SPEED_OF_LIGHT,
};
use crate::optical::{DipoleType, Polarization};
use crate::positive;

#[derive(Debug, Error)]
pub enum PhotophysicsError {
    #[error("host optics requires indices > 1 and number density > 0")]
    InvalidHost,
    #[error("channel list must not be empty")]
    EmptyChannels,
    #[error("lifetimes must be positive, got fluorescence {0} s, radiative {1} s")]
    NonPositiveLifetime(f64, f64),
}

/// Host-crystal optical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HostOptics {
    /// Refractive index along the c-axis.
    pub n_c: f64,
    /// Refractive index along the a-axis.
    pub n_a: f64,
    /// Dopant number density, cm^-3.
    pub number_density_per_cm3: f64,
}

impl HostOptics {
    pub fn new(n_c: f64, n_a: f64, number_density_per_cm3: f64) -> Result<Self, PhotophysicsError> {
        if !(n_c > 1.0 && n_a > 1.0 && positive(number_density_per_cm3)) {
            return Err(PhotophysicsError::InvalidHost);
        }
        Ok(Self {
            n_c,
            n_a,
            number_density_per_cm3,
        })
    }

    /// Index used by a (dipole type, polarization) channel; see module docs.
    pub fn index_for(&self, dipole: DipoleType, polarization: Polarization) -> f64 {
        match (dipole, polarization) {
            (DipoleType::Ed, Polarization::Sigma) => self.n_a,
            (DipoleType::Ed, Polarization::Pi) => self.n_c,
            (DipoleType::Md, Polarization::Sigma) => self.n_c,
            (DipoleType::Md, Polarization::Pi) => self.n_a,
        }
    }
}

/// Virtual-cavity local-field correction chi_L = ((n^2 + 2) / 3)^2.
pub fn local_field_correction(n: f64) -> f64 {
    let x = (n * n + 2.0) / 3.0;
    x * x
}

/// Absorption oscillator strength of one channel from its integrated
/// absorption coefficient (Hz cm^-1) and the refractive index `n` chosen for
/// that channel. Emission and absorption oscillator strengths coincide for
/// non-degenerate Zeeman levels, so one value serves both directions.
pub fn oscillator_strength(
    dipole: DipoleType,
    integrated_alpha_hz_cm: f64,
    host: &HostOptics,
    n: f64,
) -> f64 {
    let integral_si = integrated_alpha_hz_cm * 100.0; // Hz m^-1
    let density_si = host.number_density_per_cm3 * 1e6; // m^-3
    let factor = match dipole {
        DipoleType::Ed => n / local_field_correction(n),
        DipoleType::Md => 1.0 / n,
    };
    ABSORPTION_PREFACTOR / density_si * factor * integral_si
}

/// Dipole moment d = sqrt(hbar e^2 / (2 m_e omega) f) in C m, omega = 2 pi c / lambda.
pub fn dipole_moment(f: f64, wavelength: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength;
    (HBAR * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * ELECTRON_MASS * omega) * f).sqrt()
}

/// Oscillator strength back from a dipole moment (inverse of [`dipole_moment`]).
pub fn oscillator_strength_from_dipole(d: f64, wavelength: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength;
    d * d * 2.0 * ELECTRON_MASS * omega / (HBAR * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE)
}

/// Spontaneous radiative rate of one channel, Hz.
pub fn radiative_rate(dipole: DipoleType, f: f64, wavelength: f64, n: f64) -> f64 {
    let factor = match dipole {
        DipoleType::Ed => local_field_correction(n) * n,
        DipoleType::Md => n * n * n,
    };
    RATE_PREFACTOR * factor / (wavelength * wavelength) * f / 3.0
}

/// Fully evaluated photophysics of one (polarization, dipole) channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPhotophysics {
    pub dipole_type: DipoleType,
    pub polarization: Polarization,
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Integrated absorption coefficient, Hz cm^-1.
    pub integrated_alpha_hz_cm: f64,
    pub oscillator_strength: f64,
    /// C m.
    pub dipole_moment: f64,
    /// Hz.
    pub radiative_rate: f64,
}

/// Evaluate a channel end to end with the documented index convention.
pub fn evaluate_channel(
    dipole_type: DipoleType,
    polarization: Polarization,
    wavelength: f64,
    integrated_alpha_hz_cm: f64,
    host: &HostOptics,
) -> TransitionPhotophysics {
    let n = host.index_for(dipole_type, polarization);
    let f = oscillator_strength(dipole_type, integrated_alpha_hz_cm, host, n);
    TransitionPhotophysics {
        dipole_type,
        polarization,
        wavelength,
        integrated_alpha_hz_cm,
        oscillator_strength: f,
        dipole_moment: dipole_moment(f, wavelength),
        radiative_rate: radiative_rate(dipole_type, f, wavelength, n),
    }
}

/// How channel rates combine into a total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateWeighting {
    /// Add channel rates as listed.
    NaiveSum,
    /// Double every sigma channel (two equivalent transverse modes).
    ModeWeighted,
}

/// Totals over the channels of one transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionTotals {
    /// Hz.
    pub total_rate: f64,
    /// s.
    pub radiative_lifetime: f64,
    /// Root-sum-square ED dipole moment, C m.
    pub d_ed: f64,
    /// Root-sum-square MD dipole moment, C m.
    pub d_md: f64,
}

pub fn total_rate_and_dipoles(
    channels: &[TransitionPhotophysics],
    weighting: RateWeighting,
) -> Result<TransitionTotals, PhotophysicsError> {
    if channels.is_empty() {
        return Err(PhotophysicsError::EmptyChannels);
    }
    let mut total_rate = 0.0;
    let mut d_ed_sq = 0.0;
    let mut d_md_sq = 0.0;
    for ch in channels {
        let mode_factor = match (weighting, ch.polarization) {
            (RateWeighting::ModeWeighted, Polarization::Sigma) => 2.0,
            _ => 1.0,
        };
        total_rate += mode_factor * ch.radiative_rate;
        match ch.dipole_type {
            DipoleType::Ed => d_ed_sq += ch.dipole_moment * ch.dipole_moment,
            DipoleType::Md => d_md_sq += ch.dipole_moment * ch.dipole_moment,
        }
    }
    Ok(TransitionTotals {
        total_rate,
        radiative_lifetime: 1.0 / total_rate,
        d_ed: d_ed_sq.sqrt(),
        d_md: d_md_sq.sqrt(),
    })
}

/// Branching ratio with an unphysical-input flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingRatio {
    pub beta: f64,
    /// Set when the raw ratio exceeds one (fluorescence slower than the
    /// radiative limit); `beta` then reports the raw value unclamped.
    pub unphysical: bool,
}

/// beta = tau_fluorescence / tau_radiative, a lower bound on the branching
/// fraction through the radiative channel.
pub fn branching_ratio(
    fluorescence_lifetime: f64,
    radiative_lifetime: f64,
) -> Result<BranchingRatio, PhotophysicsError> {
    if !(positive(fluorescence_lifetime) && positive(radiative_lifetime)) {
        return Err(PhotophysicsError::NonPositiveLifetime(
            fluorescence_lifetime,
            radiative_lifetime,
        ));
    }
    let beta = fluorescence_lifetime / radiative_lifetime;
    Ok(BranchingRatio {
        beta,
        unphysical: beta > 1.0,
    })
}
