//! Dispersive coupling of a microwave resonator to an inhomogeneously
//! broadened spin ensemble.
//!
//! The ensemble enters through the complex susceptibility
//! `W(w) = Omega^2 Int rho(w') / (w - w' + i gamma/2) dw'` with a Gaussian
//! spectral density `rho`; the resonator response is
//! `t(w) = (kappa/2i) / (w - w0 + i kappa/2 - W(w))` and the FM-demodulated
//! observable is `chi(w) = t(w) t*(w + w_m) - t*(w) t(w - w_m)`.
//!
//! All frequencies (`w0`, `kappa`, `Omega`, `Delta`, `gamma`, `w_m`, probe
//! frequencies) are ordinary frequencies in Hz; the model is form-invariant
//! under the common 2 pi. `Delta` is the Gaussian HALF width at half maximum,
//! matching the exponent form exp(-w^2 ln2 / Delta^2).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR, PLANCK, VACUUM_PERMEABILITY};
use crate::math::{faddeeva, integrate_adaptive, QuadratureError};
use crate::positive;
use crate::spin::{zeeman_splitting, FieldPoint, GTensor};

#[derive(Debug, Error)]
pub enum CavityError {
    #[error("cavity requires omega0 > 0 and kappa > 0, got ({omega0}, {kappa})")]
    InvalidCavity { omega0: f64, kappa: f64 },
    #[error("ensemble requires Delta > 0, gamma >= 0 and Omega >= 0")]
    InvalidEnsemble,
    #[error("FM modulation frequency must be positive, got {0}")]
    InvalidModulation(f64),
    #[error("coupling budget requires 0 <= eta <= 1 and 0 <= delta_n <= 1")]
    InvalidBudget,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Microwave resonator: center frequency and FWHM linewidth, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega0: f64,
    pub kappa: f64,
}

impl CavityParams {
    pub fn new(omega0: f64, kappa: f64) -> Result<Self, CavityError> {
        if !(positive(omega0) && positive(kappa)) {
            return Err(CavityError::InvalidCavity { omega0, kappa });
        }
        Ok(Self { omega0, kappa })
    }

    /// Quality factor omega0 / kappa.
    pub fn q(&self) -> f64 {
        self.omega0 / self.kappa
    }
}

/// Spin-ensemble parameters. `inhomogeneity_hwhm` is the Gaussian HWHM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Collective coupling Omega, Hz.
    pub coupling: f64,
    /// Gaussian HWHM of the spin frequency distribution, Hz.
    pub inhomogeneity_hwhm: f64,
    /// Homogeneous damping gamma, Hz.
    pub damping: f64,
    /// Center of the spin distribution, Hz.
    pub spin_center: f64,
}

impl EnsembleParams {
    pub fn new(
        coupling: f64,
        inhomogeneity_hwhm: f64,
        damping: f64,
        spin_center: f64,
    ) -> Result<Self, CavityError> {
        if !(positive(inhomogeneity_hwhm) && damping >= 0.0 && coupling >= 0.0) {
            return Err(CavityError::InvalidEnsemble);
        }
        Ok(Self {
            coupling,
            inhomogeneity_hwhm,
            damping,
            spin_center,
        })
    }

    /// Normalized Gaussian spectral density rho(omega), 1/Hz.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let x = omega - self.spin_center;
        (ln2.sqrt() / (self.inhomogeneity_hwhm * std::f64::consts::PI.sqrt()))
            * (-x * x * ln2 / (self.inhomogeneity_hwhm * self.inhomogeneity_hwhm)).exp()
    }
}

/// FM probe: modulation frequency (Hz) and strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FmParams {
    pub omega_m: f64,
    pub beta: f64,
}

impl FmParams {
    pub fn new(omega_m: f64, beta: f64) -> Result<Self, CavityError> {
        if !positive(omega_m) {
            return Err(CavityError::InvalidModulation(omega_m));
        }
        Ok(Self { omega_m, beta })
    }
}

/// Ingredients of the expected collective coupling
/// Omega = mu21 sqrt(rho delta_n eta omega0 mu0 / (2 hbar)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingBudget {
    /// Transition magnetic moment, J/T.
    pub mu21: f64,
    /// Ion number density, m^-3.
    pub rho: f64,
    /// Ground-doublet population difference, dimensionless.
    pub delta_n: f64,
    /// Magnetic filling fraction of the resonator mode.
    pub eta: f64,
    /// Resonator frequency, Hz (ordinary).
    pub omega0: f64,
}

impl CouplingBudget {
    pub fn new(
        mu21: f64,
        rho: f64,
        delta_n: f64,
        eta: f64,
        omega0: f64,
    ) -> Result<Self, CavityError> {
        if !((0.0..=1.0).contains(&eta) && (0.0..=1.0).contains(&delta_n)) {
            return Err(CavityError::InvalidBudget);
        }
        Ok(Self {
            mu21,
            rho,
            delta_n,
            eta,
            omega0,
        })
    }
}

/// Thermal population difference tanh(h nu / 2 k_B T) between the two
/// branches of a doublet split by `frequency` at `temperature`.
pub fn population_difference(temperature: f64, frequency: f64) -> f64 {
    (PLANCK * frequency / (2.0 * BOLTZMANN * temperature)).tanh()
}

/// Expected collective coupling in Hz (ordinary frequency). The formula is
/// evaluated in angular units and converted back.
pub fn collective_coupling(budget: &CouplingBudget) -> f64 {
    let omega0_angular = 2.0 * std::f64::consts::PI * budget.omega0;
    let omega_angular = budget.mu21
        * (budget.rho * budget.delta_n * budget.eta * omega0_angular * VACUUM_PERMEABILITY
            / (2.0 * HBAR))
            .sqrt();
    omega_angular / (2.0 * std::f64::consts::PI)
}

/// W(omega) through the Faddeeva function of the scaled complex argument
/// z = sqrt(ln2) (omega - spin_center + i gamma/2) / Delta:
/// W = -i Omega^2 sqrt(pi ln2)/Delta * w(z).
pub fn ensemble_susceptibility(ens: &EnsembleParams, omega: f64) -> Complex64 {
    let ln2 = std::f64::consts::LN_2;
    let delta = ens.inhomogeneity_hwhm;
    let z = Complex64::new(omega - ens.spin_center, 0.5 * ens.damping) * (ln2.sqrt() / delta);
    let scale = ens.coupling * ens.coupling * (std::f64::consts::PI * ln2).sqrt() / delta;
    Complex64::new(0.0, -scale) * faddeeva(z)
}

/// Independent evaluation of W(omega) by adaptive quadrature, kept as an
/// oracle for the Faddeeva path. The integral is folded around the pole at
/// omega' = omega; at gamma = 0 the imaginary part is the exact residue
/// -pi rho(omega).
pub fn susceptibility_quadrature(
    ens: &EnsembleParams,
    omega: f64,
) -> Result<Complex64, CavityError> {
    let delta = ens.inhomogeneity_hwhm;
    let gamma = ens.damping;
    let detuning = omega - ens.spin_center;
    let u_max = detuning.abs() + 40.0 * delta;
    let rho = |w: f64| ens.spectral_density(w);

    // natural scales of the folded integrands
    let mut breaks = vec![
        0.25 * delta,
        delta,
        4.0 * delta,
        detuning.abs(),
        detuning.abs() + delta,
    ];
    if gamma > 0.0 {
        let mut s = 0.5 * gamma;
        while s < u_max {
            breaks.push(s);
            s *= 4.0;
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let half_gamma_sq = 0.25 * gamma * gamma;
    let re = integrate_adaptive(
        |u| u * (rho(omega - u) - rho(omega + u)) / (u * u + half_gamma_sq),
        0.0,
        u_max,
        &breaks,
        1e-12,
        1e-16 / delta,
    )?;
    let im = if gamma == 0.0 {
        -std::f64::consts::PI * rho(omega)
    } else {
        -integrate_adaptive(
            |u| 0.5 * gamma * (rho(omega - u) + rho(omega + u)) / (u * u + half_gamma_sq),
            0.0,
            u_max,
            &breaks,
            1e-12,
            1e-16 / delta,
        )?
    };
    let omega_sq = ens.coupling * ens.coupling;
    Ok(Complex64::new(omega_sq * re, omega_sq * im))
}

/// Cavity transfer function t(omega) with the ensemble present.
pub fn cavity_transfer(cav: &CavityParams, ens: &EnsembleParams, omega: f64) -> Complex64 {
    let w = ensemble_susceptibility(ens, omega);
    transfer_with_w(cav, omega, w)
}

/// Bare-cavity transfer function (no ensemble).
pub fn bare_transfer(cav: &CavityParams, omega: f64) -> Complex64 {
    transfer_with_w(cav, omega, Complex64::new(0.0, 0.0))
}

fn transfer_with_w(cav: &CavityParams, omega: f64, w: Complex64) -> Complex64 {
    let numerator = Complex64::new(0.0, -0.5 * cav.kappa); // kappa / 2i
    let denominator = Complex64::new(omega - cav.omega0, 0.5 * cav.kappa) - w;
    numerator / denominator
}

/// FM demodulation kernel chi(omega) = t(w) t*(w + w_m) - t*(w) t(w - w_m).
/// The real and imaginary parts are the cos(w_m t) and sin(w_m t) quadratures
/// of the transmitted power beat note.
pub fn fm_signal(
    cav: &CavityParams,
    ens: &EnsembleParams,
    fm: &FmParams,
    omega: f64,
) -> Complex64 {
    let t0 = cavity_transfer(cav, ens, omega);
    let tp = cavity_transfer(cav, ens, omega + fm.omega_m);
    let tm = cavity_transfer(cav, ens, omega - fm.omega_m);
    t0 * tp.conj() - t0.conj() * tm
}

/// Which observable an EPR field sweep records per field point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepProbe {
    /// Displacement of the zero of Re chi near omega0, Hz (the pulled
    /// resonator frequency).
    ZeroCrossingShift,
    /// Re chi evaluated at the bare resonator frequency, dimensionless.
    FixedProbeQuadrature,
}

/// One sample of a field sweep. `value` is NaN when `flagged`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    /// Bias field, tesla.
    pub field: f64,
    pub value: f64,
    /// Set when the zero crossing could not be bracketed at this field.
    pub flagged: bool,
}

/// Spin-vs-field law used by sweeps: the doublet splitting of `g` at angle
/// `theta` from the c-axis.
pub fn spin_center_at(g: &GTensor, field: f64, theta: f64) -> f64 {
    zeeman_splitting(
        g,
        &FieldPoint {
            magnitude: field,
            theta,
        },
    )
}

/// Synthesize a dispersive EPR trace over `fields` (tesla). The ensemble
/// keeps (Omega, Delta, gamma) fixed while its center follows the Zeeman law
/// of `g` at angle `theta`.
pub fn epr_field_sweep(
    cav: &CavityParams,
    ens_template: &EnsembleParams,
    g: &GTensor,
    fields: &[f64],
    theta: f64,
    fm: &FmParams,
    probe: SweepProbe,
) -> Vec<SweepSample> {
    fields
        .iter()
        .map(|&field| {
            let ens = EnsembleParams {
                spin_center: spin_center_at(g, field, theta),
                ..*ens_template
            };
            match probe {
                SweepProbe::FixedProbeQuadrature => SweepSample {
                    field,
                    value: fm_signal(cav, &ens, fm, cav.omega0).re,
                    flagged: false,
                },
                SweepProbe::ZeroCrossingShift => match zero_crossing(cav, &ens, fm) {
                    Some(root) => SweepSample {
                        field,
                        value: root - cav.omega0,
                        flagged: false,
                    },
                    None => SweepSample {
                        field,
                        value: f64::NAN,
                        flagged: true,
                    },
                },
            }
        })
        .collect()
}

/// Root of Re chi within +- kappa/2 of the bare resonance, by bisection.
fn zero_crossing(cav: &CavityParams, ens: &EnsembleParams, fm: &FmParams) -> Option<f64> {
    let f = |omega: f64| fm_signal(cav, ens, fm, omega).re;
    let mut lo = cav.omega0 - 0.5 * cav.kappa;
    let mut hi = cav.omega0 + 0.5 * cav.kappa;
    let mut flo = f(lo);
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * f(hi) > 0.0 {
        return None;
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Some(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
