//! Inhomogeneously broadened absorption lines and Beer-Lambert transmission
//! traces, plus recovery of the integrated absorption coefficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use crate::positive;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("frequency grid must be strictly increasing (violated at index {0})")]
    NonMonotoneGrid(usize),
    #[error("sample length must be positive, got {0} cm")]
    NonPositiveLength(f64),
    #[error("absorption line must have fwhm > 0 and integrated_alpha >= 0")]
    InvalidLine,
    #[error("transmission grids must be non-empty")]
    EmptyGrid,
    #[error("saturated absorption: transmission <= 0 at grid index {index} (frequency {frequency} Hz)")]
    SaturatedSample { index: usize, frequency: f64 },
    #[error("baseline window [{0}, {1}] contains no grid samples")]
    EmptyBaselineWindow(f64, f64),
}

/// Gaussian peak-normalization constant 2 sqrt(ln2 / pi).
pub const GAUSSIAN_PEAK_FACTOR: f64 = 0.939_437_278_699_651_3;

/// Transmission below this value is treated as opaque and excluded from
/// integration (with a count) since -ln T diverges.
pub const SATURATION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineProfile {
    Gaussian,
    Lorentzian,
}

/// One inhomogeneously broadened absorption line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionLine {
    /// Line center, Hz.
    pub center: f64,
    /// Full width at half maximum, Hz.
    pub fwhm: f64,
    /// Integrated absorption coefficient, Hz cm^-1.
    pub integrated_alpha: f64,
    pub profile: LineProfile,
}

impl AbsorptionLine {
    pub fn gaussian(center: f64, fwhm: f64, integrated_alpha: f64) -> Result<Self, SpectrumError> {
        Self::new(center, fwhm, integrated_alpha, LineProfile::Gaussian)
    }

    pub fn new(
        center: f64,
        fwhm: f64,
        integrated_alpha: f64,
        profile: LineProfile,
    ) -> Result<Self, SpectrumError> {
        if !positive(fwhm) || !integrated_alpha.is_finite() || integrated_alpha < 0.0 {
            return Err(SpectrumError::InvalidLine);
        }
        Ok(Self {
            center,
            fwhm,
            integrated_alpha,
            profile,
        })
    }

    /// Peak absorption coefficient, cm^-1.
    pub fn peak_alpha(&self) -> f64 {
        match self.profile {
            LineProfile::Gaussian => self.integrated_alpha * GAUSSIAN_PEAK_FACTOR / self.fwhm,
            LineProfile::Lorentzian => {
                self.integrated_alpha * 2.0 / (std::f64::consts::PI * self.fwhm)
            }
        }
    }

    /// Absorption coefficient at `frequency`, cm^-1.
    pub fn alpha(&self, frequency: f64) -> f64 {
        let x = frequency - self.center;
        match self.profile {
            LineProfile::Gaussian => {
                self.peak_alpha() * (-4.0 * std::f64::consts::LN_2 * x * x / (self.fwhm * self.fwhm)).exp()
            }
            LineProfile::Lorentzian => {
                let hw = 0.5 * self.fwhm;
                self.peak_alpha() * hw * hw / (x * x + hw * hw)
            }
        }
    }
}

/// A sampled transmission trace through a sample of known length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Strictly increasing frequency grid, Hz.
    pub frequency: Vec<f64>,
    /// Transmission values in (0, 1].
    pub transmission: Vec<f64>,
    /// Sample length, cm.
    pub length_cm: f64,
}

fn check_grid(grid: &[f64]) -> Result<(), SpectrumError> {
    if grid.is_empty() {
        return Err(SpectrumError::EmptyGrid);
    }
    for (k, w) in grid.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(SpectrumError::NonMonotoneGrid(k + 1));
        }
    }
    Ok(())
}

/// Beer-Lambert transmission T(nu) = exp(-sum_i alpha_i(nu) L) on `grid`.
pub fn synthesize_transmission(
    lines: &[AbsorptionLine],
    length_cm: f64,
    grid: &[f64],
) -> Result<Spectrum, SpectrumError> {
    if !positive(length_cm) {
        return Err(SpectrumError::NonPositiveLength(length_cm));
    }
    check_grid(grid)?;
    let transmission = grid
        .iter()
        .map(|&nu| {
            let total: f64 = lines.iter().map(|l| l.alpha(nu)).sum();
            (-total * length_cm).exp()
        })
        .collect();
    Ok(Spectrum {
        frequency: grid.to_vec(),
        transmission,
        length_cm,
    })
}

/// Result of integrating a transmission trace back to alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratedAbsorption {
    /// Trapezoidal integral of alpha(nu), Hz cm^-1.
    pub integrated_alpha: f64,
    /// Samples excluded as saturated (T below the floor).
    pub saturated_samples: usize,
}

/// Trapezoidal integral of alpha(nu) = -ln T(nu) / L over the grid, after
/// subtracting a linear baseline fitted to the given off-resonance windows
/// (frequency intervals). An empty window list means zero baseline.
pub fn integrate_absorption(
    spec: &Spectrum,
    baseline_windows: &[(f64, f64)],
) -> Result<IntegratedAbsorption, SpectrumError> {
    if !positive(spec.length_cm) {
        return Err(SpectrumError::NonPositiveLength(spec.length_cm));
    }
    check_grid(&spec.frequency)?;
    for (index, &t) in spec.transmission.iter().enumerate() {
        if t <= 0.0 {
            return Err(SpectrumError::SaturatedSample {
                index,
                frequency: spec.frequency[index],
            });
        }
    }

    let mut saturated = 0usize;
    let alpha: Vec<Option<f64>> = spec
        .transmission
        .iter()
        .map(|&t| {
            if t < SATURATION_FLOOR {
                saturated += 1;
                None
            } else {
                Some(-t.ln() / spec.length_cm)
            }
        })
        .collect();

    // linear least-squares baseline over the flagged windows
    let baseline = if baseline_windows.is_empty() {
        (0.0, 0.0)
    } else {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &(lo, hi) in baseline_windows {
            let before = xs.len();
            for (k, &nu) in spec.frequency.iter().enumerate() {
                if nu >= lo && nu <= hi {
                    if let Some(a) = alpha[k] {
                        xs.push(nu);
                        ys.push(a);
                    }
                }
            }
            if xs.len() == before {
                return Err(SpectrumError::EmptyBaselineWindow(lo, hi));
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (my - slope * mx, slope)
    };

    let corrected = |k: usize| -> Option<f64> {
        alpha[k].map(|a| a - (baseline.0 + baseline.1 * spec.frequency[k]))
    };

    let mut integral = 0.0;
    for k in 1..spec.frequency.len() {
        if let (Some(a0), Some(a1)) = (corrected(k - 1), corrected(k)) {
            integral += 0.5 * (a0 + a1) * (spec.frequency[k] - spec.frequency[k - 1]);
        }
    }
    Ok(IntegratedAbsorption {
        integrated_alpha: integral,
        saturated_samples: saturated,
    })
}

/// Evenly spaced grid of `n` points covering [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| lo + k as f64 * step).collect()
}
