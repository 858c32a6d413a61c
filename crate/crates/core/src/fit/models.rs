//! Model-specific fitters: exponential decays, multi-Gaussian absorption
//! lines, excited-state g tensors from ramp/rotation line positions, and
//! (Omega, Delta, B0) from dispersive EPR traces.

use super::{least_squares, FitError, FitResult, LmOptions, Observation};
use crate::cavity::{
    epr_field_sweep, CavityParams, EnsembleParams, FmParams, SweepProbe,
};
use crate::optical::spectrum::{Spectrum, GAUSSIAN_PEAK_FACTOR, SATURATION_FLOOR};
use crate::optical::Branch;
use crate::spin::{zeeman_splitting, FieldPoint, GTensor};

/// A line-position observation tagged with its branch combination.
///
/// `x` is the field magnitude (tesla) for ramp data or the angle (radians)
/// for rotation data; `frequency` is the measured offset from the zero-field
/// line center in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineObservation {
    pub x: f64,
    pub frequency: f64,
    pub sigma: f64,
    pub ground_branch: Branch,
    pub excited_branch: Branch,
}

/// Branch-combination offset (s_e nu_e - s_g nu_g)/2 for given tensors.
fn branch_offset(
    ground: &GTensor,
    excited: &GTensor,
    field: &FieldPoint,
    ground_branch: Branch,
    excited_branch: Branch,
) -> f64 {
    0.5 * (excited_branch.sign() * zeeman_splitting(excited, field)
        - ground_branch.sign() * zeeman_splitting(ground, field))
}

/// Tag untagged line observations with the nearest model branch at the given
/// parameters. Returns the tagged set and the count of ambiguous assignments
/// (nearest and second-nearest branch closer than their separation third).
pub fn assign_branches(
    observations: &[Observation],
    ground: &GTensor,
    excited: &GTensor,
    theta: f64,
) -> (Vec<LineObservation>, usize) {
    let mut ambiguous = 0;
    let tagged = observations
        .iter()
        .map(|obs| {
            let field = FieldPoint {
                magnitude: obs.x,
                theta,
            };
            let mut best: Option<(f64, Branch, Branch)> = None;
            let mut second = f64::INFINITY;
            for gb in Branch::BOTH {
                for eb in Branch::BOTH {
                    let predicted = branch_offset(ground, excited, &field, gb, eb);
                    let miss = (predicted - obs.y).abs();
                    match best {
                        Some((b, _, _)) if miss >= b => second = second.min(miss),
                        _ => {
                            if let Some((b, _, _)) = best {
                                second = second.min(b);
                            }
                            best = Some((miss, gb, eb));
                        }
                    }
                }
            }
            let (miss, gb, eb) = best.unwrap();
            if miss * 3.0 > second {
                ambiguous += 1;
            }
            LineObservation {
                x: obs.x,
                frequency: obs.y,
                sigma: obs.sigma,
                ground_branch: gb,
                excited_branch: eb,
            }
        })
        .collect();
    (tagged, ambiguous)
}

/// Fit the excited-level (g_par, g_perp) from a field ramp along the c-axis
/// and a rotation pattern at fixed field magnitude `rotation_field`.
/// The ground tensor is known and held fixed.
pub fn fit_g_factors(
    ramp: &[LineObservation],
    rotation: &[LineObservation],
    ground: &GTensor,
    rotation_field: f64,
    initial: (f64, f64),
) -> Result<FitResult, FitError> {
    let distinct = |xs: &[LineObservation]| {
        let mut v: Vec<f64> = xs.iter().map(|o| o.x).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        v.len()
    };
    if distinct(ramp) < 2 {
        return Err(FitError::UnderDetermined(
            "need ramp observations at >= 2 distinct fields for g_par".into(),
        ));
    }
    if distinct(rotation) < 3 {
        return Err(FitError::UnderDetermined(
            "need rotation observations at >= 3 distinct angles for g_perp".into(),
        ));
    }

    let residual = |p: &[f64]| -> Vec<f64> {
        let excited = GTensor {
            g_par: p[0],
            g_perp: p[1],
        };
        let mut r = Vec::with_capacity(ramp.len() + rotation.len());
        for obs in ramp {
            let field = FieldPoint {
                magnitude: obs.x,
                theta: 0.0,
            };
            let model =
                branch_offset(ground, &excited, &field, obs.ground_branch, obs.excited_branch);
            r.push((model - obs.frequency) / obs.sigma);
        }
        for obs in rotation {
            let field = FieldPoint {
                magnitude: rotation_field,
                theta: obs.x,
            };
            let model =
                branch_offset(ground, &excited, &field, obs.ground_branch, obs.excited_branch);
            r.push((model - obs.frequency) / obs.sigma);
        }
        r
    };

    least_squares(
        residual,
        &[initial.0, initial.1],
        Some(&[(0.0, 20.0), (0.0, 20.0)]),
        &["g_par", "g_perp"],
        &LmOptions::default(),
    )
}

/// Parameters held fixed while fitting an EPR trace.
#[derive(Debug, Clone, Copy)]
pub struct EprFitConfig {
    pub cavity: CavityParams,
    /// Ground g tensor setting the field-to-frequency slope.
    pub g: GTensor,
    /// Field angle from the c-axis, radians.
    pub theta: f64,
    pub fm: FmParams,
    pub probe: SweepProbe,
    /// Homogeneous damping held fixed, Hz.
    pub damping: f64,
}

/// Fit (Omega, Delta, B0, scale) to a dispersive trace of (B, signal)
/// observations. `initial` orders as (omega, delta, b0, scale).
pub fn fit_epr(
    trace: &[Observation],
    config: &EprFitConfig,
    initial: (f64, f64, f64, f64),
) -> Result<FitResult, FitError> {
    if trace.len() < 5 {
        return Err(FitError::UnderDetermined(
            "need at least 5 trace samples".into(),
        ));
    }
    let fields: Vec<f64> = trace.iter().map(|o| o.x).collect();
    let slope = config.g.effective(config.theta) * crate::constants::MU_B_OVER_H;

    let residual = |p: &[f64]| -> Vec<f64> {
        let (omega, delta, b0, scale) = (p[0], p[1], p[2], p[3]);
        // shift the spin-center law so the crossing sits at the fitted B0
        let ens = EnsembleParams {
            coupling: omega.abs(),
            inhomogeneity_hwhm: delta.abs().max(1.0),
            damping: config.damping,
            spin_center: 0.0,
        };
        let offset_fields: Vec<f64> = fields
            .iter()
            .map(|&b| b - b0 + config.cavity.omega0 / slope)
            .collect();
        let sweep = epr_field_sweep(
            &config.cavity,
            &ens,
            &config.g,
            &offset_fields,
            config.theta,
            &config.fm,
            config.probe,
        );
        sweep
            .iter()
            .zip(trace)
            .map(|(s, obs)| {
                let model = if s.flagged { 0.0 } else { scale * s.value };
                (model - obs.y) / obs.sigma
            })
            .collect()
    };

    let mut result = least_squares(
        residual,
        &[initial.0, initial.1, initial.2, initial.3],
        None,
        &["omega", "delta", "b0", "scale"],
        &LmOptions::default(),
    )?;
    // the model depends on |omega| and |delta| only; report them positive
    result.estimates[0] = result.estimates[0].abs();
    result.estimates[1] = result.estimates[1].abs();
    Ok(result)
}

/// Fit A exp(-t/tau) + c to decay observations (t ascending, in seconds).
pub fn fit_exponential(decay: &[Observation]) -> Result<FitResult, FitError> {
    if decay.len() < 4 {
        return Err(FitError::UnderDetermined(
            "need at least 4 decay samples".into(),
        ));
    }
    for w in decay.windows(2) {
        if w[1].x <= w[0].x {
            return Err(FitError::InvalidObservations(
                "decay times must be strictly increasing".into(),
            ));
        }
    }

    // initial guesses: offset from the tail, amplitude from the head,
    // tau from the 1/e point of the offset-corrected head value
    let tail = decay.len().saturating_sub(decay.len() / 10).max(decay.len() - 1);
    let offset0 = decay[tail..].iter().map(|o| o.y).sum::<f64>() / (decay.len() - tail) as f64;
    let amp0 = decay[0].y - offset0;
    let span = decay[decay.len() - 1].x - decay[0].x;
    let tau0 = decay
        .iter()
        .find(|o| (o.y - offset0).abs() < amp0.abs() / std::f64::consts::E)
        .map(|o| o.x - decay[0].x)
        .unwrap_or(span / 3.0)
        .max(span * 1e-3);

    let t0 = decay[0].x;
    let residual = |p: &[f64]| -> Vec<f64> {
        decay
            .iter()
            .map(|o| (p[0] * (-(o.x - t0) / p[1]).exp() + p[2] - o.y) / o.sigma)
            .collect()
    };
    let mut result = least_squares(
        residual,
        &[amp0, tau0, offset0],
        Some(&[(f64::NEG_INFINITY, f64::INFINITY), (span * 1e-6, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)]),
        &["amplitude", "tau", "offset"],
        &LmOptions::default(),
    )?;

    // non-decaying input: amplitude consistent with zero makes tau meaningless
    if result.converged
        && result.estimates[0].abs() <= 2.0 * result.uncertainties[0]
    {
        result.converged = false;
        result.message = "amplitude consistent with zero: decay constant unidentifiable".into();
    }
    Ok(result)
}

/// Fit `n_lines` Gaussian absorption lines to a transmission spectrum, in
/// alpha space. Parameters per line: center (Hz), FWHM (Hz), area (Hz cm^-1).
pub fn fit_gaussian_lines(spec: &Spectrum, n_lines: usize) -> Result<FitResult, FitError> {
    if n_lines == 0 {
        return Err(FitError::UnderDetermined("n_lines must be >= 1".into()));
    }
    if spec.frequency.len() < 3 * n_lines + 1 {
        return Err(FitError::UnderDetermined(format!(
            "{} samples cannot constrain {} lines",
            spec.frequency.len(),
            n_lines
        )));
    }
    // alpha transform; saturated samples dropped
    let mut nu = Vec::new();
    let mut alpha = Vec::new();
    for (&f, &t) in spec.frequency.iter().zip(&spec.transmission) {
        if t >= SATURATION_FLOOR {
            nu.push(f);
            alpha.push(-t.ln() / spec.length_cm);
        }
    }
    if nu.len() < 3 * n_lines + 1 {
        return Err(FitError::InvalidObservations(
            "too few unsaturated samples".into(),
        ));
    }

    // peak-pick initial guesses: greedily take the highest samples separated
    // by at least a twentieth of the span
    let span = nu[nu.len() - 1] - nu[0];
    let min_separation = span / 20.0;
    let mut order: Vec<usize> = (0..nu.len()).collect();
    order.sort_by(|&a, &b| alpha[b].partial_cmp(&alpha[a]).unwrap());
    let mut centers: Vec<usize> = Vec::new();
    for k in order {
        if centers.len() >= n_lines {
            break;
        }
        if centers
            .iter()
            .all(|&c| (nu[c] - nu[k]).abs() >= min_separation)
        {
            centers.push(k);
        }
    }
    while centers.len() < n_lines {
        centers.push(nu.len() / 2);
    }
    centers.sort_by(|&a, &b| nu[a].partial_cmp(&nu[b]).unwrap());

    let mut initial = Vec::with_capacity(3 * n_lines);
    let mut names_owned = Vec::new();
    for (idx, &c) in centers.iter().enumerate() {
        // width guess: walk to half maximum
        let half = alpha[c] / 2.0;
        let mut right = c;
        while right + 1 < nu.len() && alpha[right] > half {
            right += 1;
        }
        let mut left = c;
        while left > 0 && alpha[left] > half {
            left -= 1;
        }
        let fwhm0 = (nu[right] - nu[left]).max(span / (nu.len() as f64)) ;
        initial.push(nu[c]);
        initial.push(fwhm0);
        initial.push(alpha[c] * fwhm0 / GAUSSIAN_PEAK_FACTOR);
        names_owned.push(format!("center_{idx}"));
        names_owned.push(format!("fwhm_{idx}"));
        names_owned.push(format!("area_{idx}"));
    }
    let names: Vec<&str> = names_owned.iter().map(|s| s.as_str()).collect();

    let residual = |p: &[f64]| -> Vec<f64> {
        nu.iter()
            .zip(&alpha)
            .map(|(&f, &a)| {
                let mut model = 0.0;
                for line in p.chunks_exact(3) {
                    let (c, w, area) = (line[0], line[1].abs().max(1.0), line[2]);
                    let x = f - c;
                    model += area * GAUSSIAN_PEAK_FACTOR / w
                        * (-4.0 * std::f64::consts::LN_2 * x * x / (w * w)).exp();
                }
                model - a
            })
            .collect()
    };

    least_squares(residual, &initial, None, &names, &LmOptions::default())
}
