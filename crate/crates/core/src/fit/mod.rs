//! Nonlinear least-squares engine (Levenberg-Marquardt with a multiplicative
//! damping schedule) and model-specific fitters.

pub mod models;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("residual vector is empty")]
    EmptyResiduals,
    #[error("initial parameters outside bounds at index {0}")]
    InitialOutOfBounds(usize),
    #[error("residual not finite at the initial parameters")]
    NonFiniteResidual,
    #[error("under-determined fit: {0}")]
    UnderDetermined(String),
    #[error("observations invalid: {0}")]
    InvalidObservations(String),
}

/// One scalar observation y at independent variable x with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
    /// Standard error of y; defaults to one.
    pub sigma: f64,
}

impl Observation {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, sigma: 1.0 }
    }

    pub fn with_sigma(x: f64, y: f64, sigma: f64) -> Self {
        Self { x, y, sigma }
    }
}

/// Result of a least-squares run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    /// Parameter names, parallel to `estimates`.
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    /// 1-sigma uncertainties from the Jacobian-based covariance scaled by the
    /// reduced chi-square; zero when not identifiable.
    pub uncertainties: Vec<f64>,
    /// Root-mean-square of the (sigma-scaled) residuals at the optimum.
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Condition number of the Jacobian at the optimum; large values signal a
    /// degenerate (ill-identified) parameter combination.
    pub jacobian_condition: f64,
    /// Diagnostic for non-converged or degenerate runs.
    pub message: String,
    /// Accepted objective values, non-increasing by construction.
    #[serde(skip)]
    pub cost_trace: Vec<f64>,
}

impl FitResult {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.estimates[k])
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.uncertainties[k])
    }
}

/// Tuning knobs of the damping schedule.
#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub max_iterations: usize,
    /// Relative step/gradient threshold declaring convergence.
    pub tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            max_iterations: 200,
            tolerance: 1e-10,
        }
    }
}

/// Numerical Jacobian of `residual` by central differences.
pub fn numerical_jacobian<F>(residual: &F, params: &[f64], n_res: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n_par = params.len();
    let mut jac = DMatrix::zeros(n_res, n_par);
    let mut work = params.to_vec();
    for j in 0..n_par {
        let step = 1e-6 * params[j].abs().max(1e-9);
        work[j] = params[j] + step;
        let plus = residual(&work);
        work[j] = params[j] - step;
        let minus = residual(&work);
        work[j] = params[j];
        for i in 0..n_res {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    jac
}

fn clamp_to_bounds(params: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(bounds) = bounds {
        for (p, &(lo, hi)) in params.iter_mut().zip(bounds) {
            *p = p.clamp(lo, hi);
        }
    }
}

/// Minimize the sum of squared residuals starting from `initial`.
///
/// `residual` returns the sigma-scaled residual vector r(p); the objective is
/// |r|^2. `bounds`, when given, clamps every accepted step componentwise.
pub fn least_squares<F>(
    residual: F,
    initial: &[f64],
    bounds: Option<&[(f64, f64)]>,
    names: &[&str],
    opts: &LmOptions,
) -> Result<FitResult, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if let Some(b) = bounds {
        for (k, (p, &(lo, hi))) in initial.iter().zip(b).enumerate() {
            if *p < lo || *p > hi {
                return Err(FitError::InitialOutOfBounds(k));
            }
        }
    }
    let mut params = initial.to_vec();
    let r0 = residual(&params);
    if r0.is_empty() {
        return Err(FitError::EmptyResiduals);
    }
    if r0.iter().any(|v| !v.is_finite()) {
        return Err(FitError::NonFiniteResidual);
    }
    let n_res = r0.len();
    let n_par = params.len();

    let mut r = DVector::from_vec(r0);
    let mut cost = r.norm_squared();
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;
    let mut message = String::new();
    let mut cost_trace = vec![cost];
    let mut stagnant = 0usize;

    while iterations < opts.max_iterations {
        iterations += 1;
        let jac = numerical_jacobian(&residual, &params, n_res);
        let jtj = jac.transpose() * &jac;
        let gradient = jac.transpose() * &r;
        let grad_norm = gradient.amax();

        // Marquardt scaling: damp along diag(JtJ) so the step is invariant
        // to per-parameter rescaling
        let mut accepted = false;
        let mut step_norm = 0.0;
        for _ in 0..20 {
            let mut damped = jtj.clone();
            for k in 0..n_par {
                let d = jtj[(k, k)];
                damped[(k, k)] = d + lambda * if d > 0.0 { d } else { 1.0 };
            }
            let delta = match damped.clone().cholesky() {
                Some(ch) => ch.solve(&(-&gradient)),
                None => match damped.lu().solve(&(-&gradient)) {
                    Some(sol) => sol,
                    None => {
                        lambda *= opts.lambda_up;
                        continue;
                    }
                },
            };
            let mut trial = params.clone();
            for k in 0..n_par {
                trial[k] += delta[k];
            }
            clamp_to_bounds(&mut trial, bounds);
            let r_trial = residual(&trial);
            let cost_trial: f64 = r_trial.iter().map(|v| v * v).sum();
            if cost_trial.is_finite() && cost_trial <= cost {
                step_norm = (0..n_par)
                    .map(|k| (trial[k] - params[k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if cost - cost_trial <= 1e-12 * cost {
                    stagnant += 1;
                } else {
                    stagnant = 0;
                }
                params = trial;
                r = DVector::from_vec(r_trial);
                cost = cost_trial;
                cost_trace.push(cost);
                lambda = (lambda * opts.lambda_down).max(1e-14);
                accepted = true;
                break;
            }
            lambda *= opts.lambda_up;
        }

        if !accepted {
            converged = grad_norm <= opts.tolerance * (1.0 + cost);
            if !converged {
                message = format!(
                    "no acceptable step found (lambda {lambda:.2e}, gradient {grad_norm:.3e})"
                );
            }
            break;
        }

        // two consecutive accepted steps without relative cost improvement
        // mean the objective is exhausted at this precision
        if stagnant >= 2 || cost == 0.0 {
            converged = true;
            break;
        }
        let param_scale = params.iter().map(|p| p * p).sum::<f64>().sqrt();
        if step_norm <= opts.tolerance * (1.0 + param_scale)
            && grad_norm <= opts.tolerance.sqrt() * (1.0 + cost)
        {
            converged = true;
            break;
        }
    }
    if iterations >= opts.max_iterations && !converged {
        message = format!("stopped at the {0}-iteration limit", opts.max_iterations);
    }

    // covariance at the optimum: (JtJ)^-1 scaled by the reduced chi-square
    let jac = numerical_jacobian(&residual, &params, n_res);
    let jtj = jac.transpose() * &jac;
    let svd = jtj.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let jacobian_condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let chi2_red = if n_res > n_par {
        cost / (n_res - n_par) as f64
    } else {
        1.0
    };
    let uncertainties = match jtj.clone().try_inverse() {
        Some(cov) => (0..n_par)
            .map(|k| (cov[(k, k)].max(0.0) * chi2_red).sqrt())
            .collect(),
        None => {
            if message.is_empty() {
                message = "singular Jacobian: uncertainties unavailable".into();
            }
            vec![0.0; n_par]
        }
    };
    if jacobian_condition > 1e12 && message.is_empty() {
        message = format!(
            "degenerate fit: Jacobian condition number {jacobian_condition:.2e}"
        );
    }

    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        estimates: params,
        uncertainties,
        residual_rms: (cost / n_res as f64).sqrt(),
        converged,
        iterations,
        jacobian_condition,
        message,
        cost_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_model_exact() {
        let xs: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x).collect();
        let res = least_squares(
            |p| xs.iter().zip(&ys).map(|(x, y)| p[0] * x - y).collect(),
            &[1.0],
            None,
            &["a"],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(res.converged);
        assert!((res.estimates[0] - 2.5).abs() < 1e-10);
        assert!(res.residual_rms < 1e-10);
    }

    #[test]
    fn quadratic_bowl_from_random_starts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let start = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let res = least_squares(
                |p| vec![p[0] - 3.0, 2.0 * (p[1] + 1.5)],
                &start,
                None,
                &["x", "y"],
                &LmOptions::default(),
            )
            .unwrap();
            assert!(res.converged);
            assert!((res.estimates[0] - 3.0).abs() < 1e-8);
            assert!((res.estimates[1] + 1.5).abs() < 1e-8);
        }
    }

    #[test]
    fn internal_jacobian_matches_independent_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = |p: &[f64]| -> Vec<f64> {
            (0..8)
                .map(|k| {
                    let x = k as f64 * 0.3;
                    p[0] * (x * p[1]).sin() + p[2] * x * x
                })
                .collect()
        };
        for _ in 0..20 {
            let p = [
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
            ];
            let jac = numerical_jacobian(&model, &p, 8);
            // independent evaluation at a different step
            for j in 0..3 {
                let step = 2e-5 * p[j].abs().max(1e-9);
                let mut pp = p.to_vec();
                pp[j] += step;
                let plus = model(&pp);
                pp[j] = p[j] - step;
                let minus = model(&pp);
                for i in 0..8 {
                    let fd = (plus[i] - minus[i]) / (2.0 * step);
                    assert!(
                        (jac[(i, j)] - fd).abs() <= 1e-6 * fd.abs().max(1e-6),
                        "J[{i},{j}] {} vs {}",
                        jac[(i, j)],
                        fd
                    );
                }
            }
        }
    }

    #[test]
    fn objective_non_increasing() {
        let xs: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * (-x / 1.7).exp() + 0.2).collect();
        let res = least_squares(
            |p| {
                xs.iter()
                    .zip(&ys)
                    .map(|(x, y)| p[0] * (-x / p[1]).exp() + p[2] - y)
                    .collect()
            },
            &[1.0, 1.0, 0.0],
            None,
            &["a", "tau", "c"],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(res.converged);
        for w in res.cost_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-30);
        }
    }

    #[test]
    fn bounds_respected() {
        let res = least_squares(
            |p| vec![p[0] - 5.0],
            &[0.5],
            Some(&[(0.0, 1.0)]),
            &["x"],
            &LmOptions::default(),
        )
        .unwrap();
        assert!(res.estimates[0] <= 1.0);
        assert!((res.estimates[0] - 1.0).abs() < 1e-9);

        assert!(matches!(
            least_squares(|p| vec![p[0]], &[2.0], Some(&[(0.0, 1.0)]), &["x"], &LmOptions::default()),
            Err(FitError::InitialOutOfBounds(0))
        ));
    }

    #[test]
    fn fit_invariant_under_observation_reordering() {
        let xs: Vec<f64> = (0..25).map(|k| k as f64 * 0.2).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.2 * x + 0.7).collect();
        let run = |order: Vec<usize>| {
            least_squares(
                |p| {
                    order
                        .iter()
                        .map(|&k| p[0] * xs[k] + p[1] - ys[k])
                        .collect()
                },
                &[0.0, 0.0],
                None,
                &["a", "b"],
                &LmOptions::default(),
            )
            .unwrap()
        };
        let fwd = run((0..25).collect());
        let rev = run((0..25).rev().collect());
        assert!((fwd.estimates[0] - rev.estimates[0]).abs() < 1e-12);
        assert!((fwd.estimates[1] - rev.estimates[1]).abs() < 1e-12);
    }
}
