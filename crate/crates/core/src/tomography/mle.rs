use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use super::likelihood::Problem;
use super::linear::linear_reconstruct;
use super::{Diagnostics, Initialization, MleOptions, ReconstructionResult, TomographyError};
use crate::linalg::{hermitian_eigen, M4};
use crate::polarimetry::TomographyDataset;
use crate::state::DensityMatrix;

const PARAMS: usize = 16;
/// Weight of `I/4` mixed into the starting state so that its factor is
/// strictly positive definite.
const START_MIXING: f64 = 1e-3;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Off-diagonal entries `(i, j)`, `i < j`, of the upper-triangular factor.
const OFF_DIAGONAL: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Upper-triangular `T` with a real diagonal; `rho = T^dag T / tr(T^dag T)`.
fn factor(x: &DVector<f64>) -> M4 {
    let mut t = M4::zeros();
    for d in 0..4 {
        t[(d, d)] = Complex64::new(x[d], 0.0);
    }
    for (k, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
        t[(i, j)] = Complex64::new(x[4 + 2 * k], x[5 + 2 * k]);
    }
    t
}

fn unfactor(t: &M4) -> DVector<f64> {
    let mut x = DVector::zeros(PARAMS);
    for d in 0..4 {
        x[d] = t[(d, d)].re;
    }
    for (k, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
        x[4 + 2 * k] = t[(i, j)].re;
        x[5 + 2 * k] = t[(i, j)].im;
    }
    x
}

fn density(t: &M4) -> (M4, f64) {
    let s = t.adjoint() * t;
    let tr = s.trace().re;
    let rho = s / Complex64::new(tr, 0.0);
    ((rho + rho.adjoint()) * Complex64::new(0.5, 0.0), tr)
}

/// Factor of a positive definite `rho`: `rho = L L^dag`, so `T = L^dag`.
fn factor_of(rho: &M4) -> M4 {
    let mixed = rho * Complex64::new(1.0 - START_MIXING, 0.0)
        + M4::identity() * Complex64::new(START_MIXING / 4.0, 0.0);
    let l = Cholesky::new(mixed)
        .expect("mixing with the identity makes the start positive definite")
        .l();
    let mut t = l.adjoint();
    // Cholesky leaves a real positive diagonal; drop round-off imaginary parts.
    for d in 0..4 {
        t[(d, d)] = Complex64::new(t[(d, d)].re, 0.0);
    }
    t
}

struct Objective<'a> {
    problem: &'a Problem,
}

impl Objective<'_> {
    /// Log-likelihood (state-dependent part) and its gradient.
    fn value_and_gradient(
        &self,
        x: &DVector<f64>,
    ) -> Result<(f64, DVector<f64>, f64), TomographyError> {
        let t = factor(x);
        let (rho, s) = density(&t);
        let e = self.problem.evaluate(&rho)?;
        let r = self.problem.probability_gradient(&e);
        // d value = tr(R' d rho) with R' = R - tr(R rho) I, and
        // d rho = (dT^dag T + T^dag dT - rho ds) / s.
        let shift = (r * rho).trace().re;
        let r_shifted = r - M4::identity() * Complex64::new(shift, 0.0);
        let g_mat = r_shifted * t.adjoint();
        let mut g = DVector::zeros(PARAMS);
        for d in 0..4 {
            g[d] = 2.0 * g_mat[(d, d)].re / s;
        }
        for (k, &(i, j)) in OFF_DIAGONAL.iter().enumerate() {
            g[4 + 2 * k] = 2.0 * g_mat[(j, i)].re / s;
            g[5 + 2 * k] = -2.0 * g_mat[(j, i)].im / s;
        }
        Ok((e.value, g, e.intensity))
    }

    fn value(&self, x: &DVector<f64>) -> Option<f64> {
        let (rho, _) = density(&factor(x));
        self.problem.evaluate(&rho).ok().map(|e| e.value)
    }
}

/// Maximum-likelihood state over `rho = T^dag T / tr(T^dag T)`.
///
/// Ascent is BFGS on the 16 real entries of `T` with a backtracking Armijo
/// line search, so every accepted iterate increases the likelihood. The run
/// stops when an accepted step gains less than `opts.tolerance`, when the
/// gradient norm drops below `opts.gradient_tolerance`, or when no step along
/// the steepest-ascent direction improves the likelihood at machine
/// precision. Hitting `opts.max_iter` first returns the last iterate with
/// `converged = false`.
pub fn mle_reconstruct(
    data: &TomographyDataset,
    opts: &MleOptions,
) -> Result<ReconstructionResult, TomographyError> {
    opts.validate()?;
    let problem = Problem::new(data, opts.background)?;
    if problem.is_empty() || problem.is_degenerate() {
        return Err(TomographyError::DegenerateDataset);
    }

    let linear = linear_reconstruct(data).ok();
    let start = match (opts.init, &linear) {
        (Initialization::FromLinear, Some(l)) => l.projected().into_matrix(),
        (Initialization::FromLinear, None) => {
            // Surface the reason linear inversion failed.
            return Err(linear_reconstruct(data).unwrap_err());
        }
        (Initialization::MaximallyMixed, _) => DensityMatrix::maximally_mixed().into_matrix(),
    };

    let obj = Objective { problem: &problem };
    let mut x = unfactor(&factor_of(&start));
    let (mut f, mut g, mut intensity) = obj.value_and_gradient(&x)?;
    let mut h = DMatrix::<f64>::identity(PARAMS, PARAMS);
    let mut trace = vec![f + problem.constant];
    let mut converged = false;
    let mut stop_reason = "iteration limit reached";
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if g.norm() < opts.gradient_tolerance {
            converged = true;
            stop_reason = "gradient below tolerance";
            break;
        }
        // Ascent direction; fall back to the gradient if BFGS lost it.
        let mut d = &h * &g;
        let mut used_bfgs = true;
        if d.dot(&g) <= 0.0 {
            d = g.clone();
            h = DMatrix::identity(PARAMS, PARAMS);
            used_bfgs = false;
        }
        let step = loop {
            match line_search(&obj, &x, f, &g, &d) {
                Some(s) => break Some(s),
                None if used_bfgs => {
                    d = g.clone();
                    h = DMatrix::identity(PARAMS, PARAMS);
                    used_bfgs = false;
                }
                None => break None,
            }
        };
        let Some((x_new, _)) = step else {
            converged = true;
            stop_reason = "no further improvement at machine precision";
            break;
        };
        let (f_new, g_new, n_new) = obj.value_and_gradient(&x_new)?;
        iterations += 1;
        let s = &x_new - &x;
        let y = &g - &g_new;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() {
            if iterations == 1 {
                h = DMatrix::identity(PARAMS, PARAMS) * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * ((1.0 + rho * yhy) * rho)
                - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let gain = f_new - f;
        x = x_new;
        f = f_new;
        g = g_new;
        intensity = n_new;
        trace.push(f + problem.constant);
        if gain < opts.tolerance {
            converged = true;
            stop_reason = "likelihood change below tolerance";
            break;
        }
    }

    let (rho, _) = density(&factor(&x));
    let (values, _) = hermitian_eigen(&rho);
    Ok(ReconstructionResult {
        dm: DensityMatrix::from_trusted(rho),
        log_likelihood: f + problem.constant,
        iterations,
        converged,
        diagnostics: Diagnostics {
            gradient_norm: g.norm(),
            intensity,
            min_eigenvalue: values[0],
            linear_condition_number: linear.as_ref().map(|l| l.condition_number),
            linear_min_eigenvalue: linear.as_ref().map(|l| l.min_eigenvalue),
            stop_reason: stop_reason.to_string(),
        },
        likelihood_trace: trace,
    })
}

/// Backtracking from a unit step until the Armijo condition holds.
fn line_search(
    obj: &Objective<'_>,
    x: &DVector<f64>,
    f: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let slope = g.dot(d);
    let mut alpha = 1.0;
    while alpha > MIN_STEP {
        let trial = x + d * alpha;
        if let Some(v) = obj.value(&trial) {
            if v > f && v >= f + ARMIJO * alpha * slope {
                return Some((trial, v));
            }
        }
        alpha *= 0.5;
    }
    None
}
