//! Levenberg–Marquardt minimization of a sum of squared residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lstsq, Matrix};
use crate::scalar::{all_finite, sum_sq, Scalar};

/// Stopping and damping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsOptions {
    pub initial_damping: f64,
    /// Largest shrink of the damping after an accepted step, and the first
    /// growth factor after a rejected one (it doubles on repeated rejections).
    pub damping_factor: f64,
    /// Stop when the accepted step lowers the SSR by less than this fraction.
    pub ftol: f64,
    /// Stop when the step is smaller than this relative to ‖θ‖.
    pub xtol: f64,
    /// Stop when every Jacobian column is this close to orthogonal to the
    /// residuals (cosine of the angle). 0 disables the check.
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_factor: 10.0,
            ftol: 1e-10,
            xtol: 1e-10,
            gtol: 0.0,
            max_iter: 200,
        }
    }
}

/// Residuals r(θ) = y − f(θ) and the Jacobian ∂f/∂θ of the fitted values.
pub(crate) trait LeastSquaresProblem<S: Scalar> {
    fn n_obs(&self) -> usize;
    fn n_params(&self) -> usize;
    fn residuals(&self, theta: &[S], out: &mut [S]);
    fn jacobian(&self, theta: &[S], out: &mut Matrix<S>);
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome<S> {
    pub theta: Vec<S>,
    pub residuals: Vec<S>,
    pub ssr: S,
    pub iterations: usize,
    pub converged: bool,
}

fn norm<S: Scalar>(v: &[S]) -> S {
    sum_sq(v).sqrt()
}

pub(crate) fn levenberg_marquardt<S: Scalar, P: LeastSquaresProblem<S>>(
    problem: &P,
    init: &[S],
    opts: &NlsOptions,
) -> Result<LmOutcome<S>> {
    let (n, p) = (problem.n_obs(), problem.n_params());
    if init.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: init.len(),
        });
    }
    if !all_finite(init) {
        return Err(Error::NonFiniteParameter);
    }
    let ftol = S::lit(opts.ftol);
    let xtol = S::lit(opts.xtol);
    let factor = S::lit(opts.damping_factor);

    let mut theta = init.to_vec();
    let mut resid = vec![S::zero(); n];
    problem.residuals(&theta, &mut resid);
    let mut ssr = sum_sq(&resid);
    if !ssr.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite residuals at the starting values".into(),
        ));
    }
    let mut lambda = S::lit(opts.initial_damping);
    let mut nu = factor;
    let mut scale = vec![S::zero(); p];
    let mut jac = Matrix::zeros(n, p);
    let mut trial_resid = vec![S::zero(); n];
    let mut iterations = 0;

    let done = |theta: Vec<S>, residuals: Vec<S>, ssr: S, iterations: usize, converged: bool| {
        Ok(LmOutcome {
            theta,
            residuals,
            ssr,
            iterations,
            converged,
        })
    };

    if ssr == S::zero() {
        return done(theta, resid, ssr, 0, true);
    }

    loop {
        problem.jacobian(&theta, &mut jac);
        if !jac.all_finite() {
            return Err(Error::NumericalFailure("non-finite Jacobian".into()));
        }
        // Marquardt scaling: running maximum of the column norms
        let rnorm = ssr.sqrt();
        let mut gmax = S::zero();
        for (j, d) in scale.iter_mut().enumerate() {
            let cn = (0..n).map(|i| jac[(i, j)] * jac[(i, j)]).sum::<S>().sqrt();
            if cn > S::zero() {
                let g = (0..n).map(|i| jac[(i, j)] * resid[i]).sum::<S>().abs();
                gmax = gmax.max(g / (cn * rnorm));
            }
            *d = d.max(cn);
            if *d == S::zero() {
                *d = S::one();
            }
        }
        if gmax <= S::lit(opts.gtol) {
            return done(theta, resid, ssr, iterations, true);
        }
        loop {
            if iterations >= opts.max_iter {
                return done(theta, resid, ssr, iterations, false);
            }
            iterations += 1;

            let mut aug = Matrix::zeros(n + p, p);
            for i in 0..n {
                aug.row_mut(i).copy_from_slice(jac.row(i));
            }
            let sl = lambda.sqrt();
            for j in 0..p {
                aug[(n + j, j)] = sl * scale[j];
            }
            let mut rhs = resid.clone();
            rhs.resize(n + p, S::zero());
            let step = match lstsq(&aug, &rhs) {
                Ok(s) => s,
                Err(Error::RankDeficient { .. }) => {
                    lambda = lambda * factor;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let step_small = norm(&step) <= xtol * (norm(&theta) + xtol);
            let trial: Vec<S> = theta.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            problem.residuals(&trial, &mut trial_resid);
            let trial_ssr = sum_sq(&trial_resid);
            // reduction predicted by the linearization: ‖r‖² − ‖r − J h‖²
            let jh = jac.mul_vec(&step);
            let predicted = ssr
                - resid
                    .iter()
                    .zip(&jh)
                    .map(|(&r, &d)| (r - d) * (r - d))
                    .sum::<S>();

            if trial_ssr.is_finite() && trial_ssr < ssr {
                let decrease = ssr - trial_ssr;
                let old = ssr;
                theta = trial;
                std::mem::swap(&mut resid, &mut trial_resid);
                ssr = trial_ssr;
                // gain-ratio damping update
                let two = S::lit(2.0);
                let gain = if predicted > S::zero() {
                    decrease / predicted
                } else {
                    S::one()
                };
                let shrink = (S::one() - (two * gain - S::one()).powi(3)).max(S::one() / factor);
                lambda = (lambda * shrink).max(S::min_positive_value().sqrt());
                nu = two;
                if ssr == S::zero() || decrease <= ftol * old || step_small {
                    return done(theta, resid, ssr, iterations, true);
                }
                break;
            }
            // rejected: no representable improvement left along a vanishing step
            if step_small {
                return done(theta, resid, ssr, iterations, true);
            }
            lambda = lambda * nu;
            nu = nu * S::lit(2.0);
            if !lambda.is_finite() {
                return done(theta, resid, ssr, iterations, false);
            }
        }
    }
}
