//! Cointegrating-regression estimators: OLS for θ-linear families,
//! Levenberg–Marquardt NLS otherwise, and the leads-and-lags augmentation.
//!
//! The regressor is used as observed; no triangular-array rescaling is applied.

mod init;
mod nls;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, QrFactor};
use crate::model::{ModelSpec, ParamVector};
use crate::scalar::{sum_sq, Scalar};

pub use init::nls_initial_values;
pub use nls::NlsOptions;
use nls::{levenberg_marquardt, LeastSquaresProblem};

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<S: Scalar = f64> {
    pub theta_hat: ParamVector<S>,
    /// Coefficients on the extra linear regressors (π̂_{−K..K} for leads and lags).
    pub nuisance: Vec<S>,
    pub residuals: Vec<S>,
    /// Zero-based position of `residuals[0]` in the original sample.
    pub first_index: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_ssr: S,
}

impl<S: Scalar> FitResult<S> {
    pub fn coefficients(&self) -> Vec<S> {
        let mut c = self.theta_hat.as_slice().to_vec();
        c.extend_from_slice(&self.nuisance);
        c
    }
}

/// Estimator used for the cointegrating regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Estimator {
    /// OLS; only for families linear in θ.
    Ols,
    /// Nonlinear least squares (OLS when the family is linear in θ).
    Nls,
    /// Leads-and-lags regression with Δx_{t−j}, j = −K..K.
    LeadsLags { k: usize },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Nls
    }
}

impl Estimator {
    pub fn label(&self) -> String {
        match self {
            Estimator::Ols => "ols".into(),
            Estimator::Nls => "nls".into(),
            Estimator::LeadsLags { k } => format!("ll{k}"),
        }
    }
}

/// Least-squares fit of `y` on the columns of `regressors`.
pub fn fit_ols<S: Scalar>(regressors: &Matrix<S>, y: &[S]) -> Result<FitResult<S>> {
    if y.len() != regressors.rows() {
        return Err(Error::DimensionMismatch {
            expected: regressors.rows(),
            got: y.len(),
        });
    }
    if regressors.rows() <= regressors.cols() {
        return Err(Error::InsufficientSample {
            have: regressors.rows(),
            need: regressors.cols(),
        });
    }
    let qr = QrFactor::new(regressors)?;
    ols_with(regressors, &qr, y, 0, 0)
}

fn ols_with<S: Scalar>(
    design: &Matrix<S>,
    qr: &QrFactor<S>,
    y: &[S],
    n_theta: usize,
    first_index: usize,
) -> Result<FitResult<S>> {
    let coef = qr.solve(y)?;
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::NumericalFailure(
            "non-finite OLS coefficients".into(),
        ));
    }
    let fitted = design.mul_vec(&coef);
    let residuals: Vec<S> = y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect();
    let final_ssr = sum_sq(&residuals);
    let split = if n_theta == 0 { coef.len() } else { n_theta };
    let (theta, nuisance) = coef.split_at(split);
    Ok(FitResult {
        theta_hat: ParamVector::new(theta.to_vec())?,
        nuisance: nuisance.to_vec(),
        residuals,
        first_index,
        converged: true,
        iterations: 1,
        final_ssr,
    })
}

/// Regression of y on `spec` evaluated at a fixed regressor path, optionally
/// augmented with extra linear regressors. The regressor side is prepared once
/// and can be refitted against many right-hand sides (bootstrap samples).
#[derive(Debug, Clone)]
pub struct Regression<'a, S: Scalar = f64> {
    spec: &'a ModelSpec<S>,
    x: &'a [S],
    /// Zero-based offset of `x[0]` in the original sample (time index t = offset + 1).
    offset: usize,
    full_len: usize,
    extra: Vec<Vec<S>>,
    linear: Option<(Matrix<S>, QrFactor<S>)>,
    opts: NlsOptions,
}

impl<'a, S: Scalar> Regression<'a, S> {
    /// y_t = g(x_t, θ) + u_t over the full sample.
    pub fn plain(spec: &'a ModelSpec<S>, x: &'a [S], opts: NlsOptions) -> Result<Self> {
        Self::build(spec, x, 0, x.len(), Vec::new(), opts)
    }

    /// y_t = g(x_t, θ) + Σ_{j=−K}^{K} π_j Δx_{t−j} + e_t for t = K+2, …, T.
    pub fn leads_lags(
        spec: &'a ModelSpec<S>,
        x: &'a [S],
        k: usize,
        opts: NlsOptions,
    ) -> Result<Self> {
        let n = x.len();
        let n_cols = spec.n_params() + 2 * k + 1;
        let trimmed = n.saturating_sub(2 * k + 1);
        if trimmed <= n_cols {
            return Err(Error::InsufficientSample {
                have: trimmed,
                need: n_cols,
            });
        }
        // zero-based: observation i uses Δx_{i-j} = x[i-j] - x[i-j-1]; i runs over k+1..n-k
        let first = k + 1;
        let last = n - k; // exclusive
        let extra = (-(k as isize)..=k as isize)
            .map(|j| {
                (first..last)
                    .map(|i| {
                        let s = (i as isize - j) as usize;
                        x[s] - x[s - 1]
                    })
                    .collect()
            })
            .collect();
        Self::build(spec, &x[first..last], first, n, extra, opts)
    }

    fn build(
        spec: &'a ModelSpec<S>,
        x: &'a [S],
        offset: usize,
        full_len: usize,
        extra: Vec<Vec<S>>,
        opts: NlsOptions,
    ) -> Result<Self> {
        let p = spec.n_params() + extra.len();
        if x.len() <= p {
            return Err(Error::InsufficientSample {
                have: x.len(),
                need: p,
            });
        }
        let mut reg = Self {
            spec,
            x,
            offset,
            full_len,
            extra,
            linear: None,
            opts,
        };
        if spec.is_linear_in_params() {
            let design = reg.linear_design();
            let qr = QrFactor::new(&design)?;
            reg.linear = Some((design, qr));
        }
        Ok(reg)
    }

    fn linear_design(&self) -> Matrix<S> {
        let np = self.spec.n_params();
        let p = np + self.extra.len();
        let zeros = vec![S::zero(); np];
        let mut m = Matrix::zeros(self.x.len(), p);
        for (i, &xi) in self.x.iter().enumerate() {
            let row = m.row_mut(i);
            self.spec
                .jacobian_into(xi, self.offset + i + 1, &zeros, &mut row[..np]);
            for (dst, col) in row[np..].iter_mut().zip(&self.extra) {
                *dst = col[i];
            }
        }
        m
    }

    pub fn spec(&self) -> &ModelSpec<S> {
        self.spec
    }

    /// Regressor values on the estimation sample.
    pub fn regressor(&self) -> &[S] {
        self.x
    }

    /// Extra linear regressors on the estimation sample.
    pub fn extra_columns(&self) -> &[Vec<S>] {
        &self.extra
    }

    pub fn first_index(&self) -> usize {
        self.offset
    }

    /// Number of observations entering the fit.
    pub fn n_obs(&self) -> usize {
        self.x.len()
    }

    pub fn n_coefficients(&self) -> usize {
        self.spec.n_params() + self.extra.len()
    }

    fn trimmed<'y>(&self, y: &'y [S]) -> Result<&'y [S]> {
        if y.len() != self.full_len {
            return Err(Error::DimensionMismatch {
                expected: self.full_len,
                got: y.len(),
            });
        }
        Ok(&y[self.offset..self.offset + self.x.len()])
    }

    /// Fits `y` (full-length sample): OLS for θ-linear families, otherwise NLS
    /// from grid starting values.
    pub fn fit(&self, y: &[S]) -> Result<FitResult<S>> {
        let yt = self.trimmed(y)?;
        self.fit_estimation_sample(yt)
    }

    /// Like [`Regression::fit`] but `y` already covers only the estimation
    /// sample (length [`Regression::n_obs`]).
    pub fn fit_estimation_sample(&self, yt: &[S]) -> Result<FitResult<S>> {
        if yt.len() != self.x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x.len(),
                got: yt.len(),
            });
        }
        if let Some((design, qr)) = &self.linear {
            return ols_with(design, qr, yt, self.spec.n_params(), self.offset);
        }
        let init =
            init::initial_values_with_extra(self.spec, self.x, yt, self.offset + 1, &self.extra)?;
        self.run_lm(yt, &init)
    }

    /// Refit of an estimation-sample `yt` near a previous solution: OLS for
    /// θ-linear families, otherwise Levenberg–Marquardt started at `init`
    /// (θ followed by any nuisance coefficients).
    pub fn refit_from(&self, yt: &[S], init: &[S]) -> Result<FitResult<S>> {
        if yt.len() != self.x.len() {
            return Err(Error::DimensionMismatch {
                expected: self.x.len(),
                got: yt.len(),
            });
        }
        if let Some((design, qr)) = &self.linear {
            return ols_with(design, qr, yt, self.spec.n_params(), self.offset);
        }
        self.run_lm(yt, init)
    }

    /// Levenberg–Marquardt from `init` (θ followed by any nuisance coefficients),
    /// regardless of whether the family is linear in θ.
    pub fn fit_nls_from(&self, y: &[S], init: &[S]) -> Result<FitResult<S>> {
        let yt = self.trimmed(y)?;
        self.run_lm(yt, init)
    }

    fn run_lm(&self, y: &[S], init: &[S]) -> Result<FitResult<S>> {
        let problem = Problem { reg: self, y };
        let out = levenberg_marquardt(&problem, init, &self.opts)?;
        let (theta, nuisance) = out.theta.split_at(self.spec.n_params());
        Ok(FitResult {
            theta_hat: ParamVector::new(theta.to_vec())?,
            nuisance: nuisance.to_vec(),
            residuals: out.residuals,
            first_index: self.offset,
            converged: out.converged,
            iterations: out.iterations,
            final_ssr: out.ssr,
        })
    }
}

struct Problem<'r, 'a, S: Scalar> {
    reg: &'r Regression<'a, S>,
    y: &'r [S],
}

impl<S: Scalar> LeastSquaresProblem<S> for Problem<'_, '_, S> {
    fn n_obs(&self) -> usize {
        self.y.len()
    }

    fn n_params(&self) -> usize {
        self.reg.n_coefficients()
    }

    fn residuals(&self, theta: &[S], out: &mut [S]) {
        let np = self.reg.spec.n_params();
        let (th, pi) = theta.split_at(np);
        for (i, (&xi, o)) in self.reg.x.iter().zip(out.iter_mut()).enumerate() {
            let mut f = self
                .reg
                .spec
                .eval_unchecked(xi, self.reg.offset + i + 1, th);
            for (c, &p) in self.reg.extra.iter().zip(pi) {
                f = f + p * c[i];
            }
            *o = self.y[i] - f;
        }
    }

    fn jacobian(&self, theta: &[S], out: &mut Matrix<S>) {
        let np = self.reg.spec.n_params();
        let th = &theta[..np];
        for (i, &xi) in self.reg.x.iter().enumerate() {
            let row = out.row_mut(i);
            self.reg
                .spec
                .jacobian_into(xi, self.reg.offset + i + 1, th, &mut row[..np]);
            for (dst, c) in row[np..].iter_mut().zip(&self.reg.extra) {
                *dst = c[i];
            }
        }
    }
}

/// Levenberg–Marquardt fit of y on g(x, θ) starting from `theta_init`.
pub fn fit_nls<S: Scalar>(
    spec: &ModelSpec<S>,
    x: &[S],
    y: &[S],
    theta_init: &ParamVector<S>,
    opts: &NlsOptions,
) -> Result<FitResult<S>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if theta_init.len() != spec.n_params() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_params(),
            got: theta_init.len(),
        });
    }
    let reg = Regression {
        spec,
        x,
        offset: 0,
        full_len: x.len(),
        extra: Vec::new(),
        linear: None,
        opts: *opts,
    };
    if x.len() <= spec.n_params() {
        return Err(Error::InsufficientSample {
            have: x.len(),
            need: spec.n_params(),
        });
    }
    reg.fit_nls_from(y, theta_init)
}

/// Leads-and-lags fit with `k` leads and lags of Δx.
pub fn fit_leads_lags<S: Scalar>(
    spec: &ModelSpec<S>,
    x: &[S],
    y: &[S],
    k: usize,
) -> Result<FitResult<S>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Regression::leads_lags(spec, x, k, NlsOptions::default())?.fit(y)
}

/// Prepares the regression implied by `estimator`.
pub fn prepare<'a, S: Scalar>(
    estimator: Estimator,
    spec: &'a ModelSpec<S>,
    x: &'a [S],
    opts: NlsOptions,
) -> Result<Regression<'a, S>> {
    match estimator {
        Estimator::Ols if !spec.is_linear_in_params() => Err(Error::UnsupportedModel(format!(
            "OLS requires a family linear in its parameters, got {}",
            spec.label()
        ))),
        Estimator::Ols | Estimator::Nls => Regression::plain(spec, x, opts),
        Estimator::LeadsLags { k } => Regression::leads_lags(spec, x, k, opts),
    }
}

/// Fits `y` on `x` with `estimator`.
pub fn fit<S: Scalar>(
    estimator: Estimator,
    spec: &ModelSpec<S>,
    x: &[S],
    y: &[S],
) -> Result<FitResult<S>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    prepare(estimator, spec, x, NlsOptions::default())?.fit(y)
}
