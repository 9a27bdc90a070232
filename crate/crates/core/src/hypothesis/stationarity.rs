use super::bootstrap::{bootstrap_core, BootstrapConfig};
use super::TestOutcome;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, QrFactor};
use crate::model::Deterministics;
use crate::scalar::{sum_sq, Scalar};

const MIN_LENGTH: usize = 10;

/// Bootstrap KPSS-type test of (level or trend) stationarity of `series`.
///
/// The series is regressed on the deterministic terms; the bootstrap keeps
/// that design fixed and resamples y^b = û·z.
pub fn stationarity_bootstrap_test<S: Scalar>(
    series: &[S],
    deterministics: Deterministics,
    cfg: &BootstrapConfig,
    seed: u64,
) -> Result<TestOutcome> {
    let n = series.len();
    if n < MIN_LENGTH {
        return Err(Error::InsufficientSample {
            have: n,
            need: MIN_LENGTH,
        });
    }
    let mut columns = Vec::new();
    if deterministics.intercept {
        columns.push(vec![S::one(); n]);
    }
    if deterministics.trend {
        columns.push((1..=n).map(S::of_usize).collect());
    }
    if columns.is_empty() {
        return bootstrap_core(series, true, cfg, seed, |yb| Ok(Some(yb.to_vec())));
    }
    let design = Matrix::from_columns(&columns)?;
    let qr = QrFactor::new(&design)?;
    let resid = |y: &[S]| -> Result<Vec<S>> {
        let coef = qr.solve(y)?;
        Ok(y.iter()
            .zip(design.mul_vec(&coef))
            .map(|(&a, b)| a - b)
            .collect())
    };
    let u = resid(series)?;
    // Residuals at rounding level mean the series is exactly deterministic.
    let tol = S::epsilon() * S::of_usize(n);
    if sum_sq(&u) <= tol * tol * sum_sq(series) {
        return Err(Error::DegenerateVariance);
    }
    bootstrap_core(&u, true, cfg, seed, |yb| resid(yb).map(Some))
}
