use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::variance::LrvConfig;

/// η̂ = (T² ω̂²)⁻¹ Σ_t (Σ_{j≤t} û_j)².
pub fn eta_statistic<S: Scalar>(residuals: &[S], lrv: S) -> Result<S> {
    if residuals.is_empty() {
        return Err(Error::InsufficientSample { have: 0, need: 0 });
    }
    if !(lrv > S::zero()) || !lrv.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    let mut partial = S::zero();
    let mut acc = S::zero();
    for &u in residuals {
        partial = partial + u;
        acc = acc + partial * partial;
    }
    let n = S::of_usize(residuals.len());
    Ok(acc / (n * n * lrv))
}

/// η̂ with the denominator estimated from the same residuals.
pub fn eta_with<S: Scalar>(residuals: &[S], lrv: &LrvConfig) -> Result<S> {
    eta_statistic(residuals, lrv.estimate(residuals)?)
}
