use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::statistic::eta_with;
use super::{Method, TestMeta, TestOutcome};
use crate::error::{Error, Result};
use crate::estimate::{prepare, Estimator, FitResult, NlsOptions, Regression};
use crate::model::ModelSpec;
use crate::rng;
use crate::scalar::Scalar;
use crate::variance::LrvConfig;

/// Settings for the heteroskedastic fixed-regressor bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    /// Number of bootstrap draws B.
    pub draws: usize,
    pub lrv: LrvConfig,
    /// Refit attempts per draw before the draw is excluded.
    pub max_attempts: usize,
    /// Run draws on the rayon pool. Results are identical either way.
    pub parallel: bool,
    pub nls: NlsOptions,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            draws: 399,
            lrv: LrvConfig::default(),
            max_attempts: 10,
            parallel: false,
            nls: NlsOptions::default(),
        }
    }
}

impl BootstrapConfig {
    pub fn with_draws(draws: usize) -> Self {
        BootstrapConfig {
            draws,
            ..Default::default()
        }
    }
}

/// Fits `y` on `x`, computes η̂ and its bootstrap p-value.
///
/// Draw `b` (zero-based) and attempt `a` use the stream `(seed, b, a)`.
pub fn fixed_regressor_bootstrap<S: Scalar>(
    spec: &ModelSpec<S>,
    estimator: Estimator,
    x: &[S],
    y: &[S],
    cfg: &BootstrapConfig,
    seed: u64,
) -> Result<TestOutcome> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let reg = prepare(estimator, spec, x, cfg.nls)?;
    let fit = reg.fit(y)?;
    fixed_regressor_bootstrap_prepared(&reg, &fit, cfg, seed)
}

/// Bootstrap on an already fitted regression.
///
/// Nonlinear refits start from the original estimates, so each bootstrap fit
/// is the local NLS solution around θ̂.
pub fn fixed_regressor_bootstrap_prepared<S: Scalar>(
    reg: &Regression<'_, S>,
    fit: &FitResult<S>,
    cfg: &BootstrapConfig,
    seed: u64,
) -> Result<TestOutcome> {
    let init = fit.coefficients();
    bootstrap_core(&fit.residuals, fit.converged, cfg, seed, |yb| {
        let f = reg.refit_from(yb, &init)?;
        Ok(f.converged.then_some(f.residuals))
    })
}

/// Shared driver. `refit` maps a bootstrap sample to its residuals, or `None`
/// when the fit did not converge.
pub(crate) fn bootstrap_core<S, F>(
    residuals: &[S],
    fit_converged: bool,
    cfg: &BootstrapConfig,
    seed: u64,
    refit: F,
) -> Result<TestOutcome>
where
    S: Scalar,
    F: Fn(&[S]) -> Result<Option<Vec<S>>> + Sync,
{
    if cfg.draws == 0 {
        return Err(Error::InvalidConfig("bootstrap needs B >= 1".into()));
    }
    let eta = eta_with(residuals, &cfg.lrv)?.to_f64_lossy();
    let attempts = cfg.max_attempts.max(1);

    let draw = |b: usize| -> Result<Option<f64>> {
        for a in 0..attempts {
            let mut g = rng::stream(seed, &[b as u64, a as u64]);
            let yb: Vec<S> = residuals
                .iter()
                .map(|&u| u * S::lit(g.sample::<f64, _>(StandardNormal)))
                .collect();
            match refit(&yb) {
                Ok(Some(res)) => match eta_with(&res, &cfg.lrv) {
                    Ok(v) if v.is_finite() => return Ok(Some(v.to_f64_lossy())),
                    Ok(_) | Err(Error::DegenerateVariance) => continue,
                    Err(e) => return Err(e),
                },
                Ok(None) => continue,
                Err(Error::NumericalFailure(_)) | Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    };

    let stats: Vec<Option<f64>> = if cfg.parallel {
        (0..cfg.draws)
            .into_par_iter()
            .map(draw)
            .collect::<Result<_>>()?
    } else {
        (0..cfg.draws).map(draw).collect::<Result<_>>()?
    };

    let kept: Vec<f64> = stats.into_iter().flatten().collect();
    let excluded = cfg.draws - kept.len();
    if kept.is_empty() {
        return Err(Error::AllBootstrapFitsFailed(cfg.draws));
    }
    if excluded > 0 {
        log::debug!("bootstrap excluded {excluded} of {} draws", cfg.draws);
    }
    let exceed = kept.iter().filter(|&&v| v >= eta).count();
    Ok(TestOutcome {
        statistic: eta,
        p_value: exceed as f64 / kept.len() as f64,
        method: Method::Bootstrap,
        meta: TestMeta {
            bootstrap_draws: Some(cfg.draws),
            effective_draws: Some(kept.len()),
            excluded,
            fit_converged,
            ..Default::default()
        },
    })
}
