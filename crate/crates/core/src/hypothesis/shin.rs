use super::statistic::eta_with;
use super::{Method, TestMeta, TestOutcome};
use crate::error::{Error, Result};
use crate::model::{Family, ModelSpec};
use crate::scalar::Scalar;
use crate::variance::LrvConfig;

/// Upper-tail asymptotic critical values of the residual KPSS statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShinCriticalValues {
    /// Significance levels, decreasing.
    pub levels: [f64; 4],
    /// Matching critical values, increasing.
    pub values: [f64; 4],
    pub source: &'static str,
}

impl ShinCriticalValues {
    pub fn at(&self, alpha: f64) -> Option<f64> {
        self.levels
            .iter()
            .position(|&a| (a - alpha).abs() < 1e-12)
            .map(|k| self.values[k])
    }

    /// Tabulated p-value bound: the smallest tabulated level whose critical
    /// value is exceeded, or 1 when none is.
    pub fn p_value_bound(&self, statistic: f64) -> f64 {
        let mut p = 1.0;
        for (&a, &c) in self.levels.iter().zip(&self.values) {
            if statistic > c {
                p = a;
            }
        }
        p
    }
}

/// One stochastic regressor, no intercept or trend in the cointegrating
/// regression.
pub const SHIN_NO_DETERMINISTICS: ShinCriticalValues = ShinCriticalValues {
    levels: [0.10, 0.05, 0.025, 0.01],
    values: [0.853, 1.206, 1.585, 2.127],
    source: "simulated: 800000 paths of the residual functional, T = 2000, regression through the origin on one random walk",
};

/// Residual KPSS test against tabulated critical values.
///
/// Only valid for y_t = βx_t + u_t (single regressor, no deterministics);
/// the p-value is the tabulated bound from [`ShinCriticalValues::p_value_bound`],
/// so `rejects(0.05)` is exactly η̂ > c₀.₀₅.
pub fn shin_critical_value_test<S: Scalar>(
    spec: &ModelSpec<S>,
    residuals: &[S],
    lrv: &LrvConfig,
) -> Result<TestOutcome> {
    let plain_linear = matches!(spec.family(), Family::Linear | Family::Polynomial(1));
    if !plain_linear || spec.deterministics().count() > 0 {
        return Err(Error::UnsupportedModel(format!(
            "tabulated critical values exist only for the linear model without deterministics, got {}",
            spec.label()
        )));
    }
    let table = &SHIN_NO_DETERMINISTICS;
    let eta = eta_with(residuals, lrv)?.to_f64_lossy();
    Ok(TestOutcome {
        statistic: eta,
        p_value: table.p_value_bound(eta),
        method: Method::ShinCriticalValue,
        meta: TestMeta {
            critical_value: table.at(0.05),
            fit_converged: true,
            ..Default::default()
        },
    })
}
