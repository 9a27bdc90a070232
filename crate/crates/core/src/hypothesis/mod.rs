//! Cointegration and stationarity tests built on the KPSS-type statistic.

mod bootstrap;
mod shin;
mod stationarity;
mod statistic;
mod subresidual;

use serde::{Deserialize, Serialize};

pub use bootstrap::{
    fixed_regressor_bootstrap, fixed_regressor_bootstrap_prepared, BootstrapConfig,
};
pub use shin::{shin_critical_value_test, ShinCriticalValues, SHIN_NO_DETERMINISTICS};
pub use stationarity::stationarity_bootstrap_test;
pub use statistic::{eta_statistic, eta_with};
pub use subresidual::{
    block_max_statistic, block_starts, bonferroni_subresidual_test, cw_cdf, cw_quantile,
    default_block_grid, min_volatility_block, min_volatility_index, subresidual_statistic,
    BlockChoice,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bootstrap,
    Subresidual,
    #[serde(rename = "shin")]
    ShinCriticalValue,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Bootstrap => "bootstrap",
            Method::Subresidual => "subresidual",
            Method::ShinCriticalValue => "shin",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "bootstrap" => Ok(Method::Bootstrap),
            "subresidual" => Ok(Method::Subresidual),
            "shin" => Ok(Method::ShinCriticalValue),
            _ => Err(crate::Error::InvalidConfig(format!(
                "unknown test method `{s}`"
            ))),
        }
    }
}

/// Bookkeeping attached to a test result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TestMeta {
    /// Requested bootstrap draws B.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_draws: Option<usize>,
    /// Draws that entered the p-value (B minus exclusions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_draws: Option<usize>,
    /// Bootstrap draws dropped after exhausting refit attempts.
    pub excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_value: Option<f64>,
    /// Whether the fit on the original data converged.
    pub fit_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub meta: TestMeta,
}

impl TestOutcome {
    /// Reject the null of cointegration (stationarity) at level `alpha`.
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}
