//! TOML configuration shared by the grid runner and the CLI.
//!
//! A grid file looks like
//!
//! ```toml
//! seed = 20240101
//! replications = 2000
//! estimator = "nls"          # "nls" | "ols" | "leads_lags"
//!
//! [model]
//! family = "cubic"           # linear | quadratic | cubic | polynomial | smooth_transition
//! degree = 3                 # only read for family = "polynomial"
//! intercept = false
//! trend = false
//! theta = [1.0, 2.0, 1.0]    # true parameters, deterministic terms first
//!
//! [leads_lags]
//! K = 1
//!
//! [lrv]                      # omit to use σ̂² when ρ = 0 and Bartlett otherwise
//! kind = "bartlett"          # "parametric" | "bartlett"
//! bandwidth = "auto"         # "auto" | integer
//!
//! [test]
//! method = ["bootstrap", "subresidual"]   # also "shin"; a single string is accepted
//! B = 399
//! alpha = 0.05
//! block = "auto"             # "auto" | integer
//!
//! [dgp]                      # each key takes a number or a list
//! T = [100, 300]
//! tau = [0.0, 0.1, 0.5, 0.9]
//! sigma1_sq = [0.0625, 16.0]
//! lambda = 0.0
//! rho = 0.0
//! rho_mu_sq = [0.0, 0.001, 0.01, 0.1]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Estimator;
use crate::harness::GridSpec;
use crate::hypothesis::{BlockChoice, Method};
use crate::model::{Deterministics, Family, ModelSpec, ParamVector};
use crate::variance::LrvConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Linear,
    Quadratic,
    Cubic,
    Polynomial,
    SmoothTransition,
}

impl std::str::FromStr for FamilyName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => FamilyName::Linear,
            "quadratic" => FamilyName::Quadratic,
            "cubic" => FamilyName::Cubic,
            "polynomial" => FamilyName::Polynomial,
            "smooth_transition" => FamilyName::SmoothTransition,
            _ => return Err(Error::InvalidConfig(format!("unknown model family `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: FamilyName,
    #[serde(default)]
    pub degree: Option<u32>,
    #[serde(default)]
    pub intercept: bool,
    #[serde(default)]
    pub trend: bool,
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
}

impl ModelSection {
    pub fn new(family: FamilyName) -> Self {
        ModelSection {
            family,
            degree: None,
            intercept: false,
            trend: false,
            theta: None,
        }
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        let family = match self.family {
            FamilyName::Linear => Family::Linear,
            FamilyName::Quadratic => Family::Polynomial(2),
            FamilyName::Cubic => Family::Polynomial(3),
            FamilyName::Polynomial => Family::Polynomial(self.degree.ok_or_else(|| {
                Error::InvalidConfig("model.degree is required for family = \"polynomial\"".into())
            })?),
            FamilyName::SmoothTransition => Family::SmoothTransition,
        };
        let det = Deterministics {
            intercept: self.intercept || self.trend,
            trend: self.trend,
        };
        ModelSpec::new(family, det)
    }

    /// Configured θ, or a default with unit deterministic coefficients and
    /// family coefficients linear (1), quadratic (1, 1), cubic (1, 2, 1),
    /// smooth transition (0, 1, 1, 5), general polynomial all ones.
    pub fn theta(&self) -> Result<ParamVector> {
        let spec = self.spec()?;
        if let Some(t) = &self.theta {
            if t.len() != spec.n_params() {
                return Err(Error::DimensionMismatch {
                    expected: spec.n_params(),
                    got: t.len(),
                });
            }
            return ParamVector::new(t.clone());
        }
        let mut t = vec![1.0; spec.deterministics().count()];
        match spec.family() {
            Family::Polynomial(3) => t.extend([1.0, 2.0, 1.0]),
            Family::SmoothTransition => t.extend([0.0, 1.0, 1.0, 5.0]),
            f => t.extend(std::iter::repeat_n(1.0, f.n_params())),
        }
        ParamVector::new(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorName {
    Nls,
    Ols,
    LeadsLags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadsLagsSection {
    #[serde(rename = "K")]
    pub k: usize,
}

impl Default for LeadsLagsSection {
    fn default() -> Self {
        LeadsLagsSection { k: 1 }
    }
}

pub fn estimator_from(name: EstimatorName, ll: LeadsLagsSection) -> Estimator {
    match name {
        EstimatorName::Nls => Estimator::Nls,
        EstimatorName::Ols => Estimator::Ols,
        EstimatorName::LeadsLags => Estimator::LeadsLags { k: ll.k },
    }
}

/// A scalar or a list in TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_draws() -> usize {
    399
}

fn default_methods() -> OneOrMany<Method> {
    OneOrMany::One(Method::Bootstrap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSection {
    #[serde(default = "default_methods")]
    pub method: OneOrMany<Method>,
    #[serde(rename = "B", default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub block: BlockChoice,
}

impl Default for TestSection {
    fn default() -> Self {
        TestSection {
            method: default_methods(),
            draws: default_draws(),
            alpha: default_alpha(),
            block: BlockChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpSection {
    #[serde(rename = "T")]
    pub n: OneOrMany<usize>,
    #[serde(default = "zero")]
    pub tau: OneOrMany<f64>,
    #[serde(default = "one")]
    pub sigma1_sq: OneOrMany<f64>,
    #[serde(default = "zero")]
    pub lambda: OneOrMany<f64>,
    #[serde(default = "zero")]
    pub rho: OneOrMany<f64>,
    #[serde(default = "zero")]
    pub rho_mu_sq: OneOrMany<f64>,
}

fn zero() -> OneOrMany<f64> {
    OneOrMany::One(0.0)
}

fn one() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}

fn default_replications() -> usize {
    2000
}

/// Top-level grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorName,
    pub model: ModelSection,
    #[serde(default)]
    pub leads_lags: LeadsLagsSection,
    #[serde(default)]
    pub lrv: Option<LrvConfig>,
    #[serde(default)]
    pub test: TestSection,
    pub dgp: DgpSection,
}

fn default_estimator() -> EstimatorName {
    EstimatorName::Nls
}

impl GridFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn into_grid(self) -> Result<GridSpec> {
        let grid = GridSpec {
            sizes: self.dgp.n.to_vec(),
            taus: self.dgp.tau.to_vec(),
            sigma1_sq: self.dgp.sigma1_sq.to_vec(),
            lambdas: self.dgp.lambda.to_vec(),
            rhos: self.dgp.rho.to_vec(),
            rho_mu_sq: self.dgp.rho_mu_sq.to_vec(),
            spec: self.model.spec()?,
            theta: self.model.theta()?,
            estimator: estimator_from(self.estimator, self.leads_lags),
            methods: self.test.method.to_vec(),
            replications: self.replications,
            bootstrap_draws: self.test.draws,
            alpha: self.test.alpha,
            block: self.test.block,
            lrv: self.lrv,
            master_seed: self.seed,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Optional settings file for a single test run (`hetcoint test --config`).
/// Every section may be omitted; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub estimator: Option<EstimatorName>,
    #[serde(default)]
    pub leads_lags: Option<LeadsLagsSection>,
    #[serde(default)]
    pub lrv: Option<LrvConfig>,
    #[serde(default)]
    pub test: Option<TestSection>,
}

impl TestFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variance::{Bandwidth, LrvKind};

    const FULL: &str = r#"
seed = 7
replications = 50
estimator = "leads_lags"

[model]
family = "cubic"
trend = true

[leads_lags]
K = 2

[lrv]
kind = "bartlett"
bandwidth = 3

[test]
method = ["bootstrap", "subresidual"]
B = 99
alpha = 0.1
block = 12

[dgp]
T = [100, 300]
tau = [0.0, 0.5]
sigma1_sq = 16.0
rho_mu_sq = [0.0, 0.1]
"#;

    #[test]
    fn parses_full_file() {
        let g = GridFile::parse(FULL).unwrap().into_grid().unwrap();
        assert_eq!(g.master_seed, 7);
        assert_eq!(g.estimator, Estimator::LeadsLags { k: 2 });
        assert_eq!(g.spec.label(), "cubic+trend");
        assert_eq!(g.theta.as_slice(), &[1.0, 1.0, 1.0, 2.0, 1.0]);
        assert_eq!(
            g.lrv,
            Some(LrvConfig {
                kind: LrvKind::Bartlett,
                bandwidth: Bandwidth::Fixed(3)
            })
        );
        assert_eq!(g.methods, vec![Method::Bootstrap, Method::Subresidual]);
        assert_eq!(g.block, BlockChoice::Fixed(12));
        assert_eq!(g.sizes, vec![100, 300]);
        assert_eq!(g.lambdas, vec![0.0]);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let g = GridFile::parse("[model]\nfamily = \"linear\"\n[dgp]\nT = 100\n")
            .unwrap()
            .into_grid()
            .unwrap();
        assert_eq!(g.replications, 2000);
        assert_eq!(g.bootstrap_draws, 399);
        assert_eq!(g.alpha, 0.05);
        assert_eq!(g.methods, vec![Method::Bootstrap]);
        assert_eq!(g.estimator, Estimator::Nls);
        assert_eq!(g.theta.as_slice(), &[1.0]);
        assert!(g.lrv.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridFile::parse("[model]\nfamily = \"sine\"\n[dgp]\nT = 100\n").is_err());
        assert!(
            GridFile::parse("[model]\nfamily = \"linear\"\ncolour = 1\n[dgp]\nT = 100\n").is_err()
        );
        let bad_theta = "[model]\nfamily = \"quadratic\"\ntheta = [1.0]\n[dgp]\nT = 100\n";
        assert!(GridFile::parse(bad_theta).unwrap().into_grid().is_err());
        let no_degree = "[model]\nfamily = \"polynomial\"\n[dgp]\nT = 100\n";
        assert!(GridFile::parse(no_degree).unwrap().into_grid().is_err());
        let shin_cubic = "[model]\nfamily = \"cubic\"\n[test]\nmethod = \"shin\"\n[dgp]\nT = 100\n";
        assert!(GridFile::parse(shin_cubic).unwrap().into_grid().is_err());
    }

    #[test]
    fn test_file_sections_are_optional() {
        assert_eq!(TestFile::parse("").unwrap(), TestFile::default());
        let t = TestFile::parse("seed = 3\n[test]\nB = 2000\nblock = 20\n").unwrap();
        assert_eq!(t.seed, Some(3));
        let sec = t.test.unwrap();
        assert_eq!(sec.draws, 2000);
        assert_eq!(sec.block, BlockChoice::Fixed(20));
        assert_eq!(sec.method.to_vec(), vec![Method::Bootstrap]);
    }

    #[test]
    fn smooth_transition_default_theta() {
        let m = ModelSection::new(FamilyName::SmoothTransition);
        assert_eq!(m.theta().unwrap().as_slice(), &[0.0, 1.0, 1.0, 5.0]);
    }
}
