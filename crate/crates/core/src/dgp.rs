//! Simulator for the heteroskedastic cointegration system
//!
//! ```text
//! y_t = g(x_t, θ) + u_t
//! u_t = ρ u_{t-1} + ζ_{u,t} + μ_t,      u_0 = 0
//! μ_t = μ_{t-1} + ρ_μ ζ_{μ,t},          μ_0 = 0
//! x_t = x_{t-1} + ζ_{x,t},              x_0 = 0
//! ```
//!
//! with ζ_t = L_t ζ*_t, ζ*_t ~ N(0, I₃) i.i.d. and L_t the Cholesky factor
//! of Σ_t. Variances follow abrupt breaks; the correlation between ζ_u and
//! ζ_x stays at λ through the breaks.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, ParamVector};
use crate::rng;

/// Abrupt break σ²_t = pre + (post − pre)·1(t ≥ ⌊τT⌋), t = 1..T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakSpec {
    pub tau: f64,
    pub pre_value: f64,
    pub post_value: f64,
}

impl BreakSpec {
    pub fn new(tau: f64, pre_value: f64, post_value: f64) -> Result<Self> {
        let b = Self {
            tau,
            pre_value,
            post_value,
        };
        b.validate()?;
        Ok(b)
    }

    /// Constant variance `value` (τ = 0).
    pub fn constant(value: f64) -> Self {
        Self {
            tau: 0.0,
            pre_value: value,
            post_value: value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::InvalidConfig(format!(
                "break fraction {} outside [0,1]",
                self.tau
            )));
        }
        for v in [self.pre_value, self.post_value] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "variance {v} must be positive and finite"
                )));
            }
        }
        if self.tau == 0.0 && self.pre_value != self.post_value {
            return Err(Error::InvalidConfig(
                "tau = 0 encodes the no-break case and requires pre_value == post_value".into(),
            ));
        }
        Ok(())
    }

    /// First 1-based index at which the post-break value applies.
    pub fn break_index(&self, n: usize) -> usize {
        (self.tau * n as f64).floor() as usize
    }

    #[inline]
    pub fn value_at(&self, t: usize, n: usize) -> f64 {
        if t >= self.break_index(n) {
            self.post_value
        } else {
            self.pre_value
        }
    }
}

/// Variance path (σ²_1, …, σ²_T).
pub fn variance_path(spec: &BreakSpec, n: usize) -> Vec<f64> {
    (1..=n).map(|t| spec.value_at(t, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breaks {
    pub u: BreakSpec,
    pub x: BreakSpec,
    pub mu: BreakSpec,
}

impl Breaks {
    /// Shared break at `tau` from 1 to `sigma1_sq` for all three components.
    pub fn shared(tau: f64, sigma1_sq: f64) -> Result<Self> {
        let post = if tau == 0.0 { 1.0 } else { sigma1_sq };
        let b = BreakSpec::new(tau, 1.0, post)?;
        Ok(Self { u: b, x: b, mu: b })
    }

    pub fn homoskedastic() -> Self {
        let b = BreakSpec::constant(1.0);
        Self { u: b, x: b, mu: b }
    }
}

#[derive(Debug, Clone)]
pub struct DgpConfig {
    pub n: usize,
    pub model: ModelSpec,
    pub theta: ParamVector,
    pub rho: f64,
    pub rho_mu_sq: f64,
    pub lambda: f64,
    pub breaks: Breaks,
}

pub type Cov3 = [[f64; 3]; 3];

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig(
                "sample length must be positive".into(),
            ));
        }
        if self.theta.len() != self.model.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.model.n_params(),
                got: self.theta.len(),
            });
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "|rho| = {} must be < 1",
                self.rho.abs()
            )));
        }
        if !(self.rho_mu_sq >= 0.0 && self.rho_mu_sq.is_finite()) {
            return Err(Error::InvalidConfig(
                "rho_mu_sq must be finite and nonnegative".into(),
            ));
        }
        for b in [self.breaks.u, self.breaks.x, self.breaks.mu] {
            b.validate()?;
        }
        if !(self.lambda.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite { t: 1 });
        }
        Ok(())
    }

    /// True under the null of cointegration (ρ_μ² = 0).
    pub fn is_null(&self) -> bool {
        self.rho_mu_sq == 0.0
    }

    /// Σ_t for the innovation vector (ζ_u, ζ_x, ζ_μ), 1-based t.
    pub fn covariance_at(&self, t: usize) -> Cov3 {
        let su2 = self.breaks.u.value_at(t, self.n);
        let sx2 = self.breaks.x.value_at(t, self.n);
        let sm2 = self.breaks.mu.value_at(t, self.n);
        let sux = self.lambda * su2.sqrt() * sx2.sqrt();
        [[su2, sux, 0.0], [sux, sx2, 0.0], [0.0, 0.0, sm2]]
    }
}

/// Covariance Σ_t of the innovations at 1-based `t`.
pub fn covariance_at(config: &DgpConfig, t: usize) -> Result<Cov3> {
    if t == 0 || t > config.n {
        return Err(Error::InvalidConfig(format!(
            "t = {t} outside 1..={}",
            config.n
        )));
    }
    if !(config.lambda.abs() < 1.0) {
        return Err(Error::NotPositiveDefinite { t });
    }
    Ok(config.covariance_at(t))
}

/// Lower-triangular Cholesky factor of a 3×3 symmetric matrix.
pub fn cholesky3(a: &Cov3, t: usize) -> Result<Cov3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return Err(Error::NotPositiveDefinite { t });
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSample {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// Latent error u_t.
    pub u: Vec<f64>,
    /// Innovations ζ_t = (ζ_u, ζ_x, ζ_μ), kept for diagnostics.
    pub innovations: Vec<[f64; 3]>,
    pub seed: u64,
}

/// Draws one sample path; bit-exact for a fixed `(config, seed)`.
pub fn simulate_system(config: &DgpConfig, seed: u64) -> Result<SimulatedSample> {
    config.validate()?;
    let n = config.n;
    let mut rng = rng::stream(seed, &[]);
    let rho_mu = config.rho_mu_sq.sqrt();
    let theta = config.theta.as_slice();

    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut innovations = Vec::with_capacity(n);
    let (mut x_prev, mut u_prev, mut mu_prev) = (0.0, 0.0, 0.0);
    let mut factor: Option<(Cov3, Cov3)> = None;

    for t in 1..=n {
        let sigma = config.covariance_at(t);
        let l = match factor {
            Some((s, l)) if s == sigma => l,
            _ => {
                let l = cholesky3(&sigma, t)?;
                factor = Some((sigma, l));
                l
            }
        };
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let zeta = [
            l[0][0] * z[0],
            l[1][0] * z[0] + l[1][1] * z[1],
            l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2],
        ];
        let mu = mu_prev + rho_mu * zeta[2];
        let ut = config.rho * u_prev + zeta[0] + mu;
        let xt = x_prev + zeta[1];
        y.push(config.model.eval_unchecked(xt, t, theta) + ut);
        x.push(xt);
        u.push(ut);
        innovations.push(zeta);
        mu_prev = mu;
        u_prev = ut;
        x_prev = xt;
    }
    Ok(SimulatedSample {
        y,
        x,
        u,
        innovations,
        seed,
    })
}
