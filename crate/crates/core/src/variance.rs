//! Residual variance estimators used in the KPSS-type denominators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sum_sq, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrvKind {
    /// σ̂² = T⁻¹ Σ û²; appropriate for serially uncorrelated errors.
    Parametric,
    /// Bartlett-kernel long-run variance.
    Bartlett,
}

/// Lag truncation: a fixed lag or the automatic rule [`auto_bandwidth`].
///
/// Serialized as an integer or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    Fixed(usize),
    Auto,
}

impl Serialize for Bandwidth {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        match self {
            Bandwidth::Fixed(l) => s.serialize_u64(*l as u64),
            Bandwidth::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(l) => Ok(Bandwidth::Fixed(l)),
            Raw::Str(s) if s == "auto" => Ok(Bandwidth::Auto),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected \"auto\" or an integer, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LrvConfig {
    pub kind: LrvKind,
    #[serde(default = "auto")]
    pub bandwidth: Bandwidth,
}

fn auto() -> Bandwidth {
    Bandwidth::Auto
}

impl Default for LrvConfig {
    fn default() -> Self {
        Self::bartlett_auto()
    }
}

impl LrvConfig {
    pub const fn parametric() -> Self {
        Self {
            kind: LrvKind::Parametric,
            bandwidth: Bandwidth::Fixed(0),
        }
    }

    pub const fn bartlett_auto() -> Self {
        Self {
            kind: LrvKind::Bartlett,
            bandwidth: Bandwidth::Auto,
        }
    }

    /// Parametric for white-noise designs, Bartlett with automatic bandwidth otherwise.
    pub fn for_ar_coefficient(rho: f64) -> Self {
        if rho == 0.0 {
            Self::parametric()
        } else {
            Self::bartlett_auto()
        }
    }

    /// Lag truncation used for a sample of length `n`.
    pub fn lag(&self, n: usize) -> usize {
        match (self.kind, self.bandwidth) {
            (LrvKind::Parametric, _) => 0,
            (LrvKind::Bartlett, Bandwidth::Auto) => auto_bandwidth(n),
            (LrvKind::Bartlett, Bandwidth::Fixed(l)) => l,
        }
    }

    pub fn estimate<S: Scalar>(&self, residuals: &[S]) -> Result<S> {
        let n = residuals.len();
        let l = self.lag(n).min(n.saturating_sub(1));
        long_run_variance(residuals, l)
    }
}

/// σ̂² = T⁻¹ Σ û²_t (no centering).
pub fn parametric_variance<S: Scalar>(residuals: &[S]) -> Result<S> {
    if residuals.is_empty() {
        return Err(Error::InsufficientSample { have: 0, need: 0 });
    }
    let v = sum_sq(residuals) / S::of_usize(residuals.len());
    if v == S::zero() {
        return Err(Error::DegenerateVariance);
    }
    if !v.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite residual variance".into(),
        ));
    }
    Ok(v)
}

/// ⌊4 (T/100)^{1/4}⌋.
pub fn auto_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Bartlett weight w(s, l) = 1 − s/(l+1).
#[inline]
pub fn bartlett_weight(s: usize, l: usize) -> f64 {
    1.0 - s as f64 / (l as f64 + 1.0)
}

/// ω̂² = T⁻¹Σû²_t + 2T⁻¹ Σ_{s=1}^{l} w(s,l) Σ_{t=s+1}^{T} û_t û_{t−s}.
pub fn long_run_variance<S: Scalar>(residuals: &[S], l: usize) -> Result<S> {
    let n = residuals.len();
    if n > 0 && l >= n {
        return Err(Error::InvalidConfig(format!(
            "bandwidth {l} must be below sample length {n}"
        )));
    }
    let gamma0 = parametric_variance(residuals)?;
    if l == 0 {
        return Ok(gamma0);
    }
    let inv_n = S::of_usize(n).recip();
    let mut acc = gamma0;
    for s in 1..=l {
        let cov: S = residuals[s..]
            .iter()
            .zip(residuals)
            .map(|(&a, &b)| a * b)
            .sum();
        acc = acc + S::lit(2.0 * bartlett_weight(s, l)) * cov * inv_n;
    }
    Ok(acc.max(S::lit(1e-12) * gamma0))
}
