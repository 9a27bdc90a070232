//! Cointegrating regression families `g(x, θ)` with optional intercept and trend.
//!
//! Parameter layout is fixed: deterministic coefficients come first
//! (intercept, then trend), followed by the family parameters.
//!
//! | family            | family parameters                     | g(x, θ)                                   |
//! |-------------------|---------------------------------------|-------------------------------------------|
//! | `Linear`          | θ₁                                    | θ₁x                                       |
//! | `Polynomial(d)`   | θ₁ … θ_d                              | Σₖ θₖ xᵏ                                  |
//! | `SmoothTransition`| θ₀, θ₁, θ₂, θ₃                        | θ₀ + θ₁x + θ₂ / (1 + exp(−(x − θ₃)))      |
//! | `Custom`          | supplied by the callback              | supplied by the callback                  |
//!
//! The smooth-transition family carries its own level θ₀, so it cannot be
//! combined with the `intercept` flag. The trend term is δ·t with the
//! 1-based time index t.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Caller-supplied regression function.
pub trait CustomFamily<S: Scalar>: Send + Sync {
    fn n_params(&self) -> usize;

    fn value(&self, x: S, theta: &[S]) -> S;

    /// Writes ∂g/∂θ into `out` (length `n_params`).
    fn jacobian(&self, x: S, theta: &[S], out: &mut [S]);

    /// Starting values for nonlinear least squares.
    fn initial_values(&self, _x: &[S], _y: &[S]) -> Vec<S> {
        vec![S::zero(); self.n_params()]
    }

    fn name(&self) -> &str {
        "custom"
    }
}

#[derive(Clone)]
pub enum Family<S: Scalar = f64> {
    Linear,
    Polynomial(u32),
    SmoothTransition,
    Custom(Arc<dyn CustomFamily<S>>),
}

impl<S: Scalar> fmt::Debug for Family<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Linear => f.write_str("Linear"),
            Family::Polynomial(d) => write!(f, "Polynomial({d})"),
            Family::SmoothTransition => f.write_str("SmoothTransition"),
            Family::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl<S: Scalar> Family<S> {
    pub fn n_params(&self) -> usize {
        match self {
            Family::Linear => 1,
            Family::Polynomial(d) => *d as usize,
            Family::SmoothTransition => 4,
            Family::Custom(c) => c.n_params(),
        }
    }

    /// True when g is linear in θ, so least squares reduces to OLS.
    pub fn is_linear_in_params(&self) -> bool {
        matches!(self, Family::Linear | Family::Polynomial(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deterministics {
    #[serde(default)]
    pub intercept: bool,
    #[serde(default)]
    pub trend: bool,
}

impl Deterministics {
    pub const NONE: Self = Self {
        intercept: false,
        trend: false,
    };
    pub const INTERCEPT: Self = Self {
        intercept: true,
        trend: false,
    };
    pub const TREND: Self = Self {
        intercept: true,
        trend: true,
    };

    pub fn count(&self) -> usize {
        usize::from(self.intercept) + usize::from(self.trend)
    }
}

/// A regression family together with its deterministic terms.
#[derive(Debug, Clone)]
pub struct ModelSpec<S: Scalar = f64> {
    family: Family<S>,
    deterministics: Deterministics,
}

impl<S: Scalar> ModelSpec<S> {
    pub fn new(family: Family<S>, deterministics: Deterministics) -> Result<Self> {
        match &family {
            Family::Polynomial(0) => {
                return Err(Error::InvalidModel(
                    "polynomial degree must be positive".into(),
                ))
            }
            Family::SmoothTransition if deterministics.intercept => {
                return Err(Error::InvalidModel(
                    "smooth transition already contains a level parameter; disable `intercept`"
                        .into(),
                ))
            }
            Family::Custom(c) if c.n_params() == 0 => {
                return Err(Error::InvalidModel(
                    "custom family needs at least one parameter".into(),
                ))
            }
            _ => {}
        }
        Ok(Self {
            family,
            deterministics,
        })
    }

    pub fn linear() -> Self {
        Self {
            family: Family::Linear,
            deterministics: Deterministics::NONE,
        }
    }

    pub fn polynomial(degree: u32) -> Result<Self> {
        Self::new(Family::Polynomial(degree), Deterministics::NONE)
    }

    pub fn smooth_transition() -> Self {
        Self {
            family: Family::SmoothTransition,
            deterministics: Deterministics::NONE,
        }
    }

    pub fn with_deterministics(self, deterministics: Deterministics) -> Result<Self> {
        Self::new(self.family, deterministics)
    }

    pub fn family(&self) -> &Family<S> {
        &self.family
    }

    pub fn deterministics(&self) -> Deterministics {
        self.deterministics
    }

    pub fn n_params(&self) -> usize {
        self.deterministics.count() + self.family.n_params()
    }

    pub fn is_linear_in_params(&self) -> bool {
        self.family.is_linear_in_params()
    }

    fn check(&self, theta: &[S]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// g(x, θ) plus deterministic terms at 1-based time `t`.
    pub fn eval(&self, x: S, t: usize, theta: &[S]) -> Result<S> {
        self.check(theta)?;
        Ok(self.eval_unchecked(x, t, theta))
    }

    /// ∂g/∂θ at (x, t, θ), in parameter-layout order.
    pub fn jacobian(&self, x: S, t: usize, theta: &[S]) -> Result<Vec<S>> {
        self.check(theta)?;
        let mut out = vec![S::zero(); self.n_params()];
        self.jacobian_into(x, t, theta, &mut out);
        Ok(out)
    }

    pub(crate) fn eval_unchecked(&self, x: S, t: usize, theta: &[S]) -> S {
        let (det, fam) = theta.split_at(self.deterministics.count());
        let mut acc = S::zero();
        let mut k = 0;
        if self.deterministics.intercept {
            acc = acc + det[k];
            k += 1;
        }
        if self.deterministics.trend {
            acc = acc + det[k] * S::of_usize(t);
        }
        acc + match &self.family {
            Family::Linear => fam[0] * x,
            Family::Polynomial(_) => {
                // Horner without constant term: x(θ₁ + x(θ₂ + …))
                fam.iter().rev().fold(S::zero(), |a, &c| (a + c) * x)
            }
            Family::SmoothTransition => fam[0] + fam[1] * x + fam[2] * logistic(x - fam[3]),
            Family::Custom(c) => c.value(x, fam),
        }
    }

    pub(crate) fn jacobian_into(&self, x: S, t: usize, theta: &[S], out: &mut [S]) {
        let nd = self.deterministics.count();
        let mut k = 0;
        if self.deterministics.intercept {
            out[k] = S::one();
            k += 1;
        }
        if self.deterministics.trend {
            out[k] = S::of_usize(t);
        }
        let fam = &theta[nd..];
        let dst = &mut out[nd..];
        match &self.family {
            Family::Linear => dst[0] = x,
            Family::Polynomial(_) => {
                let mut p = x;
                for d in dst.iter_mut() {
                    *d = p;
                    p = p * x;
                }
            }
            Family::SmoothTransition => {
                let l = logistic(x - fam[3]);
                dst[0] = S::one();
                dst[1] = x;
                dst[2] = l;
                dst[3] = -fam[2] * l * (S::one() - l);
            }
            Family::Custom(c) => c.jacobian(x, fam, dst),
        }
    }

    /// Short label used in reports and table keys.
    pub fn label(&self) -> String {
        let fam = match &self.family {
            Family::Linear => "linear".to_string(),
            Family::Polynomial(2) => "quadratic".to_string(),
            Family::Polynomial(3) => "cubic".to_string(),
            Family::Polynomial(d) => format!("poly{d}"),
            Family::SmoothTransition => "smooth_transition".to_string(),
            Family::Custom(c) => c.name().to_string(),
        };
        match (self.deterministics.intercept, self.deterministics.trend) {
            (_, true) => format!("{fam}+trend"),
            (true, false) => format!("{fam}+intercept"),
            _ => fam,
        }
    }
}

/// Numerically stable logistic function 1 / (1 + e^{−z}).
#[inline]
pub fn logistic<S: Scalar>(z: S) -> S {
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

/// Parameter vector θ with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector<S = f64>(Vec<S>);

impl<S: Scalar> ParamVector<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter);
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> std::ops::Deref for ParamVector<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.0
    }
}

/// g(x, θ) for `spec`.
pub fn eval_model<S: Scalar>(
    spec: &ModelSpec<S>,
    x: S,
    t: usize,
    theta: &ParamVector<S>,
) -> Result<S> {
    spec.eval(x, t, theta)
}

/// ∂g/∂θ for `spec`.
pub fn model_jacobian<S: Scalar>(
    spec: &ModelSpec<S>,
    x: S,
    t: usize,
    theta: &ParamVector<S>,
) -> Result<Vec<S>> {
    spec.jacobian(x, t, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn cubic_example() {
        let m = ModelSpec::polynomial(3).unwrap();
        assert_eq!(eval_model(&m, 1.0, 1, &pv(&[1.0, 2.0, 1.0])).unwrap(), 4.0);
    }

    #[test]
    fn zero_linear_coefficient() {
        let m = ModelSpec::linear();
        assert_eq!(m.eval(123.4, 1, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn smooth_transition_midpoint() {
        let m = ModelSpec::smooth_transition();
        let th = pv(&[0.0, 1.0, 1.0, 5.0]);
        assert!((eval_model(&m, 5.0, 1, &th).unwrap() - 5.5).abs() < 1e-15);
        let j = model_jacobian(&m, 5.0, 1, &th).unwrap();
        let want = [1.0, 5.0, 0.5, -0.25];
        for (a, b) in j.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{j:?}");
        }
    }

    #[test]
    fn quadratic_jacobian() {
        let m = ModelSpec::polynomial(2).unwrap();
        assert_eq!(m.jacobian(3.0, 1, &[1.0, 1.0]).unwrap(), vec![3.0, 9.0]);
    }

    #[test]
    fn wrong_length_is_dimension_mismatch() {
        let m = ModelSpec::polynomial(2).unwrap();
        assert!(matches!(
            m.eval(1.0, 1, &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            m.jacobian(1.0, 1, &[1.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn layout_puts_deterministics_first() {
        let m = ModelSpec::polynomial(3)
            .unwrap()
            .with_deterministics(Deterministics::TREND)
            .unwrap();
        assert_eq!(m.n_params(), 5);
        // 1 + t + x + 2x² + x³ at x = 2, t = 10
        assert_eq!(
            m.eval(2.0, 10, &[1.0, 1.0, 1.0, 2.0, 1.0]).unwrap(),
            1.0 + 10.0 + 2.0 + 8.0 + 8.0
        );
        assert_eq!(
            m.jacobian(2.0, 10, &[0.0; 5]).unwrap(),
            vec![1.0, 10.0, 2.0, 4.0, 8.0]
        );
    }

    #[test]
    fn invalid_specs() {
        assert!(ModelSpec::<f64>::polynomial(0).is_err());
        assert!(ModelSpec::<f64>::smooth_transition()
            .with_deterministics(Deterministics::INTERCEPT)
            .is_err());
        assert!(ParamVector::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn logistic_is_stable_in_tails() {
        assert_eq!(logistic(-1000.0f64), 0.0);
        assert_eq!(logistic(1000.0f64), 1.0);
        assert!((logistic(0.0f32) - 0.5).abs() < 1e-7);
    }

    struct Exponential;
    impl CustomFamily<f64> for Exponential {
        fn n_params(&self) -> usize {
            2
        }
        fn value(&self, x: f64, th: &[f64]) -> f64 {
            th[0] * (th[1] * x).exp()
        }
        fn jacobian(&self, x: f64, th: &[f64], out: &mut [f64]) {
            let e = (th[1] * x).exp();
            out[0] = e;
            out[1] = th[0] * x * e;
        }
    }

    fn families() -> Vec<ModelSpec> {
        vec![
            ModelSpec::linear(),
            ModelSpec::polynomial(2).unwrap(),
            ModelSpec::polynomial(3)
                .unwrap()
                .with_deterministics(Deterministics::TREND)
                .unwrap(),
            ModelSpec::linear()
                .with_deterministics(Deterministics::INTERCEPT)
                .unwrap(),
            ModelSpec::smooth_transition(),
            ModelSpec::smooth_transition()
                .with_deterministics(Deterministics {
                    intercept: false,
                    trend: true,
                })
                .unwrap(),
            ModelSpec::new(
                Family::Custom(Arc::new(Exponential)),
                Deterministics::INTERCEPT,
            )
            .unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn jacobian_matches_central_differences(
            which in 0usize..7,
            x in -4.0f64..4.0,
            t in 1usize..300,
            raw in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let m = &families()[which];
            let theta = &raw[..m.n_params()];
            let j = m.jacobian(x, t, theta).unwrap();
            for i in 0..theta.len() {
                let h = 1e-6 * theta[i].abs().max(1.0);
                let mut up = theta.to_vec();
                let mut dn = theta.to_vec();
                up[i] += h;
                dn[i] -= h;
                let fd = (m.eval(x, t, &up).unwrap() - m.eval(x, t, &dn).unwrap()) / (2.0 * h);
                let scale = j[i].abs().max(1.0);
                prop_assert!((fd - j[i]).abs() <= 1e-6 * scale, "param {i}: fd {fd} vs {}", j[i]);
            }
        }

        #[test]
        fn polynomial_one_is_linear(x in -50.0f64..50.0, th in -10.0f64..10.0) {
            let p1 = ModelSpec::polynomial(1).unwrap();
            prop_assert_eq!(p1.eval(x, 1, &[th]).unwrap(), ModelSpec::linear().eval(x, 1, &[th]).unwrap());
        }

        #[test]
        fn intercept_shifts_by_coefficient(x in -50.0f64..50.0, c in -10.0f64..10.0, th in -3.0f64..3.0) {
            let base = ModelSpec::polynomial(2).unwrap();
            let with = base.clone().with_deterministics(Deterministics::INTERCEPT).unwrap();
            let shifted = with.eval(x, 7, &[c, th, 0.5]).unwrap();
            let plain = base.eval(x, 7, &[th, 0.5]).unwrap();
            prop_assert_eq!(shifted, c + plain);
        }
    }
}
