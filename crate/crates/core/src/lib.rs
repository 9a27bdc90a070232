//! Residual-based tests for (nonlinear) cointegration that stay valid under
//! variance breaks in the errors.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: regression families g(x, θ) with intercept/trend terms.
//! * [`dgp`]: simulator for cointegrated systems with abrupt variance breaks.
//! * [`estimate`]: OLS, Levenberg–Marquardt NLS and leads-and-lags fits.
//! * [`variance`]: parametric and Bartlett long-run variance estimators.
//! * [`hypothesis`]: the KPSS-type statistic, the heteroskedastic fixed
//!   regressor bootstrap, the subresidual Bonferroni test and comparators.
//! * [`harness`]: Monte Carlo rejection-rate grids.
//! * [`app`]: data ingestion, variance profiles and the EKC pipeline.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32`/`f64`); the simulator,
//! bootstrap driver and harness work in `f64`. The `*F64` aliases below name
//! the concrete types most callers want.

pub mod app;
pub mod config;
pub mod dgp;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod hypothesis;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod variance;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelSpecF64 = model::ModelSpec<f64>;
pub type ModelSpecF32 = model::ModelSpec<f32>;
pub type ParamVectorF64 = model::ParamVector<f64>;
pub type FitResultF64 = estimate::FitResult<f64>;
pub type FitResultF32 = estimate::FitResult<f32>;
pub type MatrixF64 = linalg::Matrix<f64>;
