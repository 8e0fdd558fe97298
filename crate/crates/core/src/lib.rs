//! LASSO estimation for predictive regressions whose regressors mix unit-root,
//! stationary and cointegrated series.
//!
//! The crate is organised bottom-up: [`numerics`] (dense linear algebra and a
//! counter-based Gaussian stream), [`solver`] (coordinate descent with KKT
//! certification), [`estimators`] (plain and standardized LASSO), [`dgp`]
//! (simulation designs), [`tuning`] (cross-validation and calibrated penalties),
//! [`diagnostics`] (scaled Gram eigenvalue studies) and [`forecast`] (rolling
//! out-of-sample evaluation on macro panels).

pub mod dgp;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod forecast;
pub mod numerics;
mod homotopy;
pub mod solver;
pub mod tuning;

pub use dgp::{ColumnKind, DgpSample, DgpVariant};
pub use error::{Error, Result};
pub use estimators::{ols, plasso, slasso, EstimatorKind, OlsFit};
pub use numerics::{Cholesky, Matrix, RngStream};
pub use solver::{LassoFit, Penalty, SolverOptions};
