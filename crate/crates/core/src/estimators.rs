//! Plain (unit-weight) and standardized (sd-weighted) LASSO, plus OLS.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{column_stats, dot, Cholesky, Matrix};
use crate::solver::{demean, CenteredProblem, LassoFit, Penalty, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    /// Every coefficient carries the same penalty.
    Plasso,
    /// Coefficient `j` is penalized by its regressor's sample standard deviation.
    Slasso,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 2] = [EstimatorKind::Plasso, EstimatorKind::Slasso];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Plasso => "plasso",
            EstimatorKind::Slasso => "slasso",
        }
    }

    /// Penalty weights this estimator assigns to the columns of `w`.
    pub fn weights(self, w: &Matrix) -> Result<Vec<f64>> {
        match self {
            EstimatorKind::Plasso => Ok(vec![1.0; w.cols()]),
            EstimatorKind::Slasso => slasso_weights(w),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plasso" => Ok(EstimatorKind::Plasso),
            "slasso" => Ok(EstimatorKind::Slasso),
            other => Err(Error::InvalidConfig(format!("unknown estimator '{other}'"))),
        }
    }
}

/// Sample standard deviations (divisor n). Degenerate columns get weight 1; the
/// solver pins their coefficients at zero regardless of weight.
pub fn slasso_weights(w: &Matrix) -> Result<Vec<f64>> {
    let stats = column_stats(w)?;
    if stats.degenerate.len() == w.cols() {
        return Err(Error::AllColumnsDegenerate);
    }
    Ok(stats
        .sds
        .iter()
        .enumerate()
        .map(|(j, &sd)| if stats.is_degenerate(j) { 1.0 } else { sd })
        .collect())
}

pub fn fit_kind(
    kind: EstimatorKind,
    y: &[f64],
    w: &Matrix,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    let weights = kind.weights(w)?;
    let pen = Penalty::new(lambda, weights)?;
    CenteredProblem::new(y, w)?.solve(&pen, None, opts)
}

pub fn plasso(y: &[f64], w: &Matrix, lambda: f64) -> Result<LassoFit> {
    fit_kind(EstimatorKind::Plasso, y, w, lambda, &SolverOptions::default())
}

pub fn slasso(y: &[f64], w: &Matrix, lambda: f64) -> Result<LassoFit> {
    fit_kind(EstimatorKind::Slasso, y, w, lambda, &SolverOptions::default())
}

/// One-step-ahead prediction `α̂ + w_nᵀθ̂`.
pub fn predict(fit: &LassoFit, w_n: &[f64]) -> Result<f64> {
    fit.predict(w_n)
}

/// Least squares with an unpenalized intercept, solved through the normal
/// equations of the demeaned data.
#[derive(Clone, Debug)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Sum of squared residuals.
    pub ssr: f64,
}

impl OlsFit {
    pub fn predict(&self, w: &[f64]) -> f64 {
        self.intercept + dot(w, &self.coefficients)
    }
}

pub fn ols(y: &[f64], w: &Matrix) -> Result<OlsFit> {
    if w.rows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows, response has {}",
            w.rows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InvalidConfig("OLS on an empty sample".into()));
    }
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    if w.cols() == 0 {
        return Ok(OlsFit {
            intercept: y_mean,
            coefficients: Vec::new(),
            ssr: dot(&yc, &yc),
        });
    }
    let (xc, means) = demean(w);
    let mut beta = xc.t_mul_vec(&yc)?;
    Cholesky::factor(&xc.gram())?.solve_vec_in_place(&mut beta);
    let fitted = xc.mul_vec(&beta)?;
    let ssr = yc.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(OlsFit {
        intercept: y_mean - dot(&means, &beta),
        coefficients: beta,
        ssr,
    })
}
