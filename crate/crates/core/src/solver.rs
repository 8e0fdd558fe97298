//! Cyclic coordinate descent for the weighted-L1 least-squares problem
//!
//! ```text
//! minimize over θ:  n⁻¹ ‖ÿ − Ẅθ‖² + λ Σ_j h_j |θ_j|
//! ```
//!
//! on demeaned data, with the unpenalized intercept recovered afterwards as
//! `ȳ − w̄ᵀθ`. Because the loss carries `n⁻¹` rather than `(2n)⁻¹`, the
//! coordinate threshold is `λ h_j / 2` and the stationarity gradient is
//! `(2/n) Ẅ_jᵀ û`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::homotopy::Homotopy;
use crate::numerics::{axpy, dot, Cholesky, Matrix, DEGENERATE_RTOL};

/// Tuning level and per-coefficient penalty weights (the diagonal of `H`).
#[derive(Clone, Debug, PartialEq)]
pub struct Penalty {
    lambda: f64,
    weights: Vec<f64>,
}

impl Penalty {
    pub fn new(lambda: f64, weights: Vec<f64>) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if let Some((j, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0) || !w.is_finite())
        {
            return Err(Error::InvalidConfig(format!("penalty weight {j} must be positive, got {w}")));
        }
        Ok(Self { lambda, weights })
    }

    /// Unit weights (`H = I`).
    pub fn uniform(lambda: f64, p: usize) -> Result<Self> {
        Self::new(lambda, vec![1.0; p])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.weights.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Bound on the KKT gap at convergence.
    pub tol: f64,
    /// Coordinate sweeps (full or active-set) before giving up.
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LassoFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub penalty: Penalty,
    /// Indices with nonzero coefficients, ascending.
    pub active_set: Vec<usize>,
    pub kkt_residual: f64,
    pub objective: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl LassoFit {
    pub fn lambda(&self) -> f64 {
        self.penalty.lambda()
    }

    /// `α̂ + wᵀθ̂`.
    pub fn predict(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "fit has {} coefficients, regressor vector has {}",
                self.coefficients.len(),
                w.len()
            )));
        }
        Ok(self.intercept + dot(w, &self.coefficients))
    }
}

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Subtracts each column's mean; returns the centered matrix and the means.
pub fn demean(m: &Matrix) -> (Matrix, Vec<f64>) {
    let mut out = m.clone();
    let n = m.rows() as f64;
    let mut means = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let c = out.col_mut(j);
        let mu = c.iter().sum::<f64>() / n;
        c.iter_mut().for_each(|x| *x -= mu);
        means.push(mu);
    }
    (out, means)
}

fn demean_vec(y: &[f64]) -> (Vec<f64>, f64) {
    let mu = y.iter().sum::<f64>() / y.len() as f64;
    (y.iter().map(|v| v - mu).collect(), mu)
}

/// Active-set sweeps between support checks.
const INNER_CAP: usize = 50;

/// Columns of `ẌᵀẌ/n`, filled on first use.
#[derive(Default)]
struct GramCache {
    columns: HashMap<usize, Vec<f64>>,
}

/// Demeaned data shared by every fit on the same sample.
#[derive(Clone, Debug)]
pub struct CenteredProblem {
    pub(crate) y: Vec<f64>,
    pub(crate) x: Matrix,
    y_mean: f64,
    x_means: Vec<f64>,
    /// `‖ẍ_j‖² / n`.
    pub(crate) col_sq: Vec<f64>,
    pub(crate) degenerate: Vec<bool>,
}

impl CenteredProblem {
    pub fn new(y: &[f64], w: &Matrix) -> Result<Self> {
        if w.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} rows, response has {}",
                w.rows(),
                y.len()
            )));
        }
        if y.len() < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 observations, got {}", y.len())));
        }
        let n = y.len() as f64;
        let (yc, y_mean) = demean_vec(y);
        let (x, x_means) = demean(w);
        let mut col_sq = Vec::with_capacity(w.cols());
        let mut degenerate = Vec::with_capacity(w.cols());
        for j in 0..w.cols() {
            let c = x.col(j);
            let sq = dot(c, c) / n;
            let scale = w.col(j).iter().fold(0.0f64, |a, v| a.max(v.abs()));
            degenerate.push(sq == 0.0 || sq.sqrt() <= DEGENERATE_RTOL * scale);
            col_sq.push(sq);
        }
        Ok(Self {
            y: yc,
            x,
            y_mean,
            x_means,
            col_sq,
            degenerate,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn is_degenerate(&self, j: usize) -> bool {
        self.degenerate[j]
    }

    /// Smallest λ at which the all-zero vector satisfies the KKT conditions.
    pub fn lambda_max(&self, weights: &[f64]) -> f64 {
        let n = self.n() as f64;
        (0..self.p())
            .filter(|&j| !self.degenerate[j])
            .map(|j| 2.0 / n * dot(self.x.col(j), &self.y).abs() / weights[j])
            .fold(0.0, f64::max)
    }

    pub(crate) fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let mut r = self.y.clone();
        for (j, &t) in theta.iter().enumerate() {
            if t != 0.0 {
                axpy(-t, self.x.col(j), &mut r);
            }
        }
        r
    }

    fn objective(&self, r: &[f64], theta: &[f64], penalty: &Penalty) -> f64 {
        let n = self.n() as f64;
        let l1: f64 = theta
            .iter()
            .zip(penalty.weights())
            .map(|(t, w)| w * t.abs())
            .sum();
        dot(r, r) / n + penalty.lambda() * l1
    }

    /// Largest KKT gap over all coordinates for residual `r`.
    fn kkt_gap(&self, r: &[f64], theta: &[f64], penalty: &Penalty) -> f64 {
        let n = self.n() as f64;
        let lambda = penalty.lambda();
        let mut worst: f64 = 0.0;
        for j in 0..self.p() {
            if self.degenerate[j] {
                continue;
            }
            let g = 2.0 / n * dot(self.x.col(j), r);
            let lh = lambda * penalty.weights()[j];
            let gap = if theta[j] == 0.0 {
                (g.abs() - lh).max(0.0)
            } else {
                (g - lh * theta[j].signum()).abs()
            };
            worst = worst.max(gap);
        }
        worst
    }

    /// Exact minimization over coordinate `j`; returns the coefficient change.
    #[inline]
    fn update(&self, j: usize, theta: &mut [f64], r: &mut [f64], half_thr: f64, inv_n: f64) -> f64 {
        let a = self.col_sq[j];
        let old = theta[j];
        let col = self.x.col(j);
        let z = dot(col, r) * inv_n + a * old;
        let new = soft_threshold(z, half_thr) / a;
        let delta = new - old;
        if delta != 0.0 {
            theta[j] = new;
            axpy(-delta, col, r);
        }
        delta
    }

    /// Coordinate descent from `start` (zeros when `None`).
    pub fn solve(&self, penalty: &Penalty, start: Option<&[f64]>, opts: &SolverOptions) -> Result<LassoFit> {
        self.solve_cached(penalty, start, opts, &mut GramCache::default())
    }

    fn gram_column<'c>(&self, j: usize, cache: &'c mut GramCache) -> &'c [f64] {
        cache.columns.entry(j).or_insert_with(|| {
            let inv_n = 1.0 / self.n() as f64;
            let cj = self.x.col(j);
            (0..self.p()).map(|k| dot(self.x.col(k), cj) * inv_n).collect()
        })
    }

    /// Minimizes the objective over the sign pattern of the current support.
    ///
    /// Moves from `theta` toward the stationary point of the quadratic restricted
    /// to that orthant, stopping at the first coordinate that would change sign.
    /// Every accepted move lowers the objective. Returns `false` when the reduced
    /// Gram matrix is numerically singular.
    fn polish(
        &self,
        active: &[usize],
        theta: &mut [f64],
        r: &mut Vec<f64>,
        half_thr: &[f64],
        cache: &mut GramCache,
    ) -> bool {
        let k = active.len();
        if k == 0 || k >= self.n() {
            return false;
        }
        let inv_n = 1.0 / self.n() as f64;
        let mut g = Matrix::zeros(k, k);
        for (b, &j) in active.iter().enumerate() {
            let col = self.gram_column(j, cache);
            for (a, &i) in active.iter().enumerate() {
                g[(a, b)] = col[i];
            }
        }
        let chol = match Cholesky::factor_strict(&g) {
            Ok(c) => c,
            Err(_) => return false,
        };
        let mut target: Vec<f64> = active
            .iter()
            .map(|&j| dot(self.x.col(j), &self.y) * inv_n - half_thr[j] * theta[j].signum())
            .collect();
        chol.solve_vec_in_place(&mut target);
        let mut step = 1.0f64;
        let mut blocking = None;
        for (a, &j) in active.iter().enumerate() {
            if target[a].signum() != theta[j].signum() || target[a] == 0.0 {
                let t = theta[j] / (theta[j] - target[a]);
                if t < step {
                    step = t;
                    blocking = Some(j);
                }
            }
        }
        for (a, &j) in active.iter().enumerate() {
            theta[j] += step * (target[a] - theta[j]);
        }
        if let Some(j) = blocking {
            theta[j] = 0.0;
        }
        *r = self.residual(theta);
        true
    }

    fn solve_cached(
        &self,
        penalty: &Penalty,
        start: Option<&[f64]>,
        opts: &SolverOptions,
        cache: &mut GramCache,
    ) -> Result<LassoFit> {
        let p = self.p();
        if penalty.weights().len() != p {
            return Err(Error::DimensionMismatch(format!(
                "penalty has {} weights, design has {} columns",
                penalty.weights().len(),
                p
            )));
        }
        let lambda = penalty.lambda();
        if lambda == 0.0 {
            if let Some(j) = self.degenerate.iter().position(|&d| d) {
                return Err(Error::DegenerateColumn(j));
            }
        }
        let inv_n = 1.0 / self.n() as f64;
        let half_thr: Vec<f64> = penalty.weights().iter().map(|w| 0.5 * lambda * w).collect();
        let a_max = self.col_sq.iter().cloned().fold(0.0, f64::max);

        let mut theta = match start {
            Some(s) if s.len() == p => s.to_vec(),
            Some(s) => {
                return Err(Error::DimensionMismatch(format!(
                    "warm start has length {}, expected {p}",
                    s.len()
                )))
            }
            None => vec![0.0; p],
        };
        for j in 0..p {
            if self.degenerate[j] {
                theta[j] = 0.0;
            }
        }
        let mut r = self.residual(&theta);
        let mut sweeps = 0usize;
        let mut converged = false;
        let mut active: Vec<usize> = Vec::with_capacity(p);
        let mut previous: Vec<usize> = (0..p).filter(|&j| theta[j] != 0.0).collect();
        let mut polish_ok = true;
        #[cfg(debug_assertions)]
        let mut last_obj = self.objective(&r, &theta, penalty);

        'outer: while sweeps < opts.max_sweeps {
            for j in 0..p {
                if !self.degenerate[j] {
                    self.update(j, &mut theta, &mut r, half_thr[j], inv_n);
                }
            }
            sweeps += 1;
            #[cfg(debug_assertions)]
            self.check_descent(&mut last_obj, &r, &theta, penalty);

            active.clear();
            active.extend((0..p).filter(|&j| theta[j] != 0.0));
            // A support that survived a full sweep is likely final; solve on it
            // directly. Coordinate refinement covers the remaining cases.
            let stable = active == previous;
            previous.clone_from(&active);
            if stable && polish_ok {
                polish_ok = self.polish(&active, &mut theta, &mut r, &half_thr, cache);
            }
            if stable && polish_ok {
                #[cfg(debug_assertions)]
                self.check_descent(&mut last_obj, &r, &theta, penalty);
                if self.kkt_gap(&r, &theta, penalty) <= opts.tol {
                    converged = true;
                    break 'outer;
                }
                continue;
            }

            // Refine the active set until the implied gradient drift falls below
            // tol, returning early to re-check the support while polishing works.
            let mut inner = 0;
            while sweeps < opts.max_sweeps && !active.is_empty() && !(polish_ok && inner == INNER_CAP) {
                inner += 1;
                let mut drift = 0.0;
                for &j in &active {
                    let d = self.update(j, &mut theta, &mut r, half_thr[j], inv_n);
                    drift += 2.0 * (a_max * self.col_sq[j]).sqrt() * d.abs();
                }
                sweeps += 1;
                #[cfg(debug_assertions)]
                self.check_descent(&mut last_obj, &r, &theta, penalty);
                if drift <= 0.25 * opts.tol {
                    break;
                }
            }

            r = self.residual(&theta);
            if self.kkt_gap(&r, &theta, penalty) <= opts.tol {
                converged = true;
                break 'outer;
            }
        }

        Ok(self.make_fit(theta, penalty, sweeps, converged, opts.tol))
    }

    pub(crate) fn make_fit(&self, theta: Vec<f64>, penalty: &Penalty, sweeps: usize, converged: bool, tol: f64) -> LassoFit {
        let r = self.residual(&theta);
        let kkt = self.kkt_gap(&r, &theta, penalty);
        let objective = self.objective(&r, &theta, penalty);
        let intercept = self.y_mean - dot(&self.x_means, &theta);
        let active_set = (0..theta.len()).filter(|&j| theta[j] != 0.0).collect();
        LassoFit {
            intercept,
            coefficients: theta,
            penalty: penalty.clone(),
            active_set,
            kkt_residual: kkt,
            objective,
            sweeps,
            converged: converged || kkt <= tol,
        }
    }

    #[cfg(debug_assertions)]
    fn check_descent(&self, last: &mut f64, r: &[f64], theta: &[f64], penalty: &Penalty) {
        let obj = self.objective(r, theta, penalty);
        debug_assert!(
            obj <= *last + 1e-10 * last.abs().max(1.0),
            "objective increased from {last} to {obj}"
        );
        *last = obj;
    }

    /// Fits along `grid`, warm-starting each point from the previous one.
    ///
    /// Descending grids are traced by exact homotopy from `λ_max`; each point is
    /// certified by the KKT check and handed to coordinate descent if it fails.
    pub fn solve_grid(&self, weights: &[f64], grid: &[f64], opts: &SolverOptions) -> Result<Vec<LassoFit>> {
        let mut fits: Vec<LassoFit> = Vec::with_capacity(grid.len());
        let mut cache = GramCache::default();
        let mut path = Homotopy::new(self, weights)?;
        for &lambda in grid {
            let pen = Penalty::new(lambda, weights.to_vec())?;
            if let Some(h) = path.as_mut() {
                if h.advance(lambda) {
                    let fit = self.make_fit(h.theta().to_vec(), &pen, h.take_steps(), false, opts.tol);
                    if fit.converged {
                        fits.push(fit);
                        continue;
                    }
                } else {
                    path = None;
                }
            }
            let start = fits.last().map(|f| f.coefficients.as_slice());
            let fit = self.solve_cached(&pen, start, opts, &mut cache)?;
            if let Some(h) = path.as_mut() {
                if !h.reset(&fit.coefficients, lambda) {
                    path = None;
                }
            }
            fits.push(fit);
        }
        Ok(fits)
    }
}

/// Solves the weighted LASSO with unpenalized intercept.
pub fn fit(y: &[f64], w: &Matrix, penalty: &Penalty, opts: &SolverOptions) -> Result<LassoFit> {
    CenteredProblem::new(y, w)?.solve(penalty, None, opts)
}

/// Largest KKT gap of `fit` on the data it was computed from.
pub fn kkt_violation(fit: &LassoFit, y: &[f64], w: &Matrix) -> Result<f64> {
    let prob = CenteredProblem::new(y, w)?;
    if fit.coefficients.len() != prob.p() {
        return Err(Error::DimensionMismatch(format!(
            "fit has {} coefficients, design has {} columns",
            fit.coefficients.len(),
            prob.p()
        )));
    }
    let r = prob.residual(&fit.coefficients);
    Ok(prob.kkt_gap(&r, &fit.coefficients, &fit.penalty))
}

/// `size` log-spaced values from `lambda_max` down to `eps_ratio·lambda_max`.
pub fn log_grid(lambda_max: f64, size: usize, eps_ratio: f64) -> Vec<f64> {
    if size == 1 {
        return vec![lambda_max];
    }
    let step = eps_ratio.ln() / (size - 1) as f64;
    (0..size)
        .map(|k| match k {
            0 => lambda_max,
            k if k == size - 1 => lambda_max * eps_ratio,
            k => lambda_max * (step * k as f64).exp(),
        })
        .collect()
}

/// Warm-started path over a log grid starting at the data's `λ_max`.
pub fn fit_path(
    y: &[f64],
    w: &Matrix,
    weights: &[f64],
    grid_size: usize,
    eps_ratio: f64,
    opts: &SolverOptions,
) -> Result<Vec<LassoFit>> {
    if grid_size < 2 {
        return Err(Error::InvalidConfig(format!("grid_size must be >= 2, got {grid_size}")));
    }
    if !(eps_ratio > 0.0 && eps_ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("eps_ratio must lie in (0, 1), got {eps_ratio}")));
    }
    let prob = CenteredProblem::new(y, w)?;
    if weights.len() != prob.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} columns",
            weights.len(),
            prob.p()
        )));
    }
    let lmax = prob.lambda_max(weights).max(f64::MIN_POSITIVE);
    let grid = log_grid(lmax, grid_size, eps_ratio);
    prob.solve_grid(weights, &grid, opts)
}
