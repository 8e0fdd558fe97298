//! Penalty selection: blocked K-fold cross-validation and rate-calibrated
//! penalties anchored at a reference design.

use std::ops::Range;

use crate::dgp::{DgpVariant, MixedDesign};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::numerics::{Matrix, RngStream};
use crate::solver::{log_grid, CenteredProblem, LassoFit, SolverOptions};

#[derive(Clone, Debug)]
pub struct CvOptions {
    pub folds: usize,
    pub grid_size: usize,
    pub eps_ratio: f64,
    pub solver: SolverOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            grid_size: 100,
            eps_ratio: 1e-4,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CvReport {
    /// Descending penalty grid shared by every fold.
    pub grid: Vec<f64>,
    /// Held-out mean squared error per grid point, averaged over folds.
    pub mean_errors: Vec<f64>,
    pub chosen_index: usize,
    pub chosen_lambda: f64,
}

/// Contiguous blocks covering `0..n`; the first `n mod folds` blocks hold one
/// extra row.
pub fn cv_blocks(n: usize, folds: usize) -> Result<Vec<Range<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidConfig(format!(
            "need 2 <= folds <= n, got folds = {folds}, n = {n}"
        )));
    }
    let base = n / folds;
    let extra = n % folds;
    let mut start = 0;
    Ok((0..folds)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// Blocked cross-validation over a log grid anchored at the full-sample
/// `λ_max`. Ties resolve to the larger penalty.
pub fn cv_select(
    y: &[f64],
    w: &Matrix,
    kind: EstimatorKind,
    opts: &CvOptions,
) -> Result<CvReport> {
    let n = y.len();
    let blocks = cv_blocks(n, opts.folds)?;
    let full_weights = kind.weights(w)?;
    let lmax = CenteredProblem::new(y, w)?.lambda_max(&full_weights);
    if !(opts.eps_ratio > 0.0 && opts.eps_ratio < 1.0) || opts.grid_size < 2 {
        return Err(Error::InvalidConfig(format!(
            "grid_size >= 2 and eps_ratio in (0, 1) required, got {} and {}",
            opts.grid_size, opts.eps_ratio
        )));
    }
    let grid = log_grid(lmax.max(f64::MIN_POSITIVE), opts.grid_size, opts.eps_ratio);

    let mut totals = vec![0.0; grid.len()];
    for block in &blocks {
        let train: Vec<usize> = (0..n).filter(|i| !block.contains(i)).collect();
        let w_train = w.select_rows(&train);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let weights = kind.weights(&w_train)?;
        let fits = CenteredProblem::new(&y_train, &w_train)?.solve_grid(&weights, &grid, &opts.solver)?;
        let held: Vec<Vec<f64>> = block.clone().map(|i| w.row(i)).collect();
        for (g, fit) in fits.iter().enumerate() {
            let mut sse = 0.0;
            for (row, i) in held.iter().zip(block.clone()) {
                let e = y[i] - fit.predict(row)?;
                sse += e * e;
            }
            totals[g] += sse / block.len() as f64;
        }
    }
    let mean_errors: Vec<f64> = totals.iter().map(|t| t / blocks.len() as f64).collect();
    let chosen_index = argmin_first(&mean_errors);
    Ok(CvReport {
        chosen_lambda: grid[chosen_index],
        grid,
        mean_errors,
        chosen_index,
    })
}

/// Cross-validates, then refits on the full sample at the chosen penalty.
pub fn cv_fit(y: &[f64], w: &Matrix, kind: EstimatorKind, opts: &CvOptions) -> Result<(CvReport, LassoFit)> {
    let report = cv_select(y, w, kind, opts)?;
    let weights = kind.weights(w)?;
    let mut path = CenteredProblem::new(y, w)?.solve_grid(&weights, &report.grid[..=report.chosen_index], &opts.solver)?;
    let fit = path.pop().expect("grid prefix is nonempty");
    Ok((report, fit))
}

/// Grid floor used by glmnet's defaults: `0.01` when `n < p`, else `1e-4`.
pub fn glmnet_eps_ratio(n: usize, p: usize) -> f64 {
    if n < p {
        1e-2
    } else {
        1e-4
    }
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Transfers a reference penalty `λ0` tuned at `(n0, p0)` to `(n, p)`.
///
/// Slasso scales with `(n^{-1/2} ln p)²`; Plasso with `(ln p)^{3/2}`, since its
/// effective penalty on unit-root coordinates already carries the sample size.
pub fn calibrate_lambda(lambda0: f64, n0: usize, p0: usize, n: usize, p: usize, kind: EstimatorKind) -> Result<f64> {
    if !(lambda0.is_finite() && lambda0 >= 0.0) {
        return Err(Error::InvalidConfig(format!("lambda0 must be finite and >= 0, got {lambda0}")));
    }
    if n0 == 0 || n == 0 || p0 < 2 || p < 2 {
        return Err(Error::InvalidConfig(format!(
            "calibration needs n, n0 >= 1 and p, p0 >= 2; got n0 = {n0}, p0 = {p0}, n = {n}, p = {p}"
        )));
    }
    let (lp, lp0) = ((p as f64).ln(), (p0 as f64).ln());
    let ratio = match kind {
        EstimatorKind::Slasso => {
            let r = (lp / (n as f64).sqrt()) / (lp0 / (n0 as f64).sqrt());
            r * r
        }
        EstimatorKind::Plasso => (lp / lp0).powf(1.5),
    };
    Ok(lambda0 * ratio)
}

/// Lower middle element for an even count.
pub fn lower_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[(v.len() - 1) / 2])
}

#[derive(Clone, Debug)]
pub struct CalibrationConfig {
    pub variant: DgpVariant,
    pub n0: usize,
    pub p_x: usize,
    pub p_z: usize,
    pub kind: EstimatorKind,
    pub cv: CvOptions,
}

impl CalibrationConfig {
    pub fn p0(&self) -> usize {
        self.p_x + self.p_z
    }
}

/// Median cross-validated penalty over `reps` draws of the reference design.
/// Replication `r` uses `RngStream::for_replication(seed, r)`.
pub fn calibrate_initial(cfg: &CalibrationConfig, reps: usize, seed: u64) -> Result<f64> {
    if reps == 0 {
        return Err(Error::InvalidConfig("calibration needs at least one replication".into()));
    }
    let design = MixedDesign::new(cfg.n0, cfg.p_x, cfg.p_z, cfg.variant)?;
    let lambdas = (0..reps)
        .map(|r| {
            let s = design.generate(&mut RngStream::for_replication(seed, r as u64));
            Ok(cv_select(&s.y, &s.w, cfg.kind, &cfg.cv)?.chosen_lambda)
        })
        .collect::<Result<Vec<f64>>>()?;
    lower_median(&lambdas)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_partition_rows() {
        let b = cv_blocks(23, 10).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b[0], 0..3);
        assert_eq!(b[2], 6..9);
        assert_eq!(b[3], 9..11);
        assert_eq!(b[9].end, 23);
        let total: usize = b.iter().map(|r| r.len()).sum();
        assert_eq!(total, 23);
        assert!(cv_blocks(5, 10).is_err());
        assert!(cv_blocks(5, 1).is_err());
    }

    #[test]
    fn median_takes_lower_middle() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0, 4.0]).unwrap(), 2.0);
        assert_eq!(lower_median(&[5.0, 1.0, 3.0]).unwrap(), 3.0);
        assert_eq!(lower_median(&[0.7; 3]).unwrap(), 0.7);
        assert!(lower_median(&[]).is_err());
    }

    #[test]
    fn calibration_identity_and_composition() {
        for kind in EstimatorKind::ALL {
            assert_eq!(calibrate_lambda(0.3, 120, 240, 120, 240, kind).unwrap(), 0.3);
            let a = calibrate_lambda(1.0, 120, 240, 240, 480, kind).unwrap();
            let b = calibrate_lambda(1.0, 240, 480, 360, 720, kind).unwrap();
            let c = calibrate_lambda(1.0, 120, 240, 360, 720, kind).unwrap();
            assert!((a * b - c).abs() < 1e-12);
            let d = calibrate_lambda(2.5, 120, 240, 360, 720, kind).unwrap();
            assert!((d - 2.5 * c).abs() < 1e-12);
        }
        // Slasso shrinks with n at fixed p.
        let s = calibrate_lambda(1.0, 120, 240, 480, 240, EstimatorKind::Slasso).unwrap();
        assert!((s - 0.25).abs() < 1e-12);
        assert!(calibrate_lambda(-1.0, 1, 2, 1, 2, EstimatorKind::Plasso).is_err());
    }

    #[test]
    fn strong_signal_selects_below_lambda_max() {
        let mut s = RngStream::new(21);
        let (n, p) = (100, 8);
        let w = Matrix::from_fn(n, p, |_, _| s.normal());
        let y: Vec<f64> = (0..n).map(|i| 2.0 * w[(i, 0)] - w[(i, 3)] + 0.3 * s.normal()).collect();
        let opts = CvOptions {
            grid_size: 30,
            ..CvOptions::default()
        };
        for kind in EstimatorKind::ALL {
            let r = cv_select(&y, &w, kind, &opts).unwrap();
            assert!(r.chosen_index > 0);
            assert!(r.chosen_lambda < r.grid[0]);
            assert_eq!(r.mean_errors.len(), 30);
        }
    }

    #[test]
    fn cv_is_deterministic() {
        let mut s = RngStream::new(5);
        let w = Matrix::from_fn(40, 6, |_, _| s.normal());
        let y: Vec<f64> = (0..40).map(|i| w[(i, 1)] + s.normal()).collect();
        let opts = CvOptions {
            grid_size: 20,
            ..CvOptions::default()
        };
        let a = cv_select(&y, &w, EstimatorKind::Slasso, &opts).unwrap();
        let b = cv_select(&y, &w, EstimatorKind::Slasso, &opts).unwrap();
        assert_eq!(a.mean_errors, b.mean_errors);
        assert_eq!(a.chosen_index, b.chosen_index);
    }

    #[test]
    fn glmnet_floor_switches_at_square_designs() {
        assert_eq!(glmnet_eps_ratio(120, 240), 1e-2);
        assert_eq!(glmnet_eps_ratio(120, 120), 1e-4);
        assert_eq!(glmnet_eps_ratio(120, 60), 1e-4);
    }

    #[test]
    fn argmin_ties_prefer_first() {
        assert_eq!(argmin_first(&[2.0, 1.0, 1.0, 3.0]), 1);
    }
}
