//! Monte-Carlo harness: oracle, Plasso and Slasso on simulated predictive
//! regressions, summarized per cell.

use std::io::Write;

use rayon::prelude::*;

use nslasso::dgp::{CointDesign, CointRegression, MixedDesign};
use nslasso::estimators::fit_kind;
use nslasso::tuning::{calibrate_initial, calibrate_lambda, cv_fit, CalibrationConfig};
use nslasso::{ols, ColumnKind, DgpVariant, EstimatorKind, Matrix, RngStream, SolverOptions};

use crate::config::{CalibrationParams, Cell, Design, Estimator, GridParams, SimulateParams, Tuning};
use crate::CliError;

/// Separates the calibration draws from the replication draws of the same seed.
const CALIBRATION_SALT: u64 = 0x6361_6c69_6272_6174;

/// Column categories of the selection table: active and inactive coefficients
/// on unit-root, stationary and cointegrated regressors.
pub const CATEGORIES: [&str; 6] = [
    "active_beta",
    "inactive_beta",
    "active_gamma",
    "inactive_gamma",
    "active_coint",
    "inactive_coint",
];

fn category(kind: ColumnKind, active: bool) -> usize {
    let base = match kind {
        ColumnKind::UnitRoot => 0,
        ColumnKind::Stationary => 2,
        ColumnKind::Cointegrated => 4,
    };
    base + usize::from(!active)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub design: Design,
    pub n: usize,
    pub p_x: usize,
    pub p_z: usize,
    /// Columns in the fitted design.
    pub p: usize,
    pub regression: Option<CointRegression>,
    pub estimator: Estimator,
    pub tuning: Option<Tuning>,
    pub reps: usize,
    pub rmspe: f64,
    pub mape: f64,
    /// `[E‖θ̂ − θ*‖₂²]^{1/2}`; absent when the fitted design is misspecified.
    pub coef_rmse: Option<f64>,
    /// `E‖θ̂ − θ*‖₁`.
    pub coef_mae: Option<f64>,
    pub mean_lambda: Option<f64>,
    /// Percent of each category selected, averaged over replications. `None`
    /// for the oracle and for empty categories.
    pub selection: [Option<f64>; 6],
}

/// What one estimator produced on one replication.
#[derive(Clone, Debug)]
struct Outcome {
    error: f64,
    coef: Option<(f64, f64)>,
    lambda: Option<f64>,
    selection: [Option<f64>; 6],
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    regression: Option<CointRegression>,
    estimator: Estimator,
    tuning: Option<Tuning>,
}

/// Regression data handed to every estimator of a replication.
struct View<'a> {
    y: &'a [f64],
    w: &'a Matrix,
    next: &'a [f64],
    y_next: f64,
    kinds: Vec<ColumnKind>,
    theta: Vec<f64>,
    oracle: Vec<usize>,
    /// Whether `theta` is the true coefficient vector of this regression.
    well_specified: bool,
}

/// Anchor penalties for calibrated tuning, one per LASSO kind.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub params: CalibrationParams,
    pub variant: DgpVariant,
    pub lambda0: Vec<(EstimatorKind, f64)>,
}

impl Calibration {
    pub fn compute(
        params: &CalibrationParams,
        variant: DgpVariant,
        kinds: &[EstimatorKind],
        grid: &GridParams,
        seed: u64,
    ) -> Result<Self, CliError> {
        let lambda0 = kinds
            .iter()
            .map(|&kind| {
                let cfg = CalibrationConfig {
                    variant,
                    n0: params.n0,
                    p_x: params.p_x,
                    p_z: params.p_z,
                    kind,
                    cv: grid.cv_options(params.n0, params.p_x + params.p_z),
                };
                Ok((kind, calibrate_initial(&cfg, params.reps, seed ^ CALIBRATION_SALT)?))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Self {
            params: params.clone(),
            variant,
            lambda0,
        })
    }

    fn lambda(&self, kind: EstimatorKind, n: usize, p: usize) -> Result<f64, CliError> {
        let l0 = self
            .lambda0
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, l)| *l)
            .expect("calibrated kinds cover the configured estimators");
        let p0 = self.params.p_x + self.params.p_z;
        Ok(calibrate_lambda(l0, self.params.n0, p0, n, p, kind)?)
    }
}

fn estimate(
    view: &View<'_>,
    slot: &Slot,
    grid: &GridParams,
    calibration: Option<&Calibration>,
) -> Result<Outcome, CliError> {
    let p = view.w.cols();
    let cv = grid.cv_options(view.y.len(), p);
    let (prediction, theta_hat, lambda) = match slot.estimator {
        Estimator::Oracle => {
            let fit = ols(view.y, &view.w.select_columns(&view.oracle))?;
            let next: Vec<f64> = view.oracle.iter().map(|&j| view.next[j]).collect();
            let mut theta = vec![0.0; p];
            for (&j, &b) in view.oracle.iter().zip(&fit.coefficients) {
                theta[j] = b;
            }
            (fit.predict(&next), theta, None)
        }
        Estimator::Lasso(kind) => {
            let fit = match slot.tuning.expect("lasso slots carry a tuning mode") {
                Tuning::Cv => cv_fit(view.y, view.w, kind, &cv)?.1,
                Tuning::Calibrated => {
                    let cal = calibration.expect("calibration computed for calibrated tuning");
                    let lambda = cal.lambda(kind, view.y.len(), p)?;
                    fit_kind(kind, view.y, view.w, lambda, &SolverOptions::default())?
                }
            };
            (fit.predict(view.next)?, fit.coefficients.clone(), Some(fit.lambda()))
        }
    };
    let coef = view.well_specified.then(|| {
        theta_hat.iter().zip(&view.theta).fold((0.0, 0.0), |(sq, ab), (a, b)| {
            let d = a - b;
            (sq + d * d, ab + d.abs())
        })
    });
    let selection = match slot.estimator {
        Estimator::Oracle => [None; 6],
        Estimator::Lasso(_) => {
            let mut hit = [0usize; 6];
            let mut total = [0usize; 6];
            for j in 0..p {
                let c = category(view.kinds[j], view.theta[j] != 0.0);
                total[c] += 1;
                hit[c] += usize::from(theta_hat[j] != 0.0);
            }
            std::array::from_fn(|c| (total[c] > 0).then(|| 100.0 * hit[c] as f64 / total[c] as f64))
        }
    };
    Ok(Outcome {
        error: view.y_next - prediction,
        coef,
        lambda,
        selection,
    })
}

fn slots(params: &SimulateParams) -> Vec<Slot> {
    let regressions: Vec<Option<CointRegression>> = match params.design {
        Design::Mixed(_) => vec![None],
        Design::Cointegrated => params.regressions.iter().copied().map(Some).collect(),
    };
    let mut out = Vec::new();
    for regression in regressions {
        for &estimator in &params.estimators {
            match estimator {
                Estimator::Oracle => out.push(Slot {
                    regression,
                    estimator,
                    tuning: None,
                }),
                Estimator::Lasso(_) => out.extend(params.tunings.iter().map(|&t| Slot {
                    regression,
                    estimator,
                    tuning: Some(t),
                })),
            }
        }
    }
    out
}

/// Per-replication outcomes for every slot, in slot order.
fn replicate(
    params: &SimulateParams,
    cell: Cell,
    slots: &[Slot],
    calibration: Option<&Calibration>,
    stream: &mut RngStream,
) -> Result<Vec<Outcome>, CliError> {
    let grid = &params.grid;
    match params.design {
        Design::Mixed(variant) => {
            let s = MixedDesign::new(cell.n, cell.p_x, cell.p_z, variant)?.generate(stream);
            let view = View {
                y: &s.y,
                w: &s.w,
                next: &s.next_regressors,
                y_next: s.y_next,
                kinds: s.column_kinds.clone(),
                theta: s.theta_true.clone(),
                oracle: s.true_support(),
                well_specified: true,
            };
            slots.iter().map(|slot| estimate(&view, slot, grid, calibration)).collect()
        }
        Design::Cointegrated => {
            let s = CointDesign::new(cell.n, cell.p_x)?.generate(stream);
            let mut out = Vec::with_capacity(slots.len());
            let mut current: Option<(CointRegression, Vec<f64>, Matrix, Vec<f64>)> = None;
            for slot in slots {
                let reg = slot.regression.expect("cointegration slots carry a regression");
                if current.as_ref().map(|c| c.0) != Some(reg) {
                    let (y, w, next) = s.view(reg);
                    current = Some((reg, y, w, next));
                }
                let (_, y, w, next) = current.as_ref().expect("view just built");
                let cols = s.columns(reg);
                let view = View {
                    y,
                    w,
                    next,
                    y_next: s.sample.y_next,
                    kinds: cols.iter().map(|&j| s.sample.column_kinds[j]).collect(),
                    theta: cols.iter().map(|&j| s.sample.theta_true[j]).collect(),
                    oracle: s.oracle_columns(reg),
                    well_specified: reg == CointRegression::All,
                };
                out.push(estimate(&view, slot, grid, calibration)?);
            }
            Ok(out)
        }
    }
}

/// Dimensions `(p_x, p_z, p)` of the design a slot fits.
fn dims(design: Design, cell: Cell, regression: Option<CointRegression>) -> Result<(usize, usize, usize), CliError> {
    match design {
        Design::Mixed(_) => Ok((cell.p_x, cell.p_z, cell.p_x + cell.p_z)),
        Design::Cointegrated => {
            let d = CointDesign::new(cell.n, cell.p_x)?;
            let co = d.coint.p_c1 + d.coint.p_c2;
            let p = match regression.expect("cointegration slots carry a regression") {
                CointRegression::XOnly => d.p_x,
                CointRegression::XZ => d.p_x + d.p_z,
                CointRegression::All => co + d.p_x + d.p_z,
            };
            Ok((d.p_x, d.p_z, p))
        }
    }
}

/// Runs `reps` replications of one cell. Replication `r` draws from
/// `RngStream::for_replication(seed, r)`; results are reduced in index order.
pub fn simulate_cell(
    params: &SimulateParams,
    cell: Cell,
    reps: usize,
    seed: u64,
    calibration: Option<&Calibration>,
) -> Result<Vec<SummaryRow>, CliError> {
    if reps == 0 {
        return Err(CliError::Config("replications must be positive".into()));
    }
    let slots = slots(params);
    let per_rep: Vec<Vec<Outcome>> = (0..reps)
        .into_par_iter()
        .map(|r| replicate(params, cell, &slots, calibration, &mut RngStream::for_replication(seed, r as u64)))
        .collect::<Result<_, _>>()?;
    let rf = reps as f64;
    slots
        .iter()
        .enumerate()
        .map(|(k, slot)| {
            let outcomes: Vec<&Outcome> = per_rep.iter().map(|o| &o[k]).collect();
            let (mut sq, mut ab) = (0.0, 0.0);
            for o in &outcomes {
                sq += o.error * o.error;
                ab += o.error.abs();
            }
            let coef = outcomes
                .iter()
                .map(|o| o.coef)
                .collect::<Option<Vec<_>>>()
                .map(|v| v.iter().fold((0.0, 0.0), |(s, a), (cs, ca)| (s + cs, a + ca)));
            let mean_lambda = outcomes
                .iter()
                .map(|o| o.lambda)
                .collect::<Option<Vec<_>>>()
                .map(|v| v.iter().sum::<f64>() / rf);
            let selection = std::array::from_fn(|c| {
                outcomes
                    .iter()
                    .map(|o| o.selection[c])
                    .collect::<Option<Vec<_>>>()
                    .map(|v| v.iter().sum::<f64>() / rf)
            });
            let (p_x, p_z, p) = dims(params.design, cell, slot.regression)?;
            Ok(SummaryRow {
                design: params.design,
                n: cell.n,
                p_x,
                p_z,
                p,
                regression: slot.regression,
                estimator: slot.estimator,
                tuning: slot.tuning,
                reps,
                rmspe: (sq / rf).sqrt(),
                mape: ab / rf,
                coef_rmse: coef.map(|(s, _)| (s / rf).sqrt()),
                coef_mae: coef.map(|(_, a)| a / rf),
                mean_lambda,
                selection,
            })
        })
        .collect()
}

/// Every cell of the configuration, calibrating the anchor penalties first
/// when calibrated tuning is requested.
pub fn simulate(params: &SimulateParams, reps: usize, seed: u64) -> Result<Vec<SummaryRow>, CliError> {
    let calibration = match (&params.calibration, params.design) {
        (Some(cal), Design::Mixed(variant)) => {
            let kinds: Vec<EstimatorKind> = params
                .estimators
                .iter()
                .filter_map(|e| match e {
                    Estimator::Lasso(k) => Some(*k),
                    Estimator::Oracle => None,
                })
                .collect();
            Some(Calibration::compute(cal, variant, &kinds, &params.grid, seed)?)
        }
        _ => None,
    };
    let mut rows = Vec::new();
    for &cell in &params.cells {
        rows.extend(simulate_cell(params, cell, reps, seed, calibration.as_ref())?);
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "design", "n", "p_x", "p_z", "p", "regression", "estimator", "tuning", "reps", "rmspe", "mape", "coef_rmse",
        "coef_mae", "mean_lambda",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(CATEGORIES.iter().map(|c| format!("sel_{c}")));
    wr.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.design.to_string(),
            r.n.to_string(),
            r.p_x.to_string(),
            r.p_z.to_string(),
            r.p.to_string(),
            r.regression.map_or("", |g| g.label()).to_string(),
            r.estimator.as_str().to_string(),
            r.tuning.map_or("", |t| t.as_str()).to_string(),
            r.reps.to_string(),
            format!("{:?}", r.rmspe),
            format!("{:?}", r.mape),
            opt(r.coef_rmse),
            opt(r.coef_mae),
            opt(r.mean_lambda),
        ];
        rec.extend(r.selection.iter().map(|s| opt(*s)));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}
