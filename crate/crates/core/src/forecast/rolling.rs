//! Rolling-window direct forecasts and their summary metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::data::{apply_tcode, tcode_lag, Dataset};
use super::models::{ar_bic, extract_factors, rwwd, AR_Q_MAX};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::numerics::Matrix;
use crate::tuning::{cv_fit, CvOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    RWwD,
    ArBic,
    Plasso,
    Slasso,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::RWwD, Method::ArBic, Method::Plasso, Method::Slasso];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::RWwD => "RWwD",
            Method::ArBic => "ARBIC",
            Method::Plasso => "Plasso",
            Method::Slasso => "Slasso",
        }
    }

    fn lasso_kind(self) -> Option<EstimatorKind> {
        match self {
            Method::Plasso => Some(EstimatorKind::Plasso),
            Method::Slasso => Some(EstimatorKind::Slasso),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rwwd" => Ok(Method::RWwD),
            "arbic" | "ar-bic" | "ar_bic" => Ok(Method::ArBic),
            "plasso" => Ok(Method::Plasso),
            "slasso" => Ok(Method::Slasso),
            other => Err(Error::InvalidConfig(format!("unknown forecast method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transform {
    /// Predictors in levels.
    NT,
    /// Predictors transformed by their codes.
    ST,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::NT => "NT",
            Transform::ST => "ST",
        })
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NT" => Ok(Transform::NT),
            "ST" => Ok(Transform::ST),
            other => Err(Error::InvalidConfig(format!("unknown transform '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ForecastSpec {
    pub target: String,
    pub window_years: usize,
    pub horizon: usize,
    pub method: Method,
    pub transform: Transform,
    pub augmented: bool,
    /// First forecast origin as a row of the aligned panel; defaults to the end
    /// of the first full window.
    pub first_origin: Option<usize>,
    /// Last origin; defaults to the last row with an observed outcome.
    pub last_origin: Option<usize>,
    pub factors: usize,
    pub lags: usize,
    pub cv: CvOptions,
}

impl ForecastSpec {
    pub fn new(target: impl Into<String>, window_years: usize, horizon: usize, method: Method) -> Self {
        Self {
            target: target.into(),
            window_years,
            horizon,
            method,
            transform: Transform::NT,
            augmented: false,
            first_origin: None,
            last_origin: None,
            factors: 4,
            lags: 4,
            cv: CvOptions::default(),
        }
    }

    pub fn window_rows(&self) -> usize {
        12 * self.window_years
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastRecord {
    /// Row of the aligned panel at which the forecast is made.
    pub origin: usize,
    pub date: String,
    pub horizon: usize,
    pub method: Method,
    pub transform: Transform,
    pub prediction: f64,
    pub actual: f64,
    /// Names of regressors with nonzero LASSO coefficients.
    pub selected: Vec<String>,
}

impl ForecastRecord {
    pub fn error(&self) -> f64 {
        self.actual - self.prediction
    }
}

/// Target (levels) and predictors on a common row index.
#[derive(Clone, Debug)]
pub struct Panel {
    pub dates: Vec<String>,
    pub target_name: String,
    pub target: Vec<f64>,
    pub names: Vec<String>,
    pub predictors: Matrix,
}

/// Under `ST` every predictor is transformed by its code and all series are
/// trimmed to the shortest common tail. The target always stays in levels.
pub fn prepare_panel(ds: &Dataset, target: &str, transform: Transform) -> Result<Panel> {
    let ti = ds
        .column_index(target)
        .ok_or_else(|| Error::InvalidConfig(format!("target column '{target}' not found")))?;
    let others: Vec<usize> = (0..ds.names.len()).filter(|&j| j != ti).collect();
    if others.is_empty() {
        return Err(Error::InvalidConfig("dataset has no predictors besides the target".into()));
    }
    let t = ds.dates.len();
    let (skip, cols): (usize, Vec<Vec<f64>>) = match transform {
        Transform::NT => (0, others.iter().map(|&j| ds.column(j).to_vec()).collect()),
        Transform::ST => {
            let skip = others.iter().map(|&j| tcode_lag(ds.tcodes[j])).collect::<Result<Vec<_>>>()?;
            let skip = skip.into_iter().max().unwrap_or(0);
            let cols = others
                .iter()
                .map(|&j| {
                    let out = apply_tcode(ds.column(j), ds.tcodes[j])?;
                    Ok(out[out.len() - (t - skip).min(out.len())..].to_vec())
                })
                .collect::<Result<Vec<_>>>()?;
            (skip, cols)
        }
    };
    if t <= skip {
        return Err(Error::InsufficientHistory("no rows left after transformation".into()));
    }
    Ok(Panel {
        dates: ds.dates[skip..].to_vec(),
        target_name: target.to_string(),
        target: ds.column(ti)[skip..].to_vec(),
        names: others.iter().map(|&j| ds.names[j].clone()).collect(),
        predictors: Matrix::from_columns(&cols)?,
    })
}

/// Regressor rows for times `first..=last` built from window rows `start..=last`,
/// with column names.
fn design(panel: &Panel, spec: &ForecastSpec, start: usize, last: usize) -> Result<(Matrix, Vec<String>, usize)> {
    if !spec.augmented {
        let rows: Vec<usize> = (start..=last).collect();
        return Ok((panel.predictors.select_rows(&rows), panel.names.clone(), start));
    }
    let window = panel.predictors.row_range(start, last + 1);
    let k = spec.factors.min(window.cols()).min(window.rows());
    let factors = extract_factors(&window, k)?;
    let len = last + 1 - start;
    let p = panel.names.len();
    let width = p + 1 + k;
    let unique = |i: usize, c: usize| -> f64 {
        if c < p {
            window[(i, c)]
        } else if c == p {
            panel.target[start + i]
        } else {
            factors[(i, c - p - 1)]
        }
    };
    let mut base: Vec<String> = panel.names.clone();
    base.push(panel.target_name.clone());
    base.extend((1..=k).map(|f| format!("F{f}")));
    let lags = spec.lags.max(1);
    let first = start + lags - 1;
    if first > last {
        return Err(Error::InsufficientHistory(format!("window of {len} rows cannot hold {lags} lags")));
    }
    let x = Matrix::from_fn(last + 1 - first, width * lags, |r, c| {
        let (lag, u) = (c / width, c % width);
        unique(r + lags - 1 - lag, u)
    });
    let names = (0..lags)
        .flat_map(|lag| base.iter().map(move |b| format!("{b}.L{lag}")))
        .collect();
    Ok((x, names, first))
}

fn forecast_at(panel: &Panel, spec: &ForecastSpec, origin: usize) -> Result<ForecastRecord> {
    let h = spec.horizon;
    let start = origin + 1 - spec.window_rows();
    let ywin = &panel.target[start..=origin];
    let (prediction, selected) = match spec.method {
        Method::RWwD => (rwwd(ywin, h)?, Vec::new()),
        Method::ArBic => (ar_bic(ywin, h, AR_Q_MAX)?.0, Vec::new()),
        Method::Plasso | Method::Slasso => {
            let kind = spec.method.lasso_kind().expect("lasso method");
            let (x, names, first) = design(panel, spec, start, origin)?;
            // Rows of x are times first..=origin; train on pairs (W_t, y_{t+h}).
            let train_len = (origin + 1 - first).saturating_sub(h);
            if train_len < spec.cv.folds.max(2) {
                return Err(Error::InsufficientHistory(format!(
                    "{train_len} training rows at origin {origin}, need at least {}",
                    spec.cv.folds.max(2)
                )));
            }
            let rows: Vec<usize> = (0..train_len).collect();
            let w = x.select_rows(&rows);
            let y: Vec<f64> = (0..train_len).map(|r| panel.target[first + r + h]).collect();
            let (_, fit) = cv_fit(&y, &w, kind, &spec.cv)?;
            let pred = fit.predict(&x.row(x.rows() - 1))?;
            (pred, fit.active_set.iter().map(|&j| names[j].clone()).collect())
        }
    };
    Ok(ForecastRecord {
        origin,
        date: panel.dates[origin].clone(),
        horizon: h,
        method: spec.method,
        transform: spec.transform,
        prediction,
        actual: panel.target[origin + h],
        selected,
    })
}

/// One record per origin, in origin order. Each forecast reads only panel rows
/// `≤ origin` (plus the realized outcome for the record).
pub fn rolling_forecast(ds: &Dataset, spec: &ForecastSpec) -> Result<Vec<ForecastRecord>> {
    if spec.window_years == 0 || spec.horizon == 0 {
        return Err(Error::InvalidConfig("window_years and horizon must be >= 1".into()));
    }
    let panel = prepare_panel(ds, &spec.target, spec.transform)?;
    let t = panel.target.len();
    let wrows = spec.window_rows();
    let first = spec.first_origin.unwrap_or(wrows - 1);
    if first + 1 < wrows {
        return Err(Error::InsufficientHistory(format!(
            "origin {first} precedes the first full window of {wrows} rows"
        )));
    }
    if first + spec.horizon >= t {
        return Err(Error::InsufficientHistory(format!(
            "panel has {t} rows; a {wrows}-row window with horizon {} leaves no evaluation origin",
            spec.horizon
        )));
    }
    let last = spec.last_origin.unwrap_or(t - 1 - spec.horizon).min(t - 1 - spec.horizon);
    (first..=last)
        .into_par_iter()
        .map(|o| forecast_at(&panel, spec, o))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastMetrics {
    pub count: usize,
    pub rmspe: f64,
    pub mape: f64,
    /// Records in which each regressor was selected.
    pub selection: BTreeMap<String, usize>,
}

pub fn metrics(records: &[ForecastRecord]) -> Result<ForecastMetrics> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let n = records.len() as f64;
    let sq: f64 = records.iter().map(|r| r.error() * r.error()).sum();
    let abs: f64 = records.iter().map(|r| r.error().abs()).sum();
    let mut selection = BTreeMap::new();
    for r in records {
        for name in &r.selected {
            *selection.entry(name.clone()).or_insert(0) += 1;
        }
    }
    Ok(ForecastMetrics {
        count: records.len(),
        rmspe: (sq / n).sqrt(),
        mape: abs / n,
        selection,
    })
}
