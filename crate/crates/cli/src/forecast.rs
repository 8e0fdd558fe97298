//! Rolling-window forecast comparison over horizons, windows, methods and
//! transforms.

use std::io::Write;

use rayon::prelude::*;

use nslasso::forecast::{load_csv, metrics, read_csv, rolling_forecast, Dataset, ForecastRecord, ForecastSpec, Method, Transform};

use crate::config::ForecastParams;
use crate::CliError;

/// Planted-signal panel in the FRED-MD layout: a row of transformation codes under
/// the header, then monthly observations.
pub const FIXTURE: &str = include_str!("../fixtures/planted.csv");

/// Months, extra noise predictors and seed that regenerate [`FIXTURE`].
pub const FIXTURE_SHAPE: (usize, usize, u64) = (240, 9, 7);

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub horizon: usize,
    pub window_years: usize,
    pub method: Method,
    pub transform: Transform,
    pub records: Vec<ForecastRecord>,
    pub rmspe: f64,
    pub mape: f64,
    /// `(regressor, windows selected)` in name order.
    pub selection: Vec<(String, usize)>,
}

pub fn load_dataset(params: &ForecastParams) -> Result<Dataset, CliError> {
    let loaded = match &params.data {
        Some(path) => load_csv(path)?,
        None => read_csv(FIXTURE.as_bytes())?,
    };
    Ok(loaded.dataset)
}

pub fn spec_for(params: &ForecastParams, horizon: usize, window_years: usize, method: Method, transform: Transform) -> ForecastSpec {
    let mut spec = ForecastSpec::new(params.target.clone(), window_years, horizon, method);
    spec.transform = transform;
    spec.augmented = params.augmented;
    spec.factors = params.factors;
    spec.lags = params.lags;
    spec.first_origin = params.first_origin;
    spec.last_origin = params.last_origin;
    // Forecast grids use a fixed floor, so the design shape is irrelevant.
    spec.cv = params.grid.cv_options(spec.window_rows(), 0);
    spec
}

/// Experiments in `(horizon, window, method, transform)` order.
pub fn run_experiments(ds: &Dataset, params: &ForecastParams) -> Result<Vec<Experiment>, CliError> {
    if ds.column_index(&params.target).is_none() {
        return Err(CliError::Config(format!("target column '{}' not found in the dataset", params.target)));
    }
    let mut grid = Vec::new();
    for &h in &params.horizons {
        for &w in &params.windows {
            for &m in &params.methods {
                for &t in &params.transforms {
                    grid.push((h, w, m, t));
                }
            }
        }
    }
    grid.par_iter()
        .map(|&(horizon, window_years, method, transform)| {
            let records = rolling_forecast(ds, &spec_for(params, horizon, window_years, method, transform))?;
            let m = metrics(&records)?;
            Ok(Experiment {
                horizon,
                window_years,
                method,
                transform,
                rmspe: m.rmspe,
                mape: m.mape,
                selection: m.selection.into_iter().collect(),
                records,
            })
        })
        .collect()
}

fn key(e: &Experiment) -> [String; 4] {
    [
        e.horizon.to_string(),
        e.window_years.to_string(),
        e.method.to_string(),
        e.transform.to_string(),
    ]
}

pub fn write_records_csv<W: Write>(exps: &[Experiment], out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record([
        "horizon", "window_years", "method", "transform", "origin", "date", "prediction", "actual", "error", "selected",
    ])?;
    for e in exps {
        for r in &e.records {
            let mut rec = key(e).to_vec();
            rec.extend([
                r.origin.to_string(),
                r.date.clone(),
                format!("{:?}", r.prediction),
                format!("{:?}", r.actual),
                format!("{:?}", r.error()),
                r.selected.join(";"),
            ]);
            wr.write_record(&rec)?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// One row per experiment; `relative_rmspe` divides by the RWwD experiment
/// sharing horizon, window and transform when one was run.
pub fn write_summary_csv<W: Write>(exps: &[Experiment], out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record([
        "horizon", "window_years", "method", "transform", "count", "rmspe", "mape", "relative_rmspe",
    ])?;
    for e in exps {
        let bench = exps.iter().find(|b| {
            b.method == Method::RWwD && b.horizon == e.horizon && b.window_years == e.window_years && b.transform == e.transform
        });
        let mut rec = key(e).to_vec();
        rec.extend([
            e.records.len().to_string(),
            format!("{:?}", e.rmspe),
            format!("{:?}", e.mape),
            bench.map_or_else(String::new, |b| format!("{:?}", e.rmspe / b.rmspe)),
        ]);
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_selection_csv<W: Write>(exps: &[Experiment], out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["horizon", "window_years", "method", "transform", "regressor", "count", "frequency"])?;
    for e in exps {
        for (name, count) in &e.selection {
            let mut rec = key(e).to_vec();
            rec.extend([
                name.clone(),
                count.to_string(),
                format!("{:?}", *count as f64 / e.records.len() as f64),
            ]);
            wr.write_record(&rec)?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nslasso::forecast::planted_dataset;

    #[test]
    fn fixture_matches_generator() {
        let (months, extra, seed) = FIXTURE_SHAPE;
        let mut buf = Vec::new();
        planted_dataset(months, extra, seed).unwrap().write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap() == FIXTURE, "fixture is stale");
    }
}
