//! Rolling-window out-of-sample forecasting on monthly macro panels.

pub mod data;
pub mod models;
pub mod rolling;
pub mod synthetic;

pub use data::{apply_tcode, invert_tcode, load_csv, read_csv, tcode_lag, Dataset, LoadedDataset};
pub use models::{ar_bic, extract_factors, principal_components, rwwd, Factors};
pub use rolling::{metrics, prepare_panel, rolling_forecast, ForecastMetrics, ForecastRecord, ForecastSpec, Method, Transform};
pub use synthetic::planted_dataset;
