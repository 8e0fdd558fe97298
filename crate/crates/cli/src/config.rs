//! Run configuration assembled from a `key = value` file and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nslasso::forecast::{Method, Transform};
use nslasso::dgp::CointRegression;
use nslasso::{DgpVariant, EstimatorKind};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    EigenStudy,
    Forecast,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::EigenStudy => "eigen-study",
            Command::Forecast => "forecast",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw settings. Keys are normalized to lowercase with `-` folded into `_`;
/// later insertions win.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    /// Parses `key = value` lines. Blank lines and lines starting with `#` are
    /// skipped; a trailing `# …` is a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
            if k.trim().is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            s.set(k, v);
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(normalize_key(key), value.trim().to_string());
    }

    /// Applies every entry of `other` on top of `self`.
    pub fn merge(&mut self, other: Settings) {
        self.values.extend(other.values);
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        raw.parse()
            .map_err(|e| CliError::Config(format!("invalid value '{raw}' for '{key}': {e}")))
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.take(key).map(|raw| Self::parse_value(key, &raw)).transpose()
    }

    fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list; an explicitly empty value yields an empty list.
    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: fmt::Display,
    {
        let Some(raw) = self.take(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Self::parse_value(key, s))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    fn list_or<T: FromStr>(&mut self, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.list(key)?.unwrap_or(default))
    }

    fn finish(self, command: Command) -> Result<(), CliError> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(CliError::Config(format!("unknown key '{k}' for {command}"))),
        }
    }
}

fn positive(key: &str, v: usize) -> Result<usize, CliError> {
    if v == 0 {
        return Err(CliError::Config(format!("'{key}' must be positive")));
    }
    Ok(v)
}

fn nonempty<T>(key: &str, v: Vec<T>) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        return Err(CliError::Config(format!("'{key}' must list at least one value")));
    }
    Ok(v)
}

fn all_positive(key: &str, v: Vec<usize>) -> Result<Vec<usize>, CliError> {
    let v = nonempty(key, v)?;
    if v.contains(&0) {
        return Err(CliError::Config(format!("every entry of '{key}' must be positive")));
    }
    Ok(v)
}

/// Floor of the penalty grid relative to `λ_max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsRatio {
    Fixed(f64),
    /// `0.01` when the design has more columns than rows, else `1e-4`.
    Glmnet,
}

impl EpsRatio {
    pub fn resolve(self, n: usize, p: usize) -> f64 {
        match self {
            EpsRatio::Fixed(e) => e,
            EpsRatio::Glmnet => nslasso::tuning::glmnet_eps_ratio(n, p),
        }
    }
}

impl FromStr for EpsRatio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("glmnet") {
            return Ok(EpsRatio::Glmnet);
        }
        let e: f64 = s.parse().map_err(|e| format!("{e}"))?;
        if !(e > 0.0 && e < 1.0) {
            return Err(format!("eps_ratio must lie in (0, 1), got {e}"));
        }
        Ok(EpsRatio::Fixed(e))
    }
}

/// Penalty-grid settings shared by every cross-validated fit.
#[derive(Clone, Debug, PartialEq)]
pub struct GridParams {
    pub grid_size: usize,
    pub folds: usize,
    pub eps_ratio: EpsRatio,
}

impl GridParams {
    fn read(s: &mut Settings, default_eps: EpsRatio) -> Result<Self, CliError> {
        let grid_size = s.get_or("grid_size", 100)?;
        let folds = s.get_or("folds", 10)?;
        let eps_ratio = s.get_or("eps_ratio", default_eps)?;
        if grid_size < 2 || folds < 2 {
            return Err(CliError::Config(format!(
                "need grid_size >= 2 and folds >= 2; got {grid_size} and {folds}"
            )));
        }
        Ok(Self {
            grid_size,
            folds,
            eps_ratio,
        })
    }

    /// Options for an `n × p` design.
    pub fn cv_options(&self, n: usize, p: usize) -> nslasso::tuning::CvOptions {
        nslasso::tuning::CvOptions {
            folds: self.folds,
            grid_size: self.grid_size,
            eps_ratio: self.eps_ratio.resolve(n, p),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tuning {
    Cv,
    Calibrated,
}

impl Tuning {
    pub fn as_str(self) -> &'static str {
        match self {
            Tuning::Cv => "cv",
            Tuning::Calibrated => "calibrated",
        }
    }
}

impl FromStr for Tuning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cv" => Ok(Tuning::Cv),
            "calibrated" | "cal" => Ok(Tuning::Calibrated),
            other => Err(format!("unknown tuning mode '{other}' (expected cv or calibrated)")),
        }
    }
}

/// Estimators compared in a simulation cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Estimator {
    /// Least squares on the true support.
    Oracle,
    Lasso(EstimatorKind),
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Oracle => "oracle",
            Estimator::Lasso(k) => k.as_str(),
        }
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("oracle") {
            return Ok(Estimator::Oracle);
        }
        s.parse::<EstimatorKind>().map(Estimator::Lasso).map_err(|e| e.to_string())
    }
}

/// Which generator a simulation cell draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    Mixed(DgpVariant),
    Cointegrated,
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("coint") || s.eq_ignore_ascii_case("cointegrated") {
            return Ok(Design::Cointegrated);
        }
        s.parse::<DgpVariant>().map(Design::Mixed).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Design::Mixed(v) => write!(f, "{v}"),
            Design::Cointegrated => f.write_str("coint"),
        }
    }
}

fn parse_regression(s: &str) -> Result<CointRegression, String> {
    match s.to_ascii_lowercase().as_str() {
        "reg1" | "1" => Ok(CointRegression::XOnly),
        "reg2" | "2" => Ok(CointRegression::XZ),
        "reg3" | "3" => Ok(CointRegression::All),
        other => Err(format!("unknown regression '{other}' (expected reg1, reg2 or reg3)")),
    }
}

/// One `(n, p_x, p_z)` cell; for the cointegrated design `p_x` holds `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub n: usize,
    pub p_x: usize,
    pub p_z: usize,
}

/// Reference design whose median CV penalty anchors calibrated tuning.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationParams {
    pub n0: usize,
    pub p_x: usize,
    pub p_z: usize,
    pub reps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateParams {
    pub design: Design,
    /// Cartesian product of the `n`, `p_x`, `p_z` lists (or `n`, `p`).
    pub cells: Vec<Cell>,
    pub estimators: Vec<Estimator>,
    pub tunings: Vec<Tuning>,
    pub regressions: Vec<CointRegression>,
    pub grid: GridParams,
    pub calibration: Option<CalibrationParams>,
}

impl SimulateParams {
    fn read(s: &mut Settings) -> Result<Self, CliError> {
        let design: Design = s.get_or("dgp", Design::Mixed(DgpVariant::Dgp1))?;
        let ns = all_positive("n", s.list_or("n", vec![120])?)?;
        let cells: Vec<Cell> = match design {
            Design::Mixed(variant) => {
                let pxs = all_positive("p_x", s.list_or("p_x", vec![60])?)?;
                let default_pz = if variant.is_mixed() { vec![180] } else { vec![0] };
                let pzs = nonempty("p_z", s.list_or("p_z", default_pz)?)?;
                for &p_z in &pzs {
                    if variant.is_mixed() == (p_z == 0) {
                        return Err(CliError::Config(format!(
                            "{variant} requires {}, got p_z = {p_z}",
                            if variant.is_mixed() { "p_z > 0" } else { "p_z = 0" }
                        )));
                    }
                }
                let mut cells = Vec::new();
                for &n in &ns {
                    for &p_x in &pxs {
                        for &p_z in &pzs {
                            cells.push(Cell { n, p_x, p_z });
                        }
                    }
                }
                cells
            }
            Design::Cointegrated => {
                let ps = all_positive("p", s.list_or("p", vec![60])?)?;
                let mut cells = Vec::new();
                for &n in &ns {
                    for &p in &ps {
                        cells.push(Cell { n, p_x: p, p_z: 0 });
                    }
                }
                cells
            }
        };
        let estimators = nonempty(
            "estimators",
            s.list_or(
                "estimators",
                vec![
                    Estimator::Oracle,
                    Estimator::Lasso(EstimatorKind::Plasso),
                    Estimator::Lasso(EstimatorKind::Slasso),
                ],
            )?,
        )?;
        let tunings = nonempty("tuning", s.list_or("tuning", vec![Tuning::Cv])?)?;
        let regressions = match s.take("regressions") {
            None => CointRegression::ALL.to_vec(),
            Some(raw) => raw
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| parse_regression(t).map_err(CliError::Config))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let regressions = nonempty("regressions", regressions)?;
        let grid = GridParams::read(s, EpsRatio::Glmnet)?;

        let n0 = s.get("calib_n0")?;
        let cal_px = s.get("calib_p_x")?;
        let cal_pz = s.get("calib_p_z")?;
        let cal_reps = s.get("calib_reps")?;
        let calibration = if tunings.contains(&Tuning::Calibrated) {
            if design == Design::Cointegrated {
                return Err(CliError::Config("calibrated tuning is only defined for dgp1..dgp4".into()));
            }
            let first = cells[0];
            Some(CalibrationParams {
                n0: positive("calib_n0", n0.unwrap_or(120))?,
                p_x: positive("calib_p_x", cal_px.unwrap_or(first.p_x))?,
                p_z: cal_pz.unwrap_or(first.p_z),
                reps: positive("calib_reps", cal_reps.unwrap_or(20))?,
            })
        } else {
            None
        };
        Ok(Self {
            design,
            cells,
            estimators,
            tunings,
            regressions,
            grid,
            calibration,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenParams {
    pub s_values: Vec<usize>,
    pub n: usize,
    /// Dimension, sample size and replications of the `E[D]` summary.
    pub d_s: usize,
    pub d_n: usize,
    pub d_reps: usize,
}

impl EigenParams {
    fn read(s: &mut Settings, reps: usize) -> Result<Self, CliError> {
        let s_values = s.list_or("s", vec![4, 8, 16, 32, 64, 128])?;
        if s_values.is_empty() {
            return Err(CliError::Config("the s grid is empty".into()));
        }
        let s_values = all_positive("s", s_values)?;
        let n = positive("n", s.get_or("n", 2000)?)?;
        Ok(Self {
            s_values,
            n,
            d_s: positive("d_s", s.get_or("d_s", 8)?)?,
            d_n: positive("d_n", s.get_or("d_n", n)?)?,
            d_reps: positive("d_reps", s.get_or("d_reps", reps)?)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastParams {
    /// Dataset path; `None` selects the bundled planted-signal fixture.
    pub data: Option<PathBuf>,
    pub target: String,
    pub windows: Vec<usize>,
    pub horizons: Vec<usize>,
    pub methods: Vec<Method>,
    pub transforms: Vec<Transform>,
    pub augmented: bool,
    pub factors: usize,
    pub lags: usize,
    pub first_origin: Option<usize>,
    pub last_origin: Option<usize>,
    pub grid: GridParams,
}

impl ForecastParams {
    fn read(s: &mut Settings) -> Result<Self, CliError> {
        Ok(Self {
            data: s.take("data").map(PathBuf::from),
            target: s.take("target").unwrap_or_else(|| "TARGET".into()),
            windows: all_positive("windows", s.list_or("windows", vec![10])?)?,
            horizons: all_positive("horizons", s.list_or("horizons", vec![1])?)?,
            methods: nonempty("methods", s.list_or("methods", Method::ALL.to_vec())?)?,
            transforms: nonempty("transforms", s.list_or("transforms", vec![Transform::NT, Transform::ST])?)?,
            augmented: s.get_or("augmented", false)?,
            factors: positive("factors", s.get_or("factors", 4)?)?,
            lags: positive("lags", s.get_or("lags", 4)?)?,
            first_origin: s.get("first_origin")?,
            last_origin: s.get("last_origin")?,
            grid: {
                let g = GridParams::read(s, EpsRatio::Fixed(1e-4))?;
                if g.eps_ratio == EpsRatio::Glmnet {
                    return Err(CliError::Config("eps_ratio = glmnet is only available for simulate".into()));
                }
                g
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Simulate(SimulateParams),
    EigenStudy(EigenParams),
    Forecast(ForecastParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub replications: usize,
    pub output_dir: PathBuf,
    /// Worker-thread cap; `None` leaves the pool at its default size.
    pub jobs: Option<usize>,
    pub params: Params,
}

impl RunConfig {
    /// Validates `settings` for `command`. Unknown keys are rejected.
    pub fn from_settings(command: Command, mut settings: Settings) -> Result<Self, CliError> {
        let s = &mut settings;
        let seed = s.get_or("seed", 1u64)?;
        let default_reps = match command {
            Command::Simulate => 100,
            Command::EigenStudy => 200,
            Command::Forecast => 1,
        };
        let replications = positive("reps", s.get_or("reps", default_reps)?)?;
        let output_dir = PathBuf::from(s.take("out").unwrap_or_else(|| "out".into()));
        let jobs = s.get::<usize>("jobs")?.map(|j| positive("jobs", j)).transpose()?;
        let params = match command {
            Command::Simulate => Params::Simulate(SimulateParams::read(s)?),
            Command::EigenStudy => Params::EigenStudy(EigenParams::read(s, replications)?),
            Command::Forecast => Params::Forecast(ForecastParams::read(s)?),
        };
        settings.finish(command)?;
        Ok(Self {
            command,
            seed,
            replications,
            output_dir,
            jobs,
            params,
        })
    }

    /// File settings (if any) overridden by `flags`.
    pub fn load(command: Command, file: Option<&Path>, flags: Settings) -> Result<Self, CliError> {
        let mut settings = match file {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        settings.merge(flags);
        Self::from_settings(command, settings)
    }
}
