use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nslasso_cli::{run, CliError, Command, RunConfig, Settings};

/// LASSO for predictive regressions with persistent regressors.
#[derive(Parser, Debug)]
#[command(name = "nslasso", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Monte-Carlo comparison of oracle, Plasso and Slasso.
    Simulate(SimulateArgs),
    /// Minimum eigenvalues of scaled Gram matrices and the E[D] summary.
    EigenStudy(EigenArgs),
    /// Rolling-window forecast comparison.
    Forecast(ForecastArgs),
}

#[derive(Args, Debug)]
struct Shared {
    /// Plain-text `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-thread cap.
    #[arg(long)]
    jobs: Option<usize>,
    /// Extra `key=value` setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    shared: Shared,
    /// dgp1..dgp4 or coint.
    #[arg(long)]
    dgp: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p_x: Option<String>,
    #[arg(long)]
    p_z: Option<String>,
    /// Regressor count of the cointegrated design.
    #[arg(long)]
    p: Option<String>,
    /// cv, calibrated, or both comma-separated.
    #[arg(long)]
    tuning: Option<String>,
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    regressions: Option<String>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
}

#[derive(Args, Debug)]
struct EigenArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated dimensions.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct ForecastArgs {
    #[command(flatten)]
    shared: Shared,
    /// Dataset CSV; the bundled planted-signal panel when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated window lengths in years.
    #[arg(long)]
    window: Option<String>,
    /// Comma-separated forecast horizons in months.
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    /// NT, ST or both comma-separated.
    #[arg(long)]
    transform: Option<String>,
    #[arg(long)]
    augmented: bool,
}

fn put<T: ToString>(s: &mut Settings, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        s.set(key, &v.to_string());
    }
}

fn shared_settings(a: &Shared) -> Result<Settings, CliError> {
    let mut s = Settings::default();
    put(&mut s, "seed", &a.seed);
    put(&mut s, "reps", &a.reps);
    put(&mut s, "out", &a.out.as_ref().map(|p| p.display().to_string()));
    put(&mut s, "jobs", &a.jobs);
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        s.set(k, v);
    }
    Ok(s)
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let (command, shared, flags) = match &cli.command {
        Sub::Simulate(a) => {
            let mut s = shared_settings(&a.shared)?;
            put(&mut s, "dgp", &a.dgp);
            put(&mut s, "n", &a.n);
            put(&mut s, "p_x", &a.p_x);
            put(&mut s, "p_z", &a.p_z);
            put(&mut s, "p", &a.p);
            put(&mut s, "tuning", &a.tuning);
            put(&mut s, "estimators", &a.estimators);
            put(&mut s, "regressions", &a.regressions);
            put(&mut s, "grid_size", &a.grid_size);
            put(&mut s, "folds", &a.folds);
            (Command::Simulate, &a.shared, s)
        }
        Sub::EigenStudy(a) => {
            let mut s = shared_settings(&a.shared)?;
            put(&mut s, "s", &a.s);
            put(&mut s, "n", &a.n);
            (Command::EigenStudy, &a.shared, s)
        }
        Sub::Forecast(a) => {
            let mut s = shared_settings(&a.shared)?;
            put(&mut s, "data", &a.data.as_ref().map(|p| p.display().to_string()));
            put(&mut s, "target", &a.target);
            put(&mut s, "windows", &a.window);
            put(&mut s, "horizons", &a.horizon);
            put(&mut s, "methods", &a.methods);
            put(&mut s, "transforms", &a.transform);
            if a.augmented {
                s.set("augmented", "true");
            }
            (Command::Forecast, &a.shared, s)
        }
    };
    RunConfig::load(command, shared.config.as_deref(), flags)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
