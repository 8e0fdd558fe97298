//! Planted-signal panels in the FRED-MD layout for tests and demos.

use super::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

/// Transformation codes cycled over the filler predictors.
const FILLER_CODES: [u8; 7] = [2, 5, 1, 6, 4, 7, 3];

/// Monthly panel whose target obeys `y_t = 0.5·A_{t−1} + 0.1·ε_t` for a random
/// walk `A`. Columns: `TARGET` (code 2), `A` (code 2), then `extra` fillers
/// `X1, X2, …` unrelated to the target. Filler codes cycle through 2, 5, 1, 6,
/// 4, 7, 3; series with log-type codes are strictly positive.
pub fn planted_dataset(months: usize, extra: usize, seed: u64) -> Result<Dataset> {
    if months < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 months, got {months}")));
    }
    let mut s = RngStream::new(seed);
    let mut a = vec![0.0; months];
    for t in 1..months {
        a[t] = a[t - 1] + s.normal();
    }
    let mut y = vec![0.0; months];
    for t in 0..months {
        let signal = if t == 0 { 0.0 } else { 0.5 * a[t - 1] };
        y[t] = signal + 0.1 * s.normal();
    }
    let mut names = vec!["TARGET".to_string(), "A".to_string()];
    let mut codes = vec![2u8, 2];
    let mut cols = vec![y, a];
    for k in 0..extra {
        let code = FILLER_CODES[k % FILLER_CODES.len()];
        let mut x = vec![0.0; months];
        match code {
            1 => {
                for t in 1..months {
                    x[t] = 0.5 * x[t - 1] + s.normal();
                }
            }
            2 | 3 => {
                for t in 1..months {
                    x[t] = x[t - 1] + s.normal();
                }
            }
            _ => {
                let mut level = 0.0;
                for v in x.iter_mut() {
                    level += 0.01 * s.normal();
                    *v = 100.0 * (level + 0.002).exp();
                }
            }
        }
        names.push(format!("X{}", k + 1));
        codes.push(code);
        cols.push(x);
    }
    let dates = (0..months).map(|m| format!("{}-{:02}", 1990 + m / 12, m % 12 + 1)).collect();
    Dataset::new(dates, names, codes, Matrix::from_columns(&cols)?)
}
