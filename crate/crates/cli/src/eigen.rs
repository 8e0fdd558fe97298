//! Scaled Gram eigenvalue study and the `E[D]` summary.

use std::io::Write;

use nslasso::diagnostics::{eigen_study, expected_d, EigenStudyRow};
use nslasso::Matrix;

use crate::config::EigenParams;
use crate::CliError;

/// Limit of each diagonal entry of `E[D]`.
pub const D_DIAGONAL: f64 = 1.0 / 6.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DSummary {
    pub s: usize,
    pub n: usize,
    pub reps: usize,
    pub matrix: Matrix,
    pub mean_diag: f64,
    /// `max_i |D_ii − 1/6|`.
    pub max_diag_dev: f64,
    /// `max_{i≠j} |D_ij|`; zero when `s = 1`.
    pub max_offdiag: f64,
}

impl DSummary {
    pub fn from_matrix(matrix: Matrix, n: usize, reps: usize) -> Self {
        let s = matrix.rows();
        let diag = matrix.diag();
        let mean_diag = diag.iter().sum::<f64>() / s as f64;
        let max_diag_dev = diag.iter().map(|d| (d - D_DIAGONAL).abs()).fold(0.0, f64::max);
        let mut max_offdiag = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    max_offdiag = max_offdiag.max(matrix[(i, j)].abs());
                }
            }
        }
        Self {
            s,
            n,
            reps,
            matrix,
            mean_diag,
            max_diag_dev,
            max_offdiag,
        }
    }
}

pub fn run_eigen(params: &EigenParams, reps: usize, seed: u64) -> Result<(Vec<EigenStudyRow>, DSummary), CliError> {
    if params.s_values.is_empty() {
        return Err(CliError::Config("the s grid is empty".into()));
    }
    let rows = eigen_study(&params.s_values, params.n, reps, seed)?;
    let d = expected_d(params.d_s, params.d_n, params.d_reps, seed)?;
    Ok((rows, DSummary::from_matrix(d, params.d_n, params.d_reps)))
}

/// Summary row followed by one `(i, j, value)` row per entry.
pub fn write_d_csv<W: Write>(d: &DSummary, out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["s", "n", "reps", "mean_diag", "max_diag_dev", "max_offdiag"])?;
    wr.write_record([
        d.s.to_string(),
        d.n.to_string(),
        d.reps.to_string(),
        format!("{:?}", d.mean_diag),
        format!("{:?}", d.max_diag_dev),
        format!("{:?}", d.max_offdiag),
    ])?;
    wr.flush()?;
    Ok(())
}

pub fn write_d_matrix_csv<W: Write>(d: &DSummary, out: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["i", "j", "value"])?;
    for i in 0..d.s {
        for j in 0..d.s {
            wr.write_record([i.to_string(), j.to_string(), format!("{:?}", d.matrix[(i, j)])])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_exact_limit() {
        let mut m = Matrix::identity(3);
        m.scale(D_DIAGONAL);
        m[(0, 2)] = -0.01;
        let d = DSummary::from_matrix(m, 10, 1);
        assert!((d.mean_diag - D_DIAGONAL).abs() < 1e-15);
        assert_eq!(d.max_diag_dev, 0.0);
        assert_eq!(d.max_offdiag, 0.01);
    }

    #[test]
    fn small_study_runs() {
        let p = EigenParams {
            s_values: vec![2, 4],
            n: 50,
            d_s: 2,
            d_n: 50,
            d_reps: 4,
        };
        let (rows, d) = run_eigen(&p, 3, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(d.matrix.rows(), 2);
    }
}
