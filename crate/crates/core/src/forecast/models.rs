//! Univariate benchmarks and principal-component factors.

use crate::error::{Error, Result};
use crate::numerics::{column_stats, dot, sym_eigen, Cholesky, Matrix};
use crate::solver::demean;

/// Random walk with drift: `y_n + (h/n)(y_n − y_0)` where `n = len − 1`.
pub fn rwwd(y: &[f64], h: usize) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::InsufficientHistory(format!(
            "random walk with drift needs 2 observations, got {}",
            y.len()
        )));
    }
    let n = (y.len() - 1) as f64;
    let (first, last) = (y[0], y[y.len() - 1]);
    Ok(last + h as f64 / n * (last - first))
}

pub const AR_Q_MAX: usize = 12;
const SSR_FLOOR: f64 = 1e-300;

/// Least squares with intercept that refuses numerically singular designs.
fn strict_ols(y: &[f64], w: &Matrix) -> Result<(f64, Vec<f64>, f64)> {
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let (xc, means) = demean(w);
    let mut beta = xc.t_mul_vec(&yc)?;
    Cholesky::factor_strict(&xc.gram())?.solve_vec_in_place(&mut beta);
    let fitted = xc.mul_vec(&beta)?;
    let ssr = yc.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((y_mean - dot(&means, &beta), beta, ssr))
}

/// Direct `h`-step autoregression with lag order chosen by BIC over `1..=q_max`.
///
/// Every order is fitted on the common sample `t = q_max−1, …, N−1−h`
/// (0-based), regressing `y_{t+h}` on `(1, y_t, …, y_{t−q+1})`. Orders whose
/// lag matrix is numerically singular are skipped. Returns the prediction of
/// `y_{N−1+h}` and the chosen order.
pub fn ar_bic(y: &[f64], h: usize, q_max: usize) -> Result<(f64, usize)> {
    let big_n = y.len();
    if q_max == 0 || h == 0 {
        return Err(Error::InvalidConfig(format!("need q_max >= 1 and h >= 1, got {q_max} and {h}")));
    }
    if big_n < q_max + h + 5 {
        return Err(Error::InsufficientHistory(format!(
            "AR-BIC with q_max = {q_max}, h = {h} needs {} observations, got {big_n}",
            q_max + h + 5
        )));
    }
    let ts: Vec<usize> = (q_max - 1..big_n - h).collect();
    let m = ts.len();
    let target: Vec<f64> = ts.iter().map(|&t| y[t + h]).collect();
    let mf = m as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut last_err = None;
    for q in 1..=q_max {
        let w = Matrix::from_fn(m, q, |i, lag| y[ts[i] - lag]);
        match strict_ols(&target, &w) {
            Ok((alpha, beta, ssr)) => {
                let bic = mf * (ssr.max(SSR_FLOOR) / mf).ln() + (q + 1) as f64 * mf.ln();
                if best.is_none_or(|(b, _, _)| bic < b) {
                    let latest: Vec<f64> = (0..q).map(|lag| y[big_n - 1 - lag]).collect();
                    best = Some((bic, q, alpha + dot(&beta, &latest)));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, q, pred)) => Ok((pred, q)),
        None => Err(last_err.expect("at least one order attempted")),
    }
}

#[derive(Clone, Debug)]
pub struct Factors {
    /// `n × k` principal-component scores.
    pub scores: Matrix,
    /// `p × k` unit-norm loadings; each column's largest-magnitude entry is positive.
    pub loadings: Matrix,
    /// Leading eigenvalues of the correlation matrix, descending.
    pub eigenvalues: Vec<f64>,
}

/// Principal components of the column-standardized panel (divisor-n sd).
/// Zero-variance columns are standardized to zero.
pub fn principal_components(m: &Matrix, k: usize) -> Result<Factors> {
    let (n, p) = (m.rows(), m.cols());
    if k == 0 || k > n.min(p) {
        return Err(Error::InvalidConfig(format!("need 1 <= k <= min(n, p) = {}, got {k}", n.min(p))));
    }
    let stats = column_stats(m)?;
    let z = Matrix::from_fn(n, p, |i, j| {
        if stats.is_degenerate(j) {
            0.0
        } else {
            (m[(i, j)] - stats.means[j]) / stats.sds[j]
        }
    });
    let mut corr = z.gram();
    corr.scale(1.0 / n as f64);
    let eig = sym_eigen(&corr)?;
    let mut loadings = Matrix::zeros(p, k);
    let mut eigenvalues = Vec::with_capacity(k);
    for c in 0..k {
        let src = p - 1 - c;
        let v = eig.vectors.col(src);
        let mut lead = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[lead].abs() {
                lead = i;
            }
        }
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        for (dst, x) in loadings.col_mut(c).iter_mut().zip(v) {
            *dst = sign * x;
        }
        eigenvalues.push(eig.values[src]);
    }
    let scores = z.matmul(&loadings)?;
    Ok(Factors {
        scores,
        loadings,
        eigenvalues,
    })
}

/// First `k` principal-component scores of the standardized panel.
pub fn extract_factors(m: &Matrix, k: usize) -> Result<Matrix> {
    Ok(principal_components(m, k)?.scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn rwwd_examples() {
        assert_eq!(rwwd(&[3.0, 3.0, 3.0], 4).unwrap(), 3.0);
        let y: Vec<f64> = (0..=10).map(|v| v as f64).collect();
        assert_eq!(rwwd(&y, 2).unwrap(), 12.0);
        assert_eq!(rwwd(&y, 0).unwrap(), 10.0);
        assert!(rwwd(&[1.0], 1).is_err());
    }

    #[test]
    fn exact_ar1_is_recovered() {
        let y: Vec<f64> = (0..60).map(|t| 5.0 * 0.9f64.powi(t)).collect();
        let (pred, _) = ar_bic(&y, 1, AR_Q_MAX).unwrap();
        let expect = 0.9 * y[59];
        assert!((pred - expect).abs() < 1e-8, "{pred} vs {expect}");
    }

    #[test]
    fn white_noise_prefers_one_lag() {
        let mut hits = 0;
        for seed in 0..50 {
            let mut s = RngStream::new(seed);
            let y: Vec<f64> = (0..150).map(|_| s.normal()).collect();
            if ar_bic(&y, 1, AR_Q_MAX).unwrap().1 == 1 {
                hits += 1;
            }
        }
        assert!(hits >= 30, "q = 1 chosen {hits}/50 times");
    }

    #[test]
    fn longer_horizon_extends_trend() {
        let mut s = RngStream::new(3);
        let y: Vec<f64> = (0..120).map(|t| 0.5 * t as f64 + 0.1 * s.normal()).collect();
        let last = y[119];
        let (p1, _) = ar_bic(&y, 1, AR_Q_MAX).unwrap();
        let (p2, _) = ar_bic(&y, 2, AR_Q_MAX).unwrap();
        assert!(p2 - last > p1 - last);
        assert!(p1 > last);
    }

    #[test]
    fn ar_bic_needs_history() {
        assert!(matches!(ar_bic(&[1.0; 10], 1, 12), Err(Error::InsufficientHistory(_))));
    }

    #[test]
    fn planted_factor_is_found() {
        let mut s = RngStream::new(4);
        let (n, p) = (200, 8);
        let f: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let m = Matrix::from_fn(n, p, |i, j| (1.0 + j as f64) * f[i] + 0.01 * s.normal());
        let scores = extract_factors(&m, 1).unwrap();
        let sc = scores.col(0);
        let (ms, mf) = (sc.iter().sum::<f64>() / n as f64, f.iter().sum::<f64>() / n as f64);
        let cov: f64 = sc.iter().zip(&f).map(|(a, b)| (a - ms) * (b - mf)).sum();
        let va: f64 = sc.iter().map(|a| (a - ms) * (a - ms)).sum();
        let vb: f64 = f.iter().map(|b| (b - mf) * (b - mf)).sum();
        assert!((cov / (va * vb).sqrt()).abs() > 0.99);
    }

    #[test]
    fn full_rank_scores_are_orthogonal() {
        let mut s = RngStream::new(5);
        let m = Matrix::from_fn(40, 5, |_, _| s.normal());
        let pcs = principal_components(&m, 5).unwrap();
        let g = pcs.scores.gram();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(g[(i, j)].abs() < 1e-8 * g[(i, i)].max(1.0));
                }
            }
        }
        assert!(pcs.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for c in 0..5 {
            let v = pcs.loadings.col(c);
            let lead = v.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn duplicate_columns_share_loadings() {
        let mut s = RngStream::new(6);
        let base = Matrix::from_fn(50, 3, |_, _| s.normal());
        let m = Matrix::from_fn(50, 4, |i, j| base[(i, j.min(2))]);
        let pcs = principal_components(&m, 2).unwrap();
        for c in 0..2 {
            assert!((pcs.loadings[(2, c)] - pcs.loadings[(3, c)]).abs() < 1e-10);
        }
        assert!(extract_factors(&m, 5).is_err());
    }
}
