//! Eigenvalue diagnostics for scaled Gram matrices of i.i.d. and unit-root
//! panels, the Brownian functional `𝒟`, and the empirical deviation bound.

use std::io::Write;

use rayon::prelude::*;

use crate::dgp::{gen_var1, mixed_innovations};
use crate::error::{Error, Result};
use crate::numerics::{sym_eigen, Matrix, RngStream};
use crate::solver::demean;

/// Demeaned Gram `ẌᵀẌ` divided by `n`, or by `n²` for unit-root panels.
pub fn scaled_gram(x: &Matrix, unit_root: bool) -> Result<Matrix> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::InvalidConfig(format!("scaled Gram needs n >= 2, got {n}")));
    }
    let (xc, _) = demean(x);
    let mut g = xc.gram();
    let nf = n as f64;
    g.scale(if unit_root { 1.0 / (nf * nf) } else { 1.0 / nf });
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenStudyRow {
    pub s: usize,
    pub min_diag_iid: f64,
    pub min_eig_iid: f64,
    pub min_diag_unit: f64,
    pub min_eig_unit: f64,
}

fn min_diag_and_eig(g: &Matrix) -> Result<(f64, f64)> {
    let d = g.diag().into_iter().fold(f64::INFINITY, f64::min);
    let e = sym_eigen(g)?.values[0];
    Ok((d, e))
}

fn rep_stream(seed: u64, block: usize, rep: usize) -> RngStream {
    RngStream::for_replication(seed.wrapping_add((block as u64) << 32), rep as u64)
}

/// Sums per-replication vectors in index order so averages are bit-reproducible.
fn ordered_mean(parts: Vec<Vec<f64>>) -> Vec<f64> {
    let reps = parts.len() as f64;
    let mut acc = vec![0.0; parts.first().map_or(0, Vec::len)];
    for part in &parts {
        for (a, v) in acc.iter_mut().zip(part) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= reps);
    acc
}

/// Replication-averaged minimum diagonal and minimum eigenvalue for i.i.d.
/// `N(0, I_s)` panels and their partial sums. Replication `r` of the `k`-th `s`
/// draws one `n × s` panel that serves both designs.
pub fn eigen_study(s_values: &[usize], n: usize, reps: usize, seed: u64) -> Result<Vec<EigenStudyRow>> {
    if reps == 0 {
        return Err(Error::InvalidConfig("eigen study needs reps >= 1".into()));
    }
    if let Some(&s) = s_values.iter().find(|&&s| s == 0 || s >= n) {
        return Err(Error::InvalidConfig(format!("each s must satisfy 1 <= s < n = {n}, got {s}")));
    }
    s_values
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let parts = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut stream = rep_stream(seed, k, r);
                    let mut e = Matrix::zeros(n, s);
                    for j in 0..s {
                        stream.fill_normal(e.col_mut(j));
                    }
                    let (di, ei) = min_diag_and_eig(&scaled_gram(&e, false)?)?;
                    for j in 0..s {
                        let c = e.col_mut(j);
                        for t in 1..n {
                            c[t] += c[t - 1];
                        }
                    }
                    let (du, eu) = min_diag_and_eig(&scaled_gram(&e, true)?)?;
                    Ok(vec![di, ei, du, eu])
                })
                .collect::<Result<Vec<_>>>()?;
            let m = ordered_mean(parts);
            Ok(EigenStudyRow {
                s,
                min_diag_iid: m[0],
                min_eig_iid: m[1],
                min_diag_unit: m[2],
                min_eig_unit: m[3],
            })
        })
        .collect()
}

/// Monte-Carlo mean of `𝒟`, the `n²`-scaled demeaned Gram of `s` independent
/// Gaussian random walks; its expectation tends to `I_s / 6`.
pub fn expected_d(s: usize, n: usize, reps: usize, seed: u64) -> Result<Matrix> {
    if s == 0 || n < 2 || reps == 0 {
        return Err(Error::InvalidConfig(format!(
            "expected_D needs s >= 1, n >= 2, reps >= 1; got s = {s}, n = {n}, reps = {reps}"
        )));
    }
    let parts = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = RngStream::for_replication(seed, r as u64);
            let mut x = Matrix::zeros(n, s);
            for j in 0..s {
                let c = x.col_mut(j);
                stream.fill_normal(c);
                for t in 1..n {
                    c[t] += c[t - 1];
                }
            }
            Ok(scaled_gram(&x, true)?.as_slice().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = ordered_mean(parts);
    let mut d = Matrix::from_col_major(s, s, mean)?;
    // Each replication is symmetric up to summation order; enforce it exactly.
    for i in 0..s {
        for j in 0..i {
            let v = 0.5 * (d[(i, j)] + d[(j, i)]);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(d)
}

/// Replication-averaged `4‖n⁻¹ Σ_t Ẍ_{t−1} u_t‖_∞` for pure unit-root data with
/// the same innovation law as the unit-root designs.
pub fn deviation_bound_curve(p_values: &[usize], n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 || reps == 0 {
        return Err(Error::InvalidConfig(format!("need n >= 2 and reps >= 1, got n = {n}, reps = {reps}")));
    }
    p_values
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if p == 0 {
                return Err(Error::InvalidConfig("p must be >= 1".into()));
            }
            let spec = mixed_innovations(p, 0, false)?;
            let parts = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let v = gen_var1(&spec, n, &mut rep_stream(seed, k, r));
                    let u: Vec<f64> = (1..=n).map(|t| v[(t, p)]).collect();
                    let mut worst: f64 = 0.0;
                    let mut x = vec![0.0; n];
                    for j in 0..p {
                        let e = v.col(j);
                        // x[t] = X_t for t = 0..n−1, with X_0 = 0.
                        for t in 1..n {
                            x[t] = x[t - 1] + e[t];
                        }
                        let m = x.iter().sum::<f64>() / n as f64;
                        let cross: f64 = x.iter().zip(&u).map(|(a, b)| (a - m) * b).sum();
                        worst = worst.max((cross / n as f64).abs());
                    }
                    vec![4.0 * worst]
                })
                .collect::<Vec<_>>();
            Ok(ordered_mean(parts)[0])
        })
        .collect()
}

pub const SPARSE_EIGEN_MAX_K: usize = 8;
pub const SPARSE_EIGEN_MAX_P: usize = 20;

/// `min_{|M| ≤ k} λ_min(Σ_MM)` by enumeration. By Cauchy interlacing the
/// minimum is attained on supports of size exactly `min(k, p)`.
pub fn sparse_restricted_min_eigen(sigma: &Matrix, k: usize) -> Result<f64> {
    let p = sigma.cols();
    if sigma.rows() != p {
        return Err(Error::DimensionMismatch(format!("Σ is {}x{}", sigma.rows(), p)));
    }
    if k == 0 || p == 0 {
        return Err(Error::InvalidConfig("k and p must be >= 1".into()));
    }
    if k > SPARSE_EIGEN_MAX_K || p > SPARSE_EIGEN_MAX_P {
        return Err(Error::TooLarge(format!(
            "k = {k}, p = {p}; limits are k <= {SPARSE_EIGEN_MAX_K}, p <= {SPARSE_EIGEN_MAX_P}"
        )));
    }
    let k = k.min(p);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    loop {
        best = best.min(sym_eigen(&sigma.principal(&idx))?.values[0]);
        // Next k-combination in lexicographic order.
        let mut i = k;
        while i > 0 && idx[i - 1] == p - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return Ok(best);
        }
        idx[i - 1] += 1;
        for m in i..k {
            idx[m] = idx[m - 1] + 1;
        }
    }
}

pub fn write_eigen_study_csv<W: Write>(rows: &[EigenStudyRow], out: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["s", "min_diag_iid", "min_eig_iid", "min_diag_unit", "min_eig_unit"])?;
    for r in rows {
        wr.write_record([
            r.s.to_string(),
            format!("{:?}", r.min_diag_iid),
            format!("{:?}", r.min_eig_iid),
            format!("{:?}", r.min_diag_unit),
            format!("{:?}", r.min_eig_unit),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_gives_zero() {
        let x = Matrix::from_fn(10, 1, |_, _| 4.0);
        assert_eq!(scaled_gram(&x, false).unwrap()[(0, 0)], 0.0);
        let x = Matrix::from_fn(10, 1, |_, _| 4.2);
        assert!(scaled_gram(&x, false).unwrap()[(0, 0)] < 1e-28);
        assert!(scaled_gram(&Matrix::zeros(1, 2), true).is_err());
    }

    #[test]
    fn iid_column_has_unit_scaled_gram() {
        let mut s = RngStream::new(1);
        let x = Matrix::from_fn(10_000, 1, |_, _| s.normal());
        assert!((scaled_gram(&x, false).unwrap()[(0, 0)] - 1.0).abs() < 0.05);
    }

    #[test]
    fn scaled_gram_is_symmetric_psd() {
        let mut s = RngStream::new(2);
        let x = Matrix::from_fn(30, 6, |_, _| s.normal());
        let g = scaled_gram(&x, true).unwrap();
        assert_eq!(g, g.transpose());
        assert!(sym_eigen(&g).unwrap().values.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn scalar_unit_root_diag_equals_eig() {
        let rows = eigen_study(&[1], 200, 5, 3).unwrap();
        assert!((rows[0].min_diag_unit - rows[0].min_eig_unit).abs() < 1e-15);
        assert!((rows[0].min_diag_iid - rows[0].min_eig_iid).abs() < 1e-15);
    }

    #[test]
    fn study_rows_respect_interlacing() {
        let rows = eigen_study(&[2, 4, 8], 300, 10, 4).unwrap();
        for r in &rows {
            assert!(r.min_eig_iid <= r.min_diag_iid);
            assert!(r.min_eig_unit <= r.min_diag_unit);
        }
        assert!(eigen_study(&[300], 300, 1, 0).is_err());
    }

    #[test]
    fn expected_d_single_draw_is_reproducible() {
        let a = expected_d(3, 500, 1, 9).unwrap();
        let b = expected_d(3, 500, 1, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn deviation_bound_base_case() {
        let v = deviation_bound_curve(&[1, 4], 100, 20, 5).unwrap();
        assert!(v.iter().all(|x| x.is_finite() && *x > 0.0));
    }

    #[test]
    fn sparse_eigen_diagonal_and_full() {
        let d = Matrix::from_diag(&[3.0, 0.5, 2.0]);
        for k in 1..=3 {
            assert_eq!(sparse_restricted_min_eigen(&d, k).unwrap(), 0.5);
        }
        let mut s = RngStream::new(6);
        let b = Matrix::from_fn(8, 5, |_, _| s.normal());
        let g = b.gram();
        let full = sym_eigen(&g).unwrap().values[0];
        assert!((sparse_restricted_min_eigen(&g, 5).unwrap() - full).abs() < 1e-10);
    }

    #[test]
    fn sparse_eigen_matches_enumeration() {
        let mut s = RngStream::new(7);
        let b = Matrix::from_fn(9, 6, |_, _| s.normal());
        let g = b.gram();
        let mut best = f64::INFINITY;
        let mut count = 0;
        for i in 0..6 {
            // Singletons are dominated by pairs but count toward |M| <= 2.
            best = best.min(g[(i, i)]);
            for j in i + 1..6 {
                count += 1;
                best = best.min(sym_eigen(&g.principal(&[i, j])).unwrap().values[0]);
            }
        }
        assert_eq!(count + 6, 21);
        assert!((sparse_restricted_min_eigen(&g, 2).unwrap() - best).abs() < 1e-12);
    }

    #[test]
    fn sparse_eigen_limits() {
        let g = Matrix::identity(21);
        assert!(matches!(sparse_restricted_min_eigen(&g, 2), Err(Error::TooLarge(_))));
        assert!(matches!(sparse_restricted_min_eigen(&Matrix::identity(5), 9), Err(Error::TooLarge(_))));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![EigenStudyRow {
            s: 4,
            min_diag_iid: 1.0,
            min_eig_iid: 0.5,
            min_diag_unit: 0.2,
            min_eig_unit: 0.01,
        }];
        let mut out = Vec::new();
        write_eigen_study_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "4,1.0,0.5,0.2,0.01");
    }
}
