//! Dense linear algebra and deterministic normal variates.
//!
//! Everything here is small-scale and self-contained: a column-major [`Matrix`],
//! a Cholesky factorization with a single diagonal-jitter retry, a cyclic Jacobi
//! eigensolver for symmetric matrices, and a counter-based random stream.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative tolerance below which a column standard deviation counts as zero.
pub const DEGENERATE_RTOL: f64 = 1e-12;

/// Dense real matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Wraps a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| {
            assert_eq!(rows[i].len(), c, "ragged row {i}");
            rows[i][j]
        })
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                axpy(b, self.col(k), dst);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for (j, &b) in v.iter().enumerate() {
            if b != 0.0 {
                axpy(b, self.col(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `selfᵀ v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows, vector has length {}",
                self.rows,
                v.len()
            )));
        }
        Ok((0..self.cols).map(|j| dot(self.col(j), v)).collect())
    }

    /// `selfᵀ self`.
    pub fn gram(&self) -> Matrix {
        let p = self.cols;
        let mut g = Matrix::zeros(p, p);
        for j in 0..p {
            for k in 0..=j {
                let v = dot(self.col(j), self.col(k));
                g[(j, k)] = v;
                g[(k, j)] = v;
            }
        }
        g
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)])
    }

    /// Contiguous row range `start..end`.
    pub fn row_range(&self, start: usize, end: usize) -> Matrix {
        let mut data = Vec::with_capacity((end - start) * self.cols);
        for j in 0..self.cols {
            data.extend_from_slice(&self.col(j)[start..end]);
        }
        Matrix {
            rows: end - start,
            cols: self.cols,
            data,
        }
    }

    /// Principal submatrix on `idx × idx`.
    pub fn principal(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Horizontal concatenation.
    pub fn hcat(blocks: &[&Matrix]) -> Result<Matrix> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let mut data = Vec::new();
        let mut cols = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(Error::DimensionMismatch(format!(
                    "hcat of blocks with {} and {} rows",
                    rows, b.rows
                )));
            }
            data.extend_from_slice(&b.data);
            cols += b.cols;
        }
        Ok(Matrix { rows, cols, data })
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.cols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators let the compiler vectorize without reassociation flags.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based stream of standard normal variates.
///
/// Uniform number `k` is `splitmix64(key + (k + 1)·γ)` with `key = splitmix64(seed)`,
/// mapped to the open interval (0, 1) from its top 53 bits. Normal number `2m` and
/// `2m + 1` are the cosine and sine branches of the Box–Muller transform applied to
/// uniforms `2m` and `2m + 1`. The algorithm is frozen: fixtures depend on it.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    key: u64,
    position: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            key: mix64(seed),
            position: 0,
        }
    }

    /// Stream for replication `index` of an experiment seeded with `seed`:
    /// `splitmix64(seed) ⊕ index`, so earlier replications keep their draws when
    /// the count grows. Scrambling the base first keeps nearby seeds from
    /// sharing replication streams (`1 ⊕ r` and `2 ⊕ r` cover the same set).
    pub fn for_replication(seed: u64, index: u64) -> Self {
        Self::new(mix64(seed) ^ index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of normal variates drawn so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    #[inline]
    fn uniform_at(&self, k: u64) -> f64 {
        let bits = mix64(self.key.wrapping_add(k.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
        ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn normal_pair(&self, m: u64) -> (f64, f64) {
        let u1 = self.uniform_at(2 * m);
        let u2 = self.uniform_at(2 * m + 1);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    pub fn normal(&mut self) -> f64 {
        let (c, s) = self.normal_pair(self.position / 2);
        let z = if self.position.is_multiple_of(2) { c } else { s };
        self.position += 1;
        z
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        let mut k = 0;
        if self.position % 2 == 1 && !out.is_empty() {
            out[0] = self.normal();
            k = 1;
        }
        while k + 1 < out.len() {
            let (c, s) = self.normal_pair(self.position / 2);
            out[k] = c;
            out[k + 1] = s;
            self.position += 2;
            k += 2;
        }
        if k < out.len() {
            out[k] = self.normal();
        }
    }

    /// Uniform on (0, 1); consumes one normal slot so positions stay aligned.
    /// Drawn from a separate counter domain, so it is independent of the normals.
    pub fn uniform(&mut self) -> f64 {
        let k = self.position;
        let bits = mix64(self.key.rotate_left(32) ^ k.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
        let u = ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        self.position += 1;
        u
    }
}

/// Draws `count` i.i.d. standard normals from `stream`.
pub fn rng_normal(stream: &mut RngStream, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    stream.fill_normal(&mut out);
    out
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    lower: Matrix,
    jittered: bool,
}

impl Cholesky {
    /// Factorizes a symmetric matrix. A non-positive pivot triggers one retry with
    /// `1e-10·trace(A)/n` added to the diagonal.
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "cholesky of non-square {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        match factor_lower(a, 0.0) {
            Ok(lower) => Ok(Self {
                lower,
                jittered: false,
            }),
            Err(_) => {
                let n = a.rows().max(1) as f64;
                let jitter = 1e-10 * a.trace() / n;
                let lower = factor_lower(a, jitter)?;
                Ok(Self {
                    lower,
                    jittered: true,
                })
            }
        }
    }

    /// Factorizes without the jitter retry.
    pub fn factor_strict(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "cholesky of non-square {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        Ok(Self {
            lower: factor_lower(a, 0.0)?,
            jittered: false,
        })
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// Solves `A x = b` in place.
    pub fn solve_vec_in_place(&self, b: &mut [f64]) {
        let l = &self.lower;
        let n = l.rows();
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let col = l.col(i);
            let s = b[i] - dot(&col[i + 1..], &b[i + 1..]);
            b[i] = s / l[(i, i)];
        }
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows() != self.lower.rows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {}",
                b.rows(),
                self.lower.rows()
            )));
        }
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_vec_in_place(x.col_mut(j));
        }
        Ok(x)
    }

    /// `L z`, used to colour i.i.d. draws.
    pub fn lower_mul(&self, z: &[f64], out: &mut [f64]) {
        let l = &self.lower;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0.0 {
                axpy(zj, &l.col(j)[j..], &mut out[j..]);
            }
        }
    }
}

fn factor_lower(a: &Matrix, jitter: f64) -> Result<Matrix> {
    let n = a.rows();
    let max_diag = a.diag().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    // Pivots at rounding level of the largest diagonal entry count as non-positive.
    let floor = f64::EPSILON * n as f64 * max_diag;
    // Built as U = Lᵀ so that rows of L are contiguous columns of U.
    let mut u = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let s = a[(i, j)] - dot(&u.col(i)[..i], &u.col(j)[..i]);
            u[(i, j)] = s / u[(i, i)];
        }
        let uj = &u.col(j)[..j];
        let d = a[(j, j)] + jitter - dot(uj, uj);
        if !(d > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        u[(j, j)] = d.sqrt();
    }
    Ok(u.transpose())
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn cholesky_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    Cholesky::factor(a)?.solve(b)
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal Frobenius norm is at
/// most `1e-12·‖A‖_F`.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eigen of non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.max_abs();
    let asym = a.max_asymmetry();
    if asym > 1e-10 * scale {
        return Err(Error::NonSymmetric(asym));
    }
    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);
    let target = 1e-12 * m.frobenius();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_columns(&mut m, p, q, c, s);
                rotate_rows(&mut m, p, q, c, s);
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                rotate_columns(&mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok(SymEigen { values, vectors })
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    let (lo, hi) = m.data.split_at_mut(q * rows);
    let cp = &mut lo[p * rows..(p + 1) * rows];
    let cq = &mut hi[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..m.cols() {
        let a = m[(p, k)];
        let b = m[(q, k)];
        m[(p, k)] = c * a - s * b;
        m[(q, k)] = s * a + c * b;
    }
}

// ---------------------------------------------------------------------------
// Column statistics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    /// Population (divisor-n) standard deviations.
    pub sds: Vec<f64>,
    /// Columns whose standard deviation is zero up to rounding.
    pub degenerate: Vec<usize>,
}

impl ColumnStats {
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.degenerate.binary_search(&j).is_ok()
    }
}

pub fn column_stats(m: &Matrix) -> Result<ColumnStats> {
    if m.rows() < 2 {
        return Err(Error::InvalidConfig(format!(
            "column statistics need at least 2 rows, got {}",
            m.rows()
        )));
    }
    let n = m.rows() as f64;
    let mut means = Vec::with_capacity(m.cols());
    let mut sds = Vec::with_capacity(m.cols());
    let mut degenerate = Vec::new();
    for j in 0..m.cols() {
        let c = m.col(j);
        let mu = c.iter().sum::<f64>() / n;
        let var = c.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
        let sd = var.sqrt();
        let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if sd <= DEGENERATE_RTOL * scale || sd == 0.0 {
            degenerate.push(j);
        }
        means.push(mu);
        sds.push(sd);
    }
    Ok(ColumnStats {
        means,
        sds,
        degenerate,
    })
}
