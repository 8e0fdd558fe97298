//! Seeded simulation designs: mixed unit-root/stationary regressors, pure unit
//! roots, and a triangular cointegration system.
//!
//! All innovations come from a stationary VAR(1) `v_t = a·v_{t−1} + ε_t` with
//! `ε_t ~ N(0, (1 − a²)Ω)`, so every coordinate has unconditional covariance `Ω`.
//! Regressor rows are stored lagged: row `i` of `W` holds the period-`i`
//! regressors that predict `y_{i+1}`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{Cholesky, Matrix, RngStream};

pub const AR_COEF: f64 = 0.4;
pub const OMEGA_DECAY: f64 = 0.8;

#[derive(Clone, Debug)]
pub struct InnovationSpec {
    ar_coef: f64,
    variance_scale: f64,
    omega: Matrix,
    burn_in: usize,
    factor: Cholesky,
}

impl InnovationSpec {
    /// VAR(1) innovations with stationary covariance `omega`.
    pub fn new(omega: Matrix, ar_coef: f64) -> Result<Self> {
        if !(ar_coef.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|ar_coef| must be < 1, got {ar_coef}")));
        }
        let factor = Cholesky::factor(&omega)?;
        Ok(Self {
            ar_coef,
            variance_scale: 1.0 - ar_coef * ar_coef,
            omega,
            burn_in: 0,
            factor,
        })
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn dim(&self) -> usize {
        self.omega.rows()
    }

    pub fn ar_coef(&self) -> f64 {
        self.ar_coef
    }

    pub fn variance_scale(&self) -> f64 {
        self.variance_scale
    }

    pub fn omega(&self) -> &Matrix {
        &self.omega
    }
}

/// `Ω_{jk} = 0.8^{|j−k|}`, with entries where `zero(j, k)` holds set to 0.
pub fn toeplitz_omega(dim: usize, zero: impl Fn(usize, usize) -> bool) -> Matrix {
    Matrix::from_fn(dim, dim, |j, k| {
        if j != k && zero(j, k) {
            0.0
        } else {
            OMEGA_DECAY.powi((j as i32 - k as i32).abs())
        }
    })
}

/// Returns `n + 1` rows `v_0, …, v_n`; `v_0` is drawn from the stationary law.
pub fn gen_var1(spec: &InnovationSpec, n: usize, stream: &mut RngStream) -> Matrix {
    let d = spec.dim();
    let total = n + 1 + spec.burn_in;
    let shock_sd = spec.variance_scale.sqrt();
    let mut out = Matrix::zeros(n + 1, d);
    let mut z = vec![0.0; d];
    let mut shock = vec![0.0; d];
    let mut prev = vec![0.0; d];
    for t in 0..total {
        stream.fill_normal(&mut z);
        spec.factor.lower_mul(&z, &mut shock);
        if t == 0 {
            prev.copy_from_slice(&shock);
        } else {
            for k in 0..d {
                prev[k] = spec.ar_coef * prev[k] + shock_sd * shock[k];
            }
        }
        if t >= spec.burn_in {
            let row = t - spec.burn_in;
            for k in 0..d {
                out[(row, k)] = prev[k];
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DgpVariant {
    /// Mixed roots, unit-root coefficients all `n^{-1/2}`.
    Dgp1,
    /// Mixed roots, first unit-root coefficient fixed at 1.
    Dgp2,
    /// Pure unit roots, coefficients as in `Dgp1`.
    Dgp3,
    /// Pure unit roots, coefficients as in `Dgp2`.
    Dgp4,
}

impl DgpVariant {
    pub fn is_mixed(self) -> bool {
        matches!(self, DgpVariant::Dgp1 | DgpVariant::Dgp2)
    }

    fn leading_unit_coef(self) -> bool {
        matches!(self, DgpVariant::Dgp2 | DgpVariant::Dgp4)
    }
}

impl fmt::Display for DgpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DgpVariant::Dgp1 => "dgp1",
            DgpVariant::Dgp2 => "dgp2",
            DgpVariant::Dgp3 => "dgp3",
            DgpVariant::Dgp4 => "dgp4",
        };
        f.write_str(s)
    }
}

impl FromStr for DgpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dgp1" | "1" => Ok(DgpVariant::Dgp1),
            "dgp2" | "2" => Ok(DgpVariant::Dgp2),
            "dgp3" | "3" => Ok(DgpVariant::Dgp3),
            "dgp4" | "4" => Ok(DgpVariant::Dgp4),
            other => Err(Error::InvalidConfig(format!("unknown DGP variant '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    UnitRoot,
    Stationary,
    Cointegrated,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::UnitRoot => "unit_root",
            ColumnKind::Stationary => "stationary",
            ColumnKind::Cointegrated => "cointegrated",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DgpSample {
    /// `y_1, …, y_n`.
    pub y: Vec<f64>,
    /// Row `i` holds the regressors dated `i` (so `W_{t−1}` for `y_t`).
    pub w: Matrix,
    pub theta_true: Vec<f64>,
    pub column_kinds: Vec<ColumnKind>,
    pub labels: Vec<String>,
    /// Regressors dated `n`, used to predict `y_{n+1}`.
    pub next_regressors: Vec<f64>,
    pub y_next: f64,
    /// Innovation rows `v_0, …, v_{n+1}`.
    pub innovations: Matrix,
}

impl DgpSample {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.w.cols()
    }

    pub fn true_support(&self) -> Vec<usize> {
        (0..self.p()).filter(|&j| self.theta_true[j] != 0.0).collect()
    }

    /// Data CSV: header `y,<labels>`, then one row per observation.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let mut header = vec!["y".to_string()];
        header.extend(self.labels.iter().cloned());
        wr.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![fmt_f64(self.y[i])];
            rec.extend((0..self.p()).map(|j| fmt_f64(self.w[(i, j)])));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Ground-truth sidecar: one row per regressor plus the out-of-sample target.
    pub fn write_truth_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["label", "kind", "theta_true", "next_regressor"])?;
        for j in 0..self.p() {
            wr.write_record([
                self.labels[j].clone(),
                self.column_kinds[j].as_str().to_string(),
                fmt_f64(self.theta_true[j]),
                fmt_f64(self.next_regressors[j]),
            ])?;
        }
        wr.write_record(["y_next", "", "", &fmt_f64(self.y_next)])?;
        wr.flush()?;
        Ok(())
    }
}

fn fmt_f64(x: f64) -> String {
    // Shortest representation that round-trips.
    format!("{x:?}")
}

/// `2⌈ln n⌉`.
pub fn sparsity_index(n: usize) -> usize {
    2 * (n as f64).ln().ceil() as usize
}

fn unit_root_coefs(n: usize, p_x: usize, s_x: usize, leading_one: bool) -> Vec<f64> {
    let small = 1.0 / (n as f64).sqrt();
    (0..p_x)
        .map(|j| match j {
            0 if leading_one => 1.0,
            j if j < s_x => small,
            _ => 0.0,
        })
        .collect()
}

/// Builds `X_t = X_{t−1} + e_t` with `X_0 = 0`; returns rows `X_0..=X_n` from
/// innovation columns `cols`.
fn integrate(v: &Matrix, cols: std::ops::Range<usize>, n: usize) -> Matrix {
    let width = cols.len();
    let mut x = Matrix::zeros(n + 1, width);
    for (k, c) in cols.enumerate() {
        let e = v.col(c);
        let dst = x.col_mut(k);
        for t in 1..=n {
            dst[t] = dst[t - 1] + e[t];
        }
    }
    x
}

/// Innovation layout `(e, Z, u)` with the `(Z, u)` cross block zeroed when
/// `p_z > 0`.
pub fn mixed_innovations(p_x: usize, p_z: usize, zero_zu: bool) -> Result<InnovationSpec> {
    let dim = p_x + p_z + 1;
    let u = dim - 1;
    let is_z = |j: usize| j >= p_x && j < p_x + p_z;
    let omega = toeplitz_omega(dim, |j, k| zero_zu && ((is_z(j) && k == u) || (is_z(k) && j == u)));
    InnovationSpec::new(omega, AR_COEF)
}

/// Reusable generator for one `(n, p_x, p_z, variant)` cell.
#[derive(Clone, Debug)]
pub struct MixedDesign {
    pub n: usize,
    pub p_x: usize,
    pub p_z: usize,
    pub variant: DgpVariant,
    spec: InnovationSpec,
}

impl MixedDesign {
    pub fn new(n: usize, p_x: usize, p_z: usize, variant: DgpVariant) -> Result<Self> {
        if n < 10 {
            return Err(Error::InvalidConfig(format!("n must be >= 10, got {n}")));
        }
        let s = sparsity_index(n);
        if p_x < s {
            return Err(Error::InvalidConfig(format!("p_x = {p_x} is below the sparsity index {s}")));
        }
        if variant.is_mixed() {
            if p_z < s {
                return Err(Error::InvalidConfig(format!(
                    "{variant} needs p_z >= {s}, got {p_z}"
                )));
            }
        } else if p_z != 0 {
            return Err(Error::InvalidConfig(format!("{variant} requires p_z = 0, got {p_z}")));
        }
        let spec = mixed_innovations(p_x, p_z, variant.is_mixed())?;
        Ok(Self {
            n,
            p_x,
            p_z,
            variant,
            spec,
        })
    }

    pub fn sparsity(&self) -> usize {
        sparsity_index(self.n)
    }

    pub fn theta_true(&self) -> Vec<f64> {
        let s = self.sparsity();
        let mut theta = unit_root_coefs(self.n, self.p_x, s, self.variant.leading_unit_coef());
        if self.p_z > 0 {
            theta.extend((0..self.p_z).map(|j| if j < s { 0.3 * (j + 1) as f64 } else { 0.0 }));
        }
        theta
    }

    pub fn generate(&self, stream: &mut RngStream) -> DgpSample {
        let (n, p_x, p_z) = (self.n, self.p_x, self.p_z);
        let v = gen_var1(&self.spec, n + 1, stream);
        let u_col = p_x + p_z;
        let x = integrate(&v, 0..p_x, n);
        let theta = self.theta_true();
        let p = p_x + p_z;
        let regressor = |t: usize, j: usize| if j < p_x { x[(t, j)] } else { v[(t, j)] };
        let w = Matrix::from_fn(n, p, regressor);
        let next: Vec<f64> = (0..p).map(|j| regressor(n, j)).collect();
        let signal = |row: &dyn Fn(usize) -> f64| (0..p).map(|j| theta[j] * row(j)).sum::<f64>();
        let y = (0..n)
            .map(|i| signal(&|j| w[(i, j)]) + v[(i + 1, u_col)])
            .collect();
        let y_next = signal(&|j| next[j]) + v[(n + 1, u_col)];
        let mut kinds = vec![ColumnKind::UnitRoot; p_x];
        kinds.extend(std::iter::repeat_n(ColumnKind::Stationary, p_z));
        let mut labels: Vec<String> = (1..=p_x).map(|j| format!("x{j}")).collect();
        labels.extend((1..=p_z).map(|j| format!("z{j}")));
        DgpSample {
            y,
            w,
            theta_true: theta,
            column_kinds: kinds,
            labels,
            next_regressors: next,
            y_next,
            innovations: v,
        }
    }
}

/// One draw from a mixed (DGP1/2) or pure unit-root (DGP3/4) design.
pub fn gen_mixed(
    n: usize,
    p_x: usize,
    p_z: usize,
    variant: DgpVariant,
    stream: &mut RngStream,
) -> Result<DgpSample> {
    Ok(MixedDesign::new(n, p_x, p_z, variant)?.generate(stream))
}

// ---------------------------------------------------------------------------
// Cointegration
// ---------------------------------------------------------------------------

pub const COINT_RANK: usize = 2;
/// Leading entries of `X^{co(2)}` loaded by each cointegrating relation.
pub const COINT_LOADED: usize = 6;

#[derive(Clone, Debug)]
pub struct CointSpec {
    pub p_c1: usize,
    pub p_c2: usize,
    /// `p_c1 × p_c2` cointegrating matrix.
    pub a: Matrix,
    pub phi1: Vec<f64>,
}

impl CointSpec {
    pub fn new(p_c1: usize, p_c2: usize) -> Result<Self> {
        if p_c2 < COINT_LOADED {
            return Err(Error::InvalidConfig(format!("p_c2 must be >= {COINT_LOADED}, got {p_c2}")));
        }
        let a = Matrix::from_fn(p_c1, p_c2, |_, k| if k < COINT_LOADED { 0.4 } else { 0.0 });
        Ok(Self {
            p_c1,
            p_c2,
            a,
            phi1: vec![0.8; p_c1],
        })
    }

    /// `−Aᵀφ₁`.
    pub fn phi2(&self) -> Vec<f64> {
        let at_phi = self.a.t_mul_vec(&self.phi1).expect("conformable");
        at_phi.into_iter().map(|v| -v).collect()
    }

    /// Contribution of relation `r` to `φ₂`: `−A_{r·}ᵀ φ₁_r`.
    pub fn phi2_component(&self, r: usize) -> Vec<f64> {
        (0..self.p_c2).map(|k| -self.a[(r, k)] * self.phi1[r]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CointRegression {
    /// Unit-root regressors `X` only.
    XOnly,
    /// `X` and the stationary block `Z`.
    XZ,
    /// Every observable: `X^{co}`, `X`, `Z`.
    All,
}

impl CointRegression {
    pub const ALL: [CointRegression; 3] = [CointRegression::XOnly, CointRegression::XZ, CointRegression::All];

    pub fn label(self) -> &'static str {
        match self {
            CointRegression::XOnly => "reg1",
            CointRegression::XZ => "reg2",
            CointRegression::All => "reg3",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CointSample {
    /// Full observable design ordered `(X^{co(1)}, X^{co(2)}, X, Z)`.
    pub sample: DgpSample,
    /// Rows `0..=n` of the stationary cointegration error.
    pub v1: Matrix,
    /// Rows `0..=n` of `X^{co(1)}` and `X^{co(2)}`.
    pub x_co1: Matrix,
    pub x_co2: Matrix,
    pub p_x: usize,
    pub p_z: usize,
    pub spec: CointSpec,
    /// Stationary regressors correlated with the cointegration error.
    pub s_z: usize,
}

impl CointSample {
    fn offsets(&self) -> (usize, usize, usize) {
        let co = self.spec.p_c1 + self.spec.p_c2;
        (co, co + self.p_x, co + self.p_x + self.p_z)
    }

    /// Column indices of `sample.w` used by `reg`.
    pub fn columns(&self, reg: CointRegression) -> Vec<usize> {
        let (x0, z0, end) = self.offsets();
        match reg {
            CointRegression::XOnly => (x0..z0).collect(),
            CointRegression::XZ => (x0..end).collect(),
            CointRegression::All => (0..end).collect(),
        }
    }

    /// Columns (within `columns(reg)`) of the oracle least-squares fit.
    pub fn oracle_columns(&self, reg: CointRegression) -> Vec<usize> {
        let s_x = sparsity_index(self.sample.n());
        let (x0, z0, _) = self.offsets();
        let xs: Vec<usize> = (x0..x0 + s_x).collect();
        let full: Vec<usize> = match reg {
            CointRegression::XOnly => xs,
            CointRegression::XZ => xs.into_iter().chain(z0..z0 + self.s_z).collect(),
            CointRegression::All => (0..self.spec.p_c1)
                .chain(self.spec.p_c1..self.spec.p_c1 + COINT_LOADED)
                .chain(xs)
                .collect(),
        };
        let cols = self.columns(reg);
        full.iter()
            .map(|c| cols.iter().position(|k| k == c).expect("oracle column in view"))
            .collect()
    }

    /// `(y, W, w_n)` restricted to the columns of `reg`.
    pub fn view(&self, reg: CointRegression) -> (Vec<f64>, Matrix, Vec<f64>) {
        let cols = self.columns(reg);
        let w = self.sample.w.select_columns(&cols);
        let next = cols.iter().map(|&j| self.sample.next_regressors[j]).collect();
        (self.sample.y.clone(), w, next)
    }
}

/// Reusable generator for one cointegration cell.
#[derive(Clone, Debug)]
pub struct CointDesign {
    pub n: usize,
    pub p: usize,
    pub p_x: usize,
    pub p_z: usize,
    pub coint: CointSpec,
    spec: InnovationSpec,
}

impl CointDesign {
    /// `p` counts the unit-root and cointegrated regressors: `p_x = p/2`,
    /// `p_c1 = 2`, `p_c2 = p/2 − 2`, and `p_z = 2n − p`.
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if !p.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("p must be even, got {p}")));
        }
        let half = p / 2;
        if half <= COINT_RANK + COINT_LOADED {
            return Err(Error::InvalidConfig(format!(
                "p/2 must exceed {}, got {half}",
                COINT_RANK + COINT_LOADED
            )));
        }
        let s = sparsity_index(n);
        if 2 * n < p + s {
            return Err(Error::InvalidConfig(format!(
                "p_z = 2n − p must be at least {s}; got n = {n}, p = {p}"
            )));
        }
        if half < s {
            return Err(Error::InvalidConfig(format!("p_x = {half} is below the sparsity index {s}")));
        }
        let p_c1 = COINT_RANK;
        let p_c2 = half - p_c1;
        let p_x = half;
        let p_z = 2 * n - p;
        let coint = CointSpec::new(p_c1, p_c2)?;

        // Innovation layout (e2, e, v1, Z, u).
        let e2_end = p_c2;
        let e_end = e2_end + p_x;
        let v1 = e_end..e_end + p_c1;
        let z_start = v1.end;
        let z_active = z_start..z_start + s;
        let z_rest = z_start + s..z_start + p_z;
        let u = z_start + p_z;
        let dim = u + 1;
        let in_z = |j: usize| (z_start..u).contains(&j);
        let excluded = |j: usize, k: usize| {
            (in_z(j) && k == u)
                || (v1.contains(&j) && k == u)
                || (v1.contains(&j) && z_rest.contains(&k))
                || (z_active.contains(&j) && z_rest.contains(&k))
        };
        let omega = toeplitz_omega(dim, |j, k| excluded(j, k) || excluded(k, j));
        let spec = InnovationSpec::new(omega, AR_COEF)?;
        Ok(Self {
            n,
            p,
            p_x,
            p_z,
            coint,
            spec,
        })
    }

    pub fn generate(&self, stream: &mut RngStream) -> CointSample {
        let n = self.n;
        let (p_c1, p_c2) = (self.coint.p_c1, self.coint.p_c2);
        let p_x = self.p_x;
        let p_z = self.p_z;
        let s = sparsity_index(n);
        let v = gen_var1(&self.spec, n + 1, stream);
        let e_start = p_c2;
        let v1_start = e_start + p_x;
        let z_start = v1_start + p_c1;
        let u_col = z_start + p_z;

        let x_co2 = integrate(&v, 0..p_c2, n);
        let x = integrate(&v, e_start..v1_start, n);
        let v1 = Matrix::from_fn(n + 1, p_c1, |t, r| v[(t, v1_start + r)]);
        let x_co1 = Matrix::from_fn(n + 1, p_c1, |t, r| {
            let mut acc = 0.0;
            for k in 0..p_c2 {
                acc += self.coint.a[(r, k)] * x_co2[(t, k)];
            }
            acc + v1[(t, r)]
        });

        let beta = unit_root_coefs(n, p_x, s, true);
        let p_all = p_c1 + p_c2 + p_x + p_z;
        let regressor = |t: usize, j: usize| {
            if j < p_c1 {
                x_co1[(t, j)]
            } else if j < p_c1 + p_c2 {
                x_co2[(t, j - p_c1)]
            } else if j < p_c1 + p_c2 + p_x {
                x[(t, j - p_c1 - p_c2)]
            } else {
                v[(t, z_start + j - p_c1 - p_c2 - p_x)]
            }
        };
        let w = Matrix::from_fn(n, p_all, regressor);
        let next: Vec<f64> = (0..p_all).map(|j| regressor(n, j)).collect();

        // y_t = X_{t−1}ᵀβ + v1_{t−1}ᵀφ₁ + u_t  (γ = 0, α = 0)
        let outcome = |t: usize| {
            let xb: f64 = (0..p_x).map(|j| beta[j] * x[(t, j)]).sum();
            let vp: f64 = (0..p_c1).map(|r| self.coint.phi1[r] * v1[(t, r)]).sum();
            xb + vp + v[(t + 1, u_col)]
        };
        let y = (0..n).map(outcome).collect();
        let y_next = outcome(n);

        let mut theta = self.coint.phi1.clone();
        theta.extend(self.coint.phi2());
        theta.extend(beta);
        theta.extend(std::iter::repeat_n(0.0, p_z));
        let mut kinds = vec![ColumnKind::Cointegrated; p_c1 + p_c2];
        kinds.extend(std::iter::repeat_n(ColumnKind::UnitRoot, p_x));
        kinds.extend(std::iter::repeat_n(ColumnKind::Stationary, p_z));
        let mut labels: Vec<String> = (1..=p_c1).map(|j| format!("xco1_{j}")).collect();
        labels.extend((1..=p_c2).map(|j| format!("xco2_{j}")));
        labels.extend((1..=p_x).map(|j| format!("x{j}")));
        labels.extend((1..=p_z).map(|j| format!("z{j}")));

        CointSample {
            sample: DgpSample {
                y,
                w,
                theta_true: theta,
                column_kinds: kinds,
                labels,
                next_regressors: next,
                y_next,
                innovations: v,
            },
            v1,
            x_co1,
            x_co2,
            p_x,
            p_z,
            spec: self.coint.clone(),
            s_z: s,
        }
    }
}

pub fn gen_cointegrated(n: usize, p: usize, stream: &mut RngStream) -> Result<CointSample> {
    Ok(CointDesign::new(n, p)?.generate(stream))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot, mean};

    #[test]
    fn white_noise_when_ar_is_zero() {
        let spec = InnovationSpec::new(Matrix::identity(3), 0.0).unwrap();
        assert_eq!(spec.variance_scale(), 1.0);
        let v = gen_var1(&spec, 20_000, &mut RngStream::new(1));
        for k in 0..3 {
            let c = v.col(k);
            let m = mean(c);
            let var = c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / c.len() as f64;
            assert!((var - 1.0).abs() < 0.05);
            // Lag-one autocorrelation vanishes.
            let ac = dot(&c[1..], &c[..c.len() - 1]) / c.len() as f64;
            assert!(ac.abs() < 0.03);
        }
    }

    #[test]
    fn stationary_covariance_matches_omega() {
        let omega = toeplitz_omega(2, |_, _| false);
        let spec = InnovationSpec::new(omega, AR_COEF).unwrap();
        let v = gen_var1(&spec, 100_000, &mut RngStream::new(2));
        let (a, b) = (v.col(0), v.col(1));
        let (ma, mb) = (mean(a), mean(b));
        let cov = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64;
        assert!((cov - 0.8).abs() < 0.02, "cov {cov}");
    }

    #[test]
    fn var1_is_deterministic() {
        let spec = mixed_innovations(3, 2, true).unwrap();
        let a = gen_var1(&spec, 50, &mut RngStream::new(9));
        let b = gen_var1(&spec, 50, &mut RngStream::new(9));
        assert_eq!(a, b);
        assert_eq!(a.rows(), 51);
    }

    #[test]
    fn sparsity_uses_natural_log() {
        assert_eq!(sparsity_index(120), 10);
        assert_eq!(sparsity_index(240), 12);
        assert_eq!(sparsity_index(360), 12);
    }

    #[test]
    fn dgp3_coefficients() {
        let s = gen_mixed(120, 60, 0, DgpVariant::Dgp3, &mut RngStream::new(3)).unwrap();
        let c = 1.0 / 120f64.sqrt();
        assert_eq!(s.theta_true.len(), 60);
        assert!(s.theta_true[..10].iter().all(|&b| b == c));
        assert!(s.theta_true[10..].iter().all(|&b| b == 0.0));
        assert_eq!(s.true_support().len(), 10);
    }

    #[test]
    fn dgp1_and_dgp2_layout() {
        let s = gen_mixed(120, 60, 180, DgpVariant::Dgp1, &mut RngStream::new(4)).unwrap();
        assert_eq!(s.p(), 240);
        assert_eq!(s.true_support().len(), 20);
        assert_eq!(s.theta_true[60], 0.3);
        assert!((s.theta_true[69] - 3.0).abs() < 1e-15);
        let s2 = gen_mixed(120, 60, 180, DgpVariant::Dgp2, &mut RngStream::new(4)).unwrap();
        assert_eq!(s2.theta_true[0], 1.0);
        assert_eq!(s2.theta_true[1], 1.0 / 120f64.sqrt());
        assert_eq!(s2.true_support().len(), 20);
    }

    #[test]
    fn invalid_configs() {
        assert!(gen_mixed(120, 60, 10, DgpVariant::Dgp3, &mut RngStream::new(0)).is_err());
        assert!(gen_mixed(5, 60, 0, DgpVariant::Dgp3, &mut RngStream::new(0)).is_err());
        assert!(gen_mixed(120, 60, 0, DgpVariant::Dgp1, &mut RngStream::new(0)).is_err());
        assert!(gen_cointegrated(120, 61, &mut RngStream::new(0)).is_err());
        assert!(gen_cointegrated(120, 16, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn unit_root_columns_integrate_innovations() {
        let s = gen_mixed(50, 12, 12, DgpVariant::Dgp1, &mut RngStream::new(5)).unwrap();
        for j in 0..12 {
            assert_eq!(s.w[(0, j)], 0.0);
            for t in 1..50 {
                let diff = s.w[(t, j)] - s.w[(t - 1, j)];
                let e = s.innovations[(t, j)];
                assert!((diff - e).abs() <= 4.0 * f64::EPSILON * s.w[(t, j)].abs().max(1.0));
            }
            let diff = s.next_regressors[j] - s.w[(49, j)];
            assert!((diff - s.innovations[(50, j)]).abs() <= 1e-12);
        }
        // Stationary columns are the innovation block itself.
        for t in 0..50 {
            assert_eq!(s.w[(t, 12)], s.innovations[(t, 12)]);
        }
    }

    #[test]
    fn outcome_equation_holds() {
        let s = gen_mixed(60, 12, 12, DgpVariant::Dgp2, &mut RngStream::new(6)).unwrap();
        let u = s.innovations.cols() - 1;
        for i in 0..60 {
            let fitted = dot(&s.w.row(i), &s.theta_true);
            assert!((s.y[i] - fitted - s.innovations[(i + 1, u)]).abs() < 1e-10);
        }
        let fitted = dot(&s.next_regressors, &s.theta_true);
        assert!((s.y_next - fitted - s.innovations[(61, u)]).abs() < 1e-10);
    }

    #[test]
    fn lagged_stationary_regressors_uncorrelated_with_errors() {
        let s = gen_mixed(10_000, 20, 20, DgpVariant::Dgp1, &mut RngStream::new(7)).unwrap();
        let u: Vec<f64> = (1..=10_000).map(|t| s.innovations[(t, 40)]).collect();
        for j in 20..40 {
            let z = s.w.col(j);
            let (mz, mu) = (mean(z), mean(&u));
            let cov: f64 = z.iter().zip(&u).map(|(a, b)| (a - mz) * (b - mu)).sum::<f64>();
            let vz: f64 = z.iter().map(|a| (a - mz) * (a - mz)).sum();
            let vu: f64 = u.iter().map(|b| (b - mu) * (b - mu)).sum();
            assert!((cov / (vz * vu).sqrt()).abs() < 0.03);
        }
    }

    #[test]
    fn innovation_variances_near_omega() {
        let spec = mixed_innovations(4, 4, true).unwrap();
        let v = gen_var1(&spec, 10_000, &mut RngStream::new(8));
        for k in 0..9 {
            let c = v.col(k);
            let m = mean(c);
            let var = c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / c.len() as f64;
            assert!((var - 1.0).abs() < 0.05 * 1.0 + 0.05, "coordinate {k}: {var}");
        }
    }

    #[test]
    fn cointegration_identities() {
        let cs = gen_cointegrated(120, 60, &mut RngStream::new(10)).unwrap();
        assert_eq!(cs.spec.p_c1, 2);
        assert_eq!(cs.spec.p_c2, 28);
        assert_eq!(cs.p_x, 30);
        assert_eq!(cs.p_z, 180);
        assert_eq!(cs.sample.p(), 240);
        for t in 0..=120 {
            for r in 0..2 {
                let ax: f64 = (0..28).map(|k| cs.spec.a[(r, k)] * cs.x_co2[(t, k)]).sum();
                assert!((cs.x_co1[(t, r)] - ax - cs.v1[(t, r)]).abs() <= 1e-12 * ax.abs().max(1.0));
            }
        }
        let phi2 = cs.spec.phi2();
        assert_eq!(phi2.iter().filter(|&&v| v != 0.0).count(), 6);
        for r in 0..2 {
            let comp = cs.spec.phi2_component(r);
            let nz: Vec<f64> = comp.into_iter().filter(|&v| v != 0.0).collect();
            assert_eq!(nz.len(), 6);
            assert!(nz.iter().all(|&v| (v + 0.32).abs() < 1e-15));
        }
        assert!(phi2[..6].iter().all(|&v| (v + 0.64).abs() < 1e-15));
        // γ = 0 on the stationary block.
        assert!(cs.sample.theta_true[60..].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn cointegration_views_and_oracles() {
        let cs = gen_cointegrated(120, 60, &mut RngStream::new(11)).unwrap();
        assert_eq!(cs.columns(CointRegression::XOnly).len(), 30);
        assert_eq!(cs.columns(CointRegression::XZ).len(), 210);
        assert_eq!(cs.columns(CointRegression::All).len(), 240);
        assert_eq!(cs.oracle_columns(CointRegression::XOnly), (0..10).collect::<Vec<_>>());
        assert_eq!(cs.oracle_columns(CointRegression::XZ).len(), 20);
        let o3 = cs.oracle_columns(CointRegression::All);
        assert_eq!(o3.len(), 2 + 6 + 10);
        let (y, w, next) = cs.view(CointRegression::XZ);
        assert_eq!(w.cols(), next.len());
        assert_eq!(y.len(), w.rows());
        // Feasible-regression truth reproduces y up to the structural error.
        let u = cs.sample.innovations.cols() - 1;
        for i in 0..120 {
            let fitted = dot(&cs.sample.w.row(i), &cs.sample.theta_true);
            assert!((cs.sample.y[i] - fitted - cs.sample.innovations[(i + 1, u)]).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_round_trip_shape() {
        let s = gen_mixed(20, 10, 10, DgpVariant::Dgp1, &mut RngStream::new(12)).unwrap();
        let mut data = Vec::new();
        let mut truth = Vec::new();
        s.write_csv(&mut data).unwrap();
        s.write_truth_csv(&mut truth).unwrap();
        let text = String::from_utf8(data).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[0].starts_with("y,x1,"));
        let first: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(first[0], s.y[0]);
        assert_eq!(first[11], s.w[(0, 10)]);
        let truth = String::from_utf8(truth).unwrap();
        assert_eq!(truth.lines().count(), 1 + 20 + 1);
    }
}
