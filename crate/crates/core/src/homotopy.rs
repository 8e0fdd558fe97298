//! Exact piecewise-linear LASSO path used to warm-start descending grids.
//!
//! On a fixed support `A` with signs `s`, stationarity reads
//! `G_AA θ_A = c_A − λ h_A∘s_A / 2` with `G = ẌᵀẌ/n` and `c = Ẍᵀÿ/n`, so
//! `θ_A` moves linearly in `λ` until a coordinate hits zero or an inactive
//! gradient reaches its bound. The support system is kept as an updatable
//! Cholesky factor.

use crate::error::{Error, Result};
use crate::numerics::dot;
use crate::solver::CenteredProblem;

/// Pivots below this fraction of the new diagonal entry mark a singular support.
const PIVOT_RTOL: f64 = 1e-10;

/// Lower-triangular factor stored by rows; row `i` has `i + 1` entries.
#[derive(Clone, Debug, Default)]
struct RowCholesky {
    rows: Vec<Vec<f64>>,
}

impl RowCholesky {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn forward(&self, b: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
        }
    }

    fn solve(&self, b: &mut [f64]) {
        self.forward(b);
        for i in (0..self.dim()).rev() {
            let mut s = b[i];
            for m in i + 1..self.dim() {
                s -= self.rows[m][i] * b[m];
            }
            b[i] = s / self.rows[i][i];
        }
    }

    /// Appends a variable with cross products `cross` and diagonal `diag`.
    fn push(&mut self, mut cross: Vec<f64>, diag: f64) -> bool {
        self.forward(&mut cross);
        let pivot = diag - dot(&cross, &cross);
        if !(pivot > PIVOT_RTOL * diag) {
            return false;
        }
        cross.push(pivot.sqrt());
        self.rows.push(cross);
        true
    }

    /// Deletes variable `q`, restoring triangularity with Givens rotations.
    fn remove(&mut self, q: usize) {
        self.rows.remove(q);
        let k = self.dim();
        for c in q..k {
            let (a, b) = (self.rows[c][c], self.rows[c][c + 1]);
            let r = a.hypot(b);
            let (cs, sn) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
            for row in &mut self.rows[c..] {
                let (x, y) = (row[c], row[c + 1]);
                row[c] = cs * x + sn * y;
                row[c + 1] = -sn * x + cs * y;
            }
            self.rows[c].truncate(c + 1);
        }
    }
}

enum Event {
    Target,
    Join(usize, f64),
    Drop(usize),
}

pub(crate) struct Homotopy<'a> {
    prob: &'a CenteredProblem,
    weights: &'a [f64],
    lambda: f64,
    theta: Vec<f64>,
    active: Vec<usize>,
    signs: Vec<f64>,
    chol: RowCholesky,
    steps: usize,
}

impl<'a> Homotopy<'a> {
    /// Starts at `λ_max` with the zero solution.
    pub(crate) fn new(prob: &'a CenteredProblem, weights: &'a [f64]) -> Result<Option<Self>> {
        if weights.len() != prob.p() {
            return Err(Error::DimensionMismatch(format!(
                "penalty has {} weights, design has {} columns",
                weights.len(),
                prob.p()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Ok(None);
        }
        Ok(Some(Self {
            prob,
            weights,
            lambda: prob.lambda_max(weights),
            theta: vec![0.0; prob.p()],
            active: Vec::new(),
            signs: Vec::new(),
            chol: RowCholesky::default(),
            steps: 0,
        }))
    }

    pub(crate) fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Path events processed since the last call.
    pub(crate) fn take_steps(&mut self) -> usize {
        std::mem::take(&mut self.steps)
    }

    /// Re-anchors the path at an externally computed solution.
    pub(crate) fn reset(&mut self, theta: &[f64], lambda: f64) -> bool {
        self.theta.copy_from_slice(theta);
        self.lambda = lambda;
        self.active.clear();
        self.signs.clear();
        self.chol = RowCholesky::default();
        for j in 0..theta.len() {
            if theta[j] != 0.0 && !self.join(j, theta[j].signum()) {
                return false;
            }
        }
        true
    }

    fn join(&mut self, j: usize, sign: f64) -> bool {
        let inv_n = 1.0 / self.prob.n() as f64;
        let xj = self.prob.x.col(j);
        let cross = self.active.iter().map(|&a| dot(self.prob.x.col(a), xj) * inv_n).collect();
        if !self.chol.push(cross, self.prob.col_sq[j]) {
            return false;
        }
        self.active.push(j);
        self.signs.push(sign);
        true
    }

    /// Follows the path down to `target`. Returns `false` when the path cannot
    /// be continued (rising target, singular support, or event budget spent).
    pub(crate) fn advance(&mut self, target: f64) -> bool {
        if target >= self.lambda {
            return target == self.lambda || self.active.is_empty();
        }
        let prob = self.prob;
        let (n, p) = (prob.n(), prob.p());
        let two_n = 2.0 / n as f64;
        let budget = 10 * p + 100;
        let mut just_dropped: Option<usize> = None;
        let mut in_active = vec![false; p];
        for &a in &self.active {
            in_active[a] = true;
        }
        let mut v = vec![0.0; n];
        for _ in 0..budget {
            let r = prob.residual(&self.theta);
            let mut d: Vec<f64> = self
                .active
                .iter()
                .zip(&self.signs)
                .map(|(&j, &s)| 0.5 * self.weights[j] * s)
                .collect();
            self.chol.solve(&mut d);
            v.iter_mut().for_each(|e| *e = 0.0);
            for (&j, &dj) in self.active.iter().zip(&d) {
                crate::numerics::axpy(dj, prob.x.col(j), &mut v);
            }

            let lambda = self.lambda;
            let mut best = lambda - target;
            let mut event = Event::Target;
            for j in 0..p {
                if in_active[j] || prob.degenerate[j] || just_dropped == Some(j) {
                    continue;
                }
                let col = prob.x.col(j);
                let g = two_n * dot(col, &r);
                let b = two_n * dot(col, &v);
                let h = self.weights[j];
                let den = h - b;
                if den > 0.0 {
                    let step = (lambda * h - g).max(0.0) / den;
                    if step < best {
                        best = step;
                        event = Event::Join(j, 1.0);
                    }
                }
                let den = h + b;
                if den > 0.0 {
                    let step = (lambda * h + g).max(0.0) / den;
                    if step < best {
                        best = step;
                        event = Event::Join(j, -1.0);
                    }
                }
            }
            for (a, (&j, &dj)) in self.active.iter().zip(&d).enumerate() {
                if self.theta[j] * dj < 0.0 {
                    let step = -self.theta[j] / dj;
                    if step < best {
                        best = step;
                        event = Event::Drop(a);
                    }
                }
            }

            for (&j, &dj) in self.active.iter().zip(&d) {
                self.theta[j] += best * dj;
            }
            self.lambda -= best;
            self.steps += 1;
            match event {
                Event::Target => {
                    self.lambda = target;
                    return true;
                }
                Event::Join(j, sign) => {
                    if !self.join(j, sign) {
                        return false;
                    }
                    in_active[j] = true;
                    just_dropped = None;
                }
                Event::Drop(a) => {
                    let j = self.active.remove(a);
                    self.signs.remove(a);
                    self.chol.remove(a);
                    self.theta[j] = 0.0;
                    in_active[j] = false;
                    just_dropped = Some(j);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, RngStream};

    fn spd(k: usize, seed: u64) -> Matrix {
        let mut s = RngStream::new(seed);
        let b = Matrix::from_fn(k + 3, k, |_, _| s.normal());
        b.gram()
    }

    fn factor_of(g: &Matrix, order: &[usize]) -> RowCholesky {
        let mut c = RowCholesky::default();
        for (m, &j) in order.iter().enumerate() {
            let cross = order[..m].iter().map(|&i| g[(i, j)]).collect();
            assert!(c.push(cross, g[(j, j)]));
        }
        c
    }

    #[test]
    fn push_solve_matches_dense() {
        let g = spd(5, 1);
        let c = factor_of(&g, &[0, 1, 2, 3, 4]);
        let b = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let mut x = b.clone();
        c.solve(&mut x);
        let back = g.mul_vec(&x).unwrap();
        for i in 0..5 {
            assert!((back[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn remove_equals_refactor() {
        let g = spd(6, 2);
        for q in 0..6 {
            let mut c = factor_of(&g, &[0, 1, 2, 3, 4, 5]);
            c.remove(q);
            let kept: Vec<usize> = (0..6).filter(|&i| i != q).collect();
            let fresh = factor_of(&g, &kept);
            for i in 0..5 {
                assert_eq!(c.rows[i].len(), i + 1);
                for m in 0..=i {
                    assert!((c.rows[i][m] - fresh.rows[i][m]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn singular_push_is_refused() {
        let mut c = RowCholesky::default();
        assert!(c.push(vec![], 1.0));
        assert!(!c.push(vec![1.0], 1.0));
    }
}
