//! Small dense linear algebra helpers for the low-dimensional Newton solvers.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SquareMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Cholesky factor L with A = L L^T; fails if A is not positive definite.
    pub fn cholesky(&self) -> Option<SquareMatrix> {
        let n = self.n;
        let mut l = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    /// Solves A x = b via the Cholesky factor of A (A must be SPD).
    pub fn solve_spd(&self, b: &[f64]) -> Option<Vec<f64>> {
        let l = self.cholesky()?;
        let n = self.n;
        // forward: L y = b
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        // backward: L^T x = y
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l.get(k, i) * x[k];
            }
            x[i] = s / l.get(i, i);
        }
        Some(x)
    }

    /// Inverse of an SPD matrix.
    pub fn inverse_spd(&self) -> Option<SquareMatrix> {
        let n = self.n;
        let mut inv = SquareMatrix::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve_spd(&e)?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Some(inv)
    }

    pub fn scaled(&self, c: f64) -> SquareMatrix {
        SquareMatrix { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add_ridge(&mut self, lambda: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += lambda;
        }
    }
}

/// Least-squares solution of X b = y via normal equations with a tiny ridge
/// retry; used only for optimizer starting values.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Domain("least squares on empty data".into()));
    }
    let p = x[0].len();
    let mut xtx = SquareMatrix::zeros(p);
    let mut xty = vec![0.0; p];
    for (row, &yi) in x.iter().zip(y) {
        for j in 0..p {
            xty[j] += row[j] * yi;
            for k in 0..p {
                xtx.data[j * p + k] += row[j] * row[k];
            }
        }
    }
    if let Some(b) = xtx.solve_spd(&xty) {
        return Ok(b);
    }
    let mut ridged = xtx.clone();
    ridged.add_ridge(1e-8 * (1.0 + xtx.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()))));
    ridged
        .solve_spd(&xty)
        .ok_or_else(|| Error::SingularDesign("normal equations not positive definite".into()))
}

/// Rank check for a design matrix: X^T X must be positive definite beyond a
/// scale-relative tolerance.
pub fn design_full_rank(x: &[Vec<f64>]) -> bool {
    let n = x.len();
    if n == 0 {
        return false;
    }
    let p = x[0].len();
    if n < p {
        return false;
    }
    let mut xtx = SquareMatrix::zeros(p);
    for row in x {
        for j in 0..p {
            for k in 0..p {
                xtx.data[j * p + k] += row[j] * row[k];
            }
        }
    }
    let scale = xtx.data.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return false;
    }
    let mut shifted = xtx.clone();
    shifted.add_ridge(-1e-10 * scale);
    shifted.cholesky().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solve_round_trip() {
        let mut a = SquareMatrix::zeros(3);
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, vals[i][j]);
            }
        }
        let b = [1.0, 2.0, 3.0];
        let x = a.solve_spd(&b).unwrap();
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a.get(i, j) * x[j]).sum();
            assert!((ax - b[i]).abs() < 1e-12);
        }
        let inv = a.inverse_spd().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let prod: f64 = (0..3).map(|k| a.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = SquareMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let x = vec![vec![1.0, 2.0, 2.0], vec![1.0, 3.0, 3.0], vec![1.0, 5.0, 5.0]];
        assert!(!design_full_rank(&x));
        let x2 = vec![vec![1.0, 2.0], vec![1.0, 3.0], vec![1.0, 5.0]];
        assert!(design_full_rank(&x2));
    }
}
