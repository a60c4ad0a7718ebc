//! Small dense matrices and a one-sided Jacobi SVD.
//!
//! Alphabets here are tiny (at most a few dozen symbols), so the SVD favors
//! accuracy over speed: Hestenes' one-sided Jacobi gives singular values to
//! high relative accuracy and orthogonal factors to machine precision.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionError { expected: rows * cols, found: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Thin SVD `A = U diag(s) Vᵀ` with `r = min(m, n)` triples, `s` sorted
/// descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD.
///
/// Left singular vectors belonging to (numerically) zero singular values are
/// returned as zero columns; callers that need a complete basis must not rely
/// on them.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows >= a.cols {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        Ok(Svd { u: t.v, s: t.s, v: t.u })
    }
}

fn jacobi_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = (a.rows, a.cols);
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalError("non-finite matrix entry"));
    }
    // Column-major working copies make the rotations contiguous.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = f64::EPSILON;
    // columns whose squared norm falls below this are numerically zero;
    // rotating them only shuffles rounding noise
    let frob2: f64 = a.data.iter().map(|x| x * x).sum();
    let negligible = frob2 * eps * eps;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= eps * math::sqrt(alpha * beta)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::hypot(1.0, zeta));
                let c = 1.0 / math::hypot(1.0, t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NumericalError("Jacobi SVD did not converge"));
    }

    let norms: Vec<f64> = w.iter().map(|col| math::sqrt(col.iter().map(|x| x * x).sum())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = Matrix::zeros(m, n);
    let mut vm = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let tiny = norms.iter().copied().fold(0.0, f64::max) * eps * (m.max(n) as f64);
    for (k, &j) in order.iter().enumerate() {
        let sigma = norms[j];
        s.push(sigma);
        if sigma > tiny && sigma > 0.0 {
            for i in 0..m {
                u.set(i, k, w[j][i] / sigma);
            }
        }
        for i in 0..n {
            vm.set(i, k, v[j][i]);
        }
    }
    Ok(Svd { u, s, v: vm })
}

#[inline]
fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruct(svd: &Svd) -> Matrix {
        let (m, n, r) = (svd.u.rows(), svd.v.rows(), svd.s.len());
        Matrix::from_fn(m, n, |i, j| (0..r).map(|k| svd.u.get(i, k) * svd.s[k] * svd.v.get(j, k)).sum())
    }

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_row_major(2, 2, vec![0.5, 0.0, 0.0, 2.0]).unwrap();
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 2.0).abs() < 1e-15 && (d.s[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn known_two_by_two() {
        // [[1,1],[1,1]] has singular values (2, 0)
        let a = Matrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let d = svd(&a).unwrap();
        assert!((d.s[0] - 2.0).abs() < 1e-14);
        assert!(d.s[1].abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn reconstructs_and_orthogonal(
            m in 1usize..9, n in 1usize..9,
            seed in proptest::collection::vec(-1.0f64..1.0, 81)
        ) {
            let a = Matrix::from_fn(m, n, |i, j| seed[i * 9 + j]);
            let d = svd(&a).unwrap();
            let r = reconstruct(&d);
            for i in 0..m {
                for j in 0..n {
                    prop_assert!((r.get(i, j) - a.get(i, j)).abs() < 1e-12);
                }
            }
            for w in d.s.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let k = d.s.len();
            for p in 0..k {
                for q in 0..k {
                    let vv: f64 = (0..n).map(|i| d.v.get(i, p) * d.v.get(i, q)).sum();
                    let expect = if p == q { 1.0 } else { 0.0 };
                    prop_assert!((vv - expect).abs() < 1e-12);
                    if d.s[p] > 1e-8 && d.s[q] > 1e-8 {
                        let uu: f64 = (0..m).map(|i| d.u.get(i, p) * d.u.get(i, q)).sum();
                        prop_assert!((uu - expect).abs() < 1e-10);
                    }
                }
            }
        }
    }
}
