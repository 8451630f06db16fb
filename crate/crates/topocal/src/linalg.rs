//! Dense linear algebra helpers: SVD-based ranks and subspaces in f64, and
//! fraction-free elimination for exact ranks over Q.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::Q;

/// Full SVD of `m`, padding with zero rows so that V is square.
/// Returns (singular values, V) with V's columns the right singular vectors.
fn right_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    (svd.singular_values.iter().copied().collect(), vt.transpose())
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn threshold(sigmas: &[f64], rel_tol: f64) -> f64 {
    let smax = sigmas.iter().copied().fold(0.0, f64::max);
    rel_tol * smax.max(f64::MIN_POSITIVE)
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Rank with an absolute pivot tolerance.
pub fn rank_abs(m: &DMatrix<f64>, abs_tol: f64) -> usize {
    singular_values(m).iter().filter(|&&x| x > abs_tol).count()
}

/// Orthonormal basis (columns) of the kernel.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let c = m.ncols();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 || m.amax() == 0.0 {
        return DMatrix::identity(c, c);
    }
    let (s, v) = right_svd(m);
    let tol = threshold(&s, rel_tol);
    let cols: Vec<DVector<f64>> =
        (0..c).filter(|&j| s.get(j).copied().unwrap_or(0.0) <= tol).map(|j| v.column(j).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis (columns) of the column space.
pub fn range(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let r = m.nrows();
    if m.ncols() == 0 || r == 0 || m.amax() == 0.0 {
        return DMatrix::zeros(r, 0);
    }
    // column space of m = row space of mᵀ
    let (s, v) = right_svd(&m.transpose());
    let tol = threshold(&s, rel_tol);
    let cols: Vec<DVector<f64>> = (0..v.ncols())
        .filter(|&j| s.get(j).copied().unwrap_or(0.0) > tol)
        .map(|j| v.column(j).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(r, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Moore–Penrose pseudo-inverse with threshold `rel_tol · σ_max`.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 || m.amax() == 0.0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let tol = threshold(&svd.singular_values.iter().copied().collect::<Vec<_>>(), rel_tol);
    svd.pseudo_inverse(tol).expect("svd with vectors")
}

/// Relative residual of projecting `v` onto the span of orthonormal columns `q`.
pub fn projection_residual(q: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    let proj = q * (q.transpose() * v);
    (v - proj).norm() / nv
}

/// Stack real column blocks into one matrix.
pub fn hstack(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((0, off), (rows, b.ncols())).copy_from(b);
        off += b.ncols();
    }
    out
}

/// Exact linear algebra over Q via integer (Bareiss) elimination.
pub mod exact {
    use super::*;

    /// Row-major rational matrix.
    #[derive(Clone, Debug, PartialEq)]
    pub struct QMatrix {
        pub rows: usize,
        pub cols: usize,
        pub data: Vec<Q>,
    }

    impl QMatrix {
        pub fn zeros(rows: usize, cols: usize) -> Self {
            QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
        }

        pub fn from_columns(rows: usize, columns: &[Vec<Q>]) -> Self {
            let cols = columns.len();
            let mut m = Self::zeros(rows, cols);
            for (j, col) in columns.iter().enumerate() {
                assert_eq!(col.len(), rows, "QMatrix::from_columns: ragged columns");
                for (i, v) in col.iter().enumerate() {
                    m.data[i * cols + j] = v.clone();
                }
            }
            m
        }

        pub fn get(&self, i: usize, j: usize) -> &Q {
            &self.data[i * self.cols + j]
        }

        pub fn set(&mut self, i: usize, j: usize, v: Q) {
            self.data[i * self.cols + j] = v;
        }

        pub fn column(&self, j: usize) -> Vec<Q> {
            (0..self.rows).map(|i| self.get(i, j).clone()).collect()
        }

        pub fn mul(&self, other: &QMatrix) -> QMatrix {
            assert_eq!(self.cols, other.rows, "QMatrix::mul: shape mismatch");
            let mut out = QMatrix::zeros(self.rows, other.cols);
            for i in 0..self.rows {
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    for j in 0..other.cols {
                        let b = other.get(k, j);
                        if b.is_zero() {
                            continue;
                        }
                        let idx = i * other.cols + j;
                        out.data[idx] = &out.data[idx] + a * b;
                    }
                }
            }
            out
        }

        /// Scale each row to integers.
        fn integer_rows(&self) -> Vec<Vec<BigInt>> {
            (0..self.rows)
                .map(|i| {
                    let row = &self.data[i * self.cols..(i + 1) * self.cols];
                    let mut lcm = BigInt::one();
                    for q in row {
                        if !q.is_zero() {
                            lcm = num_integer::Integer::lcm(&lcm, q.denom());
                        }
                    }
                    row.iter().map(|q| (q.numer() * &lcm) / q.denom()).collect()
                })
                .collect()
        }

        /// Exact rank.
        pub fn rank(&self) -> usize {
            let mut a = self.integer_rows();
            bareiss_rank(&mut a, self.cols)
        }

        /// Exact kernel basis (columns), from the reduced row echelon form.
        pub fn nullspace(&self) -> Vec<Vec<Q>> {
            let (r, pivots) = self.rref();
            let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
            free.iter()
                .map(|&f| {
                    let mut v = vec![Q::zero(); self.cols];
                    v[f] = Q::one();
                    for (row, &p) in pivots.iter().enumerate() {
                        v[p] = -r.get(row, f).clone();
                    }
                    v
                })
                .collect()
        }

        /// Reduced row echelon form and pivot columns.
        pub fn rref(&self) -> (QMatrix, Vec<usize>) {
            let mut m = self.clone();
            let mut pivots = Vec::new();
            let mut row = 0;
            for col in 0..m.cols {
                if row == m.rows {
                    break;
                }
                let Some(p) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                    continue;
                };
                if p != row {
                    for j in 0..m.cols {
                        m.data.swap(p * m.cols + j, row * m.cols + j);
                    }
                }
                let inv = Q::one() / m.get(row, col).clone();
                for j in col..m.cols {
                    let v = m.get(row, j) * &inv;
                    m.set(row, j, v);
                }
                for i in 0..m.rows {
                    if i == row {
                        continue;
                    }
                    let f = m.get(i, col).clone();
                    if f.is_zero() {
                        continue;
                    }
                    for j in col..m.cols {
                        let v = m.get(i, j) - &f * m.get(row, j);
                        m.set(i, j, v);
                    }
                }
                pivots.push(col);
                row += 1;
            }
            (m, pivots)
        }

        /// A basis (as columns) of the column space, chosen among the columns.
        pub fn column_basis(&self) -> Vec<Vec<Q>> {
            let (_, pivots) = self.rref();
            pivots.iter().map(|&j| self.column(j)).collect()
        }

        pub fn to_f64(&self) -> DMatrix<f64> {
            use crate::scalar::Scalar;
            DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64().re)
        }
    }

    /// Fraction-free Gaussian elimination; returns the rank.
    pub fn bareiss_rank(a: &mut [Vec<BigInt>], cols: usize) -> usize {
        let rows = a.len();
        let mut prev = BigInt::one();
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
                continue;
            };
            a.swap(p, rank);
            for i in rank + 1..rows {
                for j in col + 1..cols {
                    let v = &a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j];
                    a[i][j] = v / &prev;
                }
                a[i][col] = BigInt::zero();
            }
            prev = a[rank][col].clone();
            rank += 1;
        }
        rank
    }
}
