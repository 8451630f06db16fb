//! Endomorphisms of V in the basis e_1..e_n: entry (i, j) is the e_i-component of ξ(e_j).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Endo<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Endo<S> {
    pub fn zero(dim: usize) -> Self {
        Endo { dim, data: vec![S::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut e = Self::zero(dim);
        for i in 0..dim {
            e.set(i, i, S::one());
        }
        e
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("endomorphism must be a non-empty square matrix".into()));
        }
        Ok(Endo { dim, data: rows.into_iter().flatten().collect() })
    }

    /// Elementary matrix E_{ij} (so E_{ij}(e_j) = e_i).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut e = Self::zero(dim);
        e.set(i, j, S::one());
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "Endo add: dimension mismatch");
        Endo {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "Endo sub: dimension mismatch");
        Endo {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Endo { dim: self.dim, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    /// Composition self ∘ other.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "Endo matmul: dimension mismatch");
        let n = self.dim;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).clone() + a.clone() * b.clone();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).fold(S::zero(), |acc, j| acc + self.get(i, j).clone() * v[j].clone()))
            .collect()
    }

    pub fn trace(&self) -> S {
        (0..self.dim).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.abs2()).fold(0.0, |a, b| a + b)
    }

    /// Frobenius norm (the g_V-norm on gl(V) for the standard metric).
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Endo<T> {
        Endo { dim: self.dim, data: self.data.iter().map(f).collect() }
    }

    pub fn to_c64(&self) -> Endo<C64> {
        self.map(|x| x.to_c64())
    }

    /// Some power vanishes exactly.
    pub fn is_nilpotent(&self) -> bool {
        let mut p = self.clone();
        for _ in 0..self.dim {
            if p.is_zero() {
                return true;
            }
            p = p.matmul(self);
        }
        p.is_zero()
    }

    /// Matrix exponential: a finite sum for nilpotent input, otherwise
    /// (inexact scalars only) Taylor with scaling and squaring.
    pub fn exp(&self) -> Result<Self> {
        let n = self.dim;
        if self.is_nilpotent() {
            let mut sum = Self::identity(n);
            let mut term = Self::identity(n);
            for k in 1..=n {
                term = term.matmul(self).scale(&S::from_ratio(1, k as i64));
                if term.is_zero() {
                    break;
                }
                sum = sum.add(&term);
            }
            return Ok(sum);
        }
        if S::EXACT {
            return Err(Error::NonConvergent { terms: n });
        }
        let norm = self.norm();
        let mut squarings = 0u32;
        let mut scale = 1.0;
        while norm * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = self.scale(&S::from_f64(scale));
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=20 {
            term = term.matmul(&a).scale(&S::from_ratio(1, k as i64));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        Ok(sum)
    }
}

impl Endo<f64> {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Endo::from_dmatrix: not square");
        let n = m.nrows();
        let mut e = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                e.set(i, j, m[(i, j)]);
            }
        }
        e
    }

    /// Flattened row-major coordinates, the order used for gl(V) ≅ R^{n²}.
    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn from_vec(dim: usize, v: &[f64]) -> Self {
        assert_eq!(v.len(), dim * dim, "Endo::from_vec: length mismatch");
        Endo { dim, data: v.to_vec() }
    }
}
