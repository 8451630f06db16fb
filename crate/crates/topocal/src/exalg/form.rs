//! Sparse exterior forms keyed by index bitmasks.
//!
//! A basis monomial θ^{i₁}∧…∧θ^{i_p} with i₁<…<i_p is stored as the mask
//! Σ 2^{i_r} (0-based indices). Dense vectors use colex order, which is the
//! numeric order of the masks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exalg::Endo;
use crate::scalar::{ComplexScalar, RealScalar, Scalar};

pub const MAX_DIM: usize = 32;

pub mod bits {
    /// Sign (as parity: true = odd) of merging sorted A then sorted B.
    #[inline]
    pub fn merge_parity(a: u32, b: u32) -> bool {
        let mut parity = 0u32;
        let mut rest = b;
        while rest != 0 {
            let j = rest.trailing_zeros();
            rest &= rest - 1;
            parity += (a >> j >> 1).count_ones();
        }
        parity & 1 == 1
    }

    /// Number of set bits strictly below position j.
    #[inline]
    pub fn below(mask: u32, j: usize) -> u32 {
        (mask & ((1u32 << j) - 1)).count_ones()
    }

    pub fn indices(mask: u32) -> Vec<usize> {
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        let mut rest = mask;
        while rest != 0 {
            out.push(rest.trailing_zeros() as usize);
            rest &= rest - 1;
        }
        out
    }

    pub fn mask_of(idx: &[usize]) -> u32 {
        idx.iter().fold(0u32, |m, &i| m | (1u32 << i))
    }

    /// All p-subsets of {0..n} in colex (numeric) order.
    pub fn basis_masks(n: usize, p: usize) -> Vec<u32> {
        if p > n {
            return Vec::new();
        }
        if p == 0 {
            return vec![0];
        }
        let limit: u64 = 1u64 << n;
        let mut out = Vec::new();
        let mut m: u64 = (1u64 << p) - 1;
        while m < limit {
            out.push(m as u32);
            // Gosper's hack
            let c = m & m.wrapping_neg();
            let r = m + c;
            m = (((r ^ m) >> 2) / c) | r;
        }
        out
    }

    pub fn full(n: usize) -> u32 {
        if n == 32 {
            u32::MAX
        } else {
            (1u32 << n) - 1
        }
    }
}

/// Position of a mask inside `basis_masks(n, p)`.
pub fn dense_position(basis: &[u32], mask: u32) -> usize {
    basis.binary_search(&mask).expect("mask outside basis")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Form<S> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<u32, S>,
}

impl<S: Scalar> Form<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Form { dim, degree, terms: BTreeMap::new() }
    }

    /// The constant 0-form `c`.
    pub fn scalar(dim: usize, c: S) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(0, c);
        f
    }

    /// θ^{i₁}∧…∧θ^{i_p} for 0-based indices in any order.
    pub fn monomial(dim: usize, idx: &[usize]) -> Self {
        let mut f = Self::zero(dim, idx.len());
        let mut acc = 0u32;
        let mut odd = false;
        for &i in idx {
            assert!(i < dim, "index {i} out of range for dim {dim}");
            if acc & (1 << i) != 0 {
                return f;
            }
            // inversions: earlier indices larger than i
            odd ^= (acc >> i >> 1).count_ones() % 2 == 1;
            acc |= 1 << i;
        }
        f.add_term(acc, if odd { -S::one() } else { S::one() });
        f
    }

    /// Coordinate 1-form θ^i.
    pub fn coord(dim: usize, i: usize) -> Self {
        Self::monomial(dim, &[i])
    }

    /// Build from 0-based strictly increasing index lists.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, S)>,
    {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        let mut f = Self::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::InvalidInput(format!(
                    "index tuple {idx:?} does not have length {degree}"
                )));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!("index tuple {idx:?} not strictly increasing")));
            }
            if idx.iter().any(|&i| i >= dim) {
                return Err(Error::InvalidInput(format!("index tuple {idx:?} out of range")));
            }
            f.add_term(bits::mask_of(&idx), c);
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<u32, S> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mask: u32) -> S {
        self.terms.get(&mask).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeff_at(&self, idx: &[usize]) -> S {
        self.coeff(bits::mask_of(idx))
    }

    pub fn add_term(&mut self, mask: u32, c: S) {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mask) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&mask);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(mask, c);
            }
        }
    }

    fn check_same(&self, other: &Self, op: &str) {
        assert!(
            self.dim == other.dim && self.degree == other.degree,
            "{op}: ({}, deg {}) vs ({}, deg {})",
            self.dim,
            self.degree,
            other.dim,
            other.degree
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other, "add");
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.add_term(m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same(other, "sub");
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.add_term(m, -c.clone());
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, s: &S) {
        self.check_same(other, "add_scaled");
        for (&m, c) in &other.terms {
            self.add_term(m, c.clone() * s.clone());
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (&m, c) in &self.terms {
            out.add_term(m, c.clone() * s.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Form {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(&m, c)| (m, -c.clone())).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.abs2()).fold(0.0, |a, b| a + b)
    }

    /// Euclidean coefficient norm (the g_V-norm for the standard metric).
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Euclidean (bilinear, unconjugated) pairing of coefficients.
    pub fn dot(&self, other: &Self) -> S {
        self.check_same(other, "dot");
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            if let Some(d) = other.terms.get(m) {
                acc = acc + c.clone() * d.clone();
            }
        }
        acc
    }

    /// Exterior product; panics on dimension mismatch.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "wedge: dimension mismatch");
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        if out.degree > self.dim {
            return out;
        }
        for (&a, x) in &self.terms {
            for (&b, y) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let v = x.clone() * y.clone();
                out.add_term(a | b, if bits::merge_parity(a, b) { -v } else { v });
            }
        }
        out
    }

    /// θ^j ∧ self.
    pub fn wedge_coord(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree + 1);
        for (&m, c) in &self.terms {
            if m & (1 << j) != 0 {
                continue;
            }
            let odd = bits::below(m, j) % 2 == 1;
            out.add_term(m | (1 << j), if odd { -c.clone() } else { c.clone() });
        }
        out
    }

    /// i_{e_j} self.
    pub fn interior_coord(&self, j: usize) -> Self {
        if self.degree == 0 {
            return Self::zero(self.dim, 0);
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (&m, c) in &self.terms {
            if m & (1 << j) == 0 {
                continue;
            }
            let odd = bits::below(m, j) % 2 == 1;
            out.add_term(m & !(1 << j), if odd { -c.clone() } else { c.clone() });
        }
        out
    }

    /// i_v self, with v given by its components in the basis e_1..e_n.
    pub fn interior(&self, v: &[S]) -> Self {
        assert_eq!(v.len(), self.dim, "interior: dimension mismatch");
        if self.degree == 0 {
            return Self::zero(self.dim, 0);
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            for (&m, c) in &self.terms {
                if m & (1 << j) == 0 {
                    continue;
                }
                let odd = bits::below(m, j) % 2 == 1;
                let val = c.clone() * vj.clone();
                out.add_term(m & !(1 << j), if odd { -val } else { val });
            }
        }
        out
    }

    /// Derivation action ρ̂_ξ = Σ_{ij} ξ^i_j θ^j ∧ i_{e_i} (the derivative of
    /// the pullback by exp(tξ) at t = 0).
    pub fn rho_hat(&self, xi: &Endo<S>) -> Self {
        assert_eq!(xi.dim(), self.dim, "rho_hat: dimension mismatch");
        let n = self.dim;
        let mut out = Self::zero(n, self.degree);
        for (&m, c) in &self.terms {
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let s1 = bits::below(m, i) % 2 == 1;
                let base = m & !(1 << i);
                for j in 0..n {
                    if base & (1 << j) != 0 {
                        continue;
                    }
                    let x = xi.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let s2 = bits::below(base, j) % 2 == 1;
                    let v = c.clone() * x.clone();
                    out.add_term(base | (1 << j), if s1 ^ s2 { -v } else { v });
                }
            }
        }
        out
    }

    /// Pullback g^*: each θ^i becomes Σ_j g^i_j θ^j.
    pub fn pullback(&self, g: &Endo<S>) -> Self {
        assert_eq!(g.dim(), self.dim, "pullback: dimension mismatch");
        let n = self.dim;
        let rows: Vec<Form<S>> = (0..n)
            .map(|i| {
                let mut r = Form::zero(n, 1);
                for j in 0..n {
                    r.add_term(1 << j, g.get(i, j).clone());
                }
                r
            })
            .collect();
        let mut out = Self::zero(n, self.degree);
        for (&m, c) in &self.terms {
            let mut acc = Form::scalar(n, c.clone());
            for i in bits::indices(m) {
                acc = acc.wedge(&rows[i]);
            }
            for (&k, v) in &acc.terms {
                out.add_term(k, v.clone());
            }
        }
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        let mut out = Form::zero(self.dim, self.degree);
        for (&m, c) in &self.terms {
            out.add_term(m, f(c));
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn to_f64_lossy(&self) -> Form<f64> {
        self.map(|c| c.to_c64().re)
    }

    /// Coefficients in colex order.
    pub fn dense(&self) -> Vec<S> {
        let basis = bits::basis_masks(self.dim, self.degree);
        basis.iter().map(|&m| self.coeff(m)).collect()
    }

    pub fn from_dense(dim: usize, degree: usize, v: &[S]) -> Self {
        let basis = bits::basis_masks(dim, degree);
        assert_eq!(basis.len(), v.len(), "from_dense: length mismatch");
        let mut f = Self::zero(dim, degree);
        for (&m, c) in basis.iter().zip(v) {
            f.add_term(m, c.clone());
        }
        f
    }

    /// Drop coefficients below `eps` in magnitude.
    pub fn pruned(&self, eps: f64) -> Self {
        Form {
            dim: self.dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.magnitude() > eps)
                .map(|(&m, c)| (m, c.clone()))
                .collect(),
        }
    }
}

impl<S: RealScalar> Form<S> {
    pub fn complexify(&self) -> Form<S::Cx> {
        self.map(|c| c.complexify())
    }
}

impl<S: ComplexScalar> Form<S> {
    pub fn re(&self) -> Self {
        self.map(|c| c.re_part())
    }
    pub fn im(&self) -> Self {
        self.map(|c| c.im_part())
    }
}

/// A tuple of forms (φ₁,…,φ_l) of fixed degrees over the same space.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiForm<S> {
    dim: usize,
    parts: Vec<Form<S>>,
}

impl<S: Scalar> MultiForm<S> {
    pub fn new(parts: Vec<Form<S>>) -> Result<Self> {
        let dim = parts
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| Error::InvalidInput("MultiForm needs at least one part".into()))?;
        if parts.iter().any(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch("parts of different dimensions".into()));
        }
        Ok(MultiForm { dim, parts })
    }

    pub fn single(f: Form<S>) -> Self {
        MultiForm { dim: f.dim(), parts: vec![f] }
    }

    pub fn zero(dim: usize, degrees: &[usize]) -> Self {
        MultiForm { dim, parts: degrees.iter().map(|&p| Form::zero(dim, p)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.degree()).collect()
    }

    pub fn parts(&self) -> &[Form<S>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &Form<S> {
        &self.parts[i]
    }

    pub fn part_mut(&mut self, i: usize) -> &mut Form<S> {
        &mut self.parts[i]
    }

    pub fn into_parts(self) -> Vec<Form<S>> {
        self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    /// Total number of stored coefficients.
    pub fn term_count(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    fn zip(&self, other: &Self, f: impl Fn(&Form<S>, &Form<S>) -> Form<S>) -> Self {
        assert_eq!(self.parts.len(), other.parts.len(), "MultiForm: part count mismatch");
        MultiForm {
            dim: self.dim,
            parts: self.parts.iter().zip(&other.parts).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn map_parts(&self, f: impl Fn(&Form<S>) -> Form<S>) -> Self {
        MultiForm { dim: self.dim, parts: self.parts.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn add_scaled(&mut self, other: &Self, s: &S) {
        assert_eq!(self.parts.len(), other.parts.len(), "MultiForm: part count mismatch");
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            a.add_scaled(b, s);
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_parts(|p| p.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map_parts(|p| p.neg())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.parts.iter().map(|p| p.norm_sqr()).fold(0.0, |a, b| a + b)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.parts.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    pub fn rho_hat(&self, xi: &Endo<S>) -> Self {
        self.map_parts(|p| p.rho_hat(xi))
    }

    pub fn pullback(&self, g: &Endo<S>) -> Self {
        self.map_parts(|p| p.pullback(g))
    }

    pub fn interior(&self, v: &[S]) -> Self {
        self.map_parts(|p| p.interior(v))
    }

    pub fn interior_coord(&self, j: usize) -> Self {
        self.map_parts(|p| p.interior_coord(j))
    }

    /// β ∧ φ_i for every part.
    pub fn wedge_left(&self, beta: &Form<S>) -> Self {
        self.map_parts(|p| beta.wedge(p))
    }

    pub fn wedge_coord(&self, j: usize) -> Self {
        self.map_parts(|p| p.wedge_coord(j))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> MultiForm<T> {
        MultiForm { dim: self.dim, parts: self.parts.iter().map(|p| p.map(f)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map_parts(|p| p.conj())
    }

    /// Concatenated dense coefficient vector (colex within each part).
    pub fn dense(&self) -> Vec<S> {
        self.parts.iter().flat_map(|p| p.dense()).collect()
    }

    pub fn from_dense(dim: usize, degrees: &[usize], v: &[S]) -> Self {
        let mut off = 0;
        let mut parts = Vec::with_capacity(degrees.len());
        for &p in degrees {
            let len = crate::scalar::binomial(dim, p);
            parts.push(Form::from_dense(dim, p, &v[off..off + len]));
            off += len;
        }
        assert_eq!(off, v.len(), "from_dense: length mismatch");
        MultiForm { dim, parts }
    }

    pub fn dense_len(dim: usize, degrees: &[usize]) -> usize {
        degrees.iter().map(|&p| crate::scalar::binomial(dim, p)).sum()
    }

    pub fn pruned(&self, eps: f64) -> Self {
        self.map_parts(|p| p.pruned(eps))
    }
}

impl<S: RealScalar> MultiForm<S> {
    pub fn complexify(&self) -> MultiForm<S::Cx> {
        MultiForm { dim: self.dim, parts: self.parts.iter().map(|p| p.complexify()).collect() }
    }
}

impl<S: ComplexScalar> MultiForm<S> {
    pub fn re(&self) -> Self {
        self.map_parts(|p| p.re())
    }
    pub fn im(&self) -> Self {
        self.map_parts(|p| p.im())
    }
}
