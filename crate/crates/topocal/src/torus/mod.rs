//! Trigonometric polynomials on the flat torus T^n = R^n / 2πZ^n with
//! coefficients in forms, vectors or endomorphisms.
//!
//! A field is a finite sum Σ_k c_k e^{i⟨k,x⟩}. Products convolve supports
//! exactly; nothing is truncated. Growth is bounded by a per-value cap on
//! (modes × stored terms), checked whenever a product is formed.

pub mod identities;
mod json;
mod ops;
pub mod sample;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::exalg::{Endo, MultiForm};
use crate::scalar::{ComplexScalar, Scalar, C64};

pub use json::{EndoFieldJson, EndoModeJson, FormModeJson, TrigFormJson};
pub use ops::{nijenhuis, NijenhuisTensor, TwoVectorField};

pub const DEFAULT_SUPPORT_CAP: usize = 200_000;

pub type Freq = Vec<i32>;

/// Coefficient types a trigonometric polynomial can carry.
pub trait Coeff<S: Scalar>: Clone + Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn same_shape(&self, other: &Self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, s: &S) -> Self;
    fn conj(&self) -> Self;
    fn norm_sqr(&self) -> f64;
    fn max_abs(&self) -> f64;
    fn size(&self) -> usize;
}

impl<S: Scalar> Coeff<S> for MultiForm<S> {
    fn zero_like(&self) -> Self {
        MultiForm::zero(self.dim(), &self.degrees())
    }
    fn is_zero(&self) -> bool {
        MultiForm::is_zero(self)
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.degrees() == other.degrees()
    }
    fn add(&self, other: &Self) -> Self {
        MultiForm::add(self, other)
    }
    fn scale(&self, s: &S) -> Self {
        MultiForm::scale(self, s)
    }
    fn conj(&self) -> Self {
        MultiForm::conj(self)
    }
    fn norm_sqr(&self) -> f64 {
        MultiForm::norm_sqr(self)
    }
    fn max_abs(&self) -> f64 {
        MultiForm::max_abs(self)
    }
    fn size(&self) -> usize {
        self.term_count().max(1)
    }
}

impl<S: Scalar> Coeff<S> for Endo<S> {
    fn zero_like(&self) -> Self {
        Endo::zero(self.dim())
    }
    fn is_zero(&self) -> bool {
        Endo::is_zero(self)
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim()
    }
    fn add(&self, other: &Self) -> Self {
        Endo::add(self, other)
    }
    fn scale(&self, s: &S) -> Self {
        Endo::scale(self, s)
    }
    fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }
    fn norm_sqr(&self) -> f64 {
        Endo::norm_sqr(self)
    }
    fn max_abs(&self) -> f64 {
        self.entries().iter().map(|x| x.magnitude()).fold(0.0, f64::max)
    }
    fn size(&self) -> usize {
        self.entries().iter().filter(|x| !x.is_zero()).count().max(1)
    }
}

/// A plain coefficient vector (components along ∂_1..∂_n).
#[derive(Clone, Debug, PartialEq)]
pub struct Vector<S>(pub Vec<S>);

impl<S: Scalar> Coeff<S> for Vector<S> {
    fn zero_like(&self) -> Self {
        Vector(vec![S::zero(); self.0.len()])
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.0.len() == other.0.len()
    }
    fn add(&self, other: &Self) -> Self {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() + b.clone()).collect())
    }
    fn scale(&self, s: &S) -> Self {
        Vector(self.0.iter().map(|a| a.clone() * s.clone()).collect())
    }
    fn conj(&self) -> Self {
        Vector(self.0.iter().map(|a| a.conj()).collect())
    }
    fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.abs2()).sum()
    }
    fn max_abs(&self) -> f64 {
        self.0.iter().map(|a| a.magnitude()).fold(0.0, f64::max)
    }
    fn size(&self) -> usize {
        self.0.iter().filter(|x| !x.is_zero()).count().max(1)
    }
}

/// Σ_k c_k e^{i⟨k,x⟩} with finitely many nonzero c_k.
#[derive(Clone, Debug, PartialEq)]
pub struct Trig<S, C> {
    n: usize,
    proto: C,
    modes: BTreeMap<Freq, C>,
    cap: usize,
    _s: PhantomData<S>,
}

pub type TrigForm<S> = Trig<S, MultiForm<S>>;
pub type VectorField<S> = Trig<S, Vector<S>>;
pub type EndoField<S> = Trig<S, Endo<S>>;
/// A scalar function, stored as a 1-component vector field.
pub type Function<S> = Trig<S, Vector<S>>;

pub fn neg_freq(k: &[i32]) -> Freq {
    k.iter().map(|x| -x).collect()
}

fn add_freq(a: &[i32], b: &[i32]) -> Freq {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl<S: Scalar, C: Coeff<S>> Trig<S, C> {
    /// The zero field with coefficients shaped like `proto`.
    pub fn zero(n: usize, proto: &C) -> Self {
        Trig { n, proto: proto.zero_like(), modes: BTreeMap::new(), cap: DEFAULT_SUPPORT_CAP, _s: PhantomData }
    }

    pub fn constant(n: usize, c: C) -> Self {
        Self::single(n, vec![0; n], c)
    }

    pub fn single(n: usize, k: Freq, c: C) -> Self {
        let mut t = Self::zero(n, &c);
        t.add_mode(k, c);
        t
    }

    pub fn from_modes(n: usize, proto: &C, modes: impl IntoIterator<Item = (Freq, C)>) -> Result<Self> {
        let mut t = Self::zero(n, proto);
        for (k, c) in modes {
            if k.len() != n {
                return Err(Error::DimensionMismatch(format!("frequency {k:?} on T^{n}")));
            }
            if !c.same_shape(proto) {
                return Err(Error::DimensionMismatch(format!("coefficient shape at {k:?}")));
            }
            t.add_mode(k, c);
        }
        Ok(t)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn torus_dim(&self) -> usize {
        self.n
    }

    pub fn proto(&self) -> &C {
        &self.proto
    }

    pub fn modes(&self) -> &BTreeMap<Freq, C> {
        &self.modes
    }

    pub fn mode(&self, k: &[i32]) -> Option<&C> {
        self.modes.get(k)
    }

    pub fn mode_or_zero(&self, k: &[i32]) -> C {
        self.modes.get(k).cloned().unwrap_or_else(|| self.proto.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    /// Adds `c` at frequency `k`, dropping the mode if it cancels exactly.
    pub fn add_mode(&mut self, k: Freq, c: C) {
        assert_eq!(k.len(), self.n, "frequency length");
        if c.is_zero() {
            return;
        }
        match self.modes.get_mut(&k) {
            Some(old) => {
                let s = old.add(&c);
                if s.is_zero() {
                    self.modes.remove(&k);
                } else {
                    *old = s;
                }
            }
            None => {
                self.modes.insert(k, c);
            }
        }
    }

    pub fn map_modes<D: Coeff<S>>(&self, proto: &D, f: impl Fn(&[i32], &C) -> D) -> Trig<S, D> {
        let mut out = Trig::zero(self.n, proto).with_cap(self.cap);
        for (k, c) in &self.modes {
            out.add_mode(k.clone(), f(k, c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.cap = self.cap.min(other.cap);
        for (k, c) in &other.modes {
            out.add_mode(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_modes(&self.proto, |_, c| c.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-S::one()))
    }

    /// The field x ↦ conj(f(x)): coefficient at k is conj(c_{−k}).
    pub fn conj_field(&self) -> Self {
        let mut out = Trig::zero(self.n, &self.proto).with_cap(self.cap);
        for (k, c) in &self.modes {
            out.add_mode(neg_freq(k), c.conj());
        }
        out
    }

    /// max_k ‖c_{−k} − conj(c_k)‖_∞, relative to the largest coefficient.
    pub fn reality_defect(&self) -> (f64, Option<Freq>) {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let diff = self.sub(&self.conj_field());
        let mut worst = (0.0, None);
        for (k, c) in diff.modes() {
            let d = c.max_abs() / scale;
            if d > worst.0 {
                worst = (d, Some(k.clone()));
            }
        }
        worst
    }

    pub fn check_real(&self, tol: f64) -> Result<()> {
        let (d, k) = self.reality_defect();
        if d > tol {
            return Err(Error::Reality { freq: k.unwrap_or_default(), defect: d });
        }
        Ok(())
    }

    /// Total stored size, modes × terms.
    pub fn support_size(&self) -> usize {
        self.modes.values().map(|c| c.size()).sum()
    }

    pub fn check_cap(&self) -> Result<()> {
        let size = self.support_size();
        if size > self.cap {
            return Err(Error::SupportCap { size, cap: self.cap });
        }
        Ok(())
    }

    /// L² norm for the normalized measure: (Σ_k ‖c_k‖²)^{1/2}.
    pub fn norm(&self) -> f64 {
        self.modes.values().map(|c| c.norm_sqr()).fold(0.0, |a, b| a + b).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.values().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Highest |k_j| over the support.
    pub fn max_freq(&self) -> i32 {
        self.modes.keys().flat_map(|k| k.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    /// Drops modes whose coefficients are below `eps` in max-norm.
    pub fn pruned(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.modes.retain(|_, c| c.max_abs() > eps);
        out
    }

    /// Pointwise bilinear product: Σ_{k,l} f(k, a_k, l, b_l) e^{i⟨k+l,x⟩}.
    pub fn convolve<D: Coeff<S>, E: Coeff<S>>(
        &self,
        other: &Trig<S, D>,
        proto: &E,
        f: impl Fn(&[i32], &C, &[i32], &D) -> E,
    ) -> Result<Trig<S, E>> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!("T^{} vs T^{}", self.n, other.n)));
        }
        let cap = self.cap.min(other.cap);
        let mut out = Trig::zero(self.n, proto).with_cap(cap);
        for (k, a) in &self.modes {
            for (l, b) in &other.modes {
                out.add_mode(add_freq(k, l), f(k, a, l, b));
            }
            if out.modes.len() > cap {
                return Err(Error::SupportCap { size: out.support_size(), cap });
            }
        }
        out.check_cap()?;
        Ok(out)
    }
}

impl<S: ComplexScalar, C: Coeff<S>> Trig<S, C> {
    /// ∂_j: multiplies mode k by i k_j.
    pub fn partial(&self, j: usize) -> Self {
        self.map_modes(&self.proto, |k, c| c.scale(&(S::imag_unit() * S::from_i64(i64::from(k[j])))))
    }

    /// Projection onto real-valued fields: (f + conj f)/2.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj_field()).scale(&S::from_ratio(1, 2))
    }

    pub fn to_c64<D: Coeff<C64>>(&self, f: impl Fn(&C) -> D) -> Trig<C64, D> {
        let proto = f(&self.proto);
        let mut out = Trig::zero(self.n, &proto).with_cap(self.cap);
        for (k, c) in &self.modes {
            out.add_mode(k.clone(), f(c));
        }
        out
    }
}

impl<S: ComplexScalar> Trig<S, Vector<S>> {
    pub fn constant_vector(v: Vec<S>) -> Self {
        let n = v.len();
        Self::constant(n, Vector(v))
    }

    /// The coordinate field ∂_j.
    pub fn coordinate(n: usize, j: usize) -> Self {
        let mut v = vec![S::zero(); n];
        v[j] = S::one();
        Self::constant_vector(v)
    }

    pub fn component(&self, m: usize) -> Function<S> {
        self.map_modes(&Vector(vec![S::zero()]), |_, c| Vector(vec![c.0[m].clone()]))
    }
}

impl<S: ComplexScalar> Trig<S, MultiForm<S>> {
    pub fn form_dim(&self) -> usize {
        self.proto.dim()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.proto.degrees()
    }

    /// Value at a point x ∈ R^n: Σ_k c_k e^{i⟨k,x⟩}.
    pub fn eval_at(&self, x: &[f64]) -> MultiForm<C64> {
        let mut out = MultiForm::zero(self.form_dim(), &self.degrees());
        for (k, c) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| f64::from(ki) * xi).sum();
            let e = C64::new(phase.cos(), phase.sin());
            out.add_scaled(&c.map(|s| s.to_c64()), &e);
        }
        out
    }
}

impl<S: ComplexScalar> Trig<S, Endo<S>> {
    pub fn endo_dim(&self) -> usize {
        self.proto.dim()
    }

    pub fn constant_endo(n: usize, a: Endo<S>) -> Self {
        Self::constant(n, a)
    }

    pub fn eval_at(&self, x: &[f64]) -> Endo<C64> {
        let mut out = Endo::zero(self.endo_dim());
        for (k, c) in &self.modes {
            let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| f64::from(ki) * xi).sum();
            let e = C64::new(phase.cos(), phase.sin());
            out = out.add(&c.to_c64().scale(&e));
        }
        out
    }
}
