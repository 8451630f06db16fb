//! Random real-valued trig fields for identity checks.
//!
//! Coefficients are quarter-integers so the same draw is exact in rational
//! arithmetic and in floating point.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{neg_freq, EndoField, Freq, Trig, TrigForm, Vector, VectorField};
use crate::exalg::form::bits;
use crate::exalg::{Endo, Form, MultiForm};
use crate::scalar::{ComplexScalar, C64};

#[derive(Clone, Debug)]
pub struct SampleShape {
    pub torus_dim: usize,
    /// Number of frequency pairs ±k (the zero mode counts once).
    pub modes: usize,
    pub max_freq: i32,
    pub include_zero: bool,
    /// Nonzero coefficients per mode; `None` means dense.
    pub terms: Option<usize>,
}

impl SampleShape {
    pub fn new(torus_dim: usize, modes: usize, max_freq: i32) -> Self {
        SampleShape { torus_dim, modes, max_freq, include_zero: true, terms: None }
    }
}

fn quarter<S: ComplexScalar, R: Rng>(rng: &mut R, complex: bool) -> S {
    let re = f64::from(rng.gen_range(-8i32..=8)) / 4.0;
    let im = if complex { f64::from(rng.gen_range(-8i32..=8)) / 4.0 } else { 0.0 };
    S::from_c64(C64::new(re, im)).expect("complex scalar")
}

fn frequencies<R: Rng>(rng: &mut R, shape: &SampleShape) -> Vec<Freq> {
    let n = shape.torus_dim;
    let mut out: Vec<Freq> = Vec::new();
    if shape.include_zero {
        out.push(vec![0; n]);
    }
    let mut guard = 0;
    while out.len() < shape.modes && guard < 10_000 {
        guard += 1;
        let k: Freq = (0..n).map(|_| rng.gen_range(-shape.max_freq..=shape.max_freq)).collect();
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        if out.contains(&k) || out.contains(&neg_freq(&k)) {
            continue;
        }
        out.push(k);
    }
    out
}

/// Builds a real field from per-mode draws: c_{−k} = conj(c_k), c_0 real.
fn realize<S: ComplexScalar, C: super::Coeff<S>>(
    n: usize,
    proto: &C,
    freqs: Vec<Freq>,
    mut draw: impl FnMut(bool) -> C,
) -> Trig<S, C> {
    let mut t = Trig::zero(n, proto);
    for k in freqs {
        if k.iter().all(|&x| x == 0) {
            t.add_mode(k, draw(false));
        } else {
            let c = draw(true);
            t.add_mode(neg_freq(&k), c.conj());
            t.add_mode(k, c);
        }
    }
    t
}

pub fn random_form<S: ComplexScalar, R: Rng>(rng: &mut R, dim: usize, degree: usize, terms: Option<usize>, complex: bool) -> Form<S> {
    let mut basis = bits::basis_masks(dim, degree);
    basis.shuffle(rng);
    let take = terms.unwrap_or(basis.len()).min(basis.len());
    let mut f = Form::zero(dim, degree);
    for &m in &basis[..take] {
        f.add_term(m, quarter::<S, R>(rng, complex));
    }
    f
}

pub fn random_endo<S: ComplexScalar, R: Rng>(rng: &mut R, dim: usize, complex: bool) -> Endo<S> {
    let rows = (0..dim).map(|_| (0..dim).map(|_| quarter::<S, R>(rng, complex)).collect()).collect();
    Endo::from_rows(rows).expect("square")
}

pub fn trig_form<S: ComplexScalar, R: Rng>(rng: &mut R, shape: &SampleShape, degrees: &[usize]) -> TrigForm<S> {
    let n = shape.torus_dim;
    let freqs = frequencies(rng, shape);
    let proto = MultiForm::zero(n, degrees);
    realize(n, &proto, freqs, |cx| {
        MultiForm::new(degrees.iter().map(|&p| random_form(rng, n, p, shape.terms, cx)).collect()).expect("parts")
    })
}

pub fn vector_field<S: ComplexScalar, R: Rng>(rng: &mut R, shape: &SampleShape) -> VectorField<S> {
    let n = shape.torus_dim;
    let freqs = frequencies(rng, shape);
    realize(n, &Vector(vec![S::zero(); n]), freqs, |cx| Vector((0..n).map(|_| quarter(rng, cx)).collect()))
}

pub fn endo_field<S: ComplexScalar, R: Rng>(rng: &mut R, shape: &SampleShape) -> EndoField<S> {
    let n = shape.torus_dim;
    let freqs = frequencies(rng, shape);
    realize(n, &Endo::zero(n), freqs, |cx| random_endo(rng, n, cx))
}

/// A strictly upper-triangular constant field (nilpotent at every point).
pub fn nilpotent_endo_field<S: ComplexScalar, R: Rng>(rng: &mut R, n: usize) -> EndoField<S> {
    let mut e = Endo::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            e.set(i, j, quarter(rng, false));
        }
    }
    Trig::constant(n, e)
}
