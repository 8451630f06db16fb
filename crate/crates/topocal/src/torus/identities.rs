//! Randomized checks of the operator identities on trig fields, for the CLI
//! and the Python binding. The same draws run in floating point or over Q.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sample::{self, SampleShape};
use super::{nijenhuis, EndoField, Trig, TrigForm, VectorField};
use crate::error::{Error, Result};
use crate::exalg::{Endo, Form, MultiForm};
use crate::linalg;
use crate::orbits::{ek_space, model_calibration, Kind, Params};
use crate::scalar::{ComplexScalar, C64, CQ};

const DIM: usize = 4;
const FLOAT_TOL: f64 = 1e-10;
const FIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOptions {
    pub trials: usize,
    pub seed: u64,
    pub max_freq: i32,
    /// Exact rational arithmetic instead of f64.
    pub rational: bool,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        IdentityOptions { trials: 100, seed: 0, max_freq: 2, rational: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub options: IdentityOptions,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

struct Acc {
    name: &'static str,
    samples: usize,
    worst: f64,
}

impl Acc {
    fn new(name: &'static str) -> Self {
        Acc { name, samples: 0, worst: 0.0 }
    }

    fn push(&mut self, r: f64) {
        self.samples += 1;
        self.worst = self.worst.max(r);
    }

    fn finish(self, tol: f64) -> IdentityCheck {
        IdentityCheck { name: self.name.into(), samples: self.samples, max_residual: self.worst, tol, pass: self.worst <= tol }
    }
}

fn rel_diff<S: ComplexScalar>(a: &TrigForm<S>, b: &TrigForm<S>) -> f64 {
    a.sub(b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

/// (Re Ω, Im Ω, ω) for complex dimension 2.
fn cy2<S: ComplexScalar>() -> MultiForm<S> {
    let i = S::imag_unit();
    let dz = |j: usize| Form::<S>::coord(DIM, 2 * j).add(&Form::coord(DIM, 2 * j + 1).scale(&i));
    let om = dz(0).wedge(&dz(1));
    let w = Form::monomial(DIM, &[0, 1]).add(&Form::monomial(DIM, &[2, 3]));
    MultiForm::new(vec![om.re(), om.im(), w]).expect("parts")
}

fn to_float(t: &TrigForm<impl ComplexScalar>) -> TrigForm<C64> {
    t.to_c64(|c| c.map(|x| x.to_c64()))
}

struct Sample<S: ComplexScalar> {
    a: EndoField<S>,
    b: EndoField<S>,
    alpha: TrigForm<S>,
    beta: TrigForm<S>,
    theta: TrigForm<S>,
    /// c + DX, so ρ̂_cΦ⁰ + d i_XΦ⁰ is closed.
    closed: EndoField<S>,
}

fn draw<S: ComplexScalar>(rng: &mut ChaCha8Rng, trial: usize, max_freq: i32, zero: bool) -> Sample<S> {
    let shape = if trial % 2 == 0 {
        SampleShape { torus_dim: DIM, modes: 1, max_freq, include_zero: false, terms: None }
    } else {
        SampleShape { torus_dim: DIM, modes: 2, max_freq, include_zero: true, terms: None }
    };
    let p = trial % 3;
    let mut s = Sample {
        a: sample::endo_field(rng, &shape),
        b: sample::endo_field(rng, &shape),
        alpha: sample::trig_form(rng, &shape, &[p]),
        beta: sample::trig_form(rng, &shape, &[1]),
        theta: sample::trig_form(rng, &shape, &[1]),
        closed: {
            let c: EndoField<S> = Trig::constant(DIM, sample::random_endo(rng, DIM, false));
            let x: VectorField<S> = sample::vector_field(rng, &SampleShape { include_zero: false, ..shape.clone() });
            c.add(&x.jacobian())
        },
    };
    if zero {
        let z = |e: &EndoField<S>| Trig::zero(DIM, e.proto());
        let zf = |f: &TrigForm<S>| Trig::zero(DIM, f.proto());
        s = Sample { a: z(&s.a), b: z(&s.b), alpha: zf(&s.alpha), beta: zf(&s.beta), theta: zf(&s.theta), closed: z(&s.closed) };
    }
    s
}

/// Largest relative residual of fitting the modes of `t` into span(q).
fn fit(q: &nalgebra::DMatrix<f64>, t: &TrigForm<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for c in t.modes().values() {
        let d = c.dense();
        for part in [d.iter().map(|z| z.re).collect::<Vec<_>>(), d.iter().map(|z| z.im).collect()] {
            worst = worst.max(linalg::projection_residual(q, &nalgebra::DVector::from_vec(part)));
        }
    }
    worst
}

fn run<S: ComplexScalar>(opts: &IdentityOptions, tol: f64) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let phi: TrigForm<S> = Trig::constant(DIM, cy2::<S>());
    let e2 = ek_space(&model_calibration(Kind::Cy, &Params::complex_dim(2))?, 2);
    let mut anti = Acc::new("anti_derivation");
    let mut frame = Acc::new("frame_formula");
    let mut comm = Acc::new("commutator_nijenhuis");
    let mut g = Acc::new("g_closed_direction");
    let mut member = Acc::new("ad_iterates_in_e2");
    let mut trivial = Acc::new("nijenhuis_trivial");
    // trial index == trials: adversarial zero fields
    for trial in 0..=opts.trials {
        let s = draw::<S>(&mut rng, trial, opts.max_freq, trial == opts.trials);
        let p = s.alpha.degrees()[0];
        let sign = if p % 2 == 0 { S::one() } else { -S::one() };
        let lhs = s.alpha.wedge(&s.beta)?.lie_operator_l(&s.a)?;
        let rhs = s.alpha.lie_operator_l(&s.a)?.wedge(&s.beta)?.add(&s.alpha.wedge(&s.beta.lie_operator_l(&s.a)?)?.scale(&sign));
        anti.push(rel_diff(&lhs, &rhs));

        frame.push(rel_diff(&s.alpha.lie_operator_l(&s.a)?, &s.alpha.lie_operator_l_frame(&s.a)?));

        let lhs = s.theta.rho_hat(&s.b)?.lie_operator_l(&s.a)?.sub(&s.theta.lie_operator_l(&s.a)?.rho_hat(&s.b)?);
        let rhs = s.theta.contract_two_vector(&nijenhuis(&s.a, &s.b)?)?.sub(&s.theta.lie_operator_l(&s.a.matmul(&s.b)?)?);
        comm.push(rel_diff(&lhs, &rhs));

        let ca = &s.closed;
        let tangent = phi.rho_hat(ca)?;
        g.push(rel_diff(&tangent.rho_hat(ca)?.d(), &phi.g_operator(ca)?.neg()));

        // Ad^k G(a,a)Φ⁰ for k = 0, 1
        let g0 = phi.g_operator(&s.a)?;
        let g1 = g0.rho_hat(&s.a)?.sub(&phi.rho_hat(&s.a)?.g_operator(&s.a)?);
        member.push(fit(&e2, &to_float(&g0)).max(fit(&e2, &to_float(&g1))));

        let c1: EndoField<S> = Trig::constant(DIM, sample::random_endo(&mut rng, DIM, false));
        let c2: EndoField<S> = Trig::constant(DIM, sample::random_endo(&mut rng, DIM, false));
        let id: EndoField<S> = Trig::constant(DIM, Endo::identity(DIM));
        trivial.push(nijenhuis(&id, &id)?.max_abs().max(nijenhuis(&c1, &c2)?.max_abs()));
    }
    Ok(vec![
        anti.finish(tol),
        frame.finish(tol),
        comm.finish(tol),
        g.finish(tol),
        member.finish(FIT_TOL),
        trivial.finish(0.0),
    ])
}

/// Runs every identity on `trials` random samples plus one all-zero sample.
pub fn identity_suite(opts: &IdentityOptions) -> Result<IdentityReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if opts.max_freq < 1 {
        return Err(Error::InvalidInput("frequency bound must be at least 1".into()));
    }
    let checks = if opts.rational { run::<CQ>(opts, 0.0)? } else { run::<C64>(opts, FLOAT_TOL)? };
    let pass = checks.iter().all(|c| c.pass);
    Ok(IdentityReport { options: opts.clone(), checks, pass })
}
