//! Model points of the calibration orbits.

use crate::exalg::{Endo, Form, MultiForm};
use crate::scalar::{ComplexScalar, Scalar};

/// ω₀ = Σ_j dx^{2j−1} ∧ dx^{2j} on R^{2n}.
pub fn kahler_form<S: Scalar>(n: usize) -> Form<S> {
    let dim = 2 * n;
    let mut w = Form::zero(dim, 2);
    for j in 0..n {
        w = w.add(&Form::monomial(dim, &[2 * j, 2 * j + 1]));
    }
    w
}

/// Ω₀ = Π_j (dx^{2j−1} + i dx^{2j}).
pub fn holomorphic_volume<S: ComplexScalar>(n: usize) -> Form<S> {
    let dim = 2 * n;
    let mut out = Form::scalar(dim, S::one());
    for j in 0..n {
        let dz = Form::coord(dim, 2 * j).add(&Form::coord(dim, 2 * j + 1).scale(&S::imag_unit()));
        out = out.wedge(&dz);
    }
    out
}

/// c_n = (−1)^{n(n−1)/2} 2^n / (i^n n!).
pub fn monge_ampere_constant<S: ComplexScalar>(n: usize) -> S {
    let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 0 { 1 } else { -1 };
    let fact: i64 = (1..=n as i64).product();
    let real = S::from_ratio(sign * (1i64 << n), fact);
    // 1/i^n = (−i)^n
    let mut ph = S::one();
    for _ in 0..n {
        ph = ph * (-S::imag_unit());
    }
    real * ph
}

/// Ω∧Ω̄ − c_n ω^n at the model point.
pub fn monge_ampere_defect<S: ComplexScalar>(n: usize) -> Form<S> {
    let om = holomorphic_volume::<S>(n);
    let w = kahler_form::<S>(n);
    let wn = (0..n).fold(Form::scalar(2 * n, S::one()), |acc, _| acc.wedge(&w));
    om.wedge(&om.conj()).sub(&wn.scale(&monge_ampere_constant::<S>(n)))
}

/// Left multiplication by i, j, k on H = R⁴ (basis 1, i, j, k).
pub fn quaternion_units() -> [Endo<f64>; 3] {
    let rows = |r: [[f64; 4]; 4]| Endo::from_rows(r.iter().map(|x| x.to_vec()).collect()).expect("square");
    let i = rows([[0., -1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.]]);
    let j = rows([[0., 0., -1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., -1., 0., 0.]]);
    let k = rows([[0., 0., 0., -1.], [0., 0., -1., 0.], [0., 1., 0., 0.], [1., 0., 0., 0.]]);
    [i, j, k]
}

/// Block-diagonal copies of the quaternion units on R^{4m}.
pub fn hk_complex_structures(m: usize) -> [Endo<f64>; 3] {
    let q = quaternion_units();
    let n = 4 * m;
    let mut out = [Endo::zero(n), Endo::zero(n), Endo::zero(n)];
    for (x, big) in q.iter().zip(out.iter_mut()) {
        for b in 0..m {
            for r in 0..4 {
                for c in 0..4 {
                    big.set(4 * b + r, 4 * b + c, *x.get(r, c));
                }
            }
        }
    }
    out
}

/// ω_X(u, v) = g(Xu, v) for the Euclidean metric.
pub fn fundamental_form(x: &Endo<f64>) -> Form<f64> {
    let n = x.dim();
    let mut w = Form::zero(n, 2);
    for a in 0..n {
        for b in a + 1..n {
            let c = *x.get(b, a);
            if c != 0.0 {
                w.add_term((1 << a) | (1 << b), c);
            }
        }
    }
    w
}

pub fn symplectic(dim: usize) -> MultiForm<f64> {
    MultiForm::single(kahler_form(dim / 2))
}

pub fn sl(n: usize) -> MultiForm<f64> {
    let om = holomorphic_volume::<crate::scalar::C64>(n);
    MultiForm::new(vec![om.map(|z| z.re), om.map(|z| z.im)]).expect("parts")
}

pub fn cy(n: usize) -> MultiForm<f64> {
    let om = holomorphic_volume::<crate::scalar::C64>(n);
    MultiForm::new(vec![om.map(|z| z.re), om.map(|z| z.im), kahler_form(n)]).expect("parts")
}

pub fn hk(m: usize) -> MultiForm<f64> {
    let [i, j, k] = hk_complex_structures(m);
    MultiForm::new(vec![fundamental_form(&i), fundamental_form(&j), fundamental_form(&k)]).expect("parts")
}

/// (φ⁰, ψ⁰) on R⁷ from the n = 3 Calabi–Yau model on the first six
/// coordinates and t = dx⁷.
pub fn g2_pair() -> (Form<f64>, Form<f64>) {
    let embed = |f: &Form<f64>| {
        let mut out = Form::zero(7, f.degree());
        for (&m, &c) in f.terms() {
            out.add_term(m, c);
        }
        out
    };
    let om = holomorphic_volume::<crate::scalar::C64>(3);
    let re = embed(&om.map(|z| z.re));
    let im = embed(&om.map(|z| z.im));
    let w = embed(&kahler_form(3));
    let t = Form::coord(7, 6);
    let phi = w.wedge(&t).add(&im);
    let psi = w.wedge(&w).scale(&0.5).sub(&re.wedge(&t));
    (phi, psi)
}

pub fn g2() -> MultiForm<f64> {
    let (phi, psi) = g2_pair();
    MultiForm::new(vec![phi, psi]).expect("parts")
}

/// The Cayley form φ⁰ ∧ dx⁸ + ψ⁰ on R⁸.
pub fn cayley() -> Form<f64> {
    let (phi, psi) = g2_pair();
    let lift = |f: &Form<f64>| {
        let mut out = Form::zero(8, f.degree());
        for (&m, &c) in f.terms() {
            out.add_term(m, c);
        }
        out
    };
    lift(&phi).wedge(&Form::coord(8, 7)).add(&lift(&psi))
}

pub fn spin7() -> MultiForm<f64> {
    MultiForm::single(cayley())
}

/// dx¹ ∧ dx² on R^dim.
pub fn degenerate(dim: usize) -> MultiForm<f64> {
    MultiForm::single(Form::monomial(dim, &[0, 1]))
}
