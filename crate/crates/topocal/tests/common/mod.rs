#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use topocal::exalg::{Endo, Form};
use topocal::scalar::Scalar;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_form(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Form<f64> {
    let v: Vec<f64> = (0..topocal::scalar::binomial(n, p)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Form::from_dense(n, p, &v)
}

pub fn random_endo(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Endo<f64> {
    let v: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-scale..scale)).collect();
    Endo::from_vec(n, &v)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn perm_parity(p: &[usize]) -> bool {
    let mut odd = false;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                odd = !odd;
            }
        }
    }
    odd
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// α(v_1,…,v_p) = Σ_I α_I det[θ^{i_a}(v_b)], computed without the mask machinery.
pub fn evaluate<S: Scalar>(alpha: &Form<S>, vs: &[Vec<f64>]) -> f64 {
    assert_eq!(vs.len(), alpha.degree());
    let mut acc = 0.0;
    for (&m, c) in alpha.terms() {
        let idx: Vec<usize> = (0..32).filter(|i| m & (1 << i) != 0).collect();
        let mat = DMatrix::from_fn(idx.len(), idx.len(), |a, b| vs[b][idx[a]]);
        let det = if idx.is_empty() { 1.0 } else { mat.determinant() };
        acc += c.to_c64().re * det;
    }
    acc
}

/// (α∧β)(v_1..v_{p+q}) by explicit antisymmetrization of α⊗β.
pub fn wedge_oracle(alpha: &Form<f64>, beta: &Form<f64>, vs: &[Vec<f64>]) -> f64 {
    let p = alpha.degree();
    let q = beta.degree();
    let mut acc = 0.0;
    for sigma in permutations(p + q) {
        let va: Vec<Vec<f64>> = sigma[..p].iter().map(|&i| vs[i].clone()).collect();
        let vb: Vec<Vec<f64>> = sigma[p..].iter().map(|&i| vs[i].clone()).collect();
        let s = if perm_parity(&sigma) { -1.0 } else { 1.0 };
        acc += s * evaluate(alpha, &va) * evaluate(beta, &vb);
    }
    let fact = |k: usize| (1..=k).product::<usize>() as f64;
    acc / (fact(p) * fact(q))
}

pub fn mat_vec(m: &Endo<f64>, v: &[f64]) -> Vec<f64> {
    m.apply(v)
}

/// Matrix logarithm near the identity by the Mercator series.
pub fn log_near_identity(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let x = g - DMatrix::identity(n, n);
    assert!(x.norm() < 0.5, "log series needs ‖g − I‖ < 1/2");
    let mut sum = DMatrix::zeros(n, n);
    let mut pow = x.clone();
    for k in 1..200 {
        let term = &pow / k as f64;
        if k % 2 == 1 {
            sum += &term;
        } else {
            sum -= &term;
        }
        pow = &pow * &x;
        if pow.norm() < 1e-18 {
            break;
        }
    }
    sum
}
