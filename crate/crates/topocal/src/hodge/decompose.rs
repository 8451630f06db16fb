//! Splittings of the harmonic spaces ℍ^k = E^k(V) by the parts of Φ, compared
//! with subspaces built directly from the structure.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exalg::{hodge_star, Form};
use crate::linalg;
use crate::orbits::models::hk_complex_structures;
use crate::orbits::{ek_space, irrep_projectors, subspace_gap, CalibrationSpec, Kind};
use crate::scalar::{binomial, C64};

const TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub name: String,
    pub expected_dim: usize,
    pub dim: usize,
    /// Distance to the reference subspace, when there is one.
    pub gap: Option<f64>,
    pub pass: bool,
}

fn check(name: &str, expected_dim: usize, basis: &DMatrix<f64>, reference: Option<&DMatrix<f64>>) -> DecompositionCheck {
    let dim = basis.ncols();
    let gap = reference.map(|r| subspace_gap(basis, r));
    let pass = dim == expected_dim && gap.is_none_or(|g| g <= GAP_TOL);
    DecompositionCheck { name: name.into(), expected_dim, dim, gap, pass }
}

/// Row offsets of the parts of a dense multi-form of the given degrees.
fn offsets(n: usize, degrees: &[usize]) -> Vec<(usize, usize)> {
    let mut off = 0;
    degrees
        .iter()
        .map(|&p| {
            let len = binomial(n, p);
            let r = (off, len);
            off += len;
            r
        })
        .collect()
}

fn rows(m: &DMatrix<f64>, parts: &[(usize, usize)]) -> DMatrix<f64> {
    let total: usize = parts.iter().map(|p| p.1).sum();
    let mut out = DMatrix::zeros(total, m.ncols());
    let mut r = 0;
    for &(off, len) in parts {
        out.rows_mut(r, len).copy_from(&m.rows(off, len));
        r += len;
    }
    out
}

/// Image and kernel of E^k → (selected parts), the kernel read in the other parts.
fn split(
    basis: &DMatrix<f64>,
    all: &[(usize, usize)],
    keep: &[usize],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let kept: Vec<(usize, usize)> = keep.iter().map(|&i| all[i]).collect();
    let rest: Vec<(usize, usize)> = (0..all.len()).filter(|i| !keep.contains(i)).map(|i| all[i]).collect();
    let proj = rows(basis, &kept);
    let image = linalg::range(&proj, TOL);
    let ker = linalg::nullspace(&proj, TOL);
    let kernel = linalg::range(&(rows(basis, &rest) * ker), TOL);
    (image, kernel)
}

/// Column space, empty when every entry is round-off.
fn range_abs(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.amax() <= TOL {
        return DMatrix::zeros(m.nrows(), 0);
    }
    linalg::range(m, TOL)
}

fn columns(vs: &[Vec<f64>], len: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        return DMatrix::zeros(len, 0);
    }
    let cols: Vec<DVector<f64>> = vs.iter().map(|v| DVector::from_column_slice(v)).collect();
    DMatrix::from_columns(&cols)
}

fn zeta(n: usize, j: usize, conj: bool) -> Form<C64> {
    let s = if conj { -1.0 } else { 1.0 };
    Form::coord(2 * n, 2 * j).add(&Form::coord(2 * n, 2 * j + 1).scale(&C64::new(0.0, s)))
}

/// Real span of Λ^{n,0} ⊕ Λ^{n−1,1}, as (Re β, Im β) pairs.
fn cy_holomorphic_reference(n: usize) -> DMatrix<f64> {
    let dim = 2 * n;
    let mut gens: Vec<Form<C64>> = Vec::new();
    let wedge_all = |skip: Option<usize>| {
        (0..n).filter(|&i| Some(i) != skip).fold(Form::scalar(dim, C64::new(1.0, 0.0)), |acc, i| acc.wedge(&zeta(n, i, false)))
    };
    gens.push(wedge_all(None));
    for j in 0..n {
        for k in 0..n {
            // ζ^1∧…∧ζ̂^j∧…∧ζ^n∧ζ̄^k, placed with ζ̄^k in the j-th slot
            let mut f = Form::scalar(dim, C64::new(1.0, 0.0));
            for i in 0..n {
                f = f.wedge(&if i == j { zeta(n, k, true) } else { zeta(n, i, false) });
            }
            gens.push(f);
        }
    }
    let mut vs = Vec::new();
    for g in gens {
        for ph in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let d = g.scale(&ph).dense();
            let mut v: Vec<f64> = d.iter().map(|z| z.re).collect();
            v.extend(d.iter().map(|z| z.im));
            vs.push(v);
        }
    }
    linalg::range(&columns(&vs, 2 * binomial(dim, n)), TOL)
}

/// Real primitive (1,1)-forms.
fn cy_primitive_11(n: usize) -> DMatrix<f64> {
    let dim = 2 * n;
    let len = binomial(dim, 2);
    let mut vs = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let f = zeta(n, j, false).wedge(&zeta(n, k, true));
            vs.push(f.dense().iter().map(|z| z.re).collect());
            vs.push(f.dense().iter().map(|z| z.im).collect());
        }
    }
    let all = linalg::range(&columns(&vs, len), TOL);
    let w = DVector::from_vec(crate::orbits::models::kahler_form::<f64>(n).dense()).normalize();
    let off = &all - &w * (w.transpose() * &all);
    linalg::range(&off, TOL)
}

/// 2-forms of type (1,1) for each of I, J, K.
pub fn hk_lambda2(m: usize) -> DMatrix<f64> {
    let n = 4 * m;
    let len = binomial(n, 2);
    let structures = hk_complex_structures(m);
    let mut blocks = Vec::new();
    for x in &structures {
        let mut a = DMatrix::zeros(len, len);
        for c in 0..len {
            let mut e = vec![0.0; len];
            e[c] = 1.0;
            let f = Form::from_dense(n, 2, &e);
            let d = DVector::from_vec(f.pullback(x).sub(&f).dense());
            a.set_column(c, &d);
        }
        blocks.push(a);
    }
    let stacked = DMatrix::from_fn(3 * len, len, |r, c| blocks[r / len][(r % len, c)]);
    linalg::nullspace(&stacked, TOL)
}

fn star_columns(spec: &CalibrationSpec, b: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    let n = spec.dim;
    let cols: Vec<DVector<f64>> = (0..b.ncols())
        .map(|c| {
            let f = Form::from_dense(n, p, b.column(c).as_slice());
            hodge_star(&spec.g_v, &f, 1).map(|s| DVector::from_vec(s.dense()))
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_columns(&cols))
}

/// Structure-specific splittings of ℍ⁰, ℍ¹, ℍ² at the model point. Kinds
/// without a listed splitting return no checks.
pub fn decomposition_checks(spec: &CalibrationSpec) -> Result<Vec<DecompositionCheck>> {
    let n = spec.dim;
    let degs = |k: usize| -> Vec<usize> { spec.degrees.iter().map(|p| (p + k).saturating_sub(1)).collect() };
    let mut out = Vec::new();
    match spec.kind {
        Kind::Cy => {
            let c = n / 2;
            let e1 = ek_space(spec, 1);
            let (image, kernel) = split(&e1, &offsets(n, &degs(1)), &[0, 1]);
            out.push(check("H1: H^{n,0}+H^{n-1,1} (Omega part)", 2 + 2 * c * c, &image, Some(&cy_holomorphic_reference(c))));
            out.push(check("H1: P^{1,1} (omega part of the rest)", c * c - 1, &kernel, Some(&cy_primitive_11(c))));
        }
        Kind::Hk => {
            let m = n / 4;
            let e1 = ek_space(spec, 1);
            let (image, kernel) = split(&e1, &offsets(n, &degs(1)), &[1, 2]);
            out.push(check("H1: H^{2,0}+H^{1,1} (omega_J, omega_K parts)", 12 * m * m - 2 * m, &image, None));
            out.push(check("H1: Lambda2_HK (omega_I part of the rest)", m * (2 * m + 1), &kernel, Some(&hk_lambda2(m))));
        }
        Kind::G2 => {
            let e2 = ek_space(spec, 2);
            let (image, kernel) = split(&e2, &offsets(n, &degs(2)), &[0]);
            out.push(check("H2: H^4 (4-form part)", 35, &image, Some(&DMatrix::identity(35, 35))));
            let l14 = irrep_projectors(spec, 2)?.into_iter().find(|p| p.dim == 14).map(|p| p.basis);
            let star14 = match l14 {
                Some(b) => linalg::range(&star_columns(spec, &b, 2)?, TOL),
                None => DMatrix::zeros(binomial(n, 5), 0),
            };
            out.push(check("H2: H^5_14 (5-form part of the rest)", 14, &kernel, Some(&star14)));
            let e0 = ek_space(spec, 0);
            let (e0_two, _) = split(&e0, &offsets(n, &degs(0)), &[0]);
            let l7 = irrep_projectors(spec, 2)?.into_iter().find(|p| p.dim == 7).map(|p| p.basis);
            out.push(check("H0: H^2_7 (2-form part)", 7, &e0_two, l7.as_ref()));
        }
        Kind::Spin7 => {
            let e1 = ek_space(spec, 1);
            for p in irrep_projectors(spec, 4)? {
                let expected = if p.dim == 27 { 0 } else { p.dim };
                let image = range_abs(&(&p.matrix * &e1));
                out.push(check(&format!("H1: Lambda4_{} component", p.dim), expected, &image, None));
            }
            let e0 = ek_space(spec, 0);
            let l8 = irrep_projectors(spec, 3)?.into_iter().find(|p| p.dim == 8).map(|p| p.basis);
            out.push(check("H0: H^3_8", 8, &e0, l8.as_ref()));
        }
        _ => {}
    }
    Ok(out)
}
