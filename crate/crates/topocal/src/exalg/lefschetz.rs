//! Lefschetz decomposition a = Σ_j ω^j ∧ prim_j with respect to a nondegenerate 2-form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exalg::form::bits;
use crate::exalg::Form;
use crate::linalg;

/// Antisymmetric matrix W_{ab} = ω(e_a, e_b).
pub fn two_form_matrix(omega: &Form<f64>) -> DMatrix<f64> {
    let n = omega.dim();
    let mut w = DMatrix::zeros(n, n);
    for (&m, &c) in omega.terms() {
        let idx = bits::indices(m);
        w[(idx[0], idx[1])] = c;
        w[(idx[1], idx[0])] = -c;
    }
    w
}

/// Contraction with ω through its Poisson bivector π = W⁻¹:
/// Λβ = Σ_{a<b} π^{ab} i_{e_b} i_{e_a} β.
pub fn contract_omega(pi: &DMatrix<f64>, beta: &Form<f64>) -> Form<f64> {
    let n = beta.dim();
    let mut out = Form::zero(n, beta.degree().saturating_sub(2));
    if beta.degree() < 2 {
        return out;
    }
    for a in 0..n {
        let ia = beta.interior_coord(a);
        for b in a + 1..n {
            let p = pi[(a, b)];
            if p != 0.0 {
                out.add_scaled(&ia.interior_coord(b), &p);
            }
        }
    }
    out
}

fn omega_power(omega: &Form<f64>, j: usize) -> Form<f64> {
    (0..j).fold(Form::scalar(omega.dim(), 1.0), |acc, _| acc.wedge(omega))
}

fn check_symplectic(omega: &Form<f64>) -> Result<DMatrix<f64>> {
    if omega.degree() != 2 {
        return Err(Error::InvalidInput("Lefschetz decomposition needs a 2-form".into()));
    }
    let w = two_form_matrix(omega);
    if omega.dim() % 2 == 1 || linalg::rank(&w, 1e-12) < omega.dim() {
        return Err(Error::DegenerateForm);
    }
    Ok(w.try_inverse().ok_or(Error::DegenerateForm)?)
}

/// Primitive q-forms: the kernel of Λ on Λ^q, as column vectors in colex coordinates.
pub fn primitive_basis(omega: &Form<f64>, q: usize) -> Result<DMatrix<f64>> {
    let pi = check_symplectic(omega)?;
    let n = omega.dim();
    let basis = bits::basis_masks(n, q);
    if q < 2 {
        return Ok(DMatrix::identity(basis.len(), basis.len()));
    }
    let cols: Vec<DVector<f64>> = basis
        .iter()
        .map(|&m| {
            let mut f = Form::zero(n, q);
            f.add_term(m, 1.0);
            DVector::from_vec(contract_omega(&pi, &f).dense())
        })
        .collect();
    let lam = DMatrix::from_columns(&cols);
    Ok(linalg::nullspace(&lam, 1e-12))
}

/// Returns prim_0, prim_1, … with a = Σ_j ω^j ∧ prim_j and Λ prim_j = 0.
pub fn lefschetz_decompose(omega: &Form<f64>, a: &Form<f64>) -> Result<Vec<Form<f64>>> {
    check_symplectic(omega)?;
    if omega.dim() != a.dim() {
        return Err(Error::DimensionMismatch("omega and form live in different dimensions".into()));
    }
    let n = omega.dim();
    let p = a.degree();
    let mut blocks = Vec::new();
    let mut layout = Vec::new();
    for j in 0..=p / 2 {
        let q = p - 2 * j;
        let prim = primitive_basis(omega, q)?;
        let wj = omega_power(omega, j);
        let cols: Vec<DVector<f64>> = (0..prim.ncols())
            .map(|c| {
                let f = Form::from_dense(n, q, prim.column(c).as_slice());
                DVector::from_vec(wj.wedge(&f).dense())
            })
            .collect();
        let m = if cols.is_empty() {
            DMatrix::zeros(crate::scalar::binomial(n, p), 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        layout.push((q, prim));
        blocks.push(m);
    }
    let big = linalg::hstack(&blocks);
    let target = DVector::from_vec(a.dense());
    let coeffs = linalg::pinv(&big, 1e-12) * &target;
    let resid = (&big * &coeffs - &target).norm();
    if resid > 1e-9 * target.norm().max(1.0) {
        return Err(Error::NotInSubspace(resid));
    }
    let mut out = Vec::new();
    let mut off = 0;
    for (q, prim) in layout {
        let k = prim.ncols();
        let v = &prim * coeffs.rows(off, k);
        out.push(Form::from_dense(n, q, v.as_slice()).pruned(1e-15));
        off += k;
    }
    Ok(out)
}

/// Σ_j ω^j ∧ prim_j.
pub fn lefschetz_recombine(omega: &Form<f64>, prims: &[Form<f64>]) -> Form<f64> {
    let mut acc: Option<Form<f64>> = None;
    for (j, pj) in prims.iter().enumerate() {
        let term = omega_power(omega, j).wedge(pj);
        acc = Some(match acc {
            Some(s) => s.add(&term),
            None => term,
        });
    }
    acc.expect("at least one component")
}
