//! Linear analysis at a point of an orbit: isotropy, E^k(V), the metrical
//! and elliptic predicates, and isotypic decompositions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CalibrationSpec, Kind};
use crate::error::{Error, Result};
use crate::exalg::form::bits;
use crate::exalg::{Endo, Form, MultiForm};
use crate::linalg::exact::QMatrix;
use crate::linalg::{self, hstack};
use crate::scalar::{Scalar, Q};

/// Relative rank tolerance on floats.
const RANK_TOL: f64 = 1e-9;

/// Columns ρ̂_{E_ij}Φ, indexed by i·n + j.
pub fn rho_image_matrix(phi: &MultiForm<f64>) -> DMatrix<f64> {
    let n = phi.dim();
    let cols: Vec<DVector<f64>> = (0..n * n)
        .map(|c| DVector::from_vec(phi.rho_hat(&Endo::unit(n, c / n, c % n)).dense()))
        .collect();
    DMatrix::from_columns(&cols)
}

fn rho_image_exact(phi: &MultiForm<Q>) -> QMatrix {
    let n = phi.dim();
    let len = MultiForm::<Q>::dense_len(n, &phi.degrees());
    let cols: Vec<Vec<Q>> = (0..n * n).map(|c| phi.rho_hat(&Endo::unit(n, c / n, c % n)).dense()).collect();
    QMatrix::from_columns(len, &cols)
}

/// Matrix of ρ̂_ξ on Λ^p in colex coordinates.
pub fn rho_matrix(xi: &Endo<f64>, p: usize) -> DMatrix<f64> {
    let n = xi.dim();
    let basis = bits::basis_masks(n, p);
    let cols: Vec<DVector<f64>> = basis
        .iter()
        .map(|&m| {
            let mut f = Form::zero(n, p);
            f.add_term(m, 1.0);
            DVector::from_vec(f.rho_hat(xi).dense())
        })
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::from_columns(&cols)
}

/// Orthonormal (Frobenius) basis of 𝔥 = ker(ξ ↦ ρ̂_ξΦ).
pub fn isotropy_algebra(spec: &CalibrationSpec) -> Vec<Endo<f64>> {
    let n = spec.dim;
    let null = match spec.phi0_exact() {
        Some(q) => {
            let ker = rho_image_exact(&q).nullspace();
            if ker.is_empty() {
                DMatrix::zeros(n * n, 0)
            } else {
                let raw = QMatrix::from_columns(n * n, &ker).to_f64();
                linalg::range(&raw, 1e-12)
            }
        }
        None => linalg::nullspace(&rho_image_matrix(&spec.phi0), RANK_TOL),
    };
    (0..null.ncols()).map(|j| Endo::from_vec(n, null.column(j).as_slice())).collect()
}

/// The generators θ^J ∧ i_{e_i}Φ, |J| = k, as columns in ⊕Λ^{p+k−1}.
pub fn ek_generators(phi: &MultiForm<f64>, k: usize) -> DMatrix<f64> {
    let n = phi.dim();
    let degrees: Vec<usize> = phi.degrees().iter().map(|p| (p + k).saturating_sub(1)).collect();
    let len = MultiForm::<f64>::dense_len(n, &degrees);
    let mut cols = Vec::new();
    for i in 0..n {
        let base = phi.interior_coord(i);
        for m in bits::basis_masks(n, k) {
            let mut g = base.clone();
            for j in bits::indices(m).into_iter().rev() {
                g = g.wedge_coord(j);
            }
            if !g.is_zero() {
                cols.push(DVector::from_vec(g.dense()));
            }
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(len, 0);
    }
    DMatrix::from_columns(&cols)
}

pub fn ek_generators_exact(phi: &MultiForm<Q>, k: usize) -> QMatrix {
    let n = phi.dim();
    let degrees: Vec<usize> = phi.degrees().iter().map(|p| (p + k).saturating_sub(1)).collect();
    let len = MultiForm::<Q>::dense_len(n, &degrees);
    let mut cols = Vec::new();
    for i in 0..n {
        let base = phi.interior_coord(i);
        for m in bits::basis_masks(n, k) {
            let mut g = base.clone();
            for j in bits::indices(m).into_iter().rev() {
                g = g.wedge_coord(j);
            }
            if !g.is_zero() {
                cols.push(g.dense());
            }
        }
    }
    QMatrix::from_columns(len, &cols)
}

/// Orthonormal basis of E^k(V) (columns, Euclidean coefficients).
pub fn ek_space(spec: &CalibrationSpec, k: usize) -> DMatrix<f64> {
    let gens = ek_generators(&spec.phi0, k);
    if let Some(q) = spec.phi0_exact() {
        // pick independent generators exactly, then orthonormalize
        let basis = ek_generators_exact(&q, k).column_basis();
        if basis.is_empty() {
            return DMatrix::zeros(gens.nrows(), 0);
        }
        let m = QMatrix::from_columns(gens.nrows(), &basis).to_f64();
        let qr = m.clone().qr();
        return qr.q().columns(0, m.ncols()).into_owned();
    }
    linalg::range(&gens, RANK_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricalVerdict {
    pub metrical: bool,
    /// Largest ‖gξ + ξᵀg‖ over the orthonormal basis of 𝔥.
    pub max_defect: f64,
    /// A nonzero element of 𝔥 violating the condition, symmetric when 𝔥 has one.
    pub witness: Option<Vec<Vec<f64>>>,
    pub witness_symmetric: bool,
}

/// 𝔥 ⊆ so(V, g_V) at the Lie-algebra level.
pub fn check_metrical(spec: &CalibrationSpec) -> MetricalVerdict {
    check_metrical_with(spec, &isotropy_algebra(spec))
}

fn check_metrical_with(spec: &CalibrationSpec, iso: &[Endo<f64>]) -> MetricalVerdict {
    let g = spec.g_v.gram();
    let defect = |xi: &Endo<f64>| {
        let x = xi.to_dmatrix();
        g * &x + x.transpose() * g
    };
    let max_defect = iso.iter().map(|x| defect(x).norm()).fold(0.0, f64::max);
    if max_defect <= 1e-9 {
        return MetricalVerdict { metrical: true, max_defect, witness: None, witness_symmetric: false };
    }
    // look for ξ = Σ c_a ξ_a with gξ − ξᵀg = 0, i.e. g-symmetric
    let n = spec.dim;
    let cols: Vec<DVector<f64>> = iso
        .iter()
        .map(|xi| {
            let x = xi.to_dmatrix();
            DVector::from_iterator(n * n, (g * &x - x.transpose() * g).iter().copied())
        })
        .collect();
    let anti = DMatrix::from_columns(&cols);
    let ker = linalg::nullspace(&anti, RANK_TOL);
    let (witness, symmetric) = if ker.ncols() > 0 {
        let c = ker.column(0);
        let mut w = Endo::zero(n);
        for (a, xi) in iso.iter().enumerate() {
            w = w.add(&xi.scale(&c[a]));
        }
        (w, true)
    } else {
        let worst = iso
            .iter()
            .max_by(|a, b| defect(a).norm().partial_cmp(&defect(b).norm()).unwrap())
            .expect("nonzero defect needs an element")
            .clone();
        (worst, false)
    };
    let scale = witness.get(0, 0).abs().max(witness.norm());
    let rows = witness.rows().into_iter().map(|r| r.into_iter().map(|x| clean(x / scale)).collect()).collect();
    MetricalVerdict { metrical: false, max_defect, witness: Some(rows), witness_symmetric: symmetric }
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticWitness {
    pub u: Vec<f64>,
    /// Position (1 or 2) of the symbol sequence where exactness fails.
    pub position: usize,
    /// dim ker(∧u|E^k) − rank(∧u|E^{k−1}).
    pub rank_gap: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticVerdict {
    pub elliptic: bool,
    /// Random covectors tried after the coordinate and contraction covectors.
    pub trials: usize,
    pub seed: u64,
    pub exact: bool,
    pub ek_dims: [usize; 3],
    pub witness: Option<EllipticWitness>,
}

fn wedge_cov_f64(u: &[f64], basis: &DMatrix<f64>, n: usize, degrees: &[usize]) -> DMatrix<f64> {
    let out_deg: Vec<usize> = degrees.iter().map(|p| p + 1).collect();
    let rows = MultiForm::<f64>::dense_len(n, &out_deg);
    let cols: Vec<DVector<f64>> = (0..basis.ncols())
        .map(|c| {
            let a = MultiForm::from_dense(n, degrees, basis.column(c).as_slice());
            let mut acc = MultiForm::zero(n, &out_deg);
            for (j, &uj) in u.iter().enumerate() {
                if uj != 0.0 {
                    acc.add_scaled(&a.wedge_coord(j), &uj);
                }
            }
            DVector::from_vec(acc.dense())
        })
        .collect();
    if cols.is_empty() {
        return DMatrix::zeros(rows, 0);
    }
    DMatrix::from_columns(&cols)
}

fn wedge_cov_q(u: &[i64], basis: &[Vec<Q>], n: usize, degrees: &[usize]) -> QMatrix {
    let out_deg: Vec<usize> = degrees.iter().map(|p| p + 1).collect();
    let rows = MultiForm::<Q>::dense_len(n, &out_deg);
    let cols: Vec<Vec<Q>> = basis
        .iter()
        .map(|col| {
            let a = MultiForm::from_dense(n, degrees, col);
            let mut acc = MultiForm::zero(n, &out_deg);
            for (j, &uj) in u.iter().enumerate() {
                if uj != 0 {
                    acc.add_scaled(&a.wedge_coord(j), &Q::from_i64(uj));
                }
            }
            acc.dense()
        })
        .collect();
    QMatrix::from_columns(rows, &cols)
}

fn exactness(dims: &[usize; 3], r: &[usize; 3]) -> Option<(usize, i64)> {
    for k in 1..=2 {
        let gap = (dims[k] as i64 - r[k] as i64) - r[k - 1] as i64;
        if gap != 0 {
            return Some((k, gap));
        }
    }
    None
}

/// Covectors i_{e_J}Φ obtained by contracting a part of Φ down to degree 1.
/// Degenerate directions of Φ live in their span, so they are tried first.
fn contraction_covectors(phi: &MultiForm<f64>) -> Vec<Vec<f64>> {
    let n = phi.dim();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for part in phi.parts() {
        let p = part.degree();
        if p < 2 {
            continue;
        }
        for m in bits::basis_masks(n, p - 1) {
            let mut f = part.clone();
            for j in bits::indices(m) {
                f = f.interior_coord(j);
            }
            let v = f.dense();
            if v.iter().any(|x| x.abs() > 1e-12) && !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

fn covectors_int(phi: &MultiForm<f64>, trials: usize, seed: u64) -> Vec<Vec<i64>> {
    let n = phi.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for v in contraction_covectors(phi) {
        let u: Vec<i64> = v.iter().map(|&x| x as i64).collect();
        if !out.contains(&u) {
            out.push(u);
        }
    }
    let fixed = out.len();
    while out.len() < fixed + trials {
        let u: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        if u.iter().any(|&x| x != 0) {
            out.push(u);
        }
    }
    out
}

fn covectors_unit(phi: &MultiForm<f64>, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = phi.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for v in contraction_covectors(phi) {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(v.into_iter().map(|x| x / norm).collect());
    }
    let fixed = out.len();
    while out.len() < fixed + trials {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            out.push(u.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Exactness of E⁰ → E¹ → E² → E³ under ∧u at positions 1 and 2, for the
/// coordinate covectors, the contraction covectors of Φ, and `trials` random ones.
///
/// Integer-valued Φ is decided in exact arithmetic with integer covectors
/// (exactness is invariant under scaling u); other points use SVD ranks.
pub fn check_elliptic(spec: &CalibrationSpec, trials: usize, seed: u64) -> EllipticVerdict {
    let n = spec.dim;
    let degs = |k: usize| -> Vec<usize> { spec.degrees.iter().map(|p| (p + k).saturating_sub(1)).collect() };
    if let Some(q) = spec.phi0_exact() {
        let bases: Vec<Vec<Vec<Q>>> = (0..3).map(|k| ek_generators_exact(&q, k).column_basis()).collect();
        let dims = [bases[0].len(), bases[1].len(), bases[2].len()];
        for u in covectors_int(&spec.phi0, trials, seed) {
            let mut r = [0usize; 3];
            for k in 0..3 {
                r[k] = wedge_cov_q(&u, &bases[k], n, &degs(k)).rank();
            }
            if let Some((position, rank_gap)) = exactness(&dims, &r) {
                let w = EllipticWitness { u: u.iter().map(|&x| x as f64).collect(), position, rank_gap };
                return EllipticVerdict { elliptic: false, trials, seed, exact: true, ek_dims: dims, witness: Some(w) };
            }
        }
        return EllipticVerdict { elliptic: true, trials, seed, exact: true, ek_dims: dims, witness: None };
    }
    let bases: Vec<DMatrix<f64>> = (0..3).map(|k| ek_space(spec, k)).collect();
    let dims = [bases[0].ncols(), bases[1].ncols(), bases[2].ncols()];
    for u in covectors_unit(&spec.phi0, trials, seed) {
        let mut r = [0usize; 3];
        for k in 0..3 {
            r[k] = linalg::rank(&wedge_cov_f64(&u, &bases[k], n, &degs(k)), RANK_TOL);
        }
        if let Some((position, rank_gap)) = exactness(&dims, &r) {
            let w = EllipticWitness { u, position, rank_gap };
            return EllipticVerdict { elliptic: false, trials, seed, exact: false, ek_dims: dims, witness: Some(w) };
        }
    }
    EllipticVerdict { elliptic: true, trials, seed, exact: false, ek_dims: dims, witness: None }
}

#[derive(Clone, Debug)]
pub struct IrrepProjector {
    pub label: String,
    pub dim: usize,
    /// Casimir eigenvalue Σ_a ρ̂(ξ_a)² on the component.
    pub casimir: f64,
    /// False when the eigenspace is not generated by one vector, i.e. distinct
    /// irreducibles share the eigenvalue.
    pub irreducible: bool,
    /// Orthonormal basis of the component (columns).
    pub basis: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
}

/// Dimension of the 𝔥-module generated by v inside span(q).
fn cyclic_dim(gens: &[DMatrix<f64>], v: DVector<f64>) -> usize {
    let mut basis: Vec<DVector<f64>> = vec![v.normalize()];
    let mut frontier = 0;
    while frontier < basis.len() {
        let w = basis[frontier].clone();
        frontier += 1;
        for r in gens {
            let mut x = r * &w;
            for b in &basis {
                let c = b.dot(&x);
                x -= b * c;
            }
            let nx = x.norm();
            if nx > 1e-8 {
                basis.push(x / nx);
            }
        }
    }
    basis.len()
}

/// Isotypic components of Λ^p under the isotropy algebra, as eigenspaces of
/// the Casimir operator built from an orthonormal basis of 𝔥.
pub fn irrep_projectors(spec: &CalibrationSpec, p: usize) -> Result<Vec<IrrepProjector>> {
    let iso = isotropy_algebra(spec);
    irrep_projectors_with(spec, &iso, p)
}

pub(crate) fn irrep_projectors_with(
    spec: &CalibrationSpec,
    iso: &[Endo<f64>],
    p: usize,
) -> Result<Vec<IrrepProjector>> {
    if !spec.g_v.is_euclidean() {
        return Err(Error::InvalidInput("projectors need the Euclidean reference metric".into()));
    }
    if !check_metrical_with(spec, iso).metrical {
        return Err(Error::InvalidInput(format!("{} is not metrical; projectors are not orthogonal", spec.kind)));
    }
    let n = spec.dim;
    let len = crate::scalar::binomial(n, p);
    let gens: Vec<DMatrix<f64>> = iso.iter().map(|xi| rho_matrix(xi, p)).collect();
    let mut cas = DMatrix::zeros(len, len);
    for r in &gens {
        cas += r * r;
    }
    let cas = (&cas + cas.transpose()) * 0.5;
    let eig = SymmetricEigen::new(cas);
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let lam = eig.eigenvalues[i];
        match groups.last_mut() {
            Some(g) if (eig.eigenvalues[g[0]] - lam).abs() <= 1e-7 * lam.abs().max(1.0) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let cols: Vec<DVector<f64>> = g.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        let basis = DMatrix::from_columns(&cols);
        let casimir = g.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / g.len() as f64;
        // a generic vector of the eigenspace
        let v = basis.column_iter().enumerate().fold(DVector::zeros(len), |acc, (j, c)| acc + c * (1.0 + 0.37 * j as f64).sin());
        let irreducible = cyclic_dim(&gens, v) == g.len();
        let matrix = &basis * basis.transpose();
        out.push(IrrepProjector {
            label: format!("{}_{}", p, g.len()),
            dim: g.len(),
            casimir: clean(casimir),
            irreducible,
            basis,
            matrix,
        });
    }
    out.sort_by(|a, b| a.dim.cmp(&b.dim).then(b.casimir.partial_cmp(&a.casimir).unwrap()));
    Ok(out)
}

/// Everything `info` and `elliptic` report about one orbit point.
#[derive(Clone, Debug)]
pub struct OrbitAnalysis {
    pub kind: Kind,
    pub dim: usize,
    pub isotropy: Vec<Endo<f64>>,
    pub ek_bases: BTreeMap<usize, DMatrix<f64>>,
    pub metrical: MetricalVerdict,
    pub elliptic: EllipticVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub kind: Kind,
    pub dim: usize,
    pub isotropy_dim: usize,
    pub ek_dims: BTreeMap<String, usize>,
    pub metrical: bool,
    pub metrical_witness: Option<Vec<Vec<f64>>>,
    pub elliptic: EllipticRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticRecord {
    pub verdict: String,
    pub trials: usize,
    pub exact: bool,
    pub witness: Option<EllipticWitness>,
}

pub fn analyze(spec: &CalibrationSpec, trials: usize, seed: u64) -> OrbitAnalysis {
    let isotropy = isotropy_algebra(spec);
    let ek_bases = (0..=3).map(|k| (k, ek_space(spec, k))).collect();
    let metrical = check_metrical_with(spec, &isotropy);
    let elliptic = check_elliptic(spec, trials, seed);
    OrbitAnalysis { kind: spec.kind, dim: spec.dim, isotropy, ek_bases, metrical, elliptic }
}

impl OrbitAnalysis {
    pub fn ek_dim(&self, k: usize) -> usize {
        self.ek_bases.get(&k).map_or(0, |b| b.ncols())
    }

    pub fn report(&self) -> OrbitReport {
        let e = &self.elliptic;
        OrbitReport {
            kind: self.kind,
            dim: self.dim,
            isotropy_dim: self.isotropy.len(),
            ek_dims: self.ek_bases.iter().map(|(k, b)| (k.to_string(), b.ncols())).collect(),
            metrical: self.metrical.metrical,
            metrical_witness: self.metrical.witness.clone(),
            elliptic: EllipticRecord {
                verdict: if e.elliptic { "elliptic" } else { "not elliptic" }.into(),
                trials: e.trials,
                exact: e.exact,
                witness: e.witness.clone(),
            },
        }
    }
}

/// Zero when two orthonormal bases span the same subspace; infinite when
/// the dimensions differ.
pub(crate) fn subspace_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let both = hstack(&[a.clone(), b.clone()]);
    let s = linalg::singular_values(&both);
    s.get(a.ncols()).copied().unwrap_or(0.0)
}
