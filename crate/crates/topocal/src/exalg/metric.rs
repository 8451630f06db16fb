use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exalg::form::bits;
use crate::exalg::Form;
use crate::scalar::Scalar;

/// Positive-definite inner product on V, as a Gram matrix in the basis e_i.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    gram: DMatrix<f64>,
    euclidean: bool,
}

impl Metric {
    pub fn euclidean(n: usize) -> Self {
        Metric { gram: DMatrix::identity(n, n), euclidean: true }
    }

    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
            return Err(Error::InvalidInput("Gram matrix must be square and non-empty".into()));
        }
        if gram != gram.transpose() {
            return Err(Error::InvalidInput("Gram matrix is not symmetric".into()));
        }
        if gram.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let euclidean = gram == DMatrix::identity(gram.nrows(), gram.ncols());
        Ok(Metric { gram, euclidean })
    }

    /// Symmetrize then validate; for Gram matrices that came out of floating arithmetic.
    pub fn from_approx(gram: DMatrix<f64>) -> Result<Self> {
        let sym = (&gram + gram.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn is_euclidean(&self) -> bool {
        self.euclidean
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.gram.clone().cholesky().expect("validated positive definite").inverse()
    }

    /// Induced inner product ⟨θ^I, θ^J⟩ = det(g⁻¹[I, J]) on real forms.
    pub fn form_inner(&self, a: &Form<f64>, b: &Form<f64>) -> f64 {
        assert_eq!(a.degree(), b.degree(), "form_inner: degree mismatch");
        if self.euclidean {
            return a.dot(b);
        }
        let ginv = self.inverse();
        let mut acc = 0.0;
        for (&i, x) in a.terms() {
            for (&j, y) in b.terms() {
                acc += x * y * minor_det(&ginv, i, j);
            }
        }
        acc
    }
}

/// det of the submatrix with rows `rmask` and columns `cmask`.
fn minor_det(m: &DMatrix<f64>, rmask: u32, cmask: u32) -> f64 {
    let r = bits::indices(rmask);
    let c = bits::indices(cmask);
    if r.is_empty() {
        return 1.0;
    }
    DMatrix::from_fn(r.len(), c.len(), |a, b| m[(r[a], c[b])]).determinant()
}

/// Hodge star for the metric `g` and orientation ±1 (relative to e_1∧…∧e_n),
/// characterized by α∧*β = ⟨α,β⟩ vol_g.
pub fn hodge_star<S: Scalar>(g: &Metric, a: &Form<S>, orientation: i8) -> Result<Form<S>> {
    let n = a.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch(format!("metric dim {} vs form dim {}", g.dim(), n)));
    }
    if orientation != 1 && orientation != -1 {
        return Err(Error::InvalidInput("orientation must be +1 or -1".into()));
    }
    let full = bits::full(n);
    let p = a.degree();
    let mut out = Form::zero(n, n.saturating_sub(p));
    if p > n {
        return Ok(out);
    }
    if g.is_euclidean() {
        for (&m, c) in a.terms() {
            let comp = full & !m;
            let odd = bits::merge_parity(m, comp) ^ (orientation < 0);
            out.add_term(comp, if odd { -c.clone() } else { c.clone() });
        }
        return Ok(out);
    }
    let ginv = g.inverse();
    let vol = g.gram().determinant().sqrt() * orientation as f64;
    let basis = bits::basis_masks(n, p);
    for (&m, c) in a.terms() {
        for &k in &basis {
            let w = minor_det(&ginv, m, k) * vol;
            if w == 0.0 {
                continue;
            }
            let comp = full & !k;
            let sgn = if bits::merge_parity(k, comp) { -w } else { w };
            out.add_term(comp, c.clone() * S::from_f64(sgn));
        }
    }
    Ok(out)
}
