//! G2 operators and the metric determined by a calibration.

use nalgebra::{DMatrix, DVector};

use super::analysis::{irrep_projectors_with, isotropy_algebra, IrrepProjector};
use super::validate::reduce_to_model;
use super::{model_calibration, CalibrationSpec, Kind, Params};
use crate::error::{Error, Result};
use crate::exalg::form::bits;
use crate::exalg::{hodge_star, Endo, Form, Metric, MultiForm};
use crate::linalg;

fn want_g2(spec: &CalibrationSpec) -> Result<()> {
    if spec.kind != Kind::G2 {
        return Err(Error::WrongKind(format!("expected g2, got {}", spec.kind)));
    }
    Ok(())
}

/// Λ²₇ = {i_wφ} as columns.
pub fn g2_lambda2_7(phi: &Form<f64>) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..phi.dim()).map(|w| DVector::from_vec(phi.interior_coord(w).dense())).collect();
    DMatrix::from_columns(&cols)
}

fn project(p: &IrrepProjector, a: &Form<f64>) -> Form<f64> {
    let v = &p.matrix * DVector::from_vec(a.dense());
    Form::from_dense(a.dim(), a.degree(), v.as_slice())
}

fn by_dim(ps: &[IrrepProjector], d: usize) -> Result<&IrrepProjector> {
    ps.iter().find(|p| p.dim == d).ok_or_else(|| Error::InvalidInput(format!("no {d}-dimensional component")))
}

/// Projectors of Λ² and Λ³ for a G2 point, built once.
pub struct G2Operators {
    pub spec: CalibrationSpec,
    pub lambda2: Vec<IrrepProjector>,
    pub lambda3: Vec<IrrepProjector>,
}

impl G2Operators {
    pub fn new(spec: &CalibrationSpec) -> Result<Self> {
        want_g2(spec)?;
        let iso = isotropy_algebra(spec);
        Ok(G2Operators {
            spec: spec.clone(),
            lambda2: irrep_projectors_with(spec, &iso, 2)?,
            lambda3: irrep_projectors_with(spec, &iso, 3)?,
        })
    }

    pub fn phi(&self) -> &Form<f64> {
        self.spec.phi0.part(0)
    }

    pub fn star(&self, a: &Form<f64>) -> Form<f64> {
        hodge_star(&self.spec.g_v, a, 1).expect("dimension checked")
    }

    /// J(a) = (4/3)*π₁a + *π₇a − *π₂₇a.
    pub fn j(&self, a: &Form<f64>) -> Result<Form<f64>> {
        if a.degree() != 3 || a.dim() != 7 {
            return Err(Error::InvalidInput("J acts on 3-forms on R⁷".into()));
        }
        let p1 = project(by_dim(&self.lambda3, 1)?, a);
        let p7 = project(by_dim(&self.lambda3, 7)?, a);
        let p27 = project(by_dim(&self.lambda3, 27)?, a);
        Ok(self.star(&p1).scale(&(4.0 / 3.0)).add(&self.star(&p7)).sub(&self.star(&p27)))
    }

    pub fn pi2(&self, d: usize, a: &Form<f64>) -> Result<Form<f64>> {
        Ok(project(by_dim(&self.lambda2, d)?, a))
    }

    /// Finds γ ∈ Λ²₁₄ with i_vγ = 0 and u∧J(u∧η) = −2‖u‖²·*γ.
    pub fn j_symbol_identity(&self, u: &[f64], eta: &Form<f64>) -> Result<JSymbolIdentity> {
        if u.len() != 7 || eta.dim() != 7 || eta.degree() != 2 {
            return Err(Error::InvalidInput("need u ∈ (R⁷)* and a 2-form η".into()));
        }
        let uu = DVector::from_column_slice(u);
        let v = self.spec.g_v.inverse() * &uu;
        let norm2 = uu.dot(&v);
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidInput("u must be nonzero".into()));
        }
        let uf = Form::from_dense(7, 1, u);
        let ueta = uf.wedge(eta);
        // split u∧η = u∧η₇ + u∧η̂ with u∧η₇ ∈ u∧Λ²₇ and u∧η̂ ⟂ u∧Λ²₇
        let l27 = g2_lambda2_7(self.phi());
        let cols: Vec<DVector<f64>> = (0..7)
            .map(|w| {
                let b = Form::from_dense(7, 2, l27.column(w).as_slice());
                DVector::from_vec(uf.wedge(&b).dense())
            })
            .collect();
        let q = linalg::range(&DMatrix::from_columns(&cols), 1e-12);
        let x = DVector::from_vec(ueta.dense());
        let rest = &x - &q * (q.transpose() * &x);
        let r = Form::from_dense(7, 3, rest.as_slice());
        let gamma = r.interior(v.as_slice()).scale(&(1.0 / (2.0 * norm2)));

        let lhs = uf.wedge(&self.j(&ueta)?);
        let rhs = self.star(&gamma).scale(&(-2.0 * norm2));
        let scale = ueta.norm().max(f64::MIN_POSITIVE) * norm2.sqrt();
        Ok(JSymbolIdentity {
            identity_residual: lhs.sub(&rhs).norm() / scale.max(1.0),
            lambda14_residual: self.pi2(7, &gamma)?.norm(),
            wedge_psi_residual: gamma.wedge(self.spec.phi0.part(1)).norm(),
            iv_residual: gamma.interior(v.as_slice()).norm(),
            gamma,
        })
    }
}

#[derive(Clone, Debug)]
pub struct JSymbolIdentity {
    pub gamma: Form<f64>,
    /// ‖u∧J(u∧η) + 2‖u‖²*γ‖, relative.
    pub identity_residual: f64,
    /// ‖π₇γ‖.
    pub lambda14_residual: f64,
    /// ‖γ∧ψ‖ (zero exactly on Λ²₁₄).
    pub wedge_psi_residual: f64,
    pub iv_residual: f64,
}

pub fn g2_j(spec: &CalibrationSpec, a: &Form<f64>) -> Result<Form<f64>> {
    G2Operators::new(spec)?.j(a)
}

pub fn j_symbol_solve(spec: &CalibrationSpec, u: &[f64], eta: &Form<f64>) -> Result<JSymbolIdentity> {
    G2Operators::new(spec)?.j_symbol_identity(u, eta)
}

/// B(u,v) with B(u,v)·vol = i_uφ ∧ i_vφ ∧ φ.
pub fn g2_bilinear(phi: &Form<f64>) -> DMatrix<f64> {
    let n = phi.dim();
    let full = bits::full(n);
    let ip: Vec<Form<f64>> = (0..n).map(|i| phi.interior_coord(i)).collect();
    DMatrix::from_fn(n, n, |a, b| ip[a].wedge(&ip[b]).wedge(phi).coeff(full))
}

/// The metric of a G2 3-form computed from φ alone: B/(6·(det B/6⁷)^{1/9}),
/// with the orientation chosen so that B is positive.
pub fn intrinsic_g2_metric(phi: &Form<f64>) -> Result<Metric> {
    if phi.dim() != 7 || phi.degree() != 3 {
        return Err(Error::InvalidInput("need a 3-form on R⁷".into()));
    }
    let mut b = g2_bilinear(phi);
    if b[(0, 0)] < 0.0 {
        b = -b;
    }
    let det = b.determinant();
    if det <= 0.0 {
        return Err(Error::InvalidInput("3-form is not of G2 type".into()));
    }
    let conformal = (det / 6f64.powi(7)).powf(1.0 / 9.0);
    Metric::from_approx(b / (6.0 * conformal))
}

/// Gram matrix gᵀ g_V g of the metric making g: (V, h) → (V, g_V) an isometry.
pub fn pushforward_metric(spec: &CalibrationSpec, g: &Endo<f64>) -> Result<Metric> {
    let m = g.to_dmatrix();
    Metric::from_approx(m.transpose() * spec.g_v.gram() * m)
}

/// The canonical metric of φ, found by reducing φ to the model point and
/// pushing g_V forward.
pub fn metric_from_calibration(spec: &CalibrationSpec, phi: &MultiForm<f64>) -> Result<Metric> {
    if matches!(spec.kind, Kind::Symplectic | Kind::Sl | Kind::Degenerate2form) {
        return Err(Error::WrongKind(format!("{} is not metrical", spec.kind)));
    }
    let model = match spec.kind {
        Kind::Cy => model_calibration(Kind::Cy, &Params::complex_dim(spec.dim / 2))?,
        Kind::Hk => model_calibration(Kind::Hk, &Params::m(spec.dim / 4))?,
        k => model_calibration(k, &Params::default())?,
    };
    let red = reduce_to_model(&model, phi, 8, 0);
    if !red.converged {
        return Err(Error::InvalidInput(format!("not certified in the orbit (residual {:e})", red.residual)));
    }
    pushforward_metric(&model, &red.g)
}
