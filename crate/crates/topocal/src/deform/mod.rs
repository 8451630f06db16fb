//! Power-series deformations Φ_t = ρ_{exp a(t)}Φ⁰ with a(t) = Σ a_k t^k/k!,
//! solved order by order so that dΦ_t = 0.
//!
//! Coefficients of t^k in ρ_{exp a}Φ⁰ are kept as S[l][m] = (ρ̂_a^l Φ⁰)_m.
//! The obstruction Ob_k = Σ_{l≥2} (1/l!) d S[l][k] involves only a_{<k};
//! its primitive Σ_{l≥2} S[l][k]/l! is stored as the exactness certificate.

mod analysis;
mod expansion;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exalg::{Endo, MultiForm};
use crate::hodge::HodgeSystem;
use crate::linalg;
use crate::orbits::{rho_image_matrix, CalibrationSpec, Kind};
use crate::scalar::{factorial, C64};
use crate::torus::{EndoField, Trig, TrigForm, VectorField, DEFAULT_SUPPORT_CAP};

pub use analysis::{
    closure_residual, cy_period_relations, evaluate, fd_check, first_order_period, harmonic_seeds, majorant_report,
    period_map, slope_fit, truncated_coefficients, CyRelations, FdReport, FdStep, MajorantReport, PeriodMap,
    SlopeReport,
};
use expansion::Expansion;

/// Largest order accepted by default.
pub const MAX_ORDER: usize = 12;

const SEED_TOL: f64 = 1e-10;
const MEMBER_TOL: f64 = 1e-9;

pub(crate) fn c64(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Φ⁰ as a constant field.
pub fn phi_field(spec: &CalibrationSpec) -> TrigForm<C64> {
    Trig::constant(spec.dim, spec.phi0.map(|&x| c64(x)))
}

/// Minimal-norm inverse of ξ ↦ ρ̂_ξΦ⁰, landing in 𝔥^⊥ (Frobenius).
#[derive(Clone, Debug)]
pub struct RhoInverse {
    n: usize,
    image: DMatrix<f64>,
    pinv: DMatrix<f64>,
    /// Orthonormal basis of 𝔥, one column per element.
    iso: DMatrix<f64>,
}

impl RhoInverse {
    pub fn new(spec: &CalibrationSpec) -> Self {
        let image = rho_image_matrix(&spec.phi0);
        let pinv = linalg::pinv(&image, 1e-10);
        let iso = linalg::nullspace(&image, 1e-10);
        RhoInverse { n: spec.dim, image, pinv, iso }
    }

    /// Largest |⟨ξ, h⟩| over the orthonormal basis of 𝔥, per mode.
    pub fn isotropy_component(&self, a: &EndoField<C64>) -> f64 {
        let mut worst: f64 = 0.0;
        for c in a.modes().values() {
            let re = DVector::from_iterator(c.entries().len(), c.entries().iter().map(|z| z.re));
            let im = DVector::from_iterator(c.entries().len(), c.entries().iter().map(|z| z.im));
            let (pr, pi) = (self.iso.transpose() * re, self.iso.transpose() * im);
            for (x, y) in pr.iter().zip(pi.iter()) {
                worst = worst.max(x.hypot(*y));
            }
        }
        worst
    }

    /// ξ with ρ̂_ξΦ⁰ = c, and the relative residual of that equation.
    pub fn solve(&self, c: &MultiForm<C64>) -> (Endo<C64>, f64) {
        let v = c.dense();
        let re = DVector::from_iterator(v.len(), v.iter().map(|z| z.re));
        let im = DVector::from_iterator(v.len(), v.iter().map(|z| z.im));
        let (xr, xi) = (&self.pinv * &re, &self.pinv * &im);
        let res = ((&self.image * &xr - &re).norm_squared() + (&self.image * &xi - &im).norm_squared()).sqrt();
        let scale = (re.norm_squared() + im.norm_squared()).sqrt().max(f64::MIN_POSITIVE);
        let n = self.n;
        let mut e = Endo::zero(n);
        for i in 0..n {
            for j in 0..n {
                e.set(i, j, C64::new(xr[i * n + j], xi[i * n + j]));
            }
        }
        (e, res / scale)
    }

    pub fn field(&self, beta: &TrigForm<C64>) -> (EndoField<C64>, f64) {
        let mut out = Trig::zero(beta.torus_dim(), &Endo::zero(self.n)).with_cap(beta.cap());
        let mut worst: f64 = 0.0;
        for (k, c) in beta.modes() {
            let (e, r) = self.solve(c);
            worst = worst.max(r);
            out.add_mode(k.clone(), e);
        }
        (out, worst)
    }
}

#[derive(Clone, Debug)]
pub struct DeformationSeed {
    pub a1: EndoField<C64>,
    /// d₀*ρ̂_{a1}Φ⁰ = 0 was required and checked.
    pub normalized: bool,
}

impl DeformationSeed {
    /// Checks dρ̂_{a1}Φ⁰ = 0, and d₀*ρ̂_{a1}Φ⁰ = 0 when `normalized`.
    pub fn new(sys: &HodgeSystem, a1: EndoField<C64>, normalized: bool) -> Result<Self> {
        if a1.torus_dim() != sys.torus_dim || a1.proto().dim() != sys.spec.dim {
            return Err(Error::DimensionMismatch("seed field does not match the system".into()));
        }
        a1.check_real(1e-12)?;
        let t = phi_field(&sys.spec).rho_hat(&a1)?;
        let scale = t.norm().max(1.0);
        let closure = t.d().norm() / scale;
        if closure > SEED_TOL {
            return Err(Error::SeedNotClosed(closure));
        }
        if normalized {
            let co = sys.codifferential(0, &t)?.norm() / scale;
            if co > SEED_TOL {
                return Err(Error::InvalidInput(format!("seed is not coclosed: residual {co:e}")));
            }
        }
        Ok(DeformationSeed { a1, normalized })
    }

    /// A constant field; always closed.
    pub fn constant(sys: &HodgeSystem, xi: &Endo<f64>) -> Result<Self> {
        let f = Trig::constant(sys.torus_dim, xi.to_c64());
        Self::new(sys, f, true)
    }

    /// The constant seed whose tangent is Σ c_i B1_i, minimal in 𝔥^⊥.
    pub fn from_harmonic(sys: &HodgeSystem, coeffs: &[f64]) -> Result<Self> {
        let b = sys.basis(1);
        if coeffs.len() != b.ncols() {
            return Err(Error::DimensionMismatch(format!("{} coefficients for dim ℍ¹ = {}", coeffs.len(), b.ncols())));
        }
        let v = b * DVector::from_column_slice(coeffs);
        let c: Vec<C64> = v.iter().map(|&x| c64(x)).collect();
        let (xi, _) = RhoInverse::new(&sys.spec).solve(&MultiForm::from_dense(sys.torus_dim, sys.degrees(1), &c));
        Self::new(sys, Trig::constant(sys.torus_dim, xi), true)
    }

    /// a1 = Dv, so that ρ̂_{a1}Φ⁰ = L_vΦ⁰ = d i_vΦ⁰.
    pub fn exact(sys: &HodgeSystem, v: &VectorField<C64>) -> Result<Self> {
        Self::new(sys, v.jacobian(), false)
    }

    pub fn scaled(&self, s: f64) -> Self {
        DeformationSeed { a1: self.a1.scale(&c64(s)), normalized: self.normalized }
    }

    pub fn plus(&self, other: &Self) -> Self {
        DeformationSeed { a1: self.a1.add(&other.a1), normalized: self.normalized && other.normalized }
    }

    pub fn tangent(&self, spec: &CalibrationSpec) -> Result<TrigForm<C64>> {
        phi_field(spec).rho_hat(&self.a1)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Closure and obstruction tolerance.
    pub tol: f64,
    pub support_cap: usize,
    pub max_order: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { tol: 1e-9, support_cap: DEFAULT_SUPPORT_CAP, max_order: MAX_ORDER }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub k: usize,
    pub ob_norm: f64,
    /// ‖Ob_k(direct) − Ob_k(commutator form)‖.
    pub ob_two_path: f64,
    /// ‖Ob_k(commutator form) − d(primitive)‖ plus the norm of its mean.
    pub ob_exactness_residual: f64,
    /// Relative residual of fitting Ob_k into E².
    pub ob_membership: f64,
    /// ‖Π_harm Ob_k‖.
    pub ob_harmonic: f64,
    pub a_norm_over_kfact: f64,
    /// ‖d(t^k coefficient of ρ_{exp a}Φ⁰)‖ after the solve.
    pub closure_residual: f64,
    /// Relative residual of recovering a_k from its ρ̂-image.
    pub recovery_residual: f64,
    /// Largest |⟨a_k, h⟩| over an orthonormal basis h of 𝔥, per mode.
    pub isotropy_component: f64,
}

/// A nonzero class [Ob_k] ∈ H²(#): coordinates in the E² basis (real parts).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub order: usize,
    pub class_norm: f64,
    pub class: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DeformationResult {
    pub kind: Kind,
    pub torus_dim: usize,
    /// Last order solved.
    pub order: usize,
    pub phi0: TrigForm<C64>,
    /// a_1, …, a_order.
    pub coeffs: Vec<EndoField<C64>>,
    pub per_order: Vec<OrderRecord>,
    /// Coefficients of t^0, …, t^order in ρ_{exp a(t)}Φ⁰.
    pub series: Vec<TrigForm<C64>>,
    pub obstruction: Option<Obstruction>,
    pub tol: f64,
}

impl DeformationResult {
    /// Every order is closed within tolerance and nothing obstructed.
    pub fn closed(&self) -> bool {
        self.obstruction.is_none() && self.per_order.iter().all(|r| r.closure_residual <= self.tol)
    }
}

fn at(order: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::AtOrder { .. } => e,
        e => Error::AtOrder { order, source: Box::new(e) },
    }
}

/// Solves dρ_{exp a(t)}Φ⁰ = 0 to the given order.
pub fn run(sys: &HodgeSystem, seed: &DeformationSeed, order: usize, opts: &RunOptions) -> Result<DeformationResult> {
    if order == 0 || order > opts.max_order {
        return Err(Error::InvalidInput(format!("order must be between 1 and {}", opts.max_order)));
    }
    let spec = &sys.spec;
    let rinv = RhoInverse::new(spec);
    let phi = phi_field(spec).with_cap(opts.support_cap);
    let a1 = seed.a1.clone().with_cap(opts.support_cap);
    let mut ex = Expansion::new(phi.clone());
    ex.set_alpha(1, a1.clone()).map_err(at(1))?;
    // a_1 = 1!·α_1
    let c1 = ex.coefficient(1);
    let mut per_order = vec![OrderRecord {
        k: 1,
        ob_norm: 0.0,
        ob_two_path: 0.0,
        ob_exactness_residual: 0.0,
        ob_membership: 0.0,
        ob_harmonic: 0.0,
        a_norm_over_kfact: a1.norm(),
        closure_residual: c1.d().norm(),
        recovery_residual: 0.0,
        isotropy_component: 0.0,
    }];
    let mut coeffs = vec![a1];
    let mut obstruction = None;
    for k in 2..=order {
        let step = solve_order(sys, &rinv, &mut ex, k, opts).map_err(at(k))?;
        match step {
            Step::Solved(rec, a_k) => {
                per_order.push(rec);
                coeffs.push(a_k);
            }
            Step::Obstructed(rec, ob) => {
                per_order.push(rec);
                obstruction = Some(ob);
                break;
            }
        }
    }
    let solved = coeffs.len();
    Ok(DeformationResult {
        kind: spec.kind,
        torus_dim: sys.torus_dim,
        order: solved,
        phi0: phi,
        coeffs,
        per_order,
        series: (0..=solved).map(|m| ex.coefficient(m)).collect(),
        obstruction,
        tol: opts.tol,
    })
}

enum Step {
    Solved(OrderRecord, EndoField<C64>),
    Obstructed(OrderRecord, Obstruction),
}

fn solve_order(
    sys: &HodgeSystem,
    rinv: &RhoInverse,
    ex: &mut Expansion,
    k: usize,
    opts: &RunOptions,
) -> Result<Step> {
    ex.extend(k)?;
    let ob = ex.obstruction_direct(k);
    let primitive = ex.primitive(k);
    let ob_comm = ex.obstruction_commutator(k)?;
    let scale = ob.norm().max(1.0);
    let two_path = ob.sub(&ob_comm).norm();
    if two_path > MEMBER_TOL * scale {
        return Err(Error::ObstructionMismatch { order: k, diff: two_path });
    }
    let mean = ob_comm.mode(&vec![0; sys.torus_dim]).map_or(0.0, |c| c.norm());
    let exactness = ob_comm.sub(&primitive.d()).norm() + mean;
    let membership = sys.membership_residual(2, &ob);
    if membership > MEMBER_TOL {
        return Err(Error::NotInSubspace(membership));
    }
    let harm = sys.harmonic_part(2, &ob)?;
    let mut rec = OrderRecord {
        k,
        ob_norm: ob.norm(),
        ob_two_path: two_path,
        ob_exactness_residual: exactness,
        ob_membership: membership,
        ob_harmonic: harm.norm(),
        a_norm_over_kfact: 0.0,
        closure_residual: f64::NAN,
        recovery_residual: 0.0,
        isotropy_component: 0.0,
    };
    if rec.ob_harmonic > opts.tol * scale {
        let class = harm
            .mode(&vec![0; sys.torus_dim])
            .map(|c| {
                let (cr, _) = sys.coords(2, c).expect("harmonic part is in E²");
                cr.iter().copied().collect()
            })
            .unwrap_or_default();
        let class_norm = rec.ob_harmonic;
        return Ok(Step::Obstructed(rec, Obstruction { order: k, class_norm, class }));
    }
    // (1/k!) ρ̂_{a_k}Φ⁰ = −d₁* G_# Ob_k
    let beta = sys.codifferential(1, &sys.green_apply(2, &ob)?)?.neg();
    let (alpha, recovery) = rinv.field(&beta);
    let alpha = alpha.pruned(1e-15 * alpha.max_abs()).with_cap(opts.support_cap);
    ex.set_alpha(k, alpha.clone())?;
    rec.closure_residual = ex.coefficient(k).d().norm();
    rec.a_norm_over_kfact = alpha.norm();
    rec.recovery_residual = recovery;
    rec.isotropy_component = rinv.isotropy_component(&alpha);
    Ok(Step::Solved(rec, alpha.scale(&c64(factorial(k)))))
}

/// Report written by the CLI and the Python binding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationReport {
    pub structure: Kind,
    pub order: usize,
    pub per_order: Vec<OrderRecord>,
    pub majorant: MajorantReport,
    pub period_first_order: Vec<f64>,
    pub obstruction: Option<Obstruction>,
    pub closed: bool,
}

impl DeformationResult {
    pub fn report(&self) -> DeformationReport {
        DeformationReport {
            structure: self.kind,
            order: self.order,
            per_order: self.per_order.clone(),
            majorant: majorant_report(self),
            period_first_order: first_order_period(self),
            obstruction: self.obstruction.clone(),
            closed: self.closed(),
        }
    }
}
