//! Exterior calculus and the operators L_a, N(a,b), G(a,a) on trig fields.
//!
//! Frame formulas are evaluated on coordinate fields ∂_1..∂_n, whose
//! brackets vanish.

use std::collections::BTreeMap;

use super::{Coeff, EndoField, Function, Trig, TrigForm, Vector, VectorField};
use crate::error::{Error, Result};
use crate::exalg::{Endo, MultiForm};
use crate::scalar::ComplexScalar;

fn ik<S: ComplexScalar>(k: i32) -> S {
    S::imag_unit() * S::from_i64(i64::from(k))
}

fn check_dims(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{what}: {a} vs {b}")));
    }
    Ok(())
}

impl<S: ComplexScalar> TrigForm<S> {
    /// Exterior derivative: mode k picks up Σ_j i k_j dx^j ∧.
    pub fn d(&self) -> Self {
        let n = self.form_dim();
        let proto = MultiForm::zero(n, &self.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        self.map_modes(&proto, |k, c| {
            let mut acc = proto.clone();
            for (j, &kj) in k.iter().enumerate() {
                if kj != 0 {
                    acc.add_scaled(&c.wedge_coord(j), &ik::<S>(kj));
                }
            }
            acc
        })
    }

    /// Pointwise α ∧ β for a single-part β, applied to every part of α.
    pub fn wedge(&self, beta: &TrigForm<S>) -> Result<Self> {
        if beta.degrees().len() != 1 {
            return Err(Error::InvalidInput("right wedge factor must have one part".into()));
        }
        check_dims("wedge", self.form_dim(), beta.form_dim())?;
        let q = beta.degrees()[0];
        let proto = MultiForm::zero(self.form_dim(), &self.degrees().iter().map(|p| p + q).collect::<Vec<_>>());
        self.convolve(beta, &proto, |_, a, _, b| {
            let b = b.part(0);
            MultiForm::new(a.parts().iter().map(|p| p.wedge(b)).collect()).expect("nonempty")
        })
    }

    /// θ^j ∧ α.
    pub fn wedge_coord(&self, j: usize) -> Self {
        let proto = MultiForm::zero(self.form_dim(), &self.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        self.map_modes(&proto, |_, c| c.wedge_coord(j))
    }

    pub fn interior_coord(&self, j: usize) -> Self {
        let proto =
            MultiForm::zero(self.form_dim(), &self.degrees().iter().map(|p| p.saturating_sub(1)).collect::<Vec<_>>());
        self.map_modes(&proto, |_, c| c.interior_coord(j))
    }

    /// i_X α for a vector field X.
    pub fn interior(&self, x: &VectorField<S>) -> Result<Self> {
        check_dims("interior", self.form_dim(), x.proto().0.len())?;
        let proto =
            MultiForm::zero(self.form_dim(), &self.degrees().iter().map(|p| p.saturating_sub(1)).collect::<Vec<_>>());
        x.convolve(self, &proto, |_, v, _, c| c.interior(&v.0))
    }

    /// ρ̂_a α with a an End(TX)-valued field.
    pub fn rho_hat(&self, a: &EndoField<S>) -> Result<Self> {
        check_dims("rho_hat", self.form_dim(), a.endo_dim())?;
        a.convolve(self, self.proto(), |_, e, _, c| c.rho_hat(e))
    }

    /// f·α for a scalar function f.
    pub fn mul_function(&self, f: &Function<S>) -> Result<Self> {
        f.convolve(self, self.proto(), |_, v, _, c| c.scale(&v.0[0]))
    }

    /// X(α): the coordinate directional derivative Σ_m X^m ∂_m α.
    pub fn directional(&self, x: &VectorField<S>) -> Result<Self> {
        x.convolve(self, self.proto(), |_, v, l, c| {
            let s = v.0.iter().zip(l).fold(S::zero(), |acc, (vm, &lm)| acc + vm.clone() * ik::<S>(lm));
            c.scale(&s)
        })
    }

    /// Classical Lie derivative L_X α = X(α) + ρ̂_{DX} α on a flat torus.
    pub fn lie_derivative(&self, x: &VectorField<S>) -> Result<Self> {
        Ok(self.directional(x)?.add(&self.rho_hat(&x.jacobian())?))
    }

    /// d i_X α + i_X d α.
    pub fn cartan(&self, x: &VectorField<S>) -> Result<Self> {
        Ok(self.interior(x)?.d().add(&self.d().interior(x)?))
    }

    /// L_a α = ρ̂_a dα − d ρ̂_a α.
    pub fn lie_operator_l(&self, a: &EndoField<S>) -> Result<Self> {
        Ok(self.d().rho_hat(a)?.sub(&self.rho_hat(a)?.d()))
    }

    /// The frame expression for L_a: Σ_j dx^j ∧ L_{a∂_j} α.
    pub fn lie_operator_l_frame(&self, a: &EndoField<S>) -> Result<Self> {
        let n = self.form_dim();
        let proto = MultiForm::zero(n, &self.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        let mut out = Trig::zero(self.torus_dim(), &proto).with_cap(self.cap());
        for j in 0..n {
            out = out.add(&self.lie_derivative(&a.column(j))?.wedge_coord(j));
        }
        Ok(out)
    }

    /// i_N α = Σ_{i<j} dx^i ∧ dx^j ∧ i_{N_ij} α.
    pub fn contract_two_vector(&self, t: &TwoVectorField<S>) -> Result<Self> {
        let proto = MultiForm::zero(self.form_dim(), &self.degrees().iter().map(|p| p + 1).collect::<Vec<_>>());
        let mut out = Trig::zero(self.torus_dim(), &proto).with_cap(self.cap());
        for (&(i, j), v) in &t.comps {
            out = out.add(&self.interior(v)?.wedge_coord(j).wedge_coord(i));
        }
        Ok(out)
    }

    /// G(a,a)α = i_{N(a,a)} α − L_{a·a} α.
    pub fn g_operator(&self, a: &EndoField<S>) -> Result<Self> {
        let n_aa = nijenhuis(a, a)?;
        let aa = a.matmul(a)?;
        Ok(self.contract_two_vector(&n_aa)?.sub(&self.lie_operator_l(&aa)?))
    }
}

impl<S: ComplexScalar> VectorField<S> {
    /// DX with DX[m][i] = ∂_i X^m.
    pub fn jacobian(&self) -> EndoField<S> {
        let n = self.proto().0.len();
        self.map_modes(&Endo::zero(n), |k, v| {
            let mut e = Endo::zero(n);
            for m in 0..n {
                for (i, &ki) in k.iter().enumerate() {
                    if ki != 0 {
                        e.set(m, i, v.0[m].clone() * ik::<S>(ki));
                    }
                }
            }
            e
        })
    }

    /// [X, Y]^m = X^l ∂_l Y^m − Y^l ∂_l X^m.
    pub fn bracket(&self, y: &VectorField<S>) -> Result<Self> {
        let proto = self.proto().clone();
        let dir = |a: &VectorField<S>, b: &VectorField<S>| {
            a.convolve(b, &proto, |_, va, l, vb| {
                let s = va.0.iter().zip(l).fold(S::zero(), |acc, (x, &lm)| acc + x.clone() * ik::<S>(lm));
                vb.scale(&s)
            })
        };
        Ok(dir(self, y)?.sub(&dir(y, self)?))
    }
}

impl<S: ComplexScalar> EndoField<S> {
    /// Pointwise composition a·b.
    pub fn matmul(&self, b: &EndoField<S>) -> Result<Self> {
        check_dims("matmul", self.endo_dim(), b.endo_dim())?;
        self.convolve(b, self.proto(), |_, x, _, y| x.matmul(y))
    }

    /// The vector field aX.
    pub fn apply(&self, x: &VectorField<S>) -> Result<VectorField<S>> {
        check_dims("apply", self.endo_dim(), x.proto().0.len())?;
        self.convolve(x, x.proto(), |_, e, _, v| Vector(e.apply(&v.0)))
    }

    /// a∂_j.
    pub fn column(&self, j: usize) -> VectorField<S> {
        let n = self.endo_dim();
        self.map_modes(&Vector(vec![S::zero(); n]), |_, e| Vector((0..n).map(|m| e.get(m, j).clone()).collect()))
    }
}

/// A Λ²⊗T-valued field stored as its components N(∂_i, ∂_j), i < j.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoVectorField<S> {
    pub n: usize,
    pub comps: BTreeMap<(usize, usize), VectorField<S>>,
}

pub type NijenhuisTensor<S> = TwoVectorField<S>;

impl<S: ComplexScalar> TwoVectorField<S> {
    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|v| v.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(|v| v.max_abs()).fold(0.0, f64::max)
    }
}

/// N(a,b)(u,v) = ab[u,v] + ba[u,v] + [au,bv] − [av,bu] − a[bu,v] + a[bv,u] − b[au,v] + b[av,u]
/// on coordinate pairs u = ∂_i, v = ∂_j.
pub fn nijenhuis<S: ComplexScalar>(a: &EndoField<S>, b: &EndoField<S>) -> Result<TwoVectorField<S>> {
    check_dims("nijenhuis", a.endo_dim(), b.endo_dim())?;
    check_dims("nijenhuis torus", a.torus_dim(), b.torus_dim())?;
    let n = a.endo_dim();
    let t = a.torus_dim();
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    let mut comps = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let u = VectorField::coordinate(t, i);
            let v = VectorField::coordinate(t, j);
            let (au, av, bu, bv) = (a.column(i), a.column(j), b.column(i), b.column(j));
            let uv = u.bracket(&v)?;
            let terms = [
                ab.apply(&uv)?,
                ba.apply(&uv)?,
                au.bracket(&bv)?,
                av.bracket(&bu)?.neg(),
                a.apply(&bu.bracket(&v)?)?.neg(),
                a.apply(&bv.bracket(&u)?)?,
                b.apply(&au.bracket(&v)?)?.neg(),
                b.apply(&av.bracket(&u)?)?,
            ];
            let mut sum = Trig::zero(t, &Vector(vec![S::zero(); n])).with_cap(a.cap().min(b.cap()));
            for x in &terms {
                sum = sum.add(x);
            }
            comps.insert((i, j), sum);
        }
    }
    Ok(TwoVectorField { n, comps })
}
