//! Pointwise exterior algebra over R^n and the GL(n) action on form tuples.

mod endo;
pub mod form;
pub mod json;
mod lefschetz;
mod metric;

pub use endo::Endo;
pub use form::{Form, MultiForm};
pub use json::{EndoJson, MultiFormJson, ScalarKind};
pub use lefschetz::{contract_omega, lefschetz_decompose, lefschetz_recombine, primitive_basis, two_form_matrix};
pub use metric::{hodge_star, Metric};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest ‖ξ‖_F·(max degree) accepted by the float series path.
pub const SERIES_RADIUS: f64 = 512.0;

const MAX_SERIES_TERMS: usize = 200;

fn check_dim<S: Scalar>(xi: &Endo<S>, a: &MultiForm<S>) -> Result<()> {
    if xi.dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!("endo dim {} vs form dim {}", xi.dim(), a.dim())));
    }
    Ok(())
}

pub fn wedge<S: Scalar>(a: &Form<S>, b: &Form<S>) -> Result<Form<S>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("wedge of dims {} and {}", a.dim(), b.dim())));
    }
    Ok(a.wedge(b))
}

pub fn interior<S: Scalar>(v: &[S], a: &Form<S>) -> Result<Form<S>> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!("vector dim {} vs form dim {}", v.len(), a.dim())));
    }
    Ok(a.interior(v))
}

pub fn rho_hat<S: Scalar>(xi: &Endo<S>, a: &MultiForm<S>) -> Result<MultiForm<S>> {
    check_dim(xi, a)?;
    Ok(a.rho_hat(xi))
}

fn series_once<S: Scalar>(xi: &Endo<S>, a: &MultiForm<S>) -> Result<MultiForm<S>> {
    let mut sum = a.clone();
    let mut term = a.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 1..=MAX_SERIES_TERMS {
        term = term.rho_hat(xi).scale(&S::from_ratio(1, k as i64));
        if term.is_zero() {
            return Ok(sum);
        }
        sum = sum.add(&term);
        if !S::EXACT && term.max_abs() <= 1e-18 * scale && k > 2 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergent { terms: MAX_SERIES_TERMS })
}

/// ρ_{exp ξ} a = Σ_k ρ̂_ξ^k a / k!, the pullback of `a` by exp(ξ).
///
/// Exact scalars need the series to terminate (nilpotent action). Floats use
/// scaling and squaring: exp(ρ̂_ξ) = exp(ρ̂_{ξ/2^s})^{2^s}.
pub fn rho_exp<S: Scalar>(xi: &Endo<S>, a: &MultiForm<S>) -> Result<MultiForm<S>> {
    check_dim(xi, a)?;
    if S::EXACT {
        return series_once(xi, a);
    }
    let pmax = a.degrees().into_iter().max().unwrap_or(0).max(1) as f64;
    let size = xi.norm() * pmax;
    if size > SERIES_RADIUS {
        return Err(Error::NonConvergent { terms: 0 });
    }
    let mut s = 0u32;
    while size / f64::from(1u32 << s) > 0.5 {
        s += 1;
    }
    let small = xi.scale(&S::from_f64(1.0 / f64::from(1u32 << s)));
    let mut out = a.clone();
    for _ in 0..(1u32 << s) {
        out = series_once(&small, &out)?;
    }
    Ok(out)
}

/// The same pullback computed directly: a ↦ (exp ξ)^* a.
pub fn rho_exp_pullback<S: Scalar>(xi: &Endo<S>, a: &MultiForm<S>) -> Result<MultiForm<S>> {
    check_dim(xi, a)?;
    Ok(a.pullback(&xi.exp()?))
}

/// ρ_g a = g^* a for a group element g.
pub fn rho_group<S: Scalar>(g: &Endo<S>, a: &MultiForm<S>) -> Result<MultiForm<S>> {
    check_dim(g, a)?;
    Ok(a.pullback(g))
}
