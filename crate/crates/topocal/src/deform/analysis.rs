//! Evaluation of a solved series and the checks run on it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expansion::Expansion;
use super::{c64, DeformationResult, DeformationSeed};
use crate::error::{Error, Result};
use crate::exalg::{Endo, Form, MultiForm};
use crate::hodge::HodgeSystem;
use crate::linalg;
use crate::orbits::models::monge_ampere_constant;
use crate::orbits::{CalibrationSpec, Kind};
use crate::scalar::{binomial, factorial, C64};
use crate::torus::{EndoField, Trig, TrigForm};

const MAX_TERMS: usize = 60;

/// a(t) = Σ_k a_k t^k/k!.
fn a_at(result: &DeformationResult, t: f64) -> EndoField<C64> {
    let n = result.phi0.form_dim();
    let mut a = Trig::zero(result.torus_dim, &Endo::zero(n)).with_cap(result.phi0.cap());
    for (i, ak) in result.coeffs.iter().enumerate() {
        let k = i + 1;
        a = a.add(&ak.scale(&c64(t.powi(k as i32) / factorial(k))));
    }
    a
}

/// Φ_t = ρ_{exp a(t)}Φ⁰, summing Σ_l ρ̂_{a(t)}^l Φ⁰/l! until the terms vanish.
pub fn evaluate(result: &DeformationResult, t: f64) -> Result<TrigForm<C64>> {
    let a = a_at(result, t);
    let mut sum = result.phi0.clone();
    let mut term = result.phi0.clone();
    for l in 1..=MAX_TERMS {
        term = term.rho_hat(&a)?.scale(&c64(1.0 / l as f64));
        term = term.pruned(1e-15 * term.max_abs());
        term.check_cap()?;
        sum = sum.add(&term);
        if term.norm() <= 1e-17 * sum.norm().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergent { terms: MAX_TERMS })
}

/// ‖dΦ_t‖.
pub fn closure_residual(result: &DeformationResult, t: f64) -> Result<f64> {
    Ok(evaluate(result, t)?.d().norm())
}

/// Coefficients of t^0..t^upto in ρ_{exp a}Φ⁰ for the truncated a(t),
/// including orders past the solved one.
pub fn truncated_coefficients(result: &DeformationResult, upto: usize) -> Result<Vec<TrigForm<C64>>> {
    let mut ex = Expansion::new(result.phi0.clone());
    let zero = Trig::zero(result.torus_dim, &Endo::zero(result.phi0.form_dim())).with_cap(result.phi0.cap());
    for k in 1..=upto {
        if k > 1 {
            ex.extend(k)?;
        }
        let alpha = match result.coeffs.get(k - 1) {
            Some(ak) => ak.scale(&c64(1.0 / factorial(k))),
            None => zero.clone(),
        };
        ex.set_alpha(k, alpha)?;
    }
    Ok((0..=upto).map(|m| ex.coefficient(m)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdStep {
    pub h: f64,
    pub error: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub c3_norm: f64,
    pub steps: Vec<FdStep>,
    pub pass: bool,
}

/// Central difference (Φ_h − Φ_{−h})/2h against the first-order tangent.
/// The error is bounded by 1.1‖c₃‖h² + 1e-10.
pub fn fd_check(result: &DeformationResult, hs: &[f64]) -> Result<FdReport> {
    let coeffs = truncated_coefficients(result, 3)?;
    let c1 = &coeffs[1];
    let c3_norm = coeffs[3].norm();
    let mut steps = Vec::new();
    for &h in hs {
        let fd = evaluate(result, h)?.sub(&evaluate(result, -h)?).scale(&c64(0.5 / h));
        let error = fd.sub(c1).norm();
        let bound = 1.1 * c3_norm * h * h + 1e-10;
        steps.push(FdStep { h, error, bound, pass: error <= bound });
    }
    let pass = steps.iter().all(|s| s.pass);
    Ok(FdReport { c3_norm, steps, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub order: usize,
    pub ts: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of log‖dΦ_t‖ against log t.
    pub slope: Option<f64>,
    /// Every residual is at round-off: the truncated series closes exactly.
    pub exact: bool,
    pub pass: bool,
}

const NOISE: f64 = 1e-13;

/// ‖dΦ_t‖ should scale like t^{K+1}; the fitted slope must reach K + 0.8.
pub fn slope_fit(result: &DeformationResult) -> Result<SlopeReport> {
    let k = result.order;
    let mut t_hi: f64 = 0.5;
    let mut r_hi = closure_residual(result, t_hi)?;
    while r_hi > 1e-3 && t_hi > 1e-6 {
        t_hi *= 0.5;
        r_hi = closure_residual(result, t_hi)?;
    }
    // keep the smallest point above round-off
    let ratio = if r_hi > NOISE { (1e3 * NOISE / r_hi).powf(1.0 / (k + 1) as f64).max(0.1) } else { 0.1 };
    let t_lo = t_hi * ratio;
    let ts: Vec<f64> = (0..5).map(|i| t_lo * (t_hi / t_lo).powf(i as f64 / 4.0)).collect();
    let residuals: Vec<f64> = ts.iter().map(|&t| closure_residual(result, t)).collect::<Result<_>>()?;
    let exact = residuals.iter().all(|&r| r < NOISE);
    let pts: Vec<(f64, f64)> =
        ts.iter().zip(&residuals).filter(|(_, &r)| r >= NOISE).map(|(&t, &r)| (t.ln(), r.ln())).collect();
    let slope = (pts.len() >= 3).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        num / den
    });
    let pass = exact || slope.is_some_and(|s| s >= k as f64 + 0.8);
    Ok(SlopeReport { order: k, ts, residuals, slope, exact, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantReport {
    /// x_k ≤ b c^{k−1}/k² with x_k = ‖a_k‖/k!.
    pub b: f64,
    pub c: f64,
    /// 1/c, absent when c = 0.
    pub radius: Option<f64>,
    pub holds: bool,
}

pub fn majorant_report(result: &DeformationResult) -> MajorantReport {
    let x: Vec<f64> = result.per_order.iter().filter(|r| r.k <= result.order).map(|r| r.a_norm_over_kfact).collect();
    let x1 = x.first().copied().unwrap_or(0.0);
    let b = 16.0 * x1;
    let mut c: f64 = 0.0;
    if x1 > 0.0 {
        for (i, &xk) in x.iter().enumerate().skip(1) {
            let k = (i + 1) as f64;
            c = c.max((k * k * xk / x1).powf(1.0 / (k - 1.0)));
        }
    }
    let holds = x.iter().enumerate().all(|(i, &xk)| {
        let k = (i + 1) as f64;
        xk <= b * c.powi(i as i32) / (k * k) * (1.0 + 1e-12) + f64::MIN_POSITIVE
    });
    MajorantReport { b, c, radius: (c > 0.0).then(|| 1.0 / c), holds }
}

/// Real part of the constant mode of ρ̂_{a_1}Φ⁰ (dense), the first-order period.
pub fn first_order_period(result: &DeformationResult) -> Vec<f64> {
    let zero = vec![0; result.torus_dim];
    let c1 = &result.series[1];
    match c1.mode(&zero) {
        Some(c) => c.dense().iter().map(|z| z.re).collect(),
        None => vec![0.0; MultiForm::<f64>::dense_len(result.phi0.form_dim(), &result.phi0.degrees())],
    }
}

/// One constant seed per element of the ℍ¹ basis.
pub fn harmonic_seeds(sys: &HodgeSystem) -> Result<Vec<DeformationSeed>> {
    let h = sys.fibre_dim(1);
    (0..h)
        .map(|i| {
            let mut e = vec![0.0; h];
            e[i] = 1.0;
            DeformationSeed::from_harmonic(sys, &e)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PeriodMap {
    /// One column per result.
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    pub dim_h1: usize,
    pub injective: bool,
}

/// First-order periods of one deformation per ℍ¹ basis element.
pub fn period_map(sys: &HodgeSystem, results: &[DeformationResult]) -> Result<PeriodMap> {
    let dim_h1 = sys.fibre_dim(1);
    if results.len() != dim_h1 {
        return Err(Error::DimensionMismatch(format!("{} results for dim ℍ¹ = {dim_h1}", results.len())));
    }
    let cols: Vec<Vec<f64>> = results.iter().map(first_order_period).collect();
    let len = MultiForm::<f64>::dense_len(sys.spec.dim, &sys.spec.degrees);
    let matrix = DMatrix::from_fn(len, dim_h1, |r, c| cols[c][r]);
    let rank = linalg::rank(&matrix, 1e-10);
    Ok(PeriodMap { matrix, rank, dim_h1, injective: rank == dim_h1 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CyRelations {
    /// ‖α∧ω + Ω∧β‖
    pub r1: f64,
    /// ‖α∧Ω̄ + Ω∧ᾱ − n c_n β∧ω^{n−1}‖
    pub r2: f64,
}

/// Linearized CY relations at Φ⁰ for a period (δReΩ, δImΩ, δω).
pub fn cy_period_relations(spec: &CalibrationSpec, period: &[f64]) -> Result<CyRelations> {
    if spec.kind != Kind::Cy {
        return Err(Error::WrongKind(format!("expected cy, got {}", spec.kind)));
    }
    let dim = spec.dim;
    let n = dim / 2;
    let len = binomial(dim, n);
    if period.len() != 2 * len + binomial(dim, 2) {
        return Err(Error::DimensionMismatch("period length".into()));
    }
    let cx = |v: &[f64], p: usize| Form::<C64>::from_dense(dim, p, &v.iter().map(|&x| c64(x)).collect::<Vec<_>>());
    let i = C64::new(0.0, 1.0);
    let alpha = cx(&period[..len], n).add(&cx(&period[len..2 * len], n).scale(&i));
    let beta = cx(&period[2 * len..], 2);
    let phi = &spec.phi0;
    let omega_c = phi.part(0).complexify().add(&phi.part(1).complexify().scale(&i));
    let w = phi.part(2).complexify();
    let r1 = alpha.wedge(&w).add(&omega_c.wedge(&beta)).norm();
    let w_pow = (1..n).fold(Form::scalar(dim, c64(1.0)), |acc, _| acc.wedge(&w));
    let cn: C64 = monge_ampere_constant(n);
    let r2 = alpha
        .wedge(&omega_c.conj())
        .add(&omega_c.wedge(&alpha.conj()))
        .sub(&beta.wedge(&w_pow).scale(&(cn * n as f64)))
        .norm();
    Ok(CyRelations { r1, r2 })
}
