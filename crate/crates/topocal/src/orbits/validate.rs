//! Defining equations of each orbit, checked at an arbitrary point.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::analysis::{isotropy_algebra, rho_image_matrix};
use super::models::monge_ampere_constant;
use super::{model_calibration, CalibrationSpec, Kind, Params};
use crate::error::{Error, Result};
use crate::exalg::{two_form_matrix, Endo, Form, MultiForm};
use crate::linalg;
use crate::scalar::C64;

const TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub kind: Kind,
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, residual: f64, pass: bool) {
        self.checks.push(Check { name: name.into(), residual, pass });
    }

    fn small(&mut self, name: &str, residual: f64, scale: f64) {
        self.push(name, residual, residual <= TOL * scale.max(1.0));
    }
}

fn expect_shape(kind: Kind, phi: &MultiForm<f64>) -> Result<()> {
    let n = phi.dim();
    let d = phi.degrees();
    let ok = match kind {
        Kind::Symplectic => d == [2] && n % 2 == 0,
        Kind::Degenerate2form => d == [2],
        Kind::Sl => n % 2 == 0 && d == [n / 2, n / 2],
        Kind::Cy => n % 2 == 0 && d == [n / 2, n / 2, 2],
        Kind::Hk => n % 4 == 0 && d == [2, 2, 2],
        Kind::G2 => n == 7 && d == [3, 4],
        Kind::Spin7 => n == 8 && d == [4],
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{kind}: unexpected dim {n} / degrees {d:?}")))
    }
}

/// Complex kernel (orthonormal columns) of a complex matrix.
fn complex_kernel(a: &DMatrix<C64>) -> DMatrix<C64> {
    let (r, c) = a.shape();
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v = svd.v_t.expect("v_t").adjoint();
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<_> = (0..c)
        .filter(|&j| svd.singular_values.get(j).copied().unwrap_or(0.0) <= 1e-9 * smax.max(1e-300))
        .map(|j| v.column(j).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn complex_omega(phi: &MultiForm<f64>) -> Form<C64> {
    let re = phi.part(0).map(|&x| C64::new(x, 0.0));
    let im = phi.part(1).map(|&x| C64::new(0.0, x));
    re.add(&im)
}

/// Ker Ω = {v ∈ V⊗C : i_vΩ = 0}.
fn kernel_of(om: &Form<C64>) -> DMatrix<C64> {
    let n = om.dim();
    let cols: Vec<DVector<C64>> = (0..n).map(|j| DVector::from_vec(om.interior_coord(j).dense())).collect();
    complex_kernel(&DMatrix::from_columns(&cols))
}

/// The complex structure with T^{0,1} = Ker Ω: I = [K K̄] diag(−i, i) [K K̄]⁻¹.
fn complex_structure(k: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let (n, c) = k.shape();
    let mut p = DMatrix::zeros(n, 2 * c);
    p.view_mut((0, 0), (n, c)).copy_from(k);
    p.view_mut((0, c), (n, c)).copy_from(&k.map(|z| z.conj()));
    let d = DMatrix::from_diagonal(&DVector::from_fn(2 * c, |i, _| if i < c { -C64::i() } else { C64::i() }));
    let inv = p.clone().try_inverse()?;
    Some(p * d * inv)
}

/// Checks the defining equations of `kind` at φ with residual norms.
pub fn validate_structure(kind: Kind, phi: &MultiForm<f64>) -> Result<Diagnostics> {
    expect_shape(kind, phi)?;
    let n = phi.dim();
    let mut diag = Diagnostics { kind, checks: Vec::new() };
    let scale = phi.max_abs();
    match kind {
        Kind::Symplectic => {
            let r = linalg::rank(&two_form_matrix(phi.part(0)), 1e-10);
            diag.push("nondegenerate", (n - r) as f64, r == n);
        }
        Kind::Degenerate2form => {
            let w = phi.part(0);
            let r = linalg::rank(&two_form_matrix(w), 1e-10);
            diag.push("rank_two", (r as f64 - 2.0).abs(), r == 2);
            diag.small("square_vanishes", w.wedge(w).norm(), scale * scale);
        }
        Kind::Sl | Kind::Cy => {
            let c = n / 2;
            let om = complex_omega(phi);
            let k = kernel_of(&om);
            diag.push("kernel_dim", (k.ncols() as f64 - c as f64).abs(), k.ncols() == c);
            let mut both = DMatrix::zeros(n, 2 * k.ncols());
            both.view_mut((0, 0), (n, k.ncols())).copy_from(&k);
            both.view_mut((0, k.ncols()), (n, k.ncols())).copy_from(&k.map(|z| z.conj()));
            let sv = both.clone().svd(false, false).singular_values;
            let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
            let transverse = k.ncols() == c && smin > 1e-8;
            diag.push("kernel_transverse", if transverse { 0.0 } else { 1.0 }, transverse);
            if kind == Kind::Cy {
                let w = phi.part(2).map(|&x| C64::new(x, 0.0));
                let s2 = scale * scale;
                diag.small("omega_wedge_kahler", om.wedge(&w).norm(), s2);
                diag.small("conj_omega_wedge_kahler", om.conj().wedge(&w).norm(), s2);
                let wn = (0..c).fold(Form::scalar(n, C64::new(1.0, 0.0)), |acc, _| acc.wedge(&w));
                let ma = om.wedge(&om.conj()).sub(&wn.scale(&monge_ampere_constant::<C64>(c)));
                diag.small("monge_ampere", ma.norm(), wn.norm().max(1.0) * 2f64.powi(c as i32));
                match transverse.then(|| complex_structure(&k)).flatten() {
                    Some(i_c) => {
                        let imag = i_c.map(|z| z.im.abs()).max();
                        let i_r = i_c.map(|z| z.re);
                        let g = two_form_matrix(phi.part(2)) * &i_r;
                        let asym = (&g - g.transpose()).norm();
                        let sym = (&g + g.transpose()) * 0.5;
                        let lmin = SymmetricEigen::new(sym).eigenvalues.min();
                        diag.small("complex_structure_real", imag, 1.0);
                        diag.small("metric_symmetric", asym, scale);
                        diag.push("positivity", -lmin.min(0.0), lmin > 1e-10);
                    }
                    None => diag.push("positivity", f64::INFINITY, false),
                }
            }
        }
        Kind::Hk => validate_hk(phi, &mut diag),
        Kind::G2 | Kind::Spin7 => {
            let model = model_calibration(kind, &Params::default())?;
            let red = reduce_to_model(&model, phi, 8, 0);
            diag.push("orbit_membership", red.residual, red.converged);
            let spec = model.with_phi(phi.clone())?;
            let h = isotropy_algebra(&spec).len();
            let want = model.expected_isotropy_dim().expect("compact");
            diag.push("stabilizer_dim", (h as f64 - want as f64).abs(), h == want);
        }
    }
    Ok(diag)
}

fn validate_hk(phi: &MultiForm<f64>, diag: &mut Diagnostics) {
    let n = phi.dim();
    let w: Vec<DMatrix<f64>> = (0..3).map(|i| two_form_matrix(phi.part(i))).collect();
    let inv: Vec<Option<DMatrix<f64>>> = w.iter().map(|m| m.clone().try_inverse()).collect();
    let (Some(wi), Some(wj), Some(wk)) = (&inv[0], &inv[1], &inv[2]) else {
        diag.push("nondegenerate", f64::INFINITY, false);
        return;
    };
    diag.push("nondegenerate", 0.0, true);
    // ω_X(u,v) = g(Xu,v) gives K = −W_I⁻¹W_J and its cyclic versions
    let i = -(wj * &w[2]);
    let j = -(wk * &w[0]);
    let k = -(wi * &w[1]);
    let id = DMatrix::<f64>::identity(n, n);
    let quat = [(&i * &i + &id).norm(), (&j * &j + &id).norm(), (&k * &k + &id).norm(), (&i * &j - &k).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    diag.small("quaternion_relations", quat, 1.0);
    let gs = [&w[0] * &i, &w[1] * &j, &w[2] * &k];
    let asym = gs.iter().map(|g| (g - g.transpose()).norm()).fold(0.0, f64::max);
    let spread = (&gs[0] - &gs[1]).norm().max((&gs[0] - &gs[2]).norm());
    diag.small("metric_symmetric", asym, phi.max_abs());
    diag.small("metric_consistent", spread, phi.max_abs());
    let sym = (&gs[0] + gs[0].transpose()) * 0.5;
    let lmin = SymmetricEigen::new(sym).eigenvalues.min();
    diag.push("positivity", -lmin.min(0.0), lmin > 1e-10);
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub converged: bool,
    pub residual: f64,
    /// g with φ = ρ_g Φ⁰ = g^*Φ⁰.
    pub g: Endo<f64>,
    pub iterations: usize,
}

/// Gauss–Newton on M ↦ ‖M^*φ − Φ⁰‖ with updates M ← M·exp(δ), restarted from
/// `starts` seeded points near the identity. Failure means "not certified",
/// not "outside the orbit".
pub fn reduce_to_model(model: &CalibrationSpec, phi: &MultiForm<f64>, starts: usize, seed: u64) -> Reduction {
    let n = model.dim;
    let target = DVector::from_vec(model.phi0.dense());
    let tol = 1e-12 * target.norm().max(1.0);
    let resid = |m: &Endo<f64>| (&target - DVector::from_vec(phi.pullback(m).dense())).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = Reduction { converged: false, residual: f64::INFINITY, g: Endo::identity(n), iterations: 0 };
    for start in 0..starts.max(1) {
        let mut m = if start == 0 {
            Endo::identity(n)
        } else {
            let xi: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-0.1..0.1)).collect();
            Endo::from_vec(n, &xi).exp().unwrap_or_else(|_| Endo::identity(n))
        };
        let mut r = resid(&m);
        let mut it = 0;
        while r > tol && it < 100 {
            it += 1;
            let cur = phi.pullback(&m);
            let a = rho_image_matrix(&cur);
            let rhs = &target - DVector::from_vec(cur.dense());
            let delta = linalg::pinv(&a, 1e-12) * rhs;
            let mut step = 1.0;
            let mut improved = false;
            for _ in 0..20 {
                let Ok(e) = Endo::from_vec(n, (&delta * step).as_slice()).exp() else { break };
                let cand = m.matmul(&e);
                let rc = resid(&cand);
                if rc < r {
                    m = cand;
                    r = rc;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if r < best.residual {
            let g = m.to_dmatrix().try_inverse().map(|x| Endo::from_dmatrix(&x)).unwrap_or_else(|| Endo::identity(n));
            best = Reduction { converged: r <= tol * 1e3, residual: r, g, iterations: it };
        }
        if best.converged {
            break;
        }
    }
    best
}
