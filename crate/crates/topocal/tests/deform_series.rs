use nalgebra::DVector;
use topocal::deform::{
    cy_period_relations, evaluate, fd_check, first_order_period, harmonic_seeds, majorant_report, period_map, run,
    slope_fit, truncated_coefficients, DeformationResult, DeformationSeed, RunOptions,
};
use topocal::exalg::{Endo, MultiForm};
use topocal::hodge::HodgeSystem;
use topocal::orbits::{isotropy_algebra, model_calibration, rho_image_matrix, CalibrationSpec, Kind, Params};
use topocal::scalar::{factorial, C64};
use topocal::torus::{EndoField, Trig, Vector, VectorField};
use topocal::Error;

fn spec(kind: Kind, p: Params) -> CalibrationSpec {
    model_calibration(kind, &p).unwrap()
}

fn system(kind: Kind, p: Params) -> HodgeSystem {
    let s = spec(kind, p);
    HodgeSystem::build(&s, s.dim, 1).unwrap()
}

/// Real vector field from modes (k, Re v_k, Im v_k) and their conjugates.
fn real_field(n: usize, modes: &[(Vec<i32>, Vec<f64>, Vec<f64>)]) -> VectorField<C64> {
    let mut v = Trig::zero(n, &Vector(vec![C64::new(0.0, 0.0); n]));
    for (k, re, im) in modes {
        let c: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        v.add_mode(k.iter().map(|x| -x).collect(), Vector(c.iter().map(|z| z.conj()).collect()));
        v.add_mode(k.clone(), Vector(c));
    }
    v
}

/// a₁ = Dv with v on two frequencies, so ρ̂_{a₁}ω₀ = d i_vω₀.
fn symplectic_exact_seed(sys: &HodgeSystem) -> DeformationSeed {
    let v = real_field(
        4,
        &[
            (vec![1, 0, 0, 0], vec![0.0, 0.3, 0.1, 0.0], vec![0.1, 0.0, 0.0, 0.2]),
            (vec![0, 1, 1, 0], vec![0.2, 0.0, 0.0, 0.1], vec![0.0, 0.0, 0.1, 0.0]),
        ],
    );
    DeformationSeed::exact(sys, &v).unwrap()
}

fn g2_mixed_seed(sys: &HodgeSystem) -> DeformationSeed {
    let mut xi = Endo::zero(7);
    xi.set(0, 1, 0.3);
    xi.set(2, 5, -0.2);
    xi.set(6, 6, 0.1);
    let c = DeformationSeed::constant(sys, &xi).unwrap();
    let v = real_field(7, &[(vec![1, 0, 0, 0, 0, 0, 0], vec![0.0, 0.2, 0.1, 0.0, 0.0, 0.1, 0.0], vec![0.0; 7])]);
    c.plus(&DeformationSeed::exact(sys, &v).unwrap())
}

fn check_gates(r: &DeformationResult, closure_tol: f64) {
    assert!(r.obstruction.is_none());
    for rec in &r.per_order {
        assert!(rec.closure_residual <= closure_tol, "order {} closure {:e}", rec.k, rec.closure_residual);
        assert!(rec.ob_exactness_residual <= 1e-10, "order {} exactness {:e}", rec.k, rec.ob_exactness_residual);
        assert!(rec.ob_two_path <= 1e-9 * rec.ob_norm.max(1.0), "order {} two-path {:e}", rec.k, rec.ob_two_path);
        assert!(rec.ob_membership <= 1e-9, "order {} membership {:e}", rec.k, rec.ob_membership);
    }
    let fd = fd_check(r, &[1e-3, 1e-4]).unwrap();
    assert!(fd.pass, "{fd:?}");
    let slope = slope_fit(r).unwrap();
    assert!(slope.pass, "{slope:?}");
}

#[test]
fn constant_seed_is_linear_and_exact() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let mut xi = Endo::zero(4);
    xi.set(0, 1, 0.4);
    xi.set(2, 2, -0.3);
    xi.set(3, 0, 0.2);
    let seed = DeformationSeed::constant(&sys, &xi).unwrap();
    let r = run(&sys, &seed, 5, &RunOptions::default()).unwrap();
    assert_eq!(r.order, 5);
    for (i, a) in r.coeffs.iter().enumerate().skip(1) {
        assert!(a.is_zero(), "a_{} = {:e}", i + 1, a.norm());
    }
    for t in [0.1, 0.7, 2.0] {
        let phi = evaluate(&r, t).unwrap();
        assert!(phi.d().is_zero());
        // constant in x, so the value is ρ_{exp(tξ)}Φ⁰
        let g = xi.scale(&t).exp().unwrap();
        let direct = sys.spec.phi0.pullback(&g).map(|&x| C64::new(x, 0.0));
        let got = phi.mode(&[0; 4]).unwrap();
        assert!(got.sub(&direct).max_abs() < 1e-12, "t = {t}");
    }
    let m = majorant_report(&r);
    assert_eq!(m.c, 0.0);
    assert!(m.radius.is_none() && m.holds);
}

#[test]
fn evaluate_at_zero_is_phi0() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let r = run(&sys, &symplectic_exact_seed(&sys), 3, &RunOptions::default()).unwrap();
    assert_eq!(evaluate(&r, 0.0).unwrap(), r.phi0);
}

#[test]
fn symplectic_exact_seed_order_six() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let r = run(&sys, &symplectic_exact_seed(&sys), 6, &RunOptions::default()).unwrap();
    assert_eq!(r.order, 6);
    check_gates(&r, 1e-9);
    // the obstructions are genuinely nonzero
    assert!(r.per_order[1..].iter().all(|rec| rec.ob_norm > 1e-6));
    // t¹..t⁶ coefficients of dρ_{exp a(t)}ω₀ vanish; t⁷ does not
    let coeffs = truncated_coefficients(&r, 7).unwrap();
    for c in &coeffs[1..=6] {
        assert!(c.d().norm() <= 1e-12);
    }
    assert!(coeffs[7].d().norm() > 1e-8);
}

/// v depending on ⟨k,x⟩ alone: ρ̂_{Dv} maps everything into κ∧(·) with
/// κ = Σ k_iθ^i, so ρ_{exp tDv}ω₀ is closed for all t and every Ob_k vanishes.
#[test]
fn single_mode_seed_is_unobstructed() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let v = real_field(4, &[(vec![1, 1, 0, 0], vec![0.0, 0.3, 0.1, -0.2], vec![0.1, 0.0, 0.0, 0.2])]);
    let r = run(&sys, &DeformationSeed::exact(&sys, &v).unwrap(), 6, &RunOptions::default()).unwrap();
    for rec in &r.per_order[1..] {
        assert!(rec.ob_norm <= 1e-14 && rec.a_norm_over_kfact <= 1e-14);
    }
    for t in [0.3, 1.0] {
        assert!(evaluate(&r, t).unwrap().d().norm() <= 1e-12);
    }
    assert!(slope_fit(&r).unwrap().exact);
}

#[test]
fn g2_mixed_seed_order_four() {
    let sys = system(Kind::G2, Params::default());
    let r = run(&sys, &g2_mixed_seed(&sys), 4, &RunOptions::default()).unwrap();
    check_gates(&r, 1e-8);
    let x: Vec<f64> = r.per_order.iter().map(|rec| rec.a_norm_over_kfact).collect();
    assert!(x.windows(2).all(|w| w[1] < w[0]), "{x:?}");
    let m = majorant_report(&r);
    assert!(m.holds && m.c > 0.0);
}

#[test]
fn sl_and_cy_seeds_close() {
    for (kind, p) in [(Kind::Sl, Params::complex_dim(2)), (Kind::Cy, Params::complex_dim(2))] {
        let sys = system(kind, p);
        let v = real_field(4, &[(vec![0, 1, 0, 1], vec![0.2, -0.1, 0.0, 0.3], vec![0.0, 0.1, 0.2, 0.0])]);
        let r = run(&sys, &DeformationSeed::exact(&sys, &v).unwrap(), 4, &RunOptions::default()).unwrap();
        check_gates(&r, 1e-9);
    }
}

#[test]
fn majorant_scales_with_seed() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let seed = symplectic_exact_seed(&sys);
    let cs: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&s| {
            let r = run(&sys, &seed.scaled(s), 5, &RunOptions::default()).unwrap();
            let m = majorant_report(&r);
            assert!(m.holds);
            assert!((m.b - 16.0 * r.per_order[0].a_norm_over_kfact).abs() < 1e-12);
            m.c
        })
        .collect();
    assert!(cs[0] > 0.0);
    assert!((cs[1] / cs[0] - 0.5).abs() < 1e-6, "{cs:?}");
    assert!((cs[2] / cs[0] - 0.25).abs() < 1e-6, "{cs:?}");
}

/// Independent least-squares oracle for the recovery of a_k.
#[test]
fn minimal_norm_recovery() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let r = run(&sys, &symplectic_exact_seed(&sys), 4, &RunOptions::default()).unwrap();
    let image = rho_image_matrix(&sys.spec.phi0);
    let svd = image.clone().svd(true, true);
    let iso = isotropy_algebra(&sys.spec);
    assert_eq!(iso.len(), 10);
    for (i, ak) in r.coeffs.iter().enumerate().skip(1) {
        let alpha = ak.scale(&C64::new(1.0 / factorial(i + 1), 0.0));
        let target = r.phi0.rho_hat(&alpha).unwrap();
        for (k, c) in target.modes() {
            let got = alpha.mode(k).unwrap();
            for part in 0..2 {
                let pick = |z: &C64| if part == 0 { z.re } else { z.im };
                let b = DVector::from_iterator(c.dense().len(), c.dense().iter().map(pick));
                let x = svd.solve(&b, 1e-10).unwrap();
                let mine = DVector::from_iterator(16, got.entries().iter().map(pick));
                assert!((&x - &mine).norm() <= 1e-10 * x.norm().max(1.0));
                for h in &iso {
                    let dot: f64 = h.entries().iter().zip(mine.iter()).map(|(a, b)| a * b).sum();
                    assert!(dot.abs() <= 1e-10);
                }
            }
        }
        let rec = &r.per_order[i];
        assert!(rec.recovery_residual <= 1e-12 && rec.isotropy_component <= 1e-12);
    }
}

/// Adding a constant h ∈ 𝔥 to a₁ keeps every dR_k at zero. Ob_k itself moves
/// once a₁ depends on x: at order 2 by −½ L_h(ρ̂_{a₁}Φ⁰).
#[test]
fn isotropy_shift_of_seed() {
    let sys = system(Kind::G2, Params::default());
    let iso = isotropy_algebra(&sys.spec);
    let h: EndoField<C64> = Trig::constant(7, iso[3].scale(&0.5).to_c64());
    let seed = g2_mixed_seed(&sys);
    let shifted = DeformationSeed::new(&sys, seed.a1.add(&h), false).unwrap();
    let base = run(&sys, &seed, 3, &RunOptions::default()).unwrap();
    let moved = run(&sys, &shifted, 3, &RunOptions::default()).unwrap();
    for (a, b) in base.per_order.iter().zip(&moved.per_order) {
        assert!(a.closure_residual <= 1e-9 && b.closure_residual <= 1e-9);
    }
    let ob2 = |r: &DeformationResult| {
        let a1 = &r.coeffs[0];
        r.phi0.rho_hat(a1).unwrap().rho_hat(a1).unwrap().d().scale(&C64::new(0.5, 0.0))
    };
    let beta = base.phi0.rho_hat(&seed.a1).unwrap();
    let predicted = beta.lie_operator_l(&h).unwrap().scale(&C64::new(-0.5, 0.0));
    let shift = ob2(&moved).sub(&ob2(&base));
    assert!(shift.norm() > 1e-3);
    assert!(shift.sub(&predicted).norm() <= 1e-12);

    // for a constant seed nothing moves
    let mut xi = Endo::zero(7);
    xi.set(1, 4, 0.3);
    let c = DeformationSeed::constant(&sys, &xi).unwrap();
    let c_shift = DeformationSeed::new(&sys, c.a1.add(&h), true).unwrap();
    let r1 = run(&sys, &c, 3, &RunOptions::default()).unwrap();
    let r2 = run(&sys, &c_shift, 3, &RunOptions::default()).unwrap();
    for (a, b) in r1.per_order.iter().zip(&r2.per_order).skip(1) {
        assert_eq!(a.ob_norm, 0.0);
        assert_eq!(b.ob_norm, 0.0);
    }
}

#[test]
fn period_map_rank_is_dim_h1() {
    let cases = [
        (Kind::Symplectic, Params::dim(4)),
        (Kind::Symplectic, Params::dim(6)),
        (Kind::Sl, Params::complex_dim(2)),
        (Kind::Cy, Params::complex_dim(2)),
        (Kind::Cy, Params::complex_dim(3)),
        (Kind::Hk, Params::m(1)),
        (Kind::G2, Params::default()),
        (Kind::Spin7, Params::default()),
    ];
    for (kind, p) in cases {
        let sys = system(kind, p);
        let seeds = harmonic_seeds(&sys).unwrap();
        let results: Vec<DeformationResult> =
            seeds.iter().map(|s| run(&sys, s, 2, &RunOptions::default()).unwrap()).collect();
        let pm = period_map(&sys, &results).unwrap();
        assert_eq!(pm.rank, sys.fibre_dim(1), "{kind}");
        assert!(pm.injective);
        // the periods are the harmonic basis itself
        let diff = &pm.matrix - sys.basis(1);
        assert!(diff.amax() < 1e-12, "{kind}");
        assert!(period_map(&sys, &results[1..]).is_err());
    }
}

#[test]
fn cy_period_relations_hold() {
    let sys = system(Kind::Cy, Params::complex_dim(3));
    for seed in harmonic_seeds(&sys).unwrap() {
        let r = run(&sys, &seed, 1, &RunOptions::default()).unwrap();
        let rel = cy_period_relations(&sys.spec, &first_order_period(&r)).unwrap();
        assert!(rel.r1 <= 1e-9 && rel.r2 <= 1e-9, "{rel:?}");
    }
    // ρ̂_{id/3} gives (Ω⁰, 2ω⁰/3): the constant rescaling Ω → tΩ, ω → t^{2/3}ω
    let xi = Endo::<f64>::identity(6).scale(&(1.0 / 3.0));
    let r = run(&sys, &DeformationSeed::constant(&sys, &xi).unwrap(), 1, &RunOptions::default()).unwrap();
    let per = first_order_period(&r);
    let phi = &sys.spec.phi0;
    let expected = MultiForm::new(vec![phi.part(0).clone(), phi.part(1).clone(), phi.part(2).scale(&(2.0 / 3.0))]).unwrap();
    let d: f64 = per.iter().zip(expected.dense()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-12);
    let rel = cy_period_relations(&sys.spec, &per).unwrap();
    assert!(rel.r1 <= 1e-12 && rel.r2 <= 1e-12);
    // (Ω⁰, 0) satisfies the first relation but not the second
    let bare = MultiForm::new(vec![phi.part(0).clone(), phi.part(1).clone(), phi.part(2).scale(&0.0)]).unwrap();
    let rel = cy_period_relations(&sys.spec, &bare.dense()).unwrap();
    assert!(rel.r1 <= 1e-12);
    assert!(rel.r2 > 1.0);
    // the phase direction ξ = J/3 gives (iΩ⁰, 0)
    let mut j = Endo::<f64>::zero(6);
    for c in 0..3 {
        j.set(2 * c + 1, 2 * c, 1.0 / 3.0);
        j.set(2 * c, 2 * c + 1, -1.0 / 3.0);
    }
    let r = run(&sys, &DeformationSeed::constant(&sys, &j).unwrap(), 1, &RunOptions::default()).unwrap();
    let per = first_order_period(&r);
    let rel = cy_period_relations(&sys.spec, &per).unwrap();
    assert!(rel.r1 <= 1e-12 && rel.r2 <= 1e-12);
    // Re(iΩ) = −Im Ω, Im(iΩ) = Re Ω, up to the orientation of J
    let i_omega = MultiForm::new(vec![phi.part(1).scale(&-1.0), phi.part(0).clone(), phi.part(2).scale(&0.0)]).unwrap().dense();
    let dist = |sign: f64| per.iter().zip(&i_omega).map(|(a, b)| (a - sign * b).abs()).fold(0.0, f64::max);
    assert!(dist(1.0).min(dist(-1.0)) < 1e-12);
}

#[test]
fn seed_validation() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    // x-dependent a₁ that is not a Jacobian
    let mut e = Endo::zero(4);
    e.set(0, 2, C64::new(0.3, 0.0));
    let mut a: EndoField<C64> = Trig::zero(4, &Endo::zero(4));
    a.add_mode(vec![1, 0, 0, 0], e.clone());
    a.add_mode(vec![-1, 0, 0, 0], e);
    assert!(matches!(DeformationSeed::new(&sys, a, false), Err(Error::SeedNotClosed(_))));
    // exact seeds are closed but not coclosed
    let v = real_field(4, &[(vec![1, 0, 0, 0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0; 4])]);
    assert!(DeformationSeed::new(&sys, v.jacobian(), true).is_err());
    assert!(DeformationSeed::new(&sys, v.jacobian(), false).is_ok());
    assert!(DeformationSeed::from_harmonic(&sys, &[1.0]).is_err());
}

#[test]
fn support_cap_reports_order() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let opts = RunOptions { support_cap: 40, ..RunOptions::default() };
    match run(&sys, &symplectic_exact_seed(&sys), 6, &opts) {
        Err(Error::AtOrder { order, source }) => {
            assert!(order >= 2);
            assert!(matches!(*source, Error::SupportCap { .. }), "{source}");
        }
        other => panic!("expected a capped failure, got {:?}", other.map(|r| r.order)),
    }
    assert!(run(&sys, &symplectic_exact_seed(&sys), 13, &RunOptions::default()).is_err());
    assert!(run(&sys, &symplectic_exact_seed(&sys), 0, &RunOptions::default()).is_err());
}

#[test]
fn degenerate_form_fails_at_solve() {
    let s = spec(Kind::Degenerate2form, Params::dim(4));
    let sys = HodgeSystem::build(&s, 4, 1).unwrap();
    let v = real_field(4, &[(vec![1, 0, 0, 0], vec![0.0, 0.0, 0.3, 0.2], vec![0.0; 4])]);
    let seed = DeformationSeed::exact(&sys, &v).unwrap();
    match run(&sys, &seed, 3, &RunOptions::default()) {
        Ok(r) => assert!(r.per_order.iter().all(|x| x.ob_norm == 0.0)),
        Err(Error::AtOrder { order, .. }) => assert!(order >= 2),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn report_json_shape() {
    let sys = system(Kind::Symplectic, Params::dim(4));
    let r = run(&sys, &symplectic_exact_seed(&sys), 3, &RunOptions::default()).unwrap();
    let v = serde_json::to_value(r.report()).unwrap();
    assert_eq!(v["structure"], "symplectic");
    assert_eq!(v["order"], 3);
    let per = v["per_order"].as_array().unwrap();
    assert_eq!(per.len(), 3);
    for key in ["k", "ob_norm", "ob_exactness_residual", "a_norm_over_kfact", "closure_residual"] {
        assert!(per[0].get(key).is_some(), "{key}");
    }
    for key in ["b", "c", "holds"] {
        assert!(v["majorant"].get(key).is_some(), "{key}");
    }
    assert_eq!(v["period_first_order"].as_array().unwrap().len(), 6);
}
