mod common;

use nalgebra::DMatrix;
use rand::Rng;
use topocal::hodge::{decomposition_checks, dirac_check, half_box, random_section, HodgeSystem};
use topocal::orbits::{ek_generators, model_calibration, CalibrationSpec, Kind, Params};
use topocal::scalar::C64;
use topocal::torus::{Freq, TrigForm};
use topocal::Error;

fn spec(kind: Kind, p: Params) -> CalibrationSpec {
    model_calibration(kind, &p).unwrap()
}

fn system(kind: Kind, p: Params, f: i32) -> HodgeSystem {
    let s = spec(kind, p);
    HodgeSystem::build(&s, s.dim, f).unwrap()
}

fn elliptic_specs() -> Vec<CalibrationSpec> {
    vec![
        spec(Kind::Symplectic, Params::dim(4)),
        spec(Kind::Symplectic, Params::dim(6)),
        spec(Kind::Sl, Params::complex_dim(2)),
        spec(Kind::Cy, Params::complex_dim(2)),
        spec(Kind::Cy, Params::complex_dim(3)),
        spec(Kind::Hk, Params::m(1)),
        spec(Kind::G2, Params::default()),
        spec(Kind::Spin7, Params::default()),
    ]
}

fn inner(a: &TrigForm<C64>, b: &TrigForm<C64>) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for (k, x) in a.modes() {
        if let Some(y) = b.mode(k) {
            for (u, v) in x.dense().iter().zip(y.dense()) {
                s += u.conj() * v;
            }
        }
    }
    s
}

fn random_freqs(rng: &mut impl Rng, n: usize, count: usize, bound: i32, zero: bool) -> Vec<Freq> {
    let mut out: Vec<Freq> = Vec::new();
    if zero {
        out.push(vec![0; n]);
    }
    while out.len() < count {
        let k: Freq = (0..n).map(|_| rng.gen_range(-bound..=bound)).collect();
        let neg: Freq = k.iter().map(|x| -x).collect();
        if k.iter().any(|&x| x != 0) && !out.contains(&k) && !out.contains(&neg) {
            out.push(k);
        }
    }
    out
}

fn rank(m: &DMatrix<f64>) -> usize {
    topocal::linalg::rank(m, 1e-9)
}

#[test]
fn symplectic_t2_is_de_rham() {
    let sys = system(Kind::Symplectic, Params::dim(2), 2);
    assert_eq!((sys.fibre_dim(0), sys.fibre_dim(1), sys.fibre_dim(2)), (2, 1, 0));
    // E⁰ = Λ¹, so R_0(k) is ∧k on 1-forms: (a, b) ↦ k₁b − k₂a
    let r = sys.symbol(0, &[3, -2]);
    let b0 = sys.basis(0);
    let b1 = sys.basis(1);
    let full = b1 * &r * b0.transpose();
    assert!((full[(0, 0)] - 2.0).abs() < 1e-12 && (full[(0, 1)] - 3.0).abs() < 1e-12, "{full}");
    let rep = sys.cohomology();
    // H⁰ holds every closed 1-form: one df per nonzero frequency
    assert_eq!(rep.h_sharp, vec![2 + 24, 1, 0]);
    assert_eq!(rep.betti, vec![1, 2, 1]);
}

#[test]
fn d_squared_and_zero_frequency() {
    let mut rng = common::rng(11);
    for s in elliptic_specs().into_iter().chain([spec(Kind::Degenerate2form, Params::dim(4))]) {
        let sys = HodgeSystem::build(&s, s.dim, 1).unwrap();
        for j in 0..3 {
            assert_eq!(sys.symbol(j, &vec![0; s.dim]).amax(), 0.0);
        }
        for _ in 0..5 {
            let k: Vec<i32> = (0..s.dim).map(|_| rng.gen_range(-3..=3)).collect();
            let dd = sys.symbol(1, &k) * sys.symbol(0, &k);
            assert!(dd.amax() <= 1e-12, "{} d²: {:e}", s.kind, dd.amax());
        }
    }
}

#[test]
fn fibre_d_matches_exterior_derivative() {
    let mut rng = common::rng(12);
    for s in [spec(Kind::G2, Params::default()), spec(Kind::Cy, Params::complex_dim(2))] {
        let sys = HodgeSystem::build(&s, s.dim, 1).unwrap();
        for j in 0..2 {
            let fr = random_freqs(&mut rng, s.dim, 4, 2, true);
            let a = random_section(&sys, j, &fr, &mut rng);
            let diff = sys.d_apply(j, &a).unwrap().sub(&a.d());
            assert!(diff.max_abs() <= 1e-12, "{} level {j}: {:e}", s.kind, diff.max_abs());
            assert!(a.check_real(1e-14).is_ok());
        }
    }
}

#[test]
fn codifferential_is_adjoint() {
    let mut rng = common::rng(13);
    for s in elliptic_specs() {
        let sys = HodgeSystem::build(&s, s.dim, 1).unwrap();
        let fr = random_freqs(&mut rng, s.dim, 3, 2, true);
        for j in 0..2 {
            if sys.fibre_dim(j + 1) == 0 {
                continue;
            }
            let a = random_section(&sys, j, &fr, &mut rng);
            let b = random_section(&sys, j + 1, &fr, &mut rng);
            let lhs = inner(&sys.d_apply(j, &a).unwrap(), &b);
            let rhs = inner(&a, &sys.codifferential(j, &b).unwrap());
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()), "{} level {j}: {lhs} vs {rhs}", s.kind);
        }
    }
}

#[test]
fn laplacian_is_dd_star_plus_d_star_d() {
    let mut rng = common::rng(14);
    let s = spec(Kind::G2, Params::default());
    let sys = HodgeSystem::build(&s, 7, 1).unwrap();
    let fr = random_freqs(&mut rng, 7, 3, 2, false);
    let a = random_section(&sys, 1, &fr, &mut rng);
    let up = sys.codifferential(1, &sys.d_apply(1, &a).unwrap()).unwrap();
    let down = sys.d_apply(0, &sys.codifferential(0, &a).unwrap()).unwrap();
    let diff = sys.laplacian_apply(1, &a).unwrap().sub(&up.add(&down));
    assert!(diff.max_abs() <= 1e-11, "{:e}", diff.max_abs());
}

#[test]
fn hodge_decomposition_is_additive() {
    let mut rng = common::rng(15);
    for s in elliptic_specs().into_iter().chain([spec(Kind::Degenerate2form, Params::dim(4))]) {
        let sys = HodgeSystem::build(&s, s.dim, 1).unwrap();
        for _ in 0..4 {
            let k: Vec<i32> = (0..s.dim).map(|_| rng.gen_range(-2..=2)).collect();
            for j in 0..3 {
                let down = if j == 0 { 0 } else { rank(&sys.symbol(j - 1, &k)) };
                let up = rank(&sys.symbol(j, &k));
                let lap = sys.laplacian(j, &k);
                let harm = sys.fibre_dim(j) - if lap.nrows() == 0 { 0 } else { rank(&lap) };
                assert_eq!(down + up + harm, sys.fibre_dim(j), "{} k={k:?} j={j}", s.kind);
            }
        }
    }
}

#[test]
fn green_round_trip() {
    let mut rng = common::rng(16);
    for s in [spec(Kind::G2, Params::default()), spec(Kind::Cy, Params::complex_dim(3)), spec(Kind::Hk, Params::m(1))] {
        let sys = HodgeSystem::build(&s, s.dim, 2).unwrap();
        for j in 0..2 {
            let fr = random_freqs(&mut rng, s.dim, 5, 2, false);
            let beta0 = random_section(&sys, j, &fr, &mut rng);
            let alpha = sys.laplacian_apply(j, &beta0).unwrap();
            let beta = sys.green_apply(j, &alpha).unwrap();
            let err = beta.sub(&beta0).max_abs();
            assert!(err <= 1e-9, "{} level {j}: {err:e}", s.kind);

            let fr = random_freqs(&mut rng, s.dim, 5, 2, true);
            let a = random_section(&sys, j, &fr, &mut rng);
            let g = sys.green_apply(j, &a).unwrap();
            let back = sys.laplacian_apply(j, &g).unwrap().add(&sys.harmonic_part(j, &a).unwrap());
            assert!(back.sub(&a).max_abs() <= 1e-10);
            assert!(sys.harmonic_part(j, &g).unwrap().max_abs() == 0.0);
        }
        for h in sys.harmonics(1) {
            assert_eq!(sys.green_apply(1, &h).unwrap().max_abs(), 0.0);
        }
    }
}

#[test]
fn green_rejects_non_members() {
    let s = spec(Kind::G2, Params::default());
    let sys = HodgeSystem::build(&s, 7, 1).unwrap();
    // φ itself is not in E¹ ⊂ Λ³⊕Λ⁴ with zero 4-form part
    let mut c = topocal::exalg::MultiForm::zero(7, sys.degrees(1));
    let mut v = vec![C64::new(0.0, 0.0); topocal::exalg::MultiForm::<C64>::dense_len(7, sys.degrees(1))];
    v[0] = C64::new(1.0, 0.0);
    c = c.add(&topocal::exalg::MultiForm::from_dense(7, sys.degrees(1), &v));
    let t = topocal::torus::Trig::single(7, vec![1, 0, 0, 0, 0, 0, 0], c);
    assert!(matches!(sys.green_apply(1, &t), Err(Error::NotInSubspace(_))));
}

#[test]
fn cohomology_equals_fibres_for_elliptic_specs() {
    for s in elliptic_specs() {
        let sys = HodgeSystem::build(&s, s.dim, 2).unwrap();
        let rep = sys.cohomology();
        // ellipticity constrains positions 1 and 2; H⁰ is finite only when
        // the symbol of d on E⁰ is injective
        let from = if matches!(s.kind, Kind::G2 | Kind::Spin7 | Kind::Cy | Kind::Hk) { 0 } else { 1 };
        for j in from..3 {
            let oracle = rank(&ek_generators(&s.phi0, j));
            assert_eq!(rep.h_sharp[j], oracle, "{} level {j}", s.kind);
            assert!(rep.min_singular_values[&j.to_string()] > 1e-6, "{}: {:?}", s.kind, rep.min_singular_values);
        }
        assert!(rep.singular_frequencies.iter().all(|w| w.level < from), "{}", s.kind);
        assert!(rep.p1_injective && rep.p2_injective && rep.topological(), "{}", s.kind);
        let known: Option<Vec<usize>> = match s.kind {
            Kind::G2 => Some(vec![7, 35, 49]),
            Kind::Spin7 => Some(vec![8, 43]),
            Kind::Hk => Some(vec![4, 13]),
            Kind::Cy if s.dim == 6 => Some(vec![6, 28]),
            _ => None,
        };
        if let Some(k) = known {
            assert_eq!(&rep.h_sharp[..k.len()], &k[..], "{}", s.kind);
        }
    }
}

#[test]
fn degenerate_form_has_singular_blocks() {
    let sys = system(Kind::Degenerate2form, Params::dim(4), 1);
    let rep = sys.cohomology();
    let w = rep.singular_frequencies.first().expect("a singular frequency").clone();
    assert!(w.freq.iter().any(|&x| x != 0));
    assert!(rep.h_sharp.iter().zip(&rep.fibre_dims).any(|(h, e)| h > e));
    assert!(!rep.topological());
    let mut rng = common::rng(17);
    let a = random_section(&sys, w.level, std::slice::from_ref(&w.freq), &mut rng);
    match sys.green_apply(w.level, &a) {
        Err(Error::SingularBlock { freq, sigma }) => {
            assert!(freq == w.freq || freq == topocal::torus::neg_freq(&w.freq));
            assert!(sigma.abs() < 1e-9);
        }
        other => panic!("expected a singular block, got {other:?}"),
    }
}

#[test]
fn g2_first_block_invertible() {
    let sys = system(Kind::G2, Params::default(), 1);
    let k = [1, 0, 0, 0, 0, 0, 0];
    let ev = nalgebra::SymmetricEigen::new(sys.laplacian(1, &k)).eigenvalues;
    assert!(ev.min() > 0.1, "{}", ev.min());
}

#[test]
fn harmonics_and_p_maps() {
    let sys = system(Kind::G2, Params::default(), 1);
    let h = sys.harmonics(1);
    assert_eq!(h.len(), 35);
    for x in &h {
        assert_eq!(x.modes().len(), 1);
        assert!(x.mode(&[0; 7]).is_some());
        assert!(sys.laplacian_apply(1, x).unwrap().max_abs() == 0.0);
    }
    for j in 0..3 {
        let p = sys.p_map(j);
        assert_eq!(p.cols, sys.fibre_dim(j));
        assert!(p.injective);
    }
    let degenerate = system(Kind::Degenerate2form, Params::dim(4), 1);
    let p = degenerate.p_map(1);
    assert!(p.cols > p.rank);
}

#[test]
fn half_box_covers_pairs_once() {
    let hb = half_box(3, 2);
    assert_eq!(hb.len(), (125 - 1) / 2);
    for k in &hb {
        let neg: Freq = k.iter().map(|x| -x).collect();
        assert!(!hb.contains(&neg));
    }
}

#[test]
fn decompositions() {
    let specs = [
        spec(Kind::Cy, Params::complex_dim(2)),
        spec(Kind::Cy, Params::complex_dim(3)),
        spec(Kind::Hk, Params::m(1)),
        spec(Kind::Hk, Params::m(2)),
        spec(Kind::G2, Params::default()),
        spec(Kind::Spin7, Params::default()),
    ];
    for s in specs {
        let checks = decomposition_checks(&s).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.pass, "{} {:?}", s.kind, c);
        }
    }
    let hk = decomposition_checks(&spec(Kind::Hk, Params::m(1))).unwrap();
    assert_eq!(hk.iter().map(|c| c.dim).sum::<usize>(), 13);
    let spin = decomposition_checks(&spec(Kind::Spin7, Params::default())).unwrap();
    let h1: usize = spin.iter().filter(|c| c.name.starts_with("H1")).map(|c| c.dim).sum();
    assert_eq!(h1, 43);
}

#[test]
fn spin7_dirac() {
    let sys = system(Kind::Spin7, Params::default(), 2);
    let rep = dirac_check(&sys).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.zero_mode_kernel, 8);
    assert_eq!(rep.min_rank, 8);
    assert_eq!(rep.frequencies, (5usize.pow(8) - 1) / 2);
    assert!(dirac_check(&system(Kind::G2, Params::default(), 1)).is_err());
}

#[test]
fn report_json_shape() {
    let rep = system(Kind::Cy, Params::complex_dim(2), 1).cohomology();
    let v = serde_json::to_value(&rep).unwrap();
    for key in ["structure", "torus_dim", "freq_bound", "h_sharp", "betti", "p1_injective", "p2_injective", "min_singular_values"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["structure"], "cy");
    assert_eq!(v["betti"], serde_json::json!([1, 4, 6, 4, 1]));
}

#[test]
fn build_rejects_mismatch() {
    let s = spec(Kind::G2, Params::default());
    assert!(HodgeSystem::build(&s, 6, 1).is_err());
}
