use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use topocal::exalg::Endo;
use topocal::scalar::C64;
use topocal::torus::{EndoField, Trig, Vector, VectorField};

fn topocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topocal")).args(args).output().expect("spawn topocal")
}

fn run_json(args: &[&str], code: i32) -> Value {
    let out = topocal(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn info_reports_dimensions() {
    let g2 = run_json(&["info", "--structure", "g2"], 0);
    assert_eq!(g2["result"]["isotropy_dim"], 14);
    assert_eq!(g2["result"]["ek_dims"]["1"], 35);
    assert_eq!(g2["result"]["metrical"], true);
    assert_eq!(g2["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(g2["config"]["structure"], "g2");

    let hk = run_json(&["info", "--structure", "hk", "--m", "1"], 0);
    assert_eq!(hk["result"]["ek_dims"]["1"], 13);

    let deg = run_json(&["info", "--structure", "degenerate2form", "--dim", "4"], 0);
    assert_eq!(deg["result"]["metrical"], false);
    assert!(deg["result"]["metrical_witness"].is_array());
}

#[test]
fn elliptic_verdicts_and_exit_codes() {
    let sym = run_json(&["elliptic", "--structure", "symplectic", "--dim", "4", "--seed", "1"], 0);
    assert_eq!(sym["result"]["elliptic"], true);
    assert_eq!(sym["pass"], true);

    let deg = run_json(&["elliptic", "--structure", "degenerate2form", "--dim", "4", "--seed", "1"], 1);
    assert_eq!(deg["result"]["elliptic"], false);
    let u = deg["result"]["witness"]["u"].as_array().unwrap();
    assert!(u.iter().any(|x| x.as_f64().unwrap() != 0.0));

    let a = run_json(&["elliptic", "--structure", "g2", "--seed", "42"], 0);
    let b = run_json(&["elliptic", "--structure", "g2", "--seed", "7"], 0);
    assert_eq!(a["result"]["elliptic"], b["result"]["elliptic"]);
}

#[test]
fn verify_float_and_rational() {
    let f = run_json(&["verify", "--trials", "100", "--freq", "2", "--seed", "5"], 0);
    for c in f["result"]["checks"].as_array().unwrap() {
        assert_eq!(c["samples"], 101);
        assert!(c["max_residual"].as_f64().unwrap() <= 1e-10, "{c}");
    }
    let q = run_json(&["verify", "--trials", "20", "--seed", "5", "--scalar", "rational"], 0);
    for c in q["result"]["checks"].as_array().unwrap() {
        if c["name"] != "ad_iterates_in_e2" {
            assert_eq!(c["max_residual"].as_f64().unwrap(), 0.0, "{c}");
        }
    }
}

#[test]
fn cohomology_tables() {
    let g2 = run_json(&["cohomology", "--structure", "g2", "--freq", "2"], 0);
    let h: Vec<u64> = g2["result"]["h_sharp"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(h[..3], [7, 35, 49]);
    assert_eq!(g2["result"]["p1_injective"], true);
    assert_eq!(g2["result"]["p2_injective"], true);

    let s7 = run_json(&["cohomology", "--structure", "spin7", "--freq", "1"], 0);
    assert_eq!(s7["result"]["h_sharp"][1], 43);
}

/// Dv for v on two frequencies of T⁴, written as EndoField JSON.
fn symplectic_seed_file() -> PathBuf {
    let mut v = Trig::zero(4, &Vector(vec![C64::new(0.0, 0.0); 4]));
    let modes = [
        (vec![1, 0, 0, 0], [C64::new(0.0, 0.1), C64::new(0.3, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.2)]),
        (vec![0, 1, 1, 0], [C64::new(0.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.1), C64::new(0.1, 0.0)]),
    ];
    for (k, c) in modes {
        let neg: Vec<i32> = k.iter().map(|x| -x).collect();
        v.add_mode(neg, Vector(c.iter().map(|z| z.conj()).collect()));
        v.add_mode(k, Vector(c.to_vec()));
    }
    let v: VectorField<C64> = v;
    let path = scratch("symplectic_seed.json");
    std::fs::write(&path, serde_json::to_string(&v.jacobian().to_json()).unwrap()).unwrap();
    path
}

#[test]
fn deform_from_seed_file() {
    let seed = symplectic_seed_file();
    let seed = seed.to_str().unwrap();
    let r = run_json(&["deform", "--structure", "symplectic", "--dim", "4", "--order", "6", "--seed-file", seed], 0);
    let res = &r["result"];
    assert_eq!(res["order"], 6);
    assert_eq!(res["closed"], true);
    let per = res["per_order"].as_array().unwrap();
    assert_eq!(per.len(), 6);
    for rec in per {
        assert!(rec["closure_residual"].as_f64().unwrap() <= 1e-9, "{rec}");
    }
    assert!(per[1]["ob_norm"].as_f64().unwrap() > 0.0);
    assert_eq!(res["majorant"]["holds"], true);
    assert_eq!(res["fd_check"]["pass"], true);
    assert!(res["slope_fit"]["slope"].as_f64().unwrap() >= 6.8);
    assert_eq!(res["period_first_order"].as_array().unwrap().len(), 6);
}

#[test]
fn deform_generated_seed() {
    let r = run_json(&["deform", "--structure", "cy", "--complex-dim", "2", "--order", "3", "--seed", "11"], 0);
    assert_eq!(r["result"]["closed"], true);
    assert!(r["result"]["seed_field"]["modes"].as_array().unwrap().len() > 1);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["deform", "--structure", "sl", "--complex-dim", "2", "--order", "3", "--seed", "4"];
    let a = topocal(&args);
    let b = topocal(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let e1 = topocal(&["elliptic", "--structure", "cy", "--complex-dim", "3", "--seed", "9"]);
    let e2 = topocal(&["elliptic", "--structure", "cy", "--complex-dim", "3", "--seed", "9"]);
    assert_eq!(e1.stdout, e2.stdout);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("info_sl.json");
    let _ = std::fs::remove_file(&path);
    let out = topocal(&["info", "--structure", "sl", "--complex-dim", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["isotropy_dim"], 6);
}

#[test]
fn configuration_errors_exit_two() {
    let unclosed = scratch("unclosed_seed.json");
    // a1 = E_02 on the x0 mode: ρ̂_{a1}ω₀ is not closed
    let mut e = Endo::<C64>::zero(4);
    e.set(0, 2, C64::new(0.1, 0.0));
    let mut a1 = Trig::zero(4, &Endo::zero(4));
    a1.add_mode(vec![1, 0, 0, 0], e.clone());
    a1.add_mode(vec![-1, 0, 0, 0], e);
    let a1: EndoField<C64> = a1;
    let field = serde_json::to_string(&a1.to_json()).unwrap();
    std::fs::write(&unclosed, field).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["info"],
        vec!["info", "--structure", "octonion"],
        vec!["info", "--structure", "cy", "--complex-dim", "0"],
        vec!["info", "--structure", "g2", "--scalar", "rational"],
        vec!["elliptic", "--structure", "g2"],
        vec!["verify", "--seed", "1", "--trials", "0"],
        vec!["verify"],
        vec!["cohomology", "--structure", "g2", "--freq", "-1"],
        vec!["deform", "--structure", "symplectic", "--dim", "4"],
        vec!["deform", "--structure", "symplectic", "--dim", "4", "--seed", "1", "--order", "13"],
        vec!["deform", "--structure", "symplectic", "--dim", "4", "--seed", "1", "--tol", "-1"],
        vec!["deform", "--structure", "symplectic", "--dim", "4", "--in", "/nonexistent/seed.json"],
        vec!["deform", "--structure", "symplectic", "--dim", "4", "--in", unclosed.to_str().unwrap()],
        vec!["bogus"],
    ];
    for args in cases {
        let out = topocal(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}
