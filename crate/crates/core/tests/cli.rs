use std::process::Command;

use serde_json::Value;
use toda_whittaker::cli::run;
use toda_whittaker::univariate::{bessel_phi, whittaker_m_phi};
use toda_whittaker::Cx;

fn invoke(args: &[&str], env: Option<&str>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("toda-whittaker").chain(args.iter().copied());
    let code = run(argv, env, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn records(stdout: &str) -> Vec<Value> {
    stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn value(r: &Value) -> Cx<f64> {
    Cx::new(r["value_re"].as_f64().unwrap(), r["value_im"].as_f64().unwrap())
}

#[test]
fn eval_phi_matches_the_m_function() {
    let (code, out, _) = invoke(&["eval", "phi", "--n", "1", "--xi", "0+0.3i", "--g", "1.5", "--x", "1"], None);
    assert_eq!(code, 0);
    let r = &records(&out)[0];
    let oracle = whittaker_m_phi(Cx::new(0.0, 0.3), Cx::new(1.0, 0.0), Cx::new(1.5, 0.0)).unwrap();
    assert!((value(r) - oracle).norm() < 1e-10 * oracle.norm());
    assert_eq!(r["check"], "hc_series::phi_eval");
    assert!(r["anchor"].as_str().is_some_and(|a| !a.is_empty()));
}

#[test]
fn eval_big_phi_at_zero_coupling_matches_bessel() {
    let (code, out, _) = invoke(&["eval", "Phi", "--n", "1", "--g", "0", "--xi", "0.3", "--x", "1"], None);
    assert_eq!(code, 0);
    let oracle = bessel_phi(Cx::new(0.3, 0.0), Cx::new(1.0, 0.0)).unwrap();
    assert!((value(&records(&out)[0]) - oracle).norm() < 1e-8 * oracle.norm());
}

#[test]
fn eval_w_is_finite() {
    let (code, out, _) = invoke(&["eval", "W", "--xi", "0.3", "--x", "1", "--g", "0.7"], None);
    assert_eq!(code, 0);
    let r = &records(&out)[0];
    assert!(value(r).norm().is_finite());
    assert_eq!(r["pass"], true);
}

#[test]
fn domain_errors_exit_two_with_the_error_name() {
    let (code, _, err) = invoke(&["eval", "Phi", "--xi", "0.5", "--x", "1", "--g", "0.7"], None);
    assert_eq!(code, 2);
    assert!(err.contains("IrregularSpectral"), "{err}");
    let (code, _, err) = invoke(&["eval", "cs-phi", "--xi", "0.1+0.2i", "--x", "-1"], None);
    assert_eq!(code, 2);
    assert!(err.contains("ChamberViolation"), "{err}");
    let (code, _, err) = invoke(
        &["eval", "phi", "--xi", "0.1+0.2i", "--x", "1", "--tol", "1e-300", "--eta", "1e-301", "--M", "2"],
        None,
    );
    assert_eq!(code, 2);
    assert!(err.contains("TailNotConverged"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["eval", "phi", "--xi", "1 + 2i", "--x", "1"],
        vec!["eval", "psi", "--xi", "0.1", "--x", "1"],
        vec!["verify", "nothing"],
        vec!["--precision", "40", "verify", "counts"],
        vec!["--precision", "128", "verify", "counts"],
        vec!["--tol", "1e-12", "--eta", "1e-9", "verify", "counts"],
        vec!["eval", "phi", "--xi", "0.1,0.2", "--x", "1"],
        vec!["verify", "residues", "--n", "1"],
    ] {
        let (code, _, _) = invoke(&args, None);
        assert_eq!(code, 2, "{args:?}");
    }
    let (code, _, err) = invoke(&["verify", "counts"], Some("abc"));
    assert_eq!(code, 2);
    assert!(err.contains("TODA_WHITTAKER_PRECISION"));
}

#[test]
fn precision_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"precision": 53, "xi": "0.1+0.2i", "x": 1.5, "g": 0.7}"#).unwrap();
    let cfg = path.to_str().unwrap();
    let bits = |args: &[&str], env| {
        let (code, out, err) = invoke(args, env);
        assert_eq!(code, 0, "{err}");
        records(&out)[0]["bits"].as_u64().unwrap()
    };
    assert_eq!(bits(&["--config", cfg, "eval", "phi"], None), 53);
    assert_eq!(bits(&["--config", cfg, "eval", "phi"], Some("106")), 106);
    assert_eq!(bits(&["--config", cfg, "--precision", "53", "eval", "phi"], Some("106")), 53);
}

#[test]
fn config_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": 2, "M": 5}"#).unwrap();
    let cfg = path.to_str().unwrap();
    let (code, out, _) = invoke(&["--config", cfg, "verify", "counts"], None);
    assert_eq!(code, 0);
    assert_eq!(records(&out)[0]["check"], "domain::cone_level n=2 M=5");
    let (_, out, _) = invoke(&["--config", cfg, "--n", "4", "verify", "counts"], None);
    assert_eq!(records(&out)[0]["check"], "domain::cone_level n=4 M=5");
    std::fs::write(&path, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(invoke(&["--config", cfg, "verify", "counts"], None).0, 2);
}

#[test]
fn verify_counts() {
    let (code, out, err) = invoke(&["verify", "counts", "--n", "3", "--M", "15"], None);
    assert_eq!(code, 0, "{err}");
    let r = &records(&out)[0];
    assert_eq!(r["pass"], true);
    assert_eq!(r["value_re"].as_f64(), Some(0.0));
    assert!(err.contains("1/1 checks passed"));
}

#[test]
fn verify_dde_rank_two() {
    let (code, out, err) = invoke(&["verify", "dde", "--n", "2", "--seed", "7"], None);
    assert_eq!(code, 0, "{err}");
    let rs = records(&out);
    assert_eq!(rs.len(), 10);
    for r in &rs {
        assert!(r["value_re"].as_f64().unwrap() <= r["threshold"].as_f64().unwrap());
    }
    assert!(rs.iter().any(|r| r["check"].as_str().unwrap().ends_with("l=2")));
}

#[test]
fn verify_residues_rank_two() {
    let (code, out, err) = invoke(&["verify", "residues", "--n", "2", "--m", "1..3"], None);
    assert_eq!(code, 0, "{err}");
    assert_eq!(records(&out).len(), 12);
}

#[test]
fn failing_checks_exit_one() {
    let (code, out, err) = invoke(&["verify", "pde", "--n", "2", "--tol", "1e-30", "--eta", "1e-31"], None);
    assert_eq!(code, 1);
    assert!(records(&out).iter().any(|r| r["pass"] == false));
    assert!(err.contains("FAIL"));
}

#[test]
fn reports_are_deterministic() {
    let strip = |s: String| -> Vec<Value> {
        records(&s)
            .into_iter()
            .map(|mut r| {
                r.as_object_mut().unwrap().remove("millis");
                r
            })
            .collect()
    };
    let a = strip(invoke(&["verify", "pde", "--n", "2", "--seed", "3", "--M", "15"], None).1);
    let b = strip(invoke(&["verify", "pde", "--n", "2", "--seed", "3", "--M", "15"], None).1);
    assert_eq!(a, b);
    let c = strip(invoke(&["verify", "pde", "--n", "2", "--seed", "4", "--M", "15"], None).1);
    assert_ne!(a, c);
}

#[test]
fn csv_output() {
    let (code, out, _) = invoke(&["--csv", "verify", "counts"], None);
    assert_eq!(code, 0);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "suite,check,anchor,value_re,value_im,bound,threshold,pass,millis,condition,bits,detail");
    assert_eq!(lines.len(), 5);
}

#[test]
fn binary_exit_codes_and_environment() {
    let bin = env!("CARGO_BIN_EXE_toda-whittaker");
    let status = Command::new(bin).args(["verify", "counts", "--n", "2", "--M", "6"]).output().unwrap().status;
    assert_eq!(status.code(), Some(0));
    let output = Command::new(bin)
        .args(["eval", "phi", "--xi", "0.1+0.2i", "--x", "1"])
        .env("TODA_WHITTAKER_PRECISION", "300")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let output = Command::new(bin)
        .args(["eval", "phi", "--xi", "0.1+0.2i", "--x", "1"])
        .env("TODA_WHITTAKER_PRECISION", "90")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(r["bits"], 106);
}
