use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vekua(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vekua"))
        .args(args)
        .env("VEKUA_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn example(name: &str) -> Value {
    let o = vekua(&["examples", "show", name]);
    assert_eq!(code(&o), 0);
    json_of(&o)
}

fn write_config(dir: &Path, v: &Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.display().to_string()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn examples_catalog() {
    let o = vekua(&["examples", "list"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    for name in ["exp-xy", "free", "radial-demo"] {
        assert!(out.contains(name));
    }
    assert_eq!(example("exp-xy")["problem"]["f0"], "exp(x*y)");
    assert_eq!(code(&vekua(&["examples", "show", "nope"])), 2);
}

#[test]
fn verify_exp_xy_passes_and_is_deterministic() {
    let a = vekua(&["verify", "--example", "exp-xy"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let report = json_of(&a);
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 15);
    for c in report["checks"].as_array().unwrap() {
        assert!(c.get("runtime_s").is_none());
        assert!(c["max_residual"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
    let b = vekua(&["verify", "--example", "exp-xy"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_rejects_a_false_solution() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example("exp-xy");
    cfg["solutions"]["claimed"] = "exp(2*x*y)".into();
    let path = write_config(dir.path(), &cfg);
    let report_path = dir.path().join("report.json");
    let o = vekua(&[
        "verify",
        "--config",
        &path,
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(
        check(&report, "Schrodinger residual of claimed")["passed"],
        false
    );
    assert_eq!(
        check(&report, "Schrodinger residual of exp-minus-xy")["passed"],
        true
    );
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example("exp-xy");
    cfg["problem"]["u"] = "x^2 + * y".into();
    let path = write_config(dir.path(), &cfg);
    let o = vekua(&["verify", "--config", &path]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("problem.u"), "{}", stderr(&o));
    assert!(stderr(&o).contains("offset"), "{}", stderr(&o));

    std::fs::write(dir.path().join("broken.json"), "{\"problem\": ").unwrap();
    let o = vekua(&[
        "verify",
        "--config",
        dir.path().join("broken.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);

    assert_eq!(code(&vekua(&["verify", "--example", "nope"])), 2);
    assert_eq!(code(&vekua(&["verify"])), 2);
    assert_eq!(
        code(&vekua(&["verify", "--config", "/nonexistent.json"])),
        2
    );
}

#[test]
fn cauchy_integrals() {
    let o = vekua(&[
        "cauchy",
        "--example",
        "exp-xy",
        "--curve",
        "unit-circle",
        "--solution",
        "exp-minus-xy",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json_of(&o);
    assert!(r["values"]["I1"].as_f64().unwrap().abs() <= 1e-8);
    assert!(r["values"]["I2"].as_f64().unwrap().abs() <= 1e-8);

    let o = vekua(&[
        "cauchy",
        "--example",
        "exp-xy",
        "--curve",
        "box",
        "--solution",
        "f0",
    ]);
    assert_eq!(code(&o), 0);
    let r = json_of(&o);
    assert_eq!(r["values"]["I1"].as_f64().unwrap(), 0.0);
    assert_eq!(r["values"]["I2"].as_f64().unwrap(), 0.0);

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example("exp-xy");
    cfg["solutions"]["wrong"] = "exp(2*x*y)".into();
    cfg["curves"]["open"] = serde_json::json!({"kind": "polyline", "points": [[0, 0], [1, 1]]});
    let path = write_config(dir.path(), &cfg);
    let o = vekua(&[
        "cauchy",
        "--config",
        &path,
        "--curve",
        "unit-circle",
        "--solution",
        "wrong",
    ]);
    assert_eq!(code(&o), 1);
    let r = json_of(&o);
    // 2π I_1(1.5) from the series of the modified Bessel function
    let mut term = 0.75f64;
    let mut i1 = term;
    for k in 1..40 {
        term *= 0.75 * 0.75 / (k * (k + 1)) as f64;
        i1 += term;
    }
    assert!((r["values"]["I2"].as_f64().unwrap() - 2.0 * std::f64::consts::PI * i1).abs() < 1e-8);

    let o = vekua(&[
        "cauchy",
        "--config",
        &path,
        "--curve",
        "open",
        "--solution",
        "f0",
    ]);
    assert_eq!(code(&o), 2);
    let o = vekua(&[
        "cauchy",
        "--config",
        &path,
        "--curve",
        "missing",
        "--solution",
        "f0",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sequence_exports_csv_matching_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example("exp-xy");
    cfg["problem"]["grid"] = 7.into();
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = vekua(&[
        "sequence",
        "--config",
        &path,
        "--steps",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["steps"].as_array().unwrap().len(), 1);
    assert_eq!(report["steps"][0]["samples"], 49);

    let mut rd = csv::Reader::from_path(out.join("step_1.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "x",
            "y",
            "re_v",
            "im_v",
            "f",
            "vekua_residual",
            "schrodinger_residual"
        ]
    );
    let mut rows = 0;
    for rec in rd.records() {
        let r: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        let (x, y) = (r[0], r[1]);
        // v = -((y - ix)/2) (e^{-xy}(x^2 - y^2) - i(e^{-xy} - e^{xy}))
        let (a, b) = (
            (-x * y).exp() * (x * x - y * y),
            -((-x * y).exp() - (x * y).exp()),
        );
        let (re, im) = (-(y * a + x * b) / 2.0, -(y * b - x * a) / 2.0);
        assert!(
            (r[2] - re).abs() <= 1e-8 && (r[3] - im).abs() <= 1e-8,
            "at ({x}, {y})"
        );
        assert!(r[5] <= 1e-6 && r[6] <= 1e-6);
        rows += 1;
    }
    assert_eq!(rows, 49);
}

#[test]
fn sequence_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero");
    let o = vekua(&[
        "sequence",
        "--example",
        "free",
        "--steps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.get("steps").is_none());
    assert!(!out.join("step_1.csv").exists());
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));

    let mut cfg = example("free");
    cfg.as_object_mut().unwrap().remove("rho");
    let path = write_config(dir.path(), &cfg);
    let o = vekua(&[
        "sequence",
        "--config",
        &path,
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let o = vekua(&["sequence", "--config", &path]);
    assert_eq!(code(&o), 2);
}

#[test]
fn sequence_failure_keeps_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example("exp-xy");
    cfg["problem"]["grid"] = 5.into();
    // S' != s: the pair no longer generates Vek2 and the first step fails
    cfg["rho"] = serde_json::json!({"rho": "x*y", "s": "0", "S": "rho", "f0_of_rho": "exp(rho)"});
    let path = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    let o = vekua(&[
        "sequence",
        "--config",
        &path,
        "--steps",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(
        check(
            &report,
            "rho: Laplacian / |grad|^2 = s, f0(rho) = f0, S' = s"
        )["passed"],
        false
    );
    assert!(
        report["error"].as_str().unwrap().starts_with("step 1:"),
        "{}",
        report["error"]
    );
    assert!(!out.join("step_1.csv").exists());
}
