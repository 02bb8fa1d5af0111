use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cr3kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cr3kit"))
        .args(args)
        .env_remove("CR3KIT_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

const SIGMA_SMALL: &str = "0.01*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)";

#[test]
fn flat_curvature_suite_passes() {
    let out = cr3kit(&[
        "verify",
        "--model",
        "flat",
        "--suite",
        "curvature",
        "--grid",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["suite"], "curvature");
    assert_eq!(r["pass"], true);
    assert!(r.get("wall_time_ms").is_none());
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn bad_normalisation_fails_kk_consistency() {
    let out = cr3kit(&[
        "verify",
        "--model",
        "flat",
        "--connection",
        "x*dy",
        "--suite",
        "frame",
        "--grid",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    let kk = check(&r, "kk_consistency");
    assert_eq!(kk["pass"], false);
    assert!((kk["max_defect"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "verify", "--model", "round", "--suite", "all", "--seed", "7", "--grid", "2",
    ];
    let a = cr3kit(&args);
    let b = cr3kit(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
    let threaded = Command::new(env!("CARGO_BIN_EXE_cr3kit"))
        .args(args)
        .env("CR3KIT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.stdout, threaded.stdout);
    let other = cr3kit(&[
        "verify", "--model", "round", "--suite", "all", "--seed", "8", "--grid", "2",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn sectional_identity_is_reported_on_curved_models() {
    let out = cr3kit(&[
        "verify",
        "--model",
        "hyperbolic",
        "--suite",
        "curvature",
        "--grid",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(check(&r, "sec_q_identity")["pass"], false);
    assert_eq!(check(&r, "sec_q_oneill")["pass"], true);
    assert_eq!(check(&r, "k_plus_gauss")["pass"], true);
}

#[test]
fn tolerance_override_applies_to_every_check() {
    let out = cr3kit(&[
        "verify",
        "--model",
        "round",
        "--suite",
        "curvature",
        "--grid",
        "2",
        "--tol",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["tolerance"] == 2.0));
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(
        cr3kit(&["verify", "--model", "sphere"]).status.code(),
        Some(2)
    );
    assert_eq!(cr3kit(&["verify"]).status.code(), Some(2));
    assert_eq!(
        cr3kit(&["verify", "--model", "flat", "--grid", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cr3kit(&["verify", "--model", "flat", "--format", "xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cr3kit(&["verify", "--model", "custom:0.1*x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cr3kit(&["verify", "--config", "/nonexistent/model.toml"])
            .status
            .code(),
        Some(2)
    );
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_cr3kit"))
        .args(["verify", "--model", "flat", "--grid", "1"])
        .env("CR3KIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
    assert_eq!(
        cr3kit(&["deform", "--model", "flat"]).status.code(),
        Some(2)
    );
}

#[test]
fn curvature_csv_on_the_hyperbolic_grid() {
    let out = cr3kit(&["curvature", "--model", "hyperbolic", "--grid", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["x", "y", "t", "K_base", "k_tanaka", "sec_Q", "phi_max"]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!((r[3] + 1.0).abs() < 1e-8);
        assert!((r[4] - 1.0).abs() < 1e-8);
        assert!((r[5] + 4.0).abs() < 1e-8);
        assert!(r[6].abs() < 1e-7);
    }
}

#[test]
fn curvature_points_and_json() {
    let out = cr3kit(&[
        "curvature",
        "--model",
        "flat",
        "--points",
        "0.1,0.2;0.3,0.4,0.5",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["point"], serde_json::json!([0.3, 0.4, 0.5]));
    assert_eq!(rows[0]["sec_Q"], -3.0);
}

#[test]
fn perturbed_model_has_nonzero_phi() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/perturbed.toml");
    let out = cr3kit(&[
        "curvature",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let phi_max = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(phi_max > 1e-4, "{phi_max}");
}

#[test]
fn toml_and_json_configs_give_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("m.toml");
    let json_path = dir.path().join("m.json");
    std::fs::write(
        &toml_path,
        "model = \"hyperbolic\"\nfiber_len = 2.0\ndomain = { disk = { radius = 0.7 } }\n",
    )
    .unwrap();
    std::fs::write(
        &json_path,
        r#"{"domain": {"disk": {"radius": 0.7}}, "fiber_len": 2.0, "model": "hyperbolic"}"#,
    )
    .unwrap();
    let args = |p: &Path| {
        cr3kit(&[
            "verify",
            "--config",
            p.to_str().unwrap(),
            "--suite",
            "frame",
            "--grid",
            "2",
        ])
    };
    let a = args(&toml_path);
    let b = args(&json_path);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    std::fs::write(&json_path, r#"{"model": "flat", "unknown": 1}"#).unwrap();
    assert_eq!(args(&json_path).status.code(), Some(2));
}

#[test]
fn out_file_and_checks_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = cr3kit(&[
        "verify",
        "--model",
        "flat",
        "--suite",
        "frame",
        "--grid",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("name,max_defect,tolerance,pass,error\n"));
    assert!(text.contains("kk_consistency,"));
}

#[test]
fn timing_is_opt_in() {
    let out = cr3kit(&[
        "verify", "--model", "flat", "--suite", "frame", "--grid", "1", "--timing",
    ]);
    assert!(json(&out)["wall_time_ms"].is_u64());
}

#[test]
fn type0_keeps_flat_tanaka_curvature() {
    let out = cr3kit(&[
        "deform", "--model", "flat", "--kind", "type0", "--c", "2", "--grid", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["deformation"], "type0");
    let after = r["after"].as_array().unwrap();
    let k = after.iter().find(|c| c["name"] == "k_rescaled").unwrap();
    assert_eq!(k["pass"], true);
}

#[test]
fn small_type2_deformation_passes() {
    let out = cr3kit(&[
        "deform",
        "--model",
        "flat",
        "--kind",
        "type2",
        "--sigma",
        SIGMA_SMALL,
        "--grid",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn degenerate_type2_is_a_json_error() {
    let sigma = "0.05*sin(2*3.141592653589793*x)*sin(2*3.141592653589793*y)";
    let out = cr3kit(&[
        "deform", "--model", "flat", "--kind", "type2", "--sigma", sigma, "--grid", "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(r["error"]["kind"], "contact_degenerate");
    assert!(r["error"]["value"].as_f64().unwrap() < 0.0);
}

#[test]
fn type1_surfaces_the_cr_reeb_failure() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/flat_type1.json");
    let out = cr3kit(&[
        "deform",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "4",
        "--holder",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert!(r["cr_reeb"]["max_defect"].as_f64().unwrap() > 1e-6);
    assert_eq!(r["cr_reeb"]["worst_point"].as_array().unwrap().len(), 3);
    assert_eq!(r["holder"]["holds"], true);

    let constant = cr3kit(&[
        "deform", "--model", "flat", "--kind", "type1", "--f", "3", "--grid", "2",
    ]);
    assert_eq!(constant.status.code(), Some(0));

    let negative = cr3kit(&[
        "deform", "--model", "flat", "--kind", "type1", "--f", "x - 5", "--grid", "2",
    ]);
    assert_eq!(negative.status.code(), Some(1));
    assert_eq!(json(&negative)["error"]["kind"], "non_positive");
}
