use std::path::Path;
use std::process::{Command, Output};

use nodal::config::{Format, QuadratureOverride, RunConfig};
use nodal::document::ProfileDocument;
use serde_json::Value;

fn nodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .env_remove(nodal::config::CONFIG_ENV)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn conformal_mass_is_zero() {
    let v = json(&nodal(&["mass3d", "--h0", "0.75"]));
    assert!(v["mass"].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn mass_both_routes_agree() {
    let v = json(&nodal(&["mass3d", "--h0", "0.5", "--method", "both"]));
    let (a, b) = (v["mass"].as_f64().unwrap(), v["mass_ode"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-8);
}

#[test]
fn certify_emits_verdict() {
    let v = json(&nodal(&["certify", "--dim", "5", "--t", "1.05"]));
    assert_eq!(v["verdict"], "CERTIFIED_NO_BLOWUP");
    assert_eq!(v["branch"], "certificate");
}

#[test]
fn certify_rejects_t_outside_interval() {
    assert_eq!(code(&nodal(&["certify", "--dim", "5", "--t", "1.2"])), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&nodal(&["frobnicate"])), 2);
    assert_eq!(code(&nodal(&["mass3d", "--h0", "0.5", "--bogus"])), 2);
    assert_eq!(code(&nodal(&["mass3d", "--h0", "0"])), 2);
    assert_eq!(code(&nodal(&["curvature", "--product", "2by3"])), 2);
}

#[test]
fn montecarlo_needs_seed() {
    let args = ["weyl-product", "--profile", "standard:5", "--weyl", "product:2x3", "--methods", "montecarlo"];
    let out = nodal(&args);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn weyl_product_dimension_mismatch_is_rejected() {
    let out = nodal(&["weyl-product", "--profile", "standard:6", "--weyl", "product:2x3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ding_writes_two_node_solution_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sol.json");
    let p = path.to_str().unwrap();
    let out = nodal(&["ding", "--p", "2", "--q", "3", "--nodes", "2", "--out", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(&path).unwrap();
    let doc: ProfileDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.metadata.nodes, Some(2));
    assert!(doc.metadata.residual.unwrap() < 1e-6);

    // stored samples survive a write/read cycle bit for bit
    let again = ProfileDocument::from_profile(&doc.to_profile().unwrap(), doc.metadata.clone());
    assert_eq!(serde_json::to_string_pretty(&again).unwrap() + "\n", text);
    let v = doc.to_profile().unwrap();
    let w = again.to_profile().unwrap();
    for x in [[0.1, 0.2, 0.3, 0.4, 0.5], [1.0, -2.0, 0.5, 3.0, 0.0]] {
        assert_eq!(v.value(&x).to_bits(), w.value(&x).to_bits());
    }

    // the stored profile feeds the other commands
    let wb = json(&nodal(&["weyl-product", "--profile", p, "--weyl", "product:2x3"]));
    assert!(wb["value_reduced"]["value"].as_f64().unwrap() < 0.0);
    let csv = nodal(&["plot", "--input", p, "--points", "11"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u,du"));
    let t: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(t.len(), 11);
    assert_eq!(t[0], 0.0);
    assert!((t[10] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn check_asserts_ruled_out_with_exit_4() {
    let base = ["check", "--dim", "5", "--h", "0", "--sg", "8", "--weyl", "product:2x3", "--bubble"];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sol.json");
    let p = path.to_str().unwrap();
    assert!(nodal(&["ding", "--p", "2", "--q", "3", "--nodes", "1", "--out", p]).status.success());

    let mut args = base.to_vec();
    args.push(p);
    assert_eq!(json(&nodal(&args))["verdict"], "RULED_OUT");
    args.push("--assert-not-ruled-out");
    assert_eq!(code(&nodal(&args)), 4);

    // neutral point with a radial bubble
    let c5 = 3.0 / 16.0;
    let h = format!("{}", c5 * 8.0);
    let v = json(&nodal(&[
        "check", "--dim", "5", "--h", &h, "--sg", "8", "--weyl", "product:2x3", "--bubble", "standard:5",
        "--assert-not-ruled-out",
    ]));
    assert_eq!(v["verdict"], "CONSISTENT");
}

#[test]
fn check_reads_point_and_summary_documents() {
    let dir = tempfile::tempdir().unwrap();
    let point = write(
        dir.path(),
        "point.json",
        r#"{"schema_version": 1, "n": 3, "h_at_x0": 0.5, "sg_at_x0": 6.0, "mass_at_x0": 0.04}"#,
    );
    let lambda = 3f64.sqrt();
    let omega2 = 4.0 * std::f64::consts::PI;
    let summary = write(
        dir.path(),
        "summary.json",
        &format!(
            r#"{{"schema_version": 1, "n": 3, "lambda": {lambda}, "alpha": [0, 0, 0],
                "int_v_2star": 1.0, "int_signed_2star_minus1": {}}}"#,
            omega2 * lambda
        ),
    );
    let v = json(&nodal(&["check", "--point", &point, "--summary", &summary]));
    assert_eq!(v["verdict"], "RULED_OUT");
    assert_eq!(v["branch"], "n3");

    let bad = write(dir.path(), "bad.json", r#"{"schema_version": 1, "n": 3, "h": 0.5}"#);
    let out = nodal(&["check", "--point", &bad, "--summary", &summary]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn malformed_profile_is_rejected_by_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schema_version": 1, "n": 5, "sign": 1, "scale": 1, "kind": "standard", "mu": 1,
            "metadata": {"generator": "x"}}"#,
        r#"{"schema_version": 2, "n": 5, "sign": 1, "scale": 1, "kind": "standard", "mu": 1,
            "center": [0,0,0,0,0], "metadata": {"generator": "x"}}"#,
        r#"{"schema_version": 1, "n": 5, "sign": 1, "scale": 1, "kind": "wobbly",
            "metadata": {"generator": "x"}}"#,
        "not json",
    ];
    for (k, text) in cases.iter().enumerate() {
        let p = write(dir.path(), &format!("bad{k}.json"), text);
        let out = nodal(&["pohozaev", "--profile", &p, "--delta", "1"]);
        assert_eq!(code(&out), 2, "case {k}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"schema_version": 1, "n": 5, "sign": 1, "scale": 1, "kind": "standard", "mu": 1,
            "center": [0,0,0,0,0], "metadata": {"generator": "x"}}"#,
    );
    let v = json(&nodal(&["pohozaev", "--profile", &ok, "--delta", "1"]));
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-8 * v["normalizer"].as_f64().unwrap());
}

#[test]
fn missing_input_file_is_io_error() {
    assert_eq!(code(&nodal(&["pohozaev", "--profile", "/nonexistent/x.json", "--delta", "1"])), 1);
}

#[test]
fn empty_sweep_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.json", r#"{"schema_version": 1, "rows": []}"#);
    let out = nodal(&["plot", "--input", &p]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "h0,mass\n");
}

#[test]
fn mass_sweep_csv_brackets_conformal_value() {
    let out = nodal(&["--format", "csv", "mass3d", "--sweep", "0.5:1.0:20"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h0,mass"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 20);
    let flips: Vec<_> = rows.windows(2).filter(|w| w[0].1 > 0.0 && w[1].1 < 0.0).collect();
    assert_eq!(flips.len(), 1);
    assert!(flips[0][0].0 < 0.75 && flips[0][1].0 > 0.75);
}

#[test]
fn csv_refused_for_structured_reports() {
    assert_eq!(code(&nodal(&["--format", "csv", "certify", "--dim", "5", "--t", "1.05"])), 2);
}

#[test]
fn config_file_and_environment_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        seed: Some(11),
        format: Some(Format::Json),
        output_dir: Some(dir.path().to_path_buf()),
        tolerances: nodal::config::Tolerances {
            quadrature_2d: Some(QuadratureOverride {
                rel_tol: Some(1e-9),
                ..Default::default()
            }),
            ..Default::default()
        },
        ..Default::default()
    };
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    let path = write(dir.path(), "cfg.json", &text);

    // the seed comes from the config; --out is relative to output_dir
    let out = Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args([
            "weyl-product", "--profile", "standard:5", "--weyl", "product:2x3", "--methods", "montecarlo", "--out",
            "mc.json",
        ])
        .env(nodal::config::CONFIG_ENV, &path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("mc.json")).unwrap()).unwrap();
    assert!(v["value_montecarlo"]["value"].is_number());

    let bad = write(dir.path(), "bad.json", r#"{"schema_version": 1, "seed": "eleven"}"#);
    assert_eq!(code(&nodal(&["--config", &bad, "mass3d", "--h0", "1"])), 2);
}

#[test]
fn curvature_of_product_has_trace_free_weyl() {
    let v = json(&nodal(&["curvature", "--product", "2x3"]));
    assert_eq!(v["scalar"].as_f64().unwrap(), 8.0);
    assert!(v["weyl_defects"]["trace"].as_f64().unwrap() < 1e-12);
    let v = json(&nodal(&["curvature", "--product", "1x2"]));
    assert!(v["weyl_max_abs"].as_f64().unwrap() < 1e-14);
    assert!(v["note"].is_string());
}

#[test]
fn tensor_document_feeds_curvature_and_weyl() {
    let dir = tempfile::tempdir().unwrap();
    // round S^5 with unit radius: R_ijkl = δ_ik δ_jl - δ_il δ_jk
    let mut comps = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            if i != j {
                comps.push(format!("[{i},{j},{i},{j},1.0]"));
                comps.push(format!("[{i},{j},{j},{i},-1.0]"));
            }
        }
    }
    let text = format!(r#"{{"schema_version": 1, "n": 5, "components": [{}]}}"#, comps.join(","));
    let p = write(dir.path(), "s5.json", &text);
    let v = json(&nodal(&["curvature", "--tensor", &p]));
    assert!((v["scalar"].as_f64().unwrap() - 20.0).abs() < 1e-12);
    assert!(v["weyl_max_abs"].as_f64().unwrap() < 1e-14);
    let v = json(&nodal(&["weyl-product", "--profile", "standard:5", "--weyl", &p]));
    assert!(v["value_gradient_form"]["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn atomic_output_replaces_existing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, "stale").unwrap();
    let out = nodal(&["mass3d", "--h0", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["mass"].as_f64().unwrap() + 1.0 / (4.0 * std::f64::consts::PI.powi(2))).abs() < 1e-15);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}
