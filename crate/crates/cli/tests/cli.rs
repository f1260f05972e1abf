use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn resonant_config(out: &Path, engine: &str, t_end: f64) -> String {
    format!(
        r#"{{"datum": {{"resonant": true, "theta": 0.2, "m": 0, "p": {{"re": 0.5, "im": 0.0}}}},
            "engine": "{engine}", "truncation": 48, "dt": 1e-4,
            "time_grid": {{"t_start": 0.0, "t_end": {t_end}, "stride": 0.1}},
            "output": {{"dir": "{}"}}}}"#,
        out.display()
    )
}

const NONRESONANT_DATUM: &str = r#"{"theta": 0.0, "m": 0, "p": {"re": 0.5, "im": 0.0},
    "a": {"re": 0.6666666666666666, "im": 0.0}, "c": {"re": 1.0, "im": 0.0}}"#;

#[test]
fn simulate_all_engines_writes_three_trajectories_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(tmp.path(), "c.json", &resonant_config(&out, "all", 0.5));
    let res = cslab(&["simulate", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for engine in ["closed_form", "explicit", "oracle"] {
        let csv = fs::read_to_string(out.join(format!("{engine}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("t,i0,i1,i2,hs_norm_1,hs_norm_2,re_0,im_0"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 6);
        let first = rows[5].split(',').next().unwrap();
        assert_eq!(first, "5.0000000000000000e-1");
        assert_eq!(rows[0].split(',').count(), 4 + 2 + 2 * 49);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("diff_summary.json")).unwrap()).unwrap();
    let pairs = summary["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    assert!(pairs[0]["max_relative_l2"].as_f64().unwrap() < 1e-10);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let cfg = write_config(
            tmp.path(),
            &format!("{run}.json"),
            &resonant_config(&out, "explicit", 0.3),
        );
        assert!(cslab(&["simulate", "--config", &cfg]).status.success());
        outputs.push(fs::read(out.join("explicit.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn closed_form_with_nonresonant_datum_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"datum": {NONRESONANT_DATUM}, "engine": "closed_form",
            "time_grid": {{"t_start": 0.0, "t_end": 1.0, "stride": 0.1}}}}"#
    );
    let cfg = write_config(tmp.path(), "c.json", &body);
    let res = cslab(&["simulate", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("2a + c = 0"));
}

#[test]
fn empty_time_grid_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &resonant_config(tmp.path(), "explicit", -1.0));
    assert_eq!(cslab(&["simulate", "--config", &cfg]).status.code(), Some(1));
    let cfg = write_config(tmp.path(), "bad.json", "{\"datum\": ");
    assert_eq!(cslab(&["simulate", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn evolving_past_blowup_aborts_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    for engine in ["oracle", "explicit"] {
        let body = resonant_config(tmp.path(), engine, 3.0).replace("\"dt\": 1e-4", "\"dt\": 1e-3");
        let cfg = write_config(tmp.path(), "c.json", &body);
        let res = cslab(&["simulate", "--config", &cfg]);
        assert_eq!(
            res.status.code(),
            Some(2),
            "{engine}: {}",
            String::from_utf8_lossy(&res.stderr)
        );
    }
}

#[test]
fn blowup_report_for_shifted_datum() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("blowup.json");
    let body = format!(
        r#"{{"datum": {{"resonant": true, "m": 2, "p": {{"re": 0.5, "im": 0.0}}}}, "s_list": [1.0],
            "output": {{"report": "{}"}}}}"#,
        report.display()
    );
    let cfg = write_config(tmp.path(), "c.json", &body);
    let res = cslab(&["blowup", "--config", &cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert!(r["pass"].as_bool().unwrap());
    let big_t = r["blowup_time"].as_f64().unwrap();
    assert!((big_t - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-15);
    assert!((r["c0"].as_f64().unwrap() - 0.384).abs() < 1e-15);
    assert!((r["measured_mass_defect"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn blowup_rejects_nonresonant_datum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &format!(r#"{{"datum": {NONRESONANT_DATUM}}}"#));
    assert_eq!(cslab(&["blowup", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn stability_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &format!(r#"{{"datum": {NONRESONANT_DATUM}, "truncation": 64}}"#),
    );
    let res = cslab(&["stability", "--config", &cfg]);
    assert!(res.status.success());
    let r: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(r["classification"], "non_resonant");
    let q0 = r["q0"].as_f64().unwrap();
    assert!(q0 < 1.0);
    assert!((r["min_abs_x"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let cfg = write_config(tmp.path(), "r.json", &resonant_config(tmp.path(), "all", 0.1));
    let r: serde_json::Value = serde_json::from_slice(&cslab(&["stability", "--config", &cfg]).stdout).unwrap();
    let t0 = &r["resonance_times"][0];
    assert!((t0["t"].as_f64().unwrap() - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-12);
    assert!((t0["spectral_radius"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let res = cslab(&["stability", "--sweep", "20", "--truncation", "64"]);
    assert!(res.status.success());
    let r: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(r["misclassifications"], 0);
    assert_eq!(r["rows"].as_array().unwrap().len(), 20);
}

#[test]
fn verify_with_forced_small_truncation_fails_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("v.json");
    let res = cslab(&[
        "verify",
        "--fast",
        "--truncation",
        "16",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["metadata"]["explicit_truncation"], 16);
    let c5 = &r["criteria"][4];
    assert_eq!(c5["id"], 5);
    assert_eq!(c5["pass"], false);
    let detail = c5["checks"][1]["detail"].as_str().unwrap();
    assert!(detail.contains("beyond mode 16"));
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let res = Command::new(env!("CARGO_BIN_EXE_cslab"))
        .args(["stability", "--sweep", "2"])
        .env("CSLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(1));
    let res = Command::new(env!("CARGO_BIN_EXE_cslab"))
        .args(["stability", "--sweep", "2", "--truncation", "32"])
        .env("CSLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(res.status.success());
}
