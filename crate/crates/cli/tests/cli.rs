use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn piston(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piston"))
        .args(args)
        .env_remove("PISTON_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = piston(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("piston-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn result<'a>(v: &'a Value, quantity: &str, method: &str) -> &'a Value {
    v["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == quantity && r["method"] == method)
        .unwrap_or_else(|| panic!("no {quantity}/{method} in {v}"))
}

fn value(v: &Value, quantity: &str, method: &str) -> f64 {
    result(v, quantity, method)["value"].as_f64().unwrap()
}

#[test]
fn force_vanishes_at_midpoint_and_matches_closed_form() {
    let v = json(&["ideal", "force", "--L", "1", "--a", "0.5"]);
    assert_eq!(value(&v, "force_per_area", "closed"), 0.0);
    assert_eq!(result(&v, "force_per_area", "closed")["units"], "1/length^4");

    let v = json(&["ideal", "force", "--L", "1", "--a", "0.25"]);
    let pi2 = std::f64::consts::PI.powi(2);
    let expected = pi2 / 240.0 * (0.75f64.powi(-4) - 0.25f64.powi(-4));
    let f = value(&v, "force_per_area", "closed");
    assert!((f - expected).abs() <= 1e-12 * expected.abs(), "{f} vs {expected}");
}

#[test]
fn energy_methods_agree() {
    let v = json(&["ideal", "energy", "--L", "1", "--a", "0.3", "--xi", "0.02", "--method", "all"]);
    let numeric = value(&v, "energy_per_area", "numeric");
    let closed = value(&v, "energy_per_area", "closed");
    assert!(((numeric - closed) / closed).abs() < 1e-9);
    let rel = value(&v, "energy_per_area_relative_delta", "numeric-closed");
    assert!(rel.abs() < 1e-9);
    assert_eq!(v["parameters"]["xi"]["method"], "input");
}

#[test]
fn si_scales_energy_but_not_lengths() {
    let natural = json(&["ideal", "energy", "--L", "1", "--a", "0.3", "--xi", "0.1"]);
    let si = json(&["--si", "2.0", "ideal", "energy", "--L", "1", "--a", "0.3", "--xi", "0.1"]);
    let e = result(&si, "energy_per_area", "closed");
    assert_eq!(e["units"], "J/m^2");
    assert_eq!(e["value"].as_f64().unwrap(), 2.0 * value(&natural, "energy_per_area", "closed"));
    assert_eq!(si["parameters"]["a"]["value"].as_f64(), Some(0.3));
    assert_eq!(si["parameters"]["a"]["units"], "m");
    assert_eq!(piston(&["--si", "-1", "ideal", "force", "--L", "1", "--a", "0.3"]).status.code(), Some(2));
}

#[test]
fn sinusoidal_shift_quadrature_equals_closed_form() {
    let v = json(&[
        "perturb", "shift", "--L", "1", "--a", "0.4", "--side", "right", "--m", "3", "--lambda",
        "2", "--kpar", "1.5", "--alpha", "0.2",
    ]);
    let q = value(&v, "omega1", "quadrature");
    let c = value(&v, "omega1", "closed");
    assert!(((q - c) / c).abs() < 1e-10, "{q} vs {c}");
}

#[test]
fn flat_file_profile_shifts_by_half_the_permittivity() {
    let dir = scratch("flat");
    let path = dir.join("flat.csv");
    std::fs::write(&path, "x,delta_eps\n0,0.1\n0.25,0.1\n0.5,0.1\n0.75,0.1\n1,0.1\n").unwrap();
    let profile = format!("file:{}", path.display());
    let v = json(&[
        "perturb", "shift", "--L", "1", "--a", "0.4", "--m", "2", "--lambda", "1", "--kpar", "2",
        "--profile", &profile,
    ]);
    let ratio = value(&v, "omega1_over_omega0", "quadrature");
    assert!((ratio + 0.05).abs() < 1e-12, "{ratio}");
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);

    let out = piston(&[
        "perturb", "shift", "--L", "1", "--a", "0.4", "--m", "2", "--lambda", "1", "--profile",
        &profile, "--method", "closed",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn denergy_routes_agree_and_zero_mode_is_reported() {
    let v = json(&[
        "perturb", "denergy", "--L", "1", "--a", "0.35", "--xi", "0.05", "--method", "all",
        "--zero-mode",
    ]);
    let sum = value(&v, "denergy_dalpha", "sum");
    let closed = value(&v, "denergy_dalpha", "closed");
    assert!(((sum - closed) / closed).abs() < 1e-9);
    let results = v["results"].as_array().unwrap();
    let ratios: Vec<f64> = ["literal", "normalized"]
        .iter()
        .map(|m| {
            results
                .iter()
                .find(|r| r["quantity"] == "zero_mode_shift_ratio" && r["method"] == *m && r["side"] == "left")
                .unwrap()["value"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!((ratios[0] - 2.0 * ratios[1]).abs() < 1e-12);
}

#[test]
fn oracle_tracks_first_order_shift() {
    let v = json(&[
        "perturb", "oracle", "--L", "1", "--a", "0.4", "--m", "1", "--lambda", "1", "--kpar", "2",
    ]);
    let tm = value(&v, "omega_shift", "transfer_matrix");
    let q = value(&v, "omega_shift", "quadrature");
    assert!(((tm - q) / q).abs() < 1e-3, "{tm} vs {q}");
}

#[test]
fn laurent_fit_recovers_constant_term() {
    let v = json(&["laurent", "fit", "--quantity", "ideal-energy", "--L", "1", "--a", "0.3"]);
    let c0 = result(&v, "c0", "fit");
    let fitted = c0["value"].as_f64().unwrap();
    let reference = c0["reference"].as_f64().unwrap();
    assert!(((fitted - reference) / reference).abs() < 0.01);
    assert_eq!(c0["units"], "1/length^3");
}

#[test]
fn laurent_report_flags_dependence_on_a() {
    let v = json(&["laurent", "report", "--L", "1", "--a-grid", "0.2:0.8:4"]);
    let flag = |quantity: &str, coefficient: &str| {
        v["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["quantity"] == quantity && r["coefficient"] == coefficient)
            .unwrap()["flag"]
            .as_bool()
            .unwrap()
    };
    assert!(flag("denergy-dalpha_spread", "c-3"));
    assert!(flag("denergy-dalpha_spread", "c-1"));
    assert!(!flag("denergy-dalpha_spread", "c-4"));
    assert!(!flag("denergy-dalpha_spread", "c-2"));
    assert!(!flag("ideal-energy_spread", "c-3"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    for args in [
        &["laurent", "fit", "--quantity", "ideal-energy", "--L", "1", "--a", "0.3", "--basis=-4,x"][..],
        &["laurent", "report", "--L", "1", "--a-grid", "0.2:0.8"],
        &["ideal", "force", "--L", "1", "--a", "2"],
        &["ideal", "force", "--L", "1"],
        &["perturb", "shift", "--L", "1", "--a", "0.3", "--m", "1", "--lambda", "3"],
        &["reproduce", "no-such-check"],
        &["ideal", "energy", "--bogus"],
    ] {
        let out = piston(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn compute_failure_prints_error_json() {
    let out = piston(&[
        "ideal", "energy", "--L", "1", "--a", "0.3", "--xi", "0.01", "--method", "numeric",
        "--max-terms", "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "resource");
}

#[test]
fn reproduce_reports_pass() {
    let v = json(&["reproduce", "ideal-force"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"][0]["name"], "ideal-force");
    let out = piston(&["--format", "text", "reproduce", "ideal-force"]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("[PASS] ideal-force"));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = scratch("config");
    let path = dir.join("run.toml");
    std::fs::write(&path, "format = \"csv\"\n[ideal]\nL = 1.0\na = 0.25\n").unwrap();
    let cfg = path.to_str().unwrap();
    let out = piston(&["--config", cfg, "ideal", "force"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command,quantity,"));
    assert!(text.contains(",closed,-1.03976"));

    let v = json(&["--config", cfg, "--format", "json", "ideal", "force", "--a", "0.5"]);
    assert_eq!(value(&v, "force_per_area", "closed"), 0.0);

    std::fs::write(&path, "[ideal]\nlength = 1.0\n").unwrap();
    assert_eq!(piston(&["--config", cfg, "ideal", "force"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["laurent", "fit", "--quantity", "denergy-dalpha", "--L", "1", "--a", "0.3"];
    assert_eq!(piston(&args).stdout, piston(&args).stdout);
    let args = ["reproduce", "property-suites", "--seed", "11"];
    assert_eq!(piston(&args).stdout, piston(&args).stdout);
}

#[test]
fn relative_outputs_resolve_against_output_dir() {
    let dir = scratch("outdir");
    let out = Command::new(env!("CARGO_BIN_EXE_piston"))
        .args([
            "--format", "csv", "--output", "energy.csv", "--emit-plot-data", "plot.csv", "ideal",
            "energy", "--L", "1", "--a", "0.3", "--xi", "0.05", "--method", "all",
        ])
        .env("PISTON_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.join("energy.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "command,quantity,side,m,lambda,k_par,a,xi,coefficient,label,method,value,uncertainty,reference,tolerance,units,flag"
    );
    let plot = std::fs::read_to_string(dir.join("plot.csv")).unwrap();
    let mut lines = plot.lines();
    assert_eq!(lines.next(), Some("quantity,a,xi,method,value,units"));
    assert_eq!(lines.count(), 3);
}
