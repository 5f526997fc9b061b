use std::path::Path;
use std::process::{Command, Output};

use qmeas_cli::commands::{cmd_search, SearchOptions};
use qmeas_cli::parse_scenario;
use qmeas_core::{check, Family, ModelSpec, RelationId};

fn qmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmeas")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Parses the report CSV (after the version comment) into header and rows.
fn table(stdout: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# qmeas-"));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], row: &[String], name: &str) -> String {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].clone()
}

fn float(header: &[String], row: &[String], name: &str) -> f64 {
    column(header, row, name).parse().unwrap()
}

const SIGMA_PHI: &str = r#"{"schema_version": 1, "id": "s", "model": {"family": "sigma_phi", "phi_degrees": 0}, "state": "+x"}"#;

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qmeas(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(qmeas(&["metrics", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(qmeas(&["--help"]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.json", r#"{"schema_version": 1, "model": {"family": "sigma_phi"}, "state": "+z"}"#);
    let out = qmeas(&["metrics", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi_degrees"));

    let good = write(dir.path(), "good.json", SIGMA_PHI);
    assert_eq!(qmeas(&["metrics", &good]).status.code(), Some(0));
    let out = qmeas(&["sweep", &good, "--param", "scale", "--grid", "1,x"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_unitary_explicit_model_is_rejected() {
    let almost = r#"{"schema_version": 1, "model": {"family": "explicit", "object_dim": 2, "probe_dim": 2,
        "unitary": [[[1.001,0],[0,0],[0,0],[0,0]], [[0,0],[1,0],[0,0],[0,0]], [[0,0],[0,0],[1,0],[0,0]], [[0,0],[0,0],[0,0],[1,0]]],
        "probe_state": [[1,0],[0,0]], "meter": [[[1,0],[0,0]], [[0,0],[-1,0]]]}, "state": "+z"}"#;
    let e = parse_scenario(almost).unwrap_err();
    assert!(e.to_string().contains("non-unitary"), "{e}");

    let identity = almost.replace("1.001", "1");
    let s = parse_scenario(&identity).unwrap();
    assert!(matches!(s.witness.model, ModelSpec::Explicit { object_dim: 2, probe_dim: 2, .. }));
    let m = qmeas_core::metrics::full_report(&s.configuration().unwrap()).unwrap();
    assert!(m.eps_x0.is_finite());
}

#[test]
fn metrics_csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.json", SIGMA_PHI);
    let out = qmeas(&["metrics", &path]);
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 1);
    assert!(float(&h, &rows[0], "eps_x0").abs() < 1e-12);
    assert_eq!(column(&h, &rows[0], "param_name"), "phi_degrees");

    let out = qmeas(&["metrics", &path, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let line: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(line["scenario_id"], "s");
    assert!(line["metrics"]["eps_x0"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn shift_scenario_satisfies_variance_identity() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let text = format!(
        r#"{{"schema_version": 1, "model": {{"family": "shift", "probe_dim": 4, "probe_state": [[0,0],[{h},0],[{h},0],[0,0]]}}, "state": "+y"}}"#
    );
    let out = qmeas(&["metrics", &write(dir.path(), "shift.json", &text)]);
    let (hd, rows) = table(&out.stdout);
    assert!(float(&hd, &rows[0], "variance_identity_res").abs() <= 1e-10);
    assert!(float(&hd, &rows[0], "unbias_res_x0") <= 1e-10);
}

#[test]
fn phi_sweep_on_x_eigenstate_follows_chord_length() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.json", SIGMA_PHI);
    let out = qmeas(&["sweep", &path, "--param", "phi_degrees", "--grid", "0,30,60,90,120,180"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let phi = float(&h, row, "param_value").to_radians();
        let eps = float(&h, row, "eps_x0");
        assert!((eps - 2.0 * (phi / 2.0).sin()).abs() < 1e-12, "phi {phi}: {eps}");
    }

    let out = qmeas(&["sweep", &path, "--param", "phi_degrees", "--grid", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn phi_sweep_is_rejected_for_shift_models() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"schema_version": 1, "model": {"family": "shift", "probe_dim": 3, "probe_state": [[0,0],[1,0],[0,0]]}, "state": "+z"}"#;
    let out = qmeas(&["sweep", &write(dir.path(), "s.json", text), "--param", "phi_degrees", "--grid", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_reports_every_relation() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"schema_version": 1, "model": {"family": "sigma_phi", "phi_degrees": 90}, "state": "+y"}"#;
    let path = write(dir.path(), "s.json", text);
    let (h, rows) = table(&qmeas(&["check", &path]).stdout);
    assert_eq!(rows.len(), RelationId::ALL.len());
    for row in &rows {
        if column(&h, row, "relation") == "OZAWA_E2" {
            assert_eq!(column(&h, row, "holds"), "true");
        }
    }
    let (_, rows) = table(&qmeas(&["check", &path, "--relation", "HEISENBERG_E1"]).stdout);
    assert_eq!(rows.len(), 1);
}

#[test]
fn witness_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w.json");
    let mut opts = SearchOptions::new(RelationId::HeisenbergE1, Family::RandomUnitary, 500, 3);
    opts.out = Some(out_path.clone());
    let mut sink = Vec::new();
    let result = cmd_search(&opts, &mut sink).unwrap();
    assert!(result.violation_found());

    let s = parse_scenario(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(s.relation, Some(RelationId::HeisenbergE1));
    let v = check(RelationId::HeisenbergE1, &s.witness.build().unwrap(), s.tolerance).unwrap();
    assert!((v.slack - result.best_slack).abs() <= 1e-10);

    let check = qmeas(&["check", &out_path.display().to_string()]);
    let (h, rows) = table(&check.stdout);
    assert_eq!(column(&h, &rows[0], "holds"), "false");
}

#[test]
fn ozawa_search_finds_no_violation() {
    let out = qmeas(&["search", "--relation", "OZAWA_E2", "--family", "random_unitary", "--budget", "10000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(column(&h, &rows[0], "summary"), "no violation");
    assert!(float(&h, &rows[0], "best_slack") >= -1e-9);
}

#[test]
fn zero_budget_search_evaluates_nothing() {
    let out = qmeas(&["search", "--relation", "HEISENBERG_E1", "--family", "sigma_phi", "--budget", "0", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(column(&h, &rows[0], "evaluations"), "0");
    assert_eq!(column(&h, &rows[0], "summary"), "no violation");
}

#[test]
fn reproduce_spin_table() {
    let out = qmeas(&["reproduce-spin"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    let find = |section: &str, phi: &str, quantity: &str| {
        rows.iter()
            .find(|r| {
                column(&h, r, "section") == section
                    && column(&h, r, "quantity") == quantity
                    && (phi.is_empty() || column(&h, r, "phi_degrees") == phi)
            })
            .cloned()
            .unwrap_or_else(|| panic!("missing {section} {quantity}"))
    };
    let eps_s = find("eigenstate_errors", "40.0", "eps_sys");
    assert!((float(&h, &eps_s, "value") - 0.23396).abs() < 5e-6);
    let oz = find("rescale_100x", "", "OZAWA_E2_slack");
    assert_eq!(column(&h, &oz, "note"), "holds=true");
    let e12 = find("rescale_100x", "", "MVOSTD_E12_slack");
    assert_eq!(column(&h, &e12, "note"), "holds=false");
    let e12 = find("shift_100x", "", "MVOSTD_E12_slack");
    assert_eq!(column(&h, &e12, "note"), "holds=true");
}
