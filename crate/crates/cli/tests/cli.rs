use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn regge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header and rows of the aligned text table.
fn parse_table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>());
    let header = lines.next().unwrap();
    (header, lines.collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn harmonic_trajectory() {
    let out = regge(&[
        "trajectory", "--potential", "powerlaw", "--A", "1", "--v", "2", "--m", "1", "--n", "0",
        "--N", "4", "--E", "2", "--precision", "12",
    ]);
    assert!(out.status.success());
    let (header, rows) = parse_table(&stdout(&out));
    let value: f64 = rows[0][column(&header, "alpha^(4)")].parse().unwrap();
    assert!((value - (2f64.sqrt() - 1.5)).abs() < 1e-11);
}

#[test]
fn order_zero_reports_only_alpha0() {
    let out = regge(&["trajectory", "--E", "2", "--N", "0"]);
    assert!(out.status.success());
    let (header, _) = parse_table(&stdout(&out));
    assert_eq!(header, ["E", "n", "alpha_0", "alpha^(0)"]);
}

#[test]
fn state_resolved_through_the_oracle() {
    let out = regge(&[
        "trajectory", "--potential", "martin", "--n", "1", "--N", "4", "--state", "n=1,l=0",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let alpha = rows[0]["alpha_unren"].as_f64().unwrap();
    assert!((alpha - 0.00622).abs() < 2e-4, "{alpha}");
    assert_eq!(rows[0]["l_exact"].as_f64(), Some(0.0));
    assert_eq!(rows[0]["coeffs"].as_array().unwrap().len(), 5);
}

#[test]
fn rows_follow_input_order() {
    let out = regge(&["trajectory", "--E", "1.5,1.2", "--grid", "2:3:3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let energies: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(energies, ["1.50000", "1.20000", "2.00000", "2.50000", "3.00000"]);
}

#[test]
fn exit_codes() {
    assert_eq!(regge(&["trajectory", "--E", "2", "--N", "9"]).status.code(), Some(2));
    assert_eq!(regge(&["trajectory"]).status.code(), Some(2));
    assert_eq!(regge(&["trajectory", "--m", "0", "--E", "1"]).status.code(), Some(2));
    assert_eq!(regge(&["trajectory", "--potential", "martin", "--v", "2", "--E", "1"]).status.code(), Some(2));
    assert_eq!(regge(&["renorm", "--scheme", "sideways", "--E", "1"]).status.code(), Some(2));
    let out = regge(&["trajectory", "--potential", "powerlaw", "--v", "2", "--E", "-1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn output_is_deterministic() {
    let args = ["renorm", "--scheme", "both", "--E", "1.3,1.35", "--n", "2", "--format", "csv"];
    let a = regge(&args);
    let b = regge(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let c = regge(&seq_args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn renorm_none_echoes_the_series() {
    let plain = regge(&["trajectory", "--E", "1.3", "--n", "1", "--format", "json"]);
    let none = regge(&["renorm", "--scheme", "none", "--E", "1.3", "--n", "1", "--format", "json"]);
    let plain: Value = serde_json::from_str(&stdout(&plain)).unwrap();
    let none: Value = serde_json::from_str(&stdout(&none)).unwrap();
    assert_eq!(plain[0]["alpha_unren"], none[0]["alpha_unren"]);
    assert_eq!(none[0]["scheme"], "none");
}

#[test]
fn renorm_fc_on_the_first_row() {
    let out = regge(&["renorm", "--scheme", "fc", "--state", "n=1,l=0", "--format", "json"]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let alpha = rows[0]["alpha_fc"].as_f64().unwrap();
    assert!((alpha - 0.00165).abs() < 5e-4);
    for r in rows[0]["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() < 1e-10);
    }
}

#[test]
fn renorm_both_gives_two_rows_per_state() {
    let out = regge(&["renorm", "--E", "1.3,1.4", "--n", "1"]);
    assert!(out.status.success());
    let (header, rows) = parse_table(&stdout(&out));
    let schemes: Vec<&str> = rows.iter().map(|r| r[column(&header, "scheme")].as_str()).collect();
    assert_eq!(schemes, ["pms", "fc", "pms", "fc"]);
}

#[test]
fn json_and_table_agree() {
    let table = regge(&["table1", "--rows", "n=1"]);
    let json = regge(&["table1", "--rows", "n=1", "--format", "json"]);
    assert!(table.status.success(), "{}", String::from_utf8_lossy(&table.stderr));
    let (header, rows) = parse_table(&stdout(&table));
    let objects: Value = serde_json::from_str(&stdout(&json)).unwrap();
    let objects = objects.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(objects.len(), 2);
    for (row, obj) in rows.iter().zip(objects) {
        for (col, key) in [("E", "E"), ("unren", "alpha_unren"), ("pms", "alpha_pms"), ("fc", "alpha_fc")] {
            let shown: f64 = row[column(&header, col)].parse().unwrap();
            let exact = obj[key].as_f64().unwrap();
            assert!((shown - exact).abs() <= 5e-6 * exact.abs(), "{col}: {shown} vs {exact}");
        }
        assert_eq!(row[column(&header, "n")], obj["n"].to_string());
    }
}

#[test]
fn table1_flags_the_missed_row() {
    let out = regge(&["table1", "--rows", "n=4"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pms") && err.contains("roots"), "{err}");
    assert!(regge(&["table1", "--rows", "n=4", "--no-check"]).status.success());
}

#[test]
fn config_file_with_flag_override() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# harmonic\npotential = powerlaw\nv = 2\nmass = 1\nE = 2\norder = 4\nprecision = 12").unwrap();
    let path = file.path().to_str().unwrap();
    let out = regge(&["trajectory", "--config", path]);
    assert!(out.status.success());
    let (header, rows) = parse_table(&stdout(&out));
    let value: f64 = rows[0][column(&header, "alpha^(4)")].parse().unwrap();
    assert!((value - (2f64.sqrt() - 1.5)).abs() < 1e-11);

    let out = regge(&["trajectory", "--config", path, "--E", "8"]);
    let (header, rows) = parse_table(&stdout(&out));
    let value: f64 = rows[0][column(&header, "alpha^(4)")].parse().unwrap();
    assert!((value - (8.0 / 2f64.sqrt() - 1.5)).abs() < 1e-10);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "colour = blue").unwrap();
    let out = regge(&["trajectory", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
