//! End-to-end checks of the command-line surface: outputs, exit codes, and
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bidegree"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn count_small_fixtures() {
    let out = run(&[
        "count",
        "--input",
        fixture("all_ones_4.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "24");

    let out = run(&["count", "--input", fixture("reg2_4.json").to_str().unwrap()]);
    assert_eq!(stdout(&out).trim(), "90");

    // CSV input parses to the same sequence.
    let out = run(&["count", "--input", fixture("two_col.csv").to_str().unwrap()]);
    assert_eq!(stdout(&out).trim(), "90");

    // Undirected single-array input.
    let out = run(&[
        "count",
        "--input",
        fixture("undirected_4.json").to_str().unwrap(),
        "--variant",
        "undirected",
    ]);
    assert_eq!(stdout(&out).trim(), "3");
}

#[test]
fn count_closed_form_mode() {
    let out = run(&[
        "count",
        "--input",
        fixture("all_ones_4.json").to_str().unwrap(),
        "--mode",
        "closed-form",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "24");

    // 2-regular margins match no closed-form shape.
    let out = run(&[
        "count",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--mode",
        "closed-form",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_json_reports_location_and_exits_2() {
    let out = run(&[
        "count",
        "--input",
        fixture("malformed.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line") && err.contains("column"),
        "stderr: {err}"
    );
}

#[test]
fn count_json_report_has_summary() {
    let out = run(&[
        "count",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["exact"], "90");
    assert_eq!(v["sequence"]["n"], 4);
    assert_eq!(v["sequence"]["edge_total"], 8);
    assert!(v["sequence"]["effective_tau"].as_f64().is_some());
}

#[test]
fn estimate_values_and_banner() {
    let out = run(&[
        "estimate",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--order",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let fields: Vec<&str> = text.trim().split('\t').collect();
    let value: f64 = fields[1].parse().unwrap();
    assert!(
        (value - 157.5 * (-0.5f64).exp()).abs() < 1e-3,
        "value {value}"
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("effective_tau"), "banner missing: {err}");

    // Unit degrees are exact at every order.
    for order in ["1", "2", "3", "4"] {
        let out = run(&[
            "estimate",
            "--input",
            fixture("all_ones_4.json").to_str().unwrap(),
            "--order",
            order,
        ]);
        let text = stdout(&out);
        let value: f64 = text.trim().split('\t').nth(1).unwrap().parse().unwrap();
        assert!((value - 24.0).abs() < 1e-6, "order {order}: {value}");
    }

    // Ratio-form input is rejected with the form exit code.
    let out = run(&[
        "estimate",
        "--input",
        fixture("ratio_form.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn compare_table_for_regular_family() {
    let out = run(&["compare", "--sizes", "4,6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("key\tn\ts\texact"));
    let row4: Vec<&str> = lines[1].split('\t').collect();
    let row6: Vec<&str> = lines[2].split('\t').collect();
    assert_eq!(row4[3], "90");
    assert_eq!(row6[3], "67950");

    // No sizes: header-only table.
    let out = run(&["compare"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn compare_custom_family_uses_file_stem() {
    let out = run(&[
        "compare",
        "--family",
        "custom",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).expect("one data row");
    assert!(row.starts_with("reg2_4\t"), "row: {row}");
}

#[test]
fn expand_emits_coefficient_lines() {
    let out = run(&["expand", "--k", "2", "--mode", "truncated"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("-(4r-10) | {1,2} | free 3,4 | distinct 5..r"),
        "{text}"
    );

    let out = run(&["expand", "--k", "1"]);
    let text = stdout(&out);
    assert!(text.contains("-(r-1)"), "{text}");

    let out = run(&["expand", "--k", "3", "--weighted", "--mode", "truncated"]);
    let text = stdout(&out);
    assert!(
        text.contains("-(4r-18) | {1,2}{3,4} | free 5,6 | distinct 7..r"),
        "{text}"
    );

    let out = run(&["expand", "--k", "2", "--check"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("identity_check\tpass"));

    let out = run(&["expand", "--k", "2", "--weighted", "--check"]);
    assert!(stdout(&out).contains("identity_check\tpass"));

    let out = run(&["expand", "--k", "4"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn sample_is_deterministic() {
    let input = fixture("reg2_4.json");
    let args = [
        "sample",
        "--input",
        input.to_str().unwrap(),
        "--samples",
        "3",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    // Three samples separated by blank lines, eight edges each.
    let text = stdout(&a);
    let blocks: Vec<&str> = text.trim_end().split("\n\n").collect();
    assert_eq!(blocks.len(), 3);
    for block in blocks {
        assert_eq!(block.lines().count(), 8);
    }
}

#[test]
fn sample_json_lines_carry_margins() {
    let out = run(&[
        "sample",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--samples",
        "2",
        "--seed",
        "9",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("JSON line");
        assert_eq!(v["in_degrees"], serde_json::json!([2, 2, 2, 2]));
        assert_eq!(v["edges"].as_array().unwrap().len(), 8);
    }
}

#[test]
fn ratio_reports_exact_and_orders() {
    let out = run(&[
        "ratio",
        "--input",
        fixture("ratio_form.json").to_str().unwrap(),
        "--i",
        "1",
        "--j",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    // Exact quotient of the two decremented counts is 2.
    let exact: f64 = row[2].parse().unwrap();
    assert!((exact - 2.0).abs() < 1e-9);
    let order1: f64 = row[3].parse().unwrap();
    assert!((order1 - 2.0).abs() < 1e-12);

    // Symmetric pair: every column is exactly 1.
    let out = run(&[
        "ratio",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--i",
        "1",
        "--j",
        "2",
    ]);
    // Balanced input has no ratio form.
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn ratio_symmetric_columns_are_one() {
    // In-heavy with two symmetric nodes.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sym.json");
    std::fs::write(&path, r#"{"in_degrees":[2,2,1],"out_degrees":[2,2,0]}"#).unwrap();
    let out = run(&[
        "ratio",
        "--input",
        path.to_str().unwrap(),
        "--i",
        "1",
        "--j",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    for col in &row[2..7] {
        let v: f64 = col.parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9, "column {col}");
    }
}

#[test]
fn ratio_empirical_close_to_exact() {
    let out = run(&[
        "ratio",
        "--input",
        fixture("ratio_form.json").to_str().unwrap(),
        "--i",
        "1",
        "--j",
        "2",
        "--samples",
        "4000",
        "--seed",
        "11",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header: Vec<&str> = text.lines().next().unwrap().split('\t').collect();
    assert_eq!(header[7], "empirical");
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    let empirical: f64 = row[7].parse().unwrap();
    let se: f64 = row[8].parse().unwrap();
    assert!(
        (empirical - 2.0).abs() <= 4.0 * se,
        "empirical {empirical} se {se}"
    );
}

#[test]
fn state_budget_env_var_caps_the_count() {
    let out = bin()
        .args(["count", "--input", fixture("reg2_4.json").to_str().unwrap()])
        .env("BIDEGREE_MAX_STATE", "1")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn compare_exact_column_matches_count_output() {
    let count_out = run(&["count", "--input", fixture("reg2_4.json").to_str().unwrap()]);
    let count_val = stdout(&count_out).trim().to_string();
    let cmp_out = run(&[
        "compare",
        "--family",
        "custom",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
    ]);
    let text = stdout(&cmp_out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[3], count_val);
}

#[test]
fn estimate_json_report_shape() {
    let out = run(&[
        "estimate",
        "--input",
        fixture("reg2_4.json").to_str().unwrap(),
        "--order",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["estimates"][0]["order"], 2);
    assert!(v["estimates"][0]["graphical"].as_bool().unwrap());
    assert!(v.get("exact").is_none() || v["exact"].is_null());
    assert!(v.get("relative_errors").is_none() || v["relative_errors"].is_null());
}
