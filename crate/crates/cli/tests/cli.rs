use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bessel-paths"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

/// Header and records under a strict reader: fixed field count, `#` lines
/// skipped, LF line endings only.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(!text.contains('\r'), "CRLF in output");
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(false)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers().expect("header row").iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.expect("well-formed record").iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn meta_line<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("# {key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no '{key}' header in\n{text}"))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(format!("{name}.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).expect("schema compiles")
}

fn assert_valid(schema_name: &str, args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&full)).expect("valid JSON");
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{args:?} violates {schema_name}.json: {errors:?}");
    doc
}

const EVAL: [&str; 9] = ["eval", "--n", "10", "--alpha", "1", "--a", "1", "--m", "5"];
const SWEEP: [&str; 15] = [
    "sweep", "--variable", "m", "--from", "3", "--to", "6", "--step", "0.25", "--n", "10", "--alpha", "1", "--a", "1",
];
const ZEROS: [&str; 5] = ["zeros", "--alpha", "0", "--count", "30"];
const MC: [&str; 11] = ["mc", "--dim", "3", "--m", "2", "--samples", "3000", "--grid", "1024", "--seed", "7"];

#[test]
fn eval_reports_both_routes() {
    let text = stdout(&[&EVAL[..], &["--format", "csv"]].concat());
    let (header, rows) = parse_csv(&text);
    assert_eq!(header[..2], ["route", "value"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "thm1");
    assert_eq!(rows[1][0], "thm2_hankel");
    let v: f64 = rows[0][1].parse().unwrap();
    assert!((v - 0.9844).abs() < 1e-3, "{v}");
    for key in ["command", "n", "alpha", "a", "m", "precision_bits", "truncation", "version", "rerun"] {
        meta_line(&text, key);
    }
}

#[test]
fn wall_at_start_gives_exact_zero() {
    let text = stdout(&["eval", "--n", "10", "--alpha", "1", "--a", "1", "--m", "1", "--format", "csv"]);
    let (_, rows) = parse_csv(&text);
    assert!(rows.iter().all(|r| r[1] == "0.0"));
}

#[test]
fn pitman_yor_alias_matches_determinant_route() {
    let args = ["eval", "--n", "1", "--alpha", "0.5", "--a", "0", "--m", "6", "--route", "pitman-yor", "--format", "csv"];
    let (_, rows) = parse_csv(&stdout(&args));
    assert_eq!(rows[0][0], "pitman_yor");
    assert_eq!(rows[1][0], "thm1");
    let py: f64 = rows[0][1].parse().unwrap();
    let t1: f64 = rows[1][1].parse().unwrap();
    assert!(py > 0.0 && py < 1.0 + 1e-15);
    assert!((py - t1).abs() < 1e-12);
}

#[test]
fn pretty_output_uses_six_significant_digits() {
    let text = stdout(&EVAL);
    let row = text.lines().find(|l| l.trim_start().starts_with("thm1")).unwrap();
    assert!(row.split_whitespace().nth(1).unwrap() == "0.984195", "{row}");
}

#[test]
fn tables_parse_and_flag_anomalies() {
    for (cmd, var, reference_a3) in [("table1", "m", None), ("table2", "a", Some(0.194887))] {
        let text = stdout(&[cmd]);
        let (header, rows) = parse_csv(&text);
        assert_eq!(header, [var, "computed", "reference_value", "abs_diff", "est_error"]);
        assert_eq!(rows.len(), 12);
        let computed: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
        let ordered = match cmd {
            "table1" => computed.windows(2).all(|w| w[1] > w[0]),
            _ => computed.windows(2).all(|w| w[1] < w[0]),
        };
        assert!(ordered, "{cmd} not monotone: {computed:?}");
        assert_eq!(text.lines().filter(|l| l.starts_with("# anomaly:")).count(), 2);
        if let Some(expect) = reference_a3 {
            let row = rows.iter().find(|r| r[0] == "3.0").unwrap();
            let diff: f64 = row[3].parse().unwrap();
            assert_eq!(row[2].parse::<f64>().unwrap(), expect);
            assert!(diff < 1e-3);
        } else {
            let row = rows.iter().find(|r| r[0] == "4.0").unwrap();
            assert!(row[3].parse::<f64>().unwrap() < 1e-4);
        }
    }
}

#[test]
fn sweep_is_two_columns_and_matches_the_table() {
    let text = stdout(&SWEEP);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["m", "probability"]);
    assert_eq!(rows.len(), 13);
    let (_, table) = parse_csv(&stdout(&["table1"]));
    for t in &table {
        let s = rows.iter().find(|r| r[0] == t[0]).expect("grid point present");
        assert_eq!(s[1], t[1], "M = {}", t[0]);
    }
    let a_sweep = stdout(&[
        "sweep", "--variable", "a", "--from", "1", "--to", "3.75", "--step", "0.25", "--n", "10", "--alpha", "1", "--m", "5",
    ]);
    let vals: Vec<f64> = parse_csv(&a_sweep).1.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn zero_dump_has_three_columns() {
    let (header, rows) = parse_csv(&stdout(&ZEROS));
    assert_eq!(header, ["n", "x_n", "residual"]);
    assert_eq!(rows.len(), 30);
    let x1: f64 = rows[0][1].parse().unwrap();
    assert!((x1 - 2.404825557695773).abs() < 1e-14);
}

#[test]
fn json_outputs_match_their_schemas() {
    let doc = assert_valid("eval", &EVAL);
    assert_eq!(doc["cross_check"]["agree"], Value::Bool(true));
    assert_valid("table", &["table1"]);
    assert_valid("table", &["table2"]);
    assert_valid("sweep", &SWEEP);
    assert_valid("zeros", &ZEROS);
    assert_valid("mc", &MC);
}

#[test]
fn schemas_reject_foreign_documents() {
    let doc: Value = serde_json::from_str(&stdout(&[&ZEROS[..], &["--format", "json"]].concat())).unwrap();
    assert!(!schema("eval").is_valid(&doc));
    assert!(!schema("zeros").is_valid(&serde_json::json!({ "rows": [] })));
}

/// Re-running the recorded arguments reproduces the numeric output.
fn assert_round_trip(args: &[&str]) {
    let mut first_args = args.to_vec();
    first_args.extend(["--format", "csv"]);
    let first = stdout(&first_args);
    let rerun = meta_line(&first, "rerun");
    let mut again: Vec<&str> = rerun.split_whitespace().collect();
    again.extend(["--format", "csv"]);
    let second = stdout(&again);
    assert_eq!(data_lines(&first), data_lines(&second), "{rerun}");
    assert_eq!(first, second, "headers differ for {rerun}");
}

#[test]
fn outputs_round_trip_through_their_headers() {
    assert_round_trip(&EVAL);
    assert_round_trip(&["eval", "--n", "3", "--alpha", "-0.4", "--a", "0.5", "--m", "2.5", "--nmax", "40"]);
    assert_round_trip(&["table2"]);
    assert_round_trip(&SWEEP);
    assert_round_trip(&ZEROS);
    assert_round_trip(&MC);
}

#[test]
fn monte_carlo_is_reproducible_and_thread_independent() {
    let a = stdout(&[&MC[..], &["--format", "csv", "--jobs", "1"]].concat());
    let b = stdout(&[&MC[..], &["--format", "csv"]].concat());
    assert_eq!(a, b);
    let (header, rows) = parse_csv(&a);
    assert_eq!(header, ["p_hat", "std_err", "p_hat_fine", "grid_bias_bracket", "analytic", "z_score"]);
    let z: f64 = rows[0][5].parse().unwrap();
    assert!(z.is_finite());
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = std::env::temp_dir().join(format!("bessel-paths-out-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let printed = stdout(&[&ZEROS[..], &["--format", "csv"]].concat());
    let empty = stdout(&[&ZEROS[..], &["--format", "csv", "--out", p]].concat());
    assert!(empty.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn usage_errors_exit_with_one() {
    let cases: [&[&str]; 7] = [
        &["eval", "--n", "10"],
        &["eval", "--n", "0", "--alpha", "1", "--a", "1", "--m", "2"],
        &["eval", "--n", "2", "--alpha", "-1.5", "--a", "1", "--m", "2"],
        &["eval", "--n", "2", "--alpha", "1", "--a", "1", "--m", "2", "--precision-bits", "64"],
        &["mc", "--dim", "2.5", "--m", "2"],
        &["sweep", "--variable", "m", "--from", "2", "--to", "1", "--step", "0.1", "--n", "1", "--alpha", "1", "--a", "0"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn truncation_failure_exits_with_three() {
    let out = run(&["eval", "--n", "1", "--alpha", "1", "--a", "0", "--m", "10000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn quick_verification_passes_and_matches_its_schema() {
    let start = std::time::Instant::now();
    let doc = assert_valid("verify", &["verify", "--depth", "quick"]);
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(doc["passed"], Value::Bool(true), "{doc:#}");
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows.len() >= 9);
    assert!(rows.iter().all(|r| r["passed"] == Value::Bool(true)));
    assert_eq!(doc["reference"].as_array().unwrap().len(), 24);
}
