//! End-to-end tests of the `bjlab` binary: exit codes, exported files and
//! printed reports.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

/// The displayed `M_Õ` of the one-shift row ordering on six blocks.
const ROW_TILDE_DISPLAY: &str = "\
* 14 1 0 11 2
14 * 13 10 7 12
1 13 * 9 6 8
0 10 9 * 4 5
11 7 6 4 * 3
2 12 8 5 3 *
";

fn bjlab(args: &[&str]) -> Output {
    bjlab_env(args, &[])
}

fn bjlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bjlab"));
    cmd.args(args).env_remove("BJLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("bjlab runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("bjlab exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn dir_arg(dir: &TempDir) -> &str {
    dir.path().to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data records of an exported CSV as header-keyed maps.
fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let (comment, body) = text.split_once('\n').unwrap();
    assert!(comment.starts_with("# bjlab-"), "missing format line: {comment}");
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| headers.iter().map(String::from).zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

fn write_matrix(dir: &TempDir, name: &str, rows: &[&[f64]]) -> String {
    let mut text = format!("{}\n", rows.len());
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn diagonal_input_needs_no_sweeps() {
    let dir = TempDir::new().unwrap();
    let m = write_matrix(&dir, "d.txt", &[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]);
    let out =
        bjlab(&["run", "--matrix", &m, "--partition", "pi:1,1,1", "--strategy", "row", "--out-dir", dir_arg(&dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["repetitions"][0]["sweeps"], 0);
    assert_eq!(summary["converged"], true);
    let mut eig: Vec<f64> =
        summary["repetitions"][0]["eigenvalues"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    eig.sort_by(f64::total_cmp);
    assert_eq!(eig, vec![1.0, 2.0, 3.0]);
}

#[test]
fn checked_run_exports_a_consistent_trace() {
    let dir = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--partition",
        "pi:3,3,3,3",
        "--strategy",
        "class:B_c m=4 seed=5",
        "--seed",
        "11",
        "--check-bounds",
        "--out-dir",
        dir_arg(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = read_csv(&dir.path().join("trace.csv"));
    let summary = read_json(&dir.path().join("summary.json"));
    let rep = &summary["repetitions"][0];
    let sweeps = rep["sweeps"].as_u64().unwrap() as usize;
    let steps = rep["steps"].as_u64().unwrap() as usize;
    assert!(sweeps > 0);
    assert_eq!(rows.len(), steps + sweeps);
    assert_eq!(summary["trace_rows"].as_u64().unwrap() as usize, rows.len());
    assert_eq!(summary["bound_violations"], 0);

    let sweep_rows: Vec<_> = rows.iter().filter(|r| r["kind"] == "sweep").collect();
    assert_eq!(sweep_rows.len(), sweeps);
    let checked: Vec<_> = sweep_rows.iter().filter(|r| !r["bound_ok"].is_empty()).collect();
    assert!(!checked.is_empty());
    assert!(checked.iter().all(|r| r["bound_ok"] == "1"));
    for row in &rows {
        for col in ["off_norm", "ratio", "sigma_min"] {
            let v: f64 = row[col].parse().unwrap();
            assert!(v.is_finite(), "{col} = {v}");
        }
    }
}

#[test]
fn summary_echoes_the_resolved_configuration() {
    let dir = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--partition",
        "pi:2,2,2",
        "--strategy",
        "column",
        "--seed",
        "4",
        "--rho",
        "0.5",
        "--out-dir",
        dir_arg(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let config = &read_json(&dir.path().join("summary.json"))["config"];
    let text = config.to_string();
    assert!(text.contains("pi:2,2,2"), "{text}");
    assert!(text.contains("0.5"), "{text}");
    assert_eq!(config["seed"], 4);
}

#[test]
fn outputs_are_reproducible_across_runs_and_thread_counts() {
    let args = |dir: &TempDir| {
        vec![
            "run".to_string(),
            "--partition".into(),
            "pi:2,3,2,3".into(),
            "--strategy".into(),
            "class:B_sg m=4 seed=2 shifts=1".into(),
            "--seed".into(),
            "9".into(),
            "--repetitions".into(),
            "4".into(),
            "--out-dir".into(),
            dir_arg(dir).into(),
        ]
    };
    let mut files = Vec::new();
    for threads in ["1", "1", "3"] {
        let dir = TempDir::new().unwrap();
        let a = args(&dir);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let out = bjlab_env(&refs, &[("BJLAB_THREADS", threads)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
        // The echoed config names the output directory, which differs per run.
        let summary = summary.replace(dir_arg(&dir), "OUT");
        files.push((fs::read(dir.path().join("trace.csv")).unwrap(), summary));
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn malformed_strategy_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    for strategy in ["class:B_nope m=4", "pairs:(1,2),(2,", "diagonal"] {
        let out = bjlab(&[
            "run",
            "--partition",
            "pi:1,1,1,1",
            "--strategy",
            strategy,
            "--seed",
            "1",
            "--out-dir",
            dir_arg(&dir),
        ]);
        assert_eq!(code(&out), 1, "{strategy}: {}", stdout(&out));
    }
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&bjlab(&["run", "--no-such-flag"])), 1);
    assert_eq!(code(&bjlab(&["--help"])), 0);
}

#[test]
fn random_matrix_without_a_seed_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = bjlab(&["run", "--partition", "pi:2,2", "--strategy", "row", "--out-dir", dir_arg(&dir)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("seed"), "{}", stderr(&out));
}

#[test]
fn asymmetric_matrix_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let m = write_matrix(&dir, "a.txt", &[&[1.0, 2.0], &[0.0, 1.0]]);
    let out = bjlab(&["run", "--matrix", &m, "--partition", "pi:1,1", "--strategy", "row", "--out-dir", dir_arg(&dir)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_cap_reports_non_convergence() {
    let dir = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--partition",
        "pi:2,2,2,2",
        "--strategy",
        "row",
        "--seed",
        "3",
        "--sweep-cap",
        "1",
        "--out-dir",
        dir_arg(&dir),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["converged"], false);
    assert_eq!(summary["exit_code"], 3);
    assert_eq!(summary["repetitions"][0]["sweeps"], 1);
}

#[test]
fn bound_violation_without_ubc_exits_with_two() {
    // Without the UBC permutation the element-wise contraction is not
    // guaranteed, and some 3 x 3 samples exceed it.
    let dir = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--partition",
        "pi:1,1,1",
        "--strategy",
        "row",
        "--ubc",
        "never",
        "--check-bounds",
        "--repetitions",
        "200",
        "--seed",
        "1",
        "--out-dir",
        dir_arg(&dir),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let summary = read_json(&dir.path().join("summary.json"));
    assert!(summary["bound_violations"].as_u64().unwrap() > 0);
    let rows = read_csv(&dir.path().join("trace.csv"));
    assert!(rows.iter().any(|r| r["bound_ok"] == "0"));

    let ubc = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--partition",
        "pi:1,1,1",
        "--strategy",
        "row",
        "--ubc",
        "always",
        "--check-bounds",
        "--repetitions",
        "200",
        "--seed",
        "1",
        "--out-dir",
        dir_arg(&ubc),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn config_file_fields_yield_to_flags() {
    let dir = TempDir::new().unwrap();
    let config = serde_json::json!({
        "matrix": { "kind": "spd", "n": 6, "seed": 2 },
        "partition": "pi:2,2,2",
        "strategy": "row",
        "solver": { "sweep_cap": 1 },
        "repetitions": 2,
    });
    let path = dir.path().join("exp.json");
    fs::write(&path, config.to_string()).unwrap();
    let cfg = path.to_str().unwrap();

    let capped = TempDir::new().unwrap();
    let out = bjlab(&["--config", cfg, "run", "--out-dir", dir_arg(&capped)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(read_json(&capped.path().join("summary.json"))["repetitions"].as_array().unwrap().len(), 2);

    let free = TempDir::new().unwrap();
    let out = bjlab(&["--config", cfg, "run", "--sweep-cap", "50", "--repetitions", "1", "--out-dir", dir_arg(&free)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(read_json(&free.path().join("summary.json"))["repetitions"].as_array().unwrap().len(), 1);

    fs::write(&path, r#"{"partition": "pi:2,2", "colour": 1}"#).unwrap();
    assert_eq!(code(&bjlab(&["--config", cfg, "bounds"])), 1);
}

fn opnorm(args: &[&str]) -> (Value, Vec<std::collections::HashMap<String, String>>) {
    let dir = TempDir::new().unwrap();
    let mut full = vec!["operator-norm", "--out-dir", dir_arg(&dir)];
    full.extend_from_slice(args);
    let out = bjlab(&full);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (read_json(&dir.path().join("operator_norm.json")), read_csv(&dir.path().join("operator_norms.csv")))
}

#[test]
fn two_block_operators_vanish() {
    let (_, rows) = opnorm(&["--partition", "pi:2,3", "--strategy", "row", "--seed", "1", "--samples", "20"]);
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r["norm"].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn sampled_operator_norms_stay_below_mu() {
    let (doc, rows) = opnorm(&[
        "--partition",
        "pi:1,1,1,1",
        "--strategy",
        "class:B_sp m=4 seed=3",
        "--seed",
        "8",
        "--samples",
        "200",
    ]);
    assert_eq!(rows.len(), 200);
    let mu = rows[0]["mu"].parse::<f64>().unwrap();
    assert!(mu < 1.0);
    for r in &rows {
        let norm = r["norm"].parse::<f64>().unwrap();
        assert!(norm < 1.0 && norm <= mu + 1e-9, "norm {norm} vs mu {mu}");
    }
    assert_eq!(doc["bound"]["sweeps"], 1);
}

#[test]
fn shifted_strategies_sample_products_over_the_shift_window() {
    let (doc, _) = opnorm(&[
        "--partition",
        "pi:1,1,1,1",
        "--strategy",
        "class:B_sg m=4 seed=3 shifts=1",
        "--seed",
        "8",
        "--samples",
        "20",
    ]);
    assert_eq!(doc["bound"]["sweeps"], 2);
}

#[test]
fn classify_row_ordering() {
    let out = bjlab(&["classify", "row", "--blocks", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("m = 5, length 10, cyclic"), "{text}");
    assert!(text.contains("M_O:\n* 0 1 2 3\n0 * 4 5 6\n"), "{text}");
    let class_line = |name: &str| text.lines().find(|l| l.split_whitespace().next() == Some(name)).unwrap().to_string();
    assert!(class_line("B_rp").contains("yes"));
    assert!(class_line("B_r_rev").contains("yes"));
    assert!(class_line("B_c").ends_with("no"));
}

#[test]
fn classify_reversed_row_ordering_is_row_serial() {
    let out = bjlab(&["classify", "pairs:(4,5),(3,5),(3,4),(2,5),(2,4),(2,3),(1,5),(1,4),(1,3),(1,2)"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let b_r = text.lines().find(|l| l.split_whitespace().next() == Some("B_r")).unwrap();
    assert!(b_r.contains("yes"), "{text}");
}

#[test]
fn classify_displayed_ordering_matrix() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("mo.txt");
    fs::write(&path, ROW_TILDE_DISPLAY).unwrap();
    let out = bjlab(&["classify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let b_sg = text.lines().find(|l| l.split_whitespace().next() == Some("B_sg")).unwrap();
    assert!(b_sg.contains("yes") && b_sg.contains("d = 1"), "{text}");
    let b_spg = text.lines().find(|l| l.split_whitespace().next() == Some("B_spg")).unwrap();
    assert!(b_spg.ends_with("no"), "{text}");
    assert!(text.contains("s~"), "{text}");
}

#[test]
fn classify_rejects_non_covering_sequences() {
    let out = bjlab(&["classify", "pairs:(1,2),(1,3),(1,2)"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not a pivot strategy"), "{}", stderr(&out));
}

#[test]
fn classify_refuses_searches_beyond_six_blocks() {
    let out = bjlab(&["classify", "row", "--blocks", "7", "--class", "B_sg"]);
    assert_eq!(code(&out), 1);
}

fn jjacobi_summary(args: &[&str]) -> (i32, Option<Value>, String) {
    let dir = TempDir::new().unwrap();
    let mut full = vec!["jjacobi", "--out-dir", dir_arg(&dir)];
    full.extend_from_slice(args);
    let out = bjlab(&full);
    let path = dir.path().join("jjacobi_summary.json");
    (code(&out), path.exists().then(|| read_json(&path)), stderr(&out))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn jjacobi_pencil_has_nu_positive_eigenvalues() {
    let (code, summary, err) = jjacobi_summary(&[
        "--partition",
        "pi:2,2,2,2",
        "--strategy",
        "class:B_c m=4 seed=1",
        "--nu",
        "4",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0, "{err}");
    let eig = floats(&summary.unwrap()["pencil_eigenvalues"]);
    assert_eq!(eig.len(), 8);
    assert_eq!(eig.iter().filter(|&&x| x > 0.0).count(), 4);
}

#[test]
fn jjacobi_rejects_indefinite_input() {
    let dir = TempDir::new().unwrap();
    let m = write_matrix(&dir, "ind.txt", &[&[1.0, 2.0], &[2.0, 1.0]]);
    let (code, _, err) = jjacobi_summary(&["--matrix", &m, "--partition", "pi:1,1", "--strategy", "row", "--nu", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("positive definite"), "{err}");
}

#[test]
fn jjacobi_with_identity_signature_matches_the_symmetric_solver() {
    let (code, summary, err) =
        jjacobi_summary(&["--partition", "pi:2,2,2", "--strategy", "row", "--nu", "6", "--seed", "5"]);
    assert_eq!(code, 0, "{err}");
    let mut pencil = floats(&summary.unwrap()["pencil_eigenvalues"]);

    let dir = TempDir::new().unwrap();
    let out = bjlab(&[
        "run",
        "--generator",
        "spd",
        "--partition",
        "pi:2,2,2",
        "--strategy",
        "row",
        "--seed",
        "5",
        "--out-dir",
        dir_arg(&dir),
    ]);
    assert_eq!(self::code(&out), 0, "{}", stderr(&out));
    let mut eig = floats(&read_json(&dir.path().join("summary.json"))["repetitions"][0]["eigenvalues"]);

    pencil.sort_by(f64::total_cmp);
    eig.sort_by(f64::total_cmp);
    let scale = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (a, b) in pencil.iter().zip(&eig) {
        assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
    }
}

#[test]
fn bounds_report_the_element_wise_constant() {
    let out = bjlab(&["bounds", "--partition", "pi:1,1,1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("eta       = 0.75000000000000000"), "{}", stdout(&out));
}
