use std::path::Path;
use std::process::{Command, Output};

use mgc_core::cli::csvio::{parse_map_csv, parse_table};

fn mgc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Header and rows of a CSV output, comment lines skipped.
fn records(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let split = |l: &str| l.split(',').map(str::to_string).collect::<Vec<_>>();
    let header = split(lines.next().unwrap());
    (header, lines.map(split).collect())
}

fn linear_csv(n: usize) -> String {
    let mut text = String::from("x,y\n");
    for i in 0..n {
        let x = (i as f64 * 0.37).sin() + i as f64 * 0.01;
        text.push_str(&format!("{x},{}\n", 2.0 * x + 1.0));
    }
    text
}

#[test]
fn exact_linear_dependence() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lin.csv", &linear_csv(30));
    let out = stdout(&mgc(&["test", "--input", &input, "--permutations", "199", "--seed", "7"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((doc["statistic"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(doc["p_value"].as_f64().unwrap(), 1.0 / 200.0);
    assert_eq!(doc["r"], 199);
    assert_eq!(doc["seed"], 7);
    assert_eq!((doc["n"].as_u64(), doc["p"].as_u64(), doc["q"].as_u64()), (Some(30), Some(1), Some(1)));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "lin.csv", &linear_csv(20));
    let args = ["test", "--input", &input, "--method", "dcorr", "--permutations", "99", "--seed", "3", "--jitter", "0.5"];
    assert_eq!(mgc(&args).stdout, mgc(&args).stdout);
}

#[test]
fn two_files_and_column_selection() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.csv", "1,0\n2,1\n4,0\n7,1\n11,0\n");
    let y = write(dir.path(), "y.csv", "a\n3\n1\n4\n1\n5\n");
    let out = stdout(&mgc(&["test", "--input", &x, &y, "--permutations", "20", "--method", "mantel"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!((doc["p"].as_u64(), doc["q"].as_u64()), (Some(2), Some(1)));

    let both = write(dir.path(), "both.csv", "u,v,w\n1,2,3\n2,1,5\n3,7,1\n4,4,4\n");
    let out = stdout(&mgc(&["test", "--input", &both, "--x-cols", "w,u", "--y-cols", "1", "--permutations", "10", "--format", "csv"]));
    let (header, rows) = records(&out);
    let p = header.iter().position(|h| h == "p").unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][p], "2");
}

#[test]
fn input_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let wide = write(dir.path(), "wide.csv", "1,2,3,4\n2,3,1,5\n3,1,2,2\n4,5,5,1\n5,4,4,3\n");
    let out = mgc(&["test", "--input", &wide, "--method", "pearson"]);
    assert_eq!(out.status.code(), Some(4));

    assert_eq!(mgc(&["simulate", "--sim", "wiggle", "--n", "5"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.csv", "1,2\nnan,3\n");
    assert_eq!(mgc(&["test", "--input", &bad]).status.code(), Some(2));
    let missing = dir.path().join("none.csv").display().to_string();
    assert_eq!(mgc(&["test", "--input", &missing]).status.code(), Some(2));

    let x = write(dir.path(), "x.csv", "1\n2\n3\n4\n");
    let y = write(dir.path(), "y.csv", "1\n2\n3\n");
    assert_eq!(mgc(&["test", "--input", &x, &y]).status.code(), Some(3));
}

#[test]
fn map_grid_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "three.csv", "0,0\n1,2\n3,1\n");
    let path = dir.path().join("map.csv");
    stdout(&mgc(&["map", "--input", &input, "--output", &path.display().to_string()]));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# mgc "));
    let grid = parse_map_csv(&text).unwrap();
    assert_eq!(grid.n(), 3);
    for l in 0..3 {
        assert_eq!(grid.get(0, l), 0.0);
    }
}

#[test]
fn simulate_writes_observations() {
    let out = stdout(&mgc(&["simulate", "--sim", "linear", "--n", "10", "--p", "3", "--kappa", "0", "--seed", "1"]));
    let table = parse_table(&out, "sim").unwrap();
    assert_eq!(table.header.unwrap(), ["x1", "x2", "x3", "y1"]);
    assert_eq!(table.rows.len(), 10);
    for row in &table.rows {
        let y = mgc_core::simgen::weighted_sum(&row[..3]);
        assert!((row[3] - y).abs() < 1e-12, "{row:?}");
    }
    let again = stdout(&mgc(&["simulate", "--sim", "1", "--n", "10", "--p", "3", "--kappa", "0", "--seed", "1"]));
    assert_eq!(records(&out), records(&again));
}

#[test]
fn power_and_bench_tables() {
    let out = stdout(&mgc(&["power", "--sim", "quadratic", "--method", "mgc,dcorr", "--n", "10", "--replicates", "100", "--seed", "4"]));
    let (header, rows) = records(&out);
    assert_eq!(rows.len(), 2);
    let power = header.iter().position(|h| h == "power").unwrap();
    for row in rows {
        let value: f64 = row[power].parse().unwrap();
        assert!((0.0..=1.0).contains(&value));
    }

    let out = stdout(&mgc(&["bench", "--n", "30,60", "--runs", "2", "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = doc["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["seconds"].as_f64().unwrap() > 0.0));
}
