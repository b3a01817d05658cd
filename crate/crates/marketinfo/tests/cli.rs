//! End-to-end checks of the command-line surface: subcommands, CSV
//! schemas, and exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_marketinfo"))
}

fn price_csv() -> String {
    let mut csv = String::from("date,price\n");
    let start = chrono::NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
    for i in 0..150u64 {
        let date = start + chrono::Days::new(i);
        let price = if i % 2 == 0 { 100.0 } else { 101.0 };
        csv.push_str(&format!("{date},{price}\n"));
    }
    csv
}

#[test]
fn encode_emits_date_bit_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, "date,price\n2021-01-04,100\n2021-01-05,101\n2021-01-06,100\n").unwrap();
    let out = bin().args(["encode", "--csv", path.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "date,bit\n2021-01-05,1\n2021-01-06,0\n");
}

#[test]
fn test_subcommand_machine_row() {
    let bits = "01".repeat(50);
    let out = bin()
        .args(["test", "--bits", &bits, "--machine"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "l,n,info,p_value,crit95,crit99,crit999,reject95,reject99,reject999,small_sample"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "1");
    assert_eq!(fields[1], "99");
    assert_eq!(fields[2], "1.000000000e0");
    assert_eq!(&fields[7..11], ["1", "1", "1", "1"]);
}

#[test]
fn roll_row_count_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, price_csv()).unwrap();
    let out = bin()
        .args(["roll", "--csv", path.to_str().unwrap(), "--window", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "date,info,p_value,crit95,crit99,crit999,reject95,reject99,reject999"
    );
    // 150 prices -> 149 returns -> 50 windows of 100 returns
    assert_eq!(lines.len() - 1, 50);
}

#[test]
fn simulate_csv_and_reruns_identical() {
    let args = ["simulate", "--n", "60", "--trials", "50", "--seed", "3"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("trial,info,p_value\n"));
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn simulate_requires_seed() {
    let out = bin().args(["simulate", "--n", "60"]).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(2)); // clap usage error
}

#[test]
fn calibrate_emits_grid_rows() {
    let out = bin()
        .args(["calibrate", "--grid", "30,60", "--trials", "100", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,ks_stat,ks_pvalue");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("30,"));
    assert!(lines[2].starts_with("60,"));
}

#[test]
fn figures_critical_closed_form_column() {
    let out = bin().args(["figures", "--which", "critical"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] != "1" {
            continue;
        }
        let n: f64 = fields[1].parse().unwrap();
        let crit95: f64 = fields[2].parse().unwrap();
        let expected = 20f64.ln() / (std::f64::consts::LN_2 * n);
        assert!((crit95 - expected).abs() < 1e-6, "n={n}");
    }
}

#[test]
fn figures_bound_ordered_columns() {
    let out = bin().args(["figures", "--which", "bound"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for line in text.lines().skip(1) {
        let vals: Vec<f64> = line.split(',').skip(1).map(|f| f.parse().unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]), "q ordering broken: {line}");
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(&vals) {
                assert!(b < a, "columns not decreasing in n");
            }
        }
        prev = Some(vals);
    }
}

#[test]
fn exact_budget_exit_code() {
    let out = bin()
        .args(["exact", "--counts", "10000,10000"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn data_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "date,price\n2021-01-04,oops\n").unwrap();
    let out = bin().args(["test", "--csv", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("row 2"), "stderr: {err}");
}

#[test]
fn unobserved_prefix_exit_code() {
    let out = bin().args(["test", "--bits", "1111111"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let out = bin()
        .args([
            "simulate", "--n", "60", "--trials", "20", "--seed", "3", "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("trial,info,p_value\n"));
}
