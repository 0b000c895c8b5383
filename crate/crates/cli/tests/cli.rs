use std::path::PathBuf;
use std::process::{Command, Output};

fn clumsy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clumsy")).args(args).env_remove("CLUMSY_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Table lines without the provenance header and notes.
fn body(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("clumsy-cli-{}-{name}", std::process::id()))
}

#[test]
fn geometric_pmf_rows() {
    let o = clumsy(&["pmf", "--m", "1", "--p", "1/2", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# clumsy ") && header.contains("mode=exact") && header.contains("seed=1"));
    assert!(header.contains("pmf --m 1 --p 1/2 --n-max 3"));
    assert_eq!(
        body(&o),
        ["n,probability,cumulative,tail_certificate", "1,1/2,1/2,1/8", "2,1/4,3/4,1/8", "3,1/8,7/8,1/8"]
    );
}

#[test]
fn decimal_p_selects_float_mode() {
    let o = clumsy(&["pmf", "--m", "1", "--p", "0.5", "--n-max", "2"]);
    assert!(stdout(&o).lines().next().unwrap().contains("mode=float"));
    assert_eq!(body(&o)[1], "1,0.5,0.5,0.25");
}

#[test]
fn moments_of_two_coupons() {
    let o = clumsy(&["moments", "--m", "2", "--p", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = body(&o);
    assert!(rows[1].starts_with("mean,8/1,"));
    assert!(rows[2].starts_with("variance,40/1,"));
}

#[test]
fn json_output_parses() {
    let o = clumsy(&["tail", "--m", "2", "--p", "0.5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["provenance"]["mode"], "float");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["exact_tail"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());
    }
}

#[test]
fn verify_oracle_passes() {
    let o = clumsy(&["verify", "--suite", "oracle", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(body(&o)[1].starts_with("oracle,true,"));
}

#[test]
fn failed_checks_exit_one() {
    let o = clumsy(&["verify", "--suite", "supercritical", "--samples", "100", "--ks-threshold", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(clumsy(&["nonsense"]).status.code(), Some(2));
    assert_eq!(clumsy(&["pmf", "--m", "2"]).status.code(), Some(2));
    assert_eq!(clumsy(&["pmf", "--m", "2", "--p", "3/2"]).status.code(), Some(2));
    assert_eq!(clumsy(&["mgf", "--m", "2", "--p", "0.1", "--t", "1"]).status.code(), Some(2));
    assert_eq!(clumsy(&["expand", "--m", "10", "--p", "0.1", "--regime", "sub", "--c", "1"]).status.code(), Some(2));
    assert_eq!(clumsy(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["simulate", "--m", "6", "--p", "0.2", "--samples", "3000", "--seed", "9"];
    let one = Command::new(env!("CARGO_BIN_EXE_clumsy")).args(args).env("CLUMSY_THREADS", "1").output().unwrap();
    let many = clumsy(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(body(&one), body(&many));
    let other_seed = clumsy(&["simulate", "--m", "6", "--p", "0.2", "--samples", "3000", "--seed", "10"]);
    assert_ne!(body(&one), body(&other_seed));
}

#[test]
fn files_are_written() {
    let out = scratch("table.csv");
    let raw = scratch("raw.csv");
    let o = clumsy(&[
        "simulate", "--m", "3", "--p", "0.1", "--samples", "50",
        "--raw", raw.to_str().unwrap(), "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let table = std::fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("# clumsy "));
    let raw_text = std::fs::read_to_string(&raw).unwrap();
    let lines: Vec<&str> = raw_text.lines().collect();
    assert_eq!(lines[0], "t_classical,t_clumsy,difference");
    assert_eq!(lines.len(), 51);
    for l in &lines[1..] {
        let v: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[1] - v[0], v[2]);
    }
    let _ = std::fs::remove_file(out);
    let _ = std::fs::remove_file(raw);
}

#[test]
fn limit_and_tau_tables() {
    let o = clumsy(&["limit", "--m", "300", "--p", "0.0000001", "--regime", "subcritical", "--samples", "500", "--points", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(body(&o).len(), 10);
    assert!(stdout(&o).contains("# ks_statistic = "));
    let o = clumsy(&["tau", "--c", "1", "--s", "1"]);
    let row = &body(&o)[1];
    let laplace: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((laplace - 0.5819767068693265).abs() < 1e-9);
}
