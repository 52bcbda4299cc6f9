use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn oneshot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneshot")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

struct Files {
    _dir: TempDir,
    uniform: String,
    joint: String,
    kernel: String,
    distortion: String,
    short: String,
}

fn files() -> Files {
    let dir = TempDir::new().unwrap();
    let s = |p: PathBuf| p.to_str().unwrap().to_owned();
    Files {
        uniform: s(write(dir.path(), "u.json", r#"{"masses":[0.25,0.25,0.25,0.25]}"#)),
        joint: s(write(dir.path(), "j.json", r#"{"masses":[[0.3,0.05,0.0],[0.05,0.3,0.05],[0.0,0.05,0.2]]}"#)),
        kernel: s(write(dir.path(), "k.json", r#"{"masses":[[0.9,0.05,0.05],[0.05,0.9,0.05],[0.05,0.05,0.9]]}"#)),
        distortion: s(write(dir.path(), "d.json", r#"{"values":[[0,1,1],[1,0,1],[1,1,0]]}"#)),
        short: s(write(dir.path(), "short.json", r#"{"masses":[0.3,0.3,0.3]}"#)),
        _dir: dir,
    }
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn uniform_h0_is_two_bits() {
    let f = files();
    let out = stdout(&oneshot(&["smooth", "--quantity", "h0", "--input", &f.uniform, "--eps", "0"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value_bits"], 2.0);
    assert_eq!(v["witness_total_mass"], 1.0);
}

#[test]
fn quantile_has_no_witness() {
    let f = files();
    let out = stdout(&oneshot(&[
        "smooth", "--quantity", "quantile", "--input", &f.joint, "--distortion", &f.distortion, "--eps", "0.1",
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["witness_total_mass"].is_null());
}

#[test]
fn same_seed_same_bytes() {
    let f = files();
    let runs: Vec<Vec<&str>> = vec![
        vec!["sw-sim", "--joint", &f.joint, "--eps", "0.2", "--trials", "20"],
        vec![
            "helper-sim", "--joint", &f.joint, "--kernel", &f.kernel, "--scheme", "A", "--epsA", "0.0025", "--epsB",
            "0.3", "--epsBbar", "0.05", "--trials", "20",
        ],
        vec![
            "helper-sim", "--joint", &f.joint, "--kernel", &f.kernel, "--scheme", "B", "--epsA", "0.05", "--epsB",
            "0.05", "--trials", "20",
        ],
        vec!["rd-sim", "--joint", &f.joint, "--distortion", &f.distortion, "--eps", "0.3", "--eps1", "0.1", "--trials", "20"],
    ];
    for args in runs {
        let mut a = args.clone();
        a.extend(["--seed", "7"]);
        let first = stdout(&oneshot(&a));
        a.extend(["--threads", "1"]);
        assert_eq!(first, stdout(&oneshot(&a)), "{args:?}");
        assert_eq!(first.lines().count(), 21);
        assert!(first.lines().nth(1).unwrap().starts_with("7,"));
    }
}

#[test]
fn csv_headers() {
    let f = files();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["sw-sim", "--joint", &f.joint, "--eps", "0.2", "--trials", "1"], "seed,ellA,ellB,exact_error,E1,E2,E3,E4"),
        (
            vec!["rd-sim", "--joint", &f.joint, "--distortion", &f.distortion, "--eps", "0.3", "--eps1", "0.1", "--trials", "1"],
            "seed,ellA,gamma,excess_prob,i_inf_eps1,avg_bound",
        ),
        (
            vec![
                "helper-sim", "--joint", &f.joint, "--kernel", &f.kernel, "--scheme", "b", "--epsA", "0.05", "--epsB",
                "0.05", "--trials", "1",
            ],
            "seed,scheme,ellA,ellB,measured_error,l1_uprime,l1_sim,rw_error_bound,budget",
        ),
        (vec!["converge", "--base", &f.joint, "--eps", "0.1", "--nmax", "3", "--quantity", "h0cond"], "n,value,reference,gap"),
    ];
    for (args, header) in cases {
        let out = stdout(&oneshot(&args));
        assert_eq!(out.lines().next().unwrap(), header);
    }
}

#[test]
fn converge_writes_one_row_per_n() {
    let f = files();
    let out = stdout(&oneshot(&["converge", "--base", &f.joint, "--eps", "0.1", "--nmax", "4", "--quantity", "dinf"]));
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (i, r) in rows.iter().enumerate() {
        assert!(r.starts_with(&format!("{},", i + 1)));
    }
}

#[test]
fn out_flag_writes_file() {
    let f = files();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("o.json");
    let o = oneshot(&["smooth", "--quantity", "h0", "--input", &f.uniform, "--eps", "0", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(path).unwrap().contains("\"value_bits\":2.0"));
}

#[test]
fn exit_codes() {
    let f = files();
    let code = |args: &[&str]| oneshot(args).status.code().unwrap();
    assert_eq!(code(&["smooth", "--quantity", "h0", "--input", &f.short, "--eps", "0.1"]), 2);
    assert_eq!(code(&["smooth", "--quantity", "h0", "--input", &f.short, "--eps", "0.1", "--renormalize"]), 0);
    assert_eq!(code(&["smooth", "--quantity", "h0", "--input", &f.uniform, "--eps", "1.5"]), 2);
    assert_eq!(code(&["smooth", "--quantity", "h0", "--input", "/nonexistent/p.json", "--eps", "0.1"]), 4);
    assert_eq!(code(&["converge", "--base", &f.joint, "--eps", "0.1", "--nmax", "40", "--quantity", "dinf"]), 3);
    assert_eq!(code(&["sw-sim", "--joint", &f.joint, "--eps", "0.2", "--trials", "0"]), 2);
}
