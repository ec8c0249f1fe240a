// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bandslice"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn diag_mtx(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    s += &format!("{0} {0} {0}\n", diag.len());
    for (i, d) in diag.iter().enumerate() {
        s += &format!("{} {} {d}\n", i + 1, i + 1);
    }
    let p = dir.join(name);
    fs::write(&p, s).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_diagonal_lists_smallest() {
    let dir = TempDir::new().unwrap();
    let diag: Vec<f64> = (1..=100).rev().map(f64::from).collect();
    let m = diag_mtx(dir.path(), "d.mtx", &diag);
    let vecs = dir.path().join("x.bin");
    let o = run(&[
        "solve",
        s(&m),
        "--nev",
        "10",
        "-k",
        "3",
        "--vectors",
        s(&vecs),
        "-q",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let vals: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(vals.len(), 10);
    for (i, v) in vals.iter().enumerate() {
        assert!((v - (i + 1) as f64).abs() < 1e-10, "{v}");
    }
    // the eigenvector of value j is a signed unit vector at row 100 - j
    let x = bandslice::linalg::io::read_raw(&vecs).unwrap();
    assert_eq!((x.nrows(), x.ncols()), (100, 10));
    for j in 0..10 {
        assert!((x[(99 - j, j)].norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn inertia_counts_below_shift() {
    let dir = TempDir::new().unwrap();
    let m = diag_mtx(dir.path(), "d3.mtx", &[1.0, 2.0, 3.0]);
    let o = run(&["inertia", s(&m), "--shift", "2.5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2 below");
    let o = run(&["inertia", s(&m), "--shift", "-1"]);
    assert_eq!(stdout(&o).trim(), "0 below");
}

#[test]
fn synthesized_sequence_warm_steps_need_no_more_iterations() {
    let o = run(&[
        "scf",
        "--synthesize",
        "5",
        "1e-4",
        "42",
        "--n",
        "60",
        "--nev",
        "15",
        "--csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let max_iter: Vec<usize> = rows
        .records()
        .map(|r| r.unwrap()[3].parse().unwrap())
        .collect();
    assert_eq!(max_iter.len(), 5);
    assert!(
        max_iter[1..].iter().all(|&m| m <= max_iter[0]),
        "{max_iter:?}"
    );
}

#[test]
fn config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let diag: Vec<f64> = (1..=30).map(f64::from).collect();
    let m = diag_mtx(dir.path(), "d.mtx", &diag);
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# test run\nnev = 4\nk = 2\nuse_grid = false\n").unwrap();
    let o = run(&["solve", s(&m), "--config", s(&conf), "-q"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = run(&["solve", s(&m), "--config", s(&conf), "--nev", "6", "-q"]);
    assert_eq!(stdout(&o).lines().count(), 6);

    fs::write(&conf, "nev = 4\nshape = round\n").unwrap();
    let o = run(&["solve", s(&m), "--config", s(&conf)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let m = diag_mtx(dir.path(), "d.mtx", &[1.0, 2.0, 3.0, 4.0]);
    // usage: missing nev, nev too large, unknown subcommand
    assert_eq!(run(&["solve", s(&m)]).status.code(), Some(2));
    assert_eq!(run(&["solve", s(&m), "--nev", "9"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // runtime: missing file
    let o = run(&["solve", "/nonexistent/a.mtx", "--nev", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_names_stage_and_slice() {
    let o = run(&[
        "scf",
        "--synthesize",
        "1",
        "0",
        "3",
        "--n",
        "60",
        "--nev",
        "12",
        "--max-iter",
        "1",
        "--max-recovery-rounds",
        "0",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("slice validation") && err.contains("slice 0"),
        "{err}"
    );
}

#[test]
fn partition_from_value_file() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("v.txt");
    fs::write(&p, "1 1.01 1.02\n5 5.1 # two groups so far\n9 9.05\n").unwrap();
    let o = run(&["partition", s(&p), "-k", "3"]);
    assert!(o.status.success());
    let counts: Vec<usize> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("slice"))
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, vec![3, 2, 2]);
}

#[test]
fn redistribute_bench_csv() {
    let o = run(&[
        "redistribute-bench",
        "--rows",
        "40",
        "-p",
        "2",
        "-q",
        "3",
        "--nb",
        "4",
        "--counts",
        "3,0,7,1,0,9",
        "--bandwidth",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["operation", "phase", "messages", "bytes", "max_rank_bytes"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    let bytes = |op: &str| -> usize {
        rows.iter()
            .filter(|r| &r[0] == op)
            .map(|r| r[3].parse::<usize>().unwrap())
            .sum()
    };
    // the reverse transform moves the same data back
    assert_eq!(bytes("1d-to-2d"), bytes("2d-to-1d"));
    assert!(bytes("band-gather") > 0);
    assert_eq!(
        run(&[
            "redistribute-bench",
            "-p",
            "2",
            "-q",
            "2",
            "--counts",
            "1,2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn report_matches_solve() {
    let dir = TempDir::new().unwrap();
    let diag: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin() * 10.0).collect();
    let m = diag_mtx(dir.path(), "d.mtx", &diag);
    let vals = dir.path().join("vals.txt");
    let vecs = dir.path().join("x.bin");
    let o = run(&[
        "solve",
        s(&m),
        "--nev",
        "8",
        "--values",
        s(&vals),
        "--vectors",
        s(&vecs),
        "-q",
    ]);
    assert!(o.status.success());
    let o = run(&[
        "report",
        s(&m),
        "--values",
        s(&vals),
        "--vectors",
        s(&vecs),
        "--csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let res: Vec<f64> = rd
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(res.len(), 8);
    assert!(res.iter().all(|&r| r < 1e-11));
}
