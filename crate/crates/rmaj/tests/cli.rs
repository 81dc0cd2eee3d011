//! End-to-end tests of the `rmaj` binary: file formats, exit codes, and the
//! shape of its stdout.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rmaj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmaj"))
        .args(args)
        .output()
        .expect("spawn rmaj")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_lines(path: &Path, values: &[u64]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

#[test]
fn build_query_verify_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.txt");
    let index = dir.path().join("a.rmaj");
    // 1 is a 1/2-majority of [1,5] (3 of 5), nothing is in [2,4]
    write_lines(&input, &[1, 2, 1, 3, 1, 2, 2, 2]);

    let out = rmaj(&[
        "build",
        "--input",
        input.to_str().unwrap(),
        "--tau",
        "1/2",
        "--output",
        index.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["n"], 8);
    assert!(report["space"]["total_bits"].as_u64().unwrap() > 0);

    let idx = index.to_str().unwrap();
    let out = rmaj(&["query", "--index", idx, "--range", "1:5", "--mode", "positions"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1");

    let out = rmaj(&["query", "--index", idx, "--range", "2:4", "--mode", "decision"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "no");

    let out = rmaj(&["query", "--index", idx, "--range", "5:8", "--mode", "count"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1"); // 2 appears 3 times in [5,8]

    let out = rmaj(&[
        "verify",
        "--input",
        input.to_str().unwrap(),
        "--tau",
        "1/3",
        "--queries",
        "200",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("PASS"));
}

#[test]
fn binary_array_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("a.bin");
    let index = dir.path().join("a.rmaj");
    let a: Vec<u64> = (0..300).map(|i| i % 7 + 1).collect();
    rmaj::cli::write_array(&bin, &a).unwrap();
    assert_eq!(rmaj::cli::read_array(&bin).unwrap(), a);

    let out = rmaj(&[
        "build",
        "--input",
        bin.to_str().unwrap(),
        "--tau",
        "1/8",
        "--output",
        index.to_str().unwrap(),
        "--backend",
        "percandidate",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = rmaj(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--range",
        "1:300",
        "--mode",
        "count",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "7");
}

#[test]
fn malformed_text_array_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.txt");
    fs::write(&input, "1\nnot-a-number\n3\n").unwrap();
    let out = rmaj(&[
        "build",
        "--input",
        input.to_str().unwrap(),
        "--tau",
        "1/2",
        "--output",
        dir.path().join("x.rmaj").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.txt");
    let index = dir.path().join("a.rmaj");
    write_lines(&input, &[1, 2, 3, 4]);
    let out = rmaj(&[
        "build",
        "--input",
        input.to_str().unwrap(),
        "--tau",
        "1/2",
        "--output",
        index.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // range outside the array
    let out = rmaj(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--range",
        "2:9",
        "--mode",
        "count",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // inverted and malformed ranges, bad threshold, unknown flag
    for args in [
        vec!["query", "--index", index.to_str().unwrap(), "--range", "5:2"],
        vec!["query", "--index", index.to_str().unwrap(), "--range", "abc"],
        vec![
            "build",
            "--input",
            input.to_str().unwrap(),
            "--tau",
            "3/2",
            "--output",
            index.to_str().unwrap(),
        ],
        vec!["build", "--no-such-flag"],
    ] {
        let out = rmaj(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }

    // --help is not an error
    let out = rmaj(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("build"));
}

#[test]
fn corrupted_index_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.txt");
    let index = dir.path().join("a.rmaj");
    write_lines(&input, &[5, 5, 5, 1, 2, 3, 5, 5]);
    let out = rmaj(&[
        "build",
        "--input",
        input.to_str().unwrap(),
        "--tau",
        "1/2",
        "--output",
        index.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let mut bytes = fs::read(&index).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xFF;
    bytes[0] ^= 0x01; // also break the magic
    fs::write(&index, &bytes).unwrap();

    let out = rmaj(&[
        "query",
        "--index",
        index.to_str().unwrap(),
        "--range",
        "1:4",
        "--mode",
        "count",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());
}

#[test]
fn bench_writes_parseable_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bench.json");
    let out = rmaj(&[
        "bench",
        "--n",
        "512",
        "--sigma",
        "16",
        "--dist",
        "zipf",
        "--tau-grid",
        "1/4,1/16",
        "--queries",
        "50",
        "--seed",
        "3",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let series = doc.as_array().unwrap();
    assert_eq!(series.len(), 2);
    for rep in series {
        assert_eq!(rep["n"], 512);
        assert!(rep["space"]["bits_per_element"].as_f64().unwrap() > 0.0);
        assert!(rep["latency_ns_p50"].as_u64().is_some());
    }
}

#[test]
fn adversary_modes_pass_and_dump_arrays() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("bad.bin");
    let out = rmaj(&[
        "adversary",
        "--mode",
        "lowerbound",
        "--k",
        "3",
        "--m",
        "5",
        "--seed",
        "11",
        "--dump",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("PASS"), "{}", stdout(&out));
    // the dumped array is the instance the run was driven by: k^2 k' + m k
    let a = rmaj::cli::read_array(&dump).unwrap();
    assert_eq!(a.len() as u64, 9 * 8 + 5 * 3);

    let out = rmaj(&[
        "adversary",
        "--mode",
        "setintersect",
        "--n",
        "6",
        "--x",
        "4",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("PASS"), "{}", stdout(&out));
}
