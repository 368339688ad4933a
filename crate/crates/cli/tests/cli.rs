use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowweight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn find_all_lists_records() {
    for alg in ["tmto", "logtmto", "auto"] {
        let o = run(&[
            "find-all", "--poly", "3,1,0", "--weight", "3", "--max-degree", "7", "--algorithm", alg, "--verify",
        ]);
        assert_eq!(o.status.code(), Some(0), "{alg}: {}", stderr(&o));
        assert_eq!(stdout(&o), "0,1,3\n0,4,5\n0,2,6\n");
        assert!(stderr(&o).contains("found: 3"));
    }
}

#[test]
fn find_all_json_lines() {
    let o = run(&["find-all", "--poly", "0x13", "--weight", "3", "--max-degree", "15", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0]["exponents"], serde_json::json!([0, 1, 4]));
    assert!(lines.iter().all(|v| v["weight"] == 3));
}

#[test]
fn auto_prefers_logtmto_for_even_weight() {
    let o = run(&["find-all", "--poly", "10,3,0", "--weight", "4", "--max-degree", "60"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("algorithm: logtmto"));
}

#[test]
fn find_some_is_reproducible() {
    let args = [
        "find-some", "--poly", "0,3,10", "--weight", "4", "--max-degree", "60", "--count", "5", "--seed", "7",
        "--verify",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 5);
    for method in ["logsample", "birthday"] {
        let mut m = args.to_vec();
        m.extend(["--method", method]);
        assert_eq!(run(&m).status.code(), Some(0), "{method}");
    }
}

#[test]
fn progress_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("progress.csv");
    let o = run(&[
        "find-some", "--poly", "0,3,10", "--weight", "5", "--max-degree", "60", "--count", "1000000",
        "--max-iterations", "4096", "--progress-stride", "1024", "--progress-csv", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "iteration,found");
    assert_eq!(rows.len(), 5);
}

#[test]
fn engine_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("p22.dlog");
    let cache = cache.to_str().unwrap();
    let poly = "22,1,0";
    let o = run(&["engine-build", "--poly", poly, "--cache", cache]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let direct = run(&["log", "--poly", poly, "--element", "0x2b"]);
    let cached = run(&["log", "--poly", poly, "--element", "0x2b", "--cache", cache]);
    assert_eq!(direct.status.code(), Some(0));
    assert_eq!(stdout(&direct), stdout(&cached));

    let mut bytes = std::fs::read(cache).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    std::fs::write(cache, bytes).unwrap();
    let bad = run(&["log", "--poly", poly, "--element", "0x2b", "--cache", cache]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn log_and_zech_values() {
    let o = run(&["log", "--poly", "3,1,0", "--element", "0x3"]);
    assert_eq!(stdout(&o).trim(), "3");
    let o = run(&["zech", "--poly", "3,1,0", "--exponent", "1"]);
    assert_eq!(stdout(&o).trim(), "3");
    assert_eq!(run(&["zech", "--poly", "3,1,0", "--exponent", "7"]).status.code(), Some(6));
    assert_eq!(run(&["log", "--poly", "3,1,0", "--element", "0x0"]).status.code(), Some(6));
}

#[test]
fn estimate_prints_count() {
    let o = run(&["estimate", "--n", "10", "--weight", "3", "--max-degree", "200"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with('≈'));
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["find-all", "--poly", "2,0", "--weight", "3", "--max-degree", "7"]).status.code(),
        Some(3)
    );
    assert_eq!(
        run(&[
            "find-all", "--poly", "10,3,0", "--weight", "6", "--max-degree", "1000", "--algorithm", "tmto",
            "--budget-bytes", "1000",
        ])
        .status
        .code(),
        Some(4)
    );
    assert_eq!(run(&["find-all", "--poly", "3,1,0"]).status.code(), Some(2));
    assert_eq!(run(&["find-all", "--poly", "3,x,0", "--weight", "3", "--max-degree", "7"]).status.code(), Some(2));
}

#[test]
fn find_some_smallest_field() {
    for method in ["birthday-log", "logsample", "birthday"] {
        let o = run(&[
            "find-some", "--poly", "3,1,0", "--weight", "3", "--max-degree", "7", "--count", "1", "--seed", "1",
            "--method", method, "--verify",
        ]);
        assert_eq!(o.status.code(), Some(0), "{method}");
        assert_eq!(stdout(&o).lines().count(), 1);
    }
    let o = run(&[
        "find-some", "--poly", "3,1,0", "--weight", "3", "--max-degree", "7", "--count", "1", "--max-iterations", "0",
    ]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).is_empty());
}
