use std::path::Path;
use std::process::{Command, Output};

fn dydap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dydap"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn golden_replay_passes() {
    let o = dydap(&["replay-golden"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("optimal split: M {0,2}|{1,3}, M^ {0,2}|{1,3}"));
    assert!(text.contains("all values match"));
}

#[test]
fn golden_json_carries_the_same_values() {
    let o = dydap(&["replay-golden", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["reconstructed"][3], serde_json::json!([4, 7, 0, 0]));
    assert_eq!(
        v["cuts_reconstructed"],
        serde_json::json!([34.0, 23.0, 29.0])
    );
    assert_eq!(v["optimal_exact"], serde_json::json!([0, 1, 0, 1]));
    assert_eq!(v["mismatches"], serde_json::json!([]));
}

#[test]
fn corrupted_sequence_names_first_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.txt");
    let mut seq: Vec<u64> = dydap_core::golden::SEQUENCE.to_vec();
    seq[43] = 2;
    let body: String = seq.iter().map(|x| format!("{x}\n")).collect();
    std::fs::write(&path, body).unwrap();
    let o = dydap(&["replay-golden", "--sequence", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("first mismatch: M[2][1] = 5, expected 6"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(dydap(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        dydap(&["replay-golden", "--sequence", "/nonexistent/seq"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dydap(&["error-sweep", "--p", "0.5,0.5,0.5,0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dydap(&["error-sweep", "--sides", "12"]).status.code(),
        Some(2)
    );
    assert_eq!(dydap(&["partition", "--parts", "2"]).status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let top = stdout(&dydap(&["--help"]));
    for flag in ["--config", "--seed", "--out"] {
        assert!(top.contains(flag), "{flag}");
    }
    let cases: [(&str, &[&str]); 6] = [
        ("replay-golden", &["--json", "--sequence"]),
        (
            "error-sweep",
            &["--p", "--sides", "--k", "--accesses", "--t", "--seeds"],
        ),
        (
            "size-sweep",
            &["--p", "--k", "--t", "--depth", "--max-accesses"],
        ),
        ("exponent", &["--p", "--k"]),
        (
            "partition",
            &["--graph", "--parts", "--tolerance", "--exhaustive"],
        ),
        ("compare", &["--nodes"]),
    ];
    for (cmd, flags) in cases {
        let help = stdout(&dydap(&[cmd, "--help"]));
        for flag in flags {
            assert!(help.contains(flag), "{cmd} {flag}");
        }
    }
}

#[test]
fn exact_error_rows() {
    let o = dydap(&[
        "error-sweep",
        "--t",
        "0",
        "--sides",
        "1,32",
        "--accesses",
        "5000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(str::to_string).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",0")), "{rows:?}");

    let o = dydap(&["error-sweep", "--sides", "1", "--accesses", "5000"]);
    assert!(stdout(&o).lines().skip(1).all(|r| r.ends_with(",0")));
}

#[test]
fn exponent_rows() {
    let o = dydap(&["exponent", "--p", "0.25,0.25,0.25,0.25", "--k", "2"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p0,p1,p2,p3,k,s"));
    let s: f64 = lines
        .next()
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((s - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn partition_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    std::fs::write(
        &graph,
        "# vertices 4\n0 1 9\n0 2 4\n0 3 5\n1 2 10\n1 3 15\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = dydap(&[
        "partition",
        "--graph",
        graph.to_str().unwrap(),
        "--parts",
        "2",
        "--exhaustive",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "edge_cut,imbalance\n24,1\n");
    let csv = std::fs::read_to_string(out.join("partition.csv")).unwrap();
    assert_eq!(csv, "extent_id,node_id\n0,0\n1,1\n2,0\n3,1\n");
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, "scale = 11\nmean_degree = 8\nextent_size = 32\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn single_node_compare_rows_match() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let o = dydap(&["compare", "--config", &config, "--nodes", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.to_string())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], rows[2]);
    assert_eq!(rows[1], rows[3]);
}

#[test]
fn compare_writes_three_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("out");
    let o = dydap(&[
        "compare",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for name in ["trace.csv", "metrics.csv", "stddev.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}
