//! End-to-end tests of the `lgg` binary: exit codes, report and file
//! formats, determinism, and the documented behavior of each command.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn lgg(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lgg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    (code, String::from_utf8(out.stdout).expect("utf8 stdout"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn parse_report(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout.trim()).expect("stdout is a JSON object")
}

#[test]
fn graph_identical_rows_writes_triangle() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.csv", "1.0,2.0\n1.0,2.0\n1.0,2.0\n");
    let (code, out) = lgg(
        dir.path(),
        &["graph", "--features", "f.csv", "--k", "1", "--out", "e.csv"],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let report = parse_report(&out);
    assert_eq!(report["command"], "graph");
    assert_eq!(report["metrics"]["edges"], serde_json::json!(3.0));
    let edges = fs::read_to_string(dir.path().join("e.csv")).unwrap();
    assert_eq!(edges, "0,1,1.0\n0,2,1.0\n1,2,1.0\n");
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "f.csv",
        "0.9,0.1\n0.2,0.8\n0.5,0.5\n0.3,0.9\n0.8,0.3\n",
    );
    let args = [
        "graph",
        "--features",
        "f.csv",
        "--k",
        "2",
        "--similarity",
        "rbf",
        "--alpha",
        "1.5",
        "--out",
        "e.csv",
    ];
    let (c1, out1) = lgg(dir.path(), &args);
    let file1 = fs::read(dir.path().join("e.csv")).unwrap();
    let (c2, out2) = lgg(dir.path(), &args);
    let file2 = fs::read(dir.path().join("e.csv")).unwrap();
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(out1, out2);
    assert_eq!(file1, file2);

    let bench_args = ["bench-fewlabel", "--seed", "9", "--trials", "3"];
    let (_, b1) = lgg(dir.path(), &bench_args);
    let (_, b2) = lgg(dir.path(), &bench_args);
    assert_eq!(b1, b2);
}

#[test]
fn corrupt_inputs_exit_2_and_name_the_offset() {
    let dir = TempDir::new().unwrap();
    // Wrong magic: parses as CSV and fails at byte 0.
    let bad = dir.path().join("bad.bin");
    fs::write(&bad, b"LGGX\x01\x02\x03").unwrap();
    let (code, out) = lgg(
        dir.path(),
        &["graph", "--features", "bad.bin", "--k", "1", "--out", "e.csv"],
    );
    assert_eq!(code, 2, "stdout: {out}");
    let err = parse_report(&out);
    assert_eq!(err["kind"], "input-error");
    assert!(err["offset"].is_u64());

    // Right magic, truncated payload: offset of the payload start.
    let trunc = dir.path().join("trunc.lgg");
    let mut bytes = b"LGG1".to_vec();
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&[0u8; 16]);
    fs::write(&trunc, bytes).unwrap();
    let (code, out) = lgg(
        dir.path(),
        &["graph", "--features", "trunc.lgg", "--k", "1", "--out", "e.csv"],
    );
    assert_eq!(code, 2);
    let err = parse_report(&out);
    assert_eq!(err["offset"], serde_json::json!(12));
}

#[test]
fn parameter_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "f.csv", "1.0\n2.0\n");
    // k >= n
    let (code, out) = lgg(
        dir.path(),
        &["graph", "--features", "f.csv", "--k", "2", "--out", "e.csv"],
    );
    assert_eq!(code, 3, "stdout: {out}");
    assert_eq!(parse_report(&out)["kind"], "parameter-error");

    // rbf without alpha
    let (code, _) = lgg(
        dir.path(),
        &[
            "graph",
            "--features",
            "f.csv",
            "--k",
            "1",
            "--similarity",
            "rbf",
            "--out",
            "e.csv",
        ],
    );
    assert_eq!(code, 3);

    // Unknown flag is a usage error.
    let (code, _) = lgg(dir.path(), &["graph", "--nonsense"]);
    assert_eq!(code, 3);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = TempDir::new().unwrap();
    let (code, out) = lgg(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("graph"));
    let (code, _) = lgg(dir.path(), &["--version"]);
    assert_eq!(code, 0);
}

#[test]
fn smoothness_reports_metadata_and_warnings() {
    let dir = TempDir::new().unwrap();
    // Two tight clusters, labels matching the clusters: zero smoothness.
    write(
        dir.path(),
        "f.csv",
        "1.0,0.0\n1.0,0.01\n0.0,1.0\n0.01,1.0\n",
    );
    write(dir.path(), "y.csv", "0\n0\n1\n1\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "smoothness",
            "--features",
            "f.csv",
            "--labels",
            "y.csv",
            "--k",
            "1",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let report = parse_report(&out);
    assert_eq!(report["metrics"]["normalized"], serde_json::json!(0.0));
    assert_eq!(report["metrics"]["num_classes"], serde_json::json!(2.0));
    assert_eq!(report["metrics"]["samples_per_class"], serde_json::json!(2.0));
    assert_eq!(report["parameters"]["similarity"], "cosine");
    assert_eq!(report["warnings"], serde_json::json!([]));

    // Unbalanced classes flag the documented warning.
    write(dir.path(), "y2.csv", "0\n0\n0\n1\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "smoothness",
            "--features",
            "f.csv",
            "--labels",
            "y2.csv",
            "--k",
            "1",
        ],
    );
    assert_eq!(code, 0);
    let report = parse_report(&out);
    assert!(report["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w == "unbalanced-classes"));
}

#[test]
fn filter_accepts_edge_lists_and_reports_smoothness_drop() {
    let dir = TempDir::new().unwrap();
    // Path graph over 6 vertices, alternating signal.
    write(
        dir.path(),
        "g.csv",
        "0,1,1.0\n1,2,1.0\n2,3,1.0\n3,4,1.0\n4,5,1.0\n",
    );
    write(dir.path(), "s.csv", "1.0\n-1.0\n1.0\n-1.0\n1.0\n-1.0\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "filter",
            "--signal",
            "s.csv",
            "--graph",
            "g.csv",
            "--filter",
            "simoncelli",
            "--tau",
            "0.3",
            "--out",
            "filtered.lgg",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let report = parse_report(&out);
    let before = report["metrics"]["smoothness_before"].as_f64().unwrap();
    let after = report["metrics"]["smoothness_after"].as_f64().unwrap();
    assert!(after < before);
    assert!(dir.path().join("filtered.lgg").exists());

    // The diffusion filter with m = 0 must be the identity.
    let (code, out) = lgg(
        dir.path(),
        &[
            "filter",
            "--signal",
            "s.csv",
            "--graph",
            "g.csv",
            "--filter",
            "diffusion",
            "--a",
            "0.4",
            "--m",
            "0",
            "--out",
            "same.lgg",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let report = parse_report(&out);
    assert_eq!(
        report["metrics"]["smoothness_before"],
        report["metrics"]["smoothness_after"]
    );
}

#[test]
fn denoise_writes_bit_exact_features_when_m_zero_and_pseudo_csv() {
    let dir = TempDir::new().unwrap();
    let features = "0.9,0.0\n0.8,0.1\n0.85,0.02\n0.0,1.0\n0.1,0.9\n0.05,0.95\n";
    write(dir.path(), "f.csv", features);
    write(dir.path(), "p.csv", "0,0\n3,1\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "denoise",
            "--features",
            "f.csv",
            "--labels",
            "p.csv",
            "--k",
            "2",
            "--alpha",
            "0.5",
            "--m",
            "0",
            "--propagate",
            "--propagate-alpha",
            "0.5",
            "--out",
            "d.lgg",
            "--pseudo-out",
            "pl.csv",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");

    // m = 0 leaves the features untouched; the container is bit-exact.
    let back = lgg_cli::io::read_matrix(&dir.path().join("d.lgg")).unwrap();
    let original = lgg_cli::io::read_matrix(&dir.path().join("f.csv")).unwrap();
    assert_eq!(back.dim(), original.dim());
    for (a, b) in back.iter().zip(original.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    // Pseudo-label rows cover every sample as index,class,omega.
    let pseudo = fs::read_to_string(dir.path().join("pl.csv")).unwrap();
    let lines: Vec<&str> = pseudo.lines().collect();
    assert_eq!(lines.len(), 6);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[0], i.to_string());
        let class: usize = fields[1].parse().unwrap();
        assert!(class < 2);
        let omega: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&omega));
    }
    // The two clusters take their seed's label.
    let classes: Vec<&str> = lines
        .iter()
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(classes, vec!["0", "0", "0", "1", "1", "1"]);
}

#[test]
fn losses_subcommands_match_library_values() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "t.csv", "1.0,0.0\n0.0,1.0\n1.0,1.0\n");
    write(dir.path(), "y.csv", "0\n1\n0\n");

    // Identical teacher and student layers: zero distillation loss.
    let (code, out) = lgg(
        dir.path(),
        &[
            "losses", "gkd", "--teacher", "t.csv", "--student", "t.csv",
            "--lambda-kd", "0.5", "--task-loss", "2.0",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let report = parse_report(&out);
    assert_eq!(report["metrics"]["kd_loss"], serde_json::json!(0.0));
    assert_eq!(report["metrics"]["combined_loss"], serde_json::json!(2.0));

    // Affinity with full off-diagonal support: zero loss.
    write(dir.path(), "pairs.csv", "0,1\n0,2\n1,0\n1,2\n2,0\n2,1\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "losses", "affinity", "--features", "t.csv", "--pairs", "pairs.csv",
        ],
    );
    assert_eq!(code, 0);
    let report = parse_report(&out);
    assert!(report["metrics"]["loss"].as_f64().unwrap().abs() <= 1e-10);

    // Identical layer graphs: zero regularizer.
    write(dir.path(), "g.csv", "0,1,0.5\n1,2,0.25\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "losses", "reg-gap", "--graphs", "g.csv", "--graphs", "g.csv",
            "--labels", "y.csv",
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(
        parse_report(&out)["metrics"]["regularizer"],
        serde_json::json!(0.0)
    );

    // Smoothness loss on a 2-point batch equals 2 exp(-alpha t).
    write(dir.path(), "two.csv", "0.0\n2.0\n");
    write(dir.path(), "two_y.csv", "0\n1\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "losses",
            "smoothness-loss",
            "--outputs",
            "two.csv",
            "--labels",
            "two_y.csv",
            "--alpha",
            "1.0",
            "--k",
            "1",
        ],
    );
    assert_eq!(code, 0);
    let loss = parse_report(&out)["metrics"]["loss"].as_f64().unwrap();
    assert!((loss - 2.0 * (-2.0f64).exp()).abs() <= 1e-12);

    // Peer pass with k = 1 copies the nearest peer pixel.
    write(dir.path(), "map.csv", "1.0,0.0\n");
    write(dir.path(), "peer.csv", "0.9,0.1\n0.0,1.0\n");
    write(dir.path(), "attn.csv", "0.0\n0.0\n0.0\n0.0\n0.0\n");
    let (code, out) = lgg(
        dir.path(),
        &[
            "losses", "peer", "--input", "map.csv", "--peers", "peer.csv",
            "--attention", "attn.csv", "--k", "1", "--out", "peer_out.lgg",
        ],
    );
    assert_eq!(code, 0, "stdout: {out}");
    let result = lgg_cli::io::read_matrix(&dir.path().join("peer_out.lgg")).unwrap();
    assert_eq!(result[[0, 0]], 0.9);
    assert_eq!(result[[0, 1]], 0.1);
}
