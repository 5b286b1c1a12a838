//! End-to-end checks of the `ellint` binary: exit codes, report formats,
//! seed expansion, and determinism across worker counts.

use std::process::{Command, Output};

use ellint_cli::report::{read_json, write_json, ConvergeRow};

fn ellint() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ellint"))
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = ellint();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning ellint failed")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_report_round_trips_and_orders_by_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(
        &[
            "verify",
            "--identity",
            "dixon-eval",
            "--seeds",
            "3,1..2",
            "--output",
            path.to_str().unwrap(),
            "--redact-timing",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let rows = read_json(&path).unwrap();
    assert_eq!(rows.len(), 3);
    let seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, vec![1, 2, 3], "list syntax expands and sorts");
    assert!(rows.iter().all(|r| r.passed && r.rel_err < 1e-8));
    assert!(rows.iter().all(|r| r.wall_ms == 0), "timing redacted");
    assert!(
        rows.iter().all(|r| !r.history.is_empty() && r.history[0].converged),
        "refinement history is carried in the report"
    );

    // Deserializing and re-serializing reproduces the file byte for byte.
    let rewritten = dir.path().join("rewritten.json");
    write_json(&rewritten, &rows).unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&rewritten).unwrap(),
        "JSON schema round-trips"
    );
}

#[test]
fn csv_report_keeps_history_as_embedded_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--seeds",
            "0..1",
            "--output",
            path.to_str().unwrap(),
            "--redact-timing",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "identity");
    assert_eq!(&headers[9], "rel_err");
    assert_eq!(&headers[12], "history");
    let mut count = 0;
    for record in rdr.records() {
        let record = record.unwrap();
        assert_eq!(&record[0], "gamma-limit");
        let rel_err: f64 = record[9].parse().unwrap();
        assert!(rel_err < 0.05);
        serde_json::from_str::<serde_json::Value>(&record[12])
            .expect("history column holds valid JSON");
        count += 1;
    }
    assert_eq!(count, 2);
}

#[test]
fn params_file_drives_a_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("point.txt");
    std::fs::write(&params, "# explicit probe point\nz = 0.5,0.2\nq = 0.2,0.05\n").unwrap();
    let path = dir.path().join("report.json");
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--params-file",
            params.to_str().unwrap(),
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let rows = read_json(&path).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].seed, 0);
    assert!(rows[0].passed);
}

#[test]
fn malformed_params_file_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("bad.txt");
    std::fs::write(&params, "z = 0.5,0.2\nq = oops\n").unwrap();
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--params-file",
            params.to_str().unwrap(),
            "--output",
            dir.path().join("r.json").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains(":2:"), "diagnostic names the line: {err}");
    assert!(err.contains("q"), "diagnostic names the field: {err}");
}

#[test]
fn missing_parameter_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("short.txt");
    std::fs::write(&params, "z = 0.5,0.2\n").unwrap();
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--params-file",
            params.to_str().unwrap(),
            "--output",
            dir.path().join("r.json").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("missing parameter"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["verify", "--identity", "no-such-identity", "--seeds", "0"],
        vec!["verify", "--identity", "main"],
        vec!["verify", "--identity", "main", "--seeds", "5..2"],
        vec!["verify", "--identity", "main", "--seeds", "0", "--tol", "0"],
        vec!["verify", "--identity", "main", "--seeds", "0", "--grid-start", "2"],
        vec!["verify", "--identity", "all", "--n", "2", "--seeds", "0"],
        vec!["verify", "--identity", "bh2", "--n", "1", "--m", "1", "--k", "1", "--seeds", "0"],
        vec!["converge", "--identity", "main", "--probe-ps", "0.5,nope"],
        vec!["converge", "--identity", "selberg-eval", "--probe-ps", "1e-2"],
    ];
    for mut args in cases {
        let joined = args.join(" ");
        args.push("--output");
        args.push(out_path.to_str().unwrap());
        let out = run(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "expected exit 2 for: {joined}");
    }
}

#[test]
fn infeasible_sampling_window_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // bh2 needs |n - m| small enough that the paired window is nonempty;
    // n=2, m=0 pushes the s-window outside the unit disc.
    let out = run(
        &[
            "verify",
            "--identity",
            "bh2",
            "--n",
            "2",
            "--m",
            "0",
            "--seeds",
            "0",
            "--output",
            dir.path().join("r.json").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("infeasible"));
}

#[test]
fn unmet_tolerance_with_converged_quadrature_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(
        &[
            "verify",
            "--identity",
            "dixon-eval",
            "--seeds",
            "0",
            "--tol",
            "1e-18",
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    let rows = read_json(&path).unwrap();
    assert_eq!(rows.len(), 1, "failing rows are still reported");
    assert!(!rows[0].passed);
    assert!(rows[0].history.iter().all(|h| h.converged));
}

#[test]
fn exhausted_refinement_ladder_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(
        &[
            "verify",
            "--identity",
            "dixon-eval",
            "--seeds",
            "0",
            "--max-level",
            "0",
            "--target-rel",
            "1e-12",
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_of(&out));
    let rows = read_json(&path).unwrap();
    assert!(rows[0].history.iter().any(|h| !h.converged));
}

#[test]
fn nonconvergence_outranks_identity_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    // Seed 0 converges but misses the absurd tolerance (code 1); seed 1 is
    // starved of levels only through the shared flags, so both jobs are
    // unconverged (code 4), and 4 wins the fold.
    let out = run(
        &[
            "verify",
            "--identity",
            "dixon-eval",
            "--seeds",
            "0..1",
            "--max-level",
            "0",
            "--target-rel",
            "1e-12",
            "--tol",
            "1e-18",
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn converge_tabulates_a_shrinking_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ladder.json");
    let out = run(
        &[
            "converge",
            "--identity",
            "selberg-eval",
            "--seed",
            "1",
            "--max-level",
            "3",
            "--output",
            path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<ConvergeRow> = serde_json::from_str(&text).unwrap();
    assert!(rows.len() >= 3);
    for pair in rows.windows(2) {
        assert_eq!(pair[1].grid, pair[0].grid * 2, "grids double");
    }
    let changes: Vec<f64> = rows.iter().filter_map(|r| r.rel_change).collect();
    assert!(changes.len() >= 2);
    for pair in changes.windows(2) {
        assert!(pair[1] < pair[0], "refinement error shrinks: {changes:?}");
    }
}

#[test]
fn probe_study_rejects_identities_without_a_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "converge",
            "--identity",
            "main",
            "--probe-ps",
            "1e-2",
            "--output",
            dir.path().join("r.json").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bh1 or gamma-limit"));
}

#[test]
fn worker_count_never_changes_report_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("w{threads}.json"));
        let out = run(
            &[
                "verify",
                "--identity",
                "lemma-sym",
                "--seeds",
                "0..4",
                "--output",
                path.to_str().unwrap(),
                "--redact-timing",
            ],
            &[("ELLINT_THREADS", threads)],
        );
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1], "reports are independent of the worker count");
}

#[test]
fn partial_report_remains_valid_when_a_late_job_fails() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("bad_point.txt");
    // Valid syntax, but |q| >= 1 is outside every convergence region.
    std::fs::write(&params, "z = 0.5,0.2\nq = 1.5,0.0\n").unwrap();
    let report = dir.path().join("r.json");
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--params-file",
            params.to_str().unwrap(),
            "--output",
            report.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    let rows = read_json(&report).unwrap();
    assert!(rows.is_empty(), "failed job contributes no row, file stays parseable");
}

#[test]
fn json_is_the_default_format_and_csv_follows_the_extension() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("out.dat");
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--seeds",
            "0",
            "--output",
            plain.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(read_json(&plain).is_ok(), "unknown extension falls back to JSON");

    let csv_path = dir.path().join("out.csv");
    let out = run(
        &[
            "verify",
            "--identity",
            "gamma-limit",
            "--seeds",
            "0",
            "--output",
            csv_path.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.starts_with("identity,"), ".csv extension selects CSV");
}
