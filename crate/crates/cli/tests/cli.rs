use std::path::Path;
use std::process::{Command, Output};

use digiq_cli::config::VectorSource;
use digiq_cli::{parse_config, run, Report, SCHEMA_VERSION};

fn digiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_digiq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report_of(out: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn without_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn decompose_laplacian_lists_three_parts() {
    let out = digiq(&["decompose", "--family", "laplacian1d:dim=4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    assert_eq!(r.result["parts"], 3);
    assert_eq!(r.result["exact_reconstruction"], true);
    assert_eq!(r.derived["parts_bound"].inputs["d"], 3);
}

#[test]
fn identity_solve_takes_one_iteration() {
    let out = digiq(&["solve", "--family", "identity:dim=8", "--epsilon", "1e-6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report_of(&out);
    assert_eq!(r.result["iterations"], 1);
    assert_eq!(r.histories["residual"].len(), 1);
    assert!(r.contract.satisfied);
}

#[test]
fn repeated_runs_are_identical_apart_from_wall_time() {
    let args = [
        "solve",
        "--family",
        "random:dim=16,sparsity=3",
        "--seed",
        "11",
        "--vector",
        "random",
        "--max-iterations",
        "200000",
    ];
    let a = digiq(&args);
    let b = digiq(&args);
    assert_eq!(a.status.code(), b.status.code());
    let (a, b) = (String::from_utf8(a.stdout).unwrap(), String::from_utf8(b.stdout).unwrap());
    assert!(a.contains("wall_time_seconds"));
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["inverse-exp", "--family", "diagonal:values=0.5;1", "--epsilon", "1e-3"];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_digiq"))
            .args(args)
            .env("DIGIQ_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        without_wall_time(&String::from_utf8(out.stdout).unwrap())
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn history_csv_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let out = digiq(&[
        "solve",
        "--family",
        "laplacian1d:dim=4",
        "--history-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,residual"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), r.histories["residual"].len());
    let last: f64 = rows.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(last, *r.histories["residual"].last().unwrap());
}

#[test]
fn every_report_carries_the_schema_version() {
    for args in [
        &["decompose", "--family", "laplacian1d:dim=4"][..],
        &["expm", "--family", "laplacian1d:dim=4", "--t", "0.5"],
        &["measure", "--observable", "ZZ"],
        &["thermal", "--family", "tfi:sites=2,coupling=1,field=1", "--beta", "1", "--observable", "ZZ"],
    ] {
        let out = digiq(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION, "{args:?}");
    }
}

#[test]
fn report_round_trips_exactly() {
    let mut cfg = parse_config(
        r#"
        command = "expm"
        t = 1.7
        [operator]
        family = "transverse_field_ising"
        sites = 3
        coupling = 1.0
        field = 0.3
        [vector]
        source = "random"
        "#,
    )
    .unwrap();
    cfg.seed = 5;
    let out = run(&cfg).unwrap();
    let text = out.report.to_json();
    let back = Report::from_json(&text).unwrap();
    assert_eq!(back, out.report);
    assert_eq!(back.to_json(), text);
}

#[test]
fn exit_codes_separate_usage_from_numeric_failure() {
    let usage = digiq(&["solve", "--family", "nonsense:dim=3"]);
    assert_eq!(usage.status.code(), Some(1));
    let missing = digiq(&["expm", "--family", "identity:dim=2"]);
    assert_eq!(missing.status.code(), Some(1));
    let no_operator = digiq(&["solve"]);
    assert_eq!(no_operator.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let numeric = digiq(&[
        "solve",
        "--family",
        "laplacian1d:dim=16",
        "--max-iterations",
        "3",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(numeric.status.code(), Some(2));
    let r = Report::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(!r.contract.satisfied);
    assert_eq!(r.contract.error.unwrap().kind, "max_iterations_exceeded");
    assert_eq!(r.histories["residual"].len(), 3);
}

#[test]
fn config_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "seed = 1\n\n[accuracy]\nepsilon = \"tiny\"\n").unwrap();
    let out = digiq(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn matrix_market_hermitian_file() {
    let dir = tempfile::tempdir().unwrap();
    let mm = write(
        dir.path(),
        "h.mtx",
        "%%MatrixMarket matrix coordinate real hermitian\n2 2 2\n1 1 2\n2 1 1\n",
    );
    let out = digiq(&["decompose", "--matrix", &mm]);
    assert_eq!(out.status.code(), Some(0));
    let op = report_of(&out).operator.unwrap();
    // the two listed entries give [[2,1],[1,0]]
    assert_eq!((op.dim, op.nnz, op.hermitian), (2, 3, true));
    // its inverse is [[0,1],[1,-2]], so x = (1,-1)/sqrt(2) for b = (1,1)/sqrt(2)
    let out = digiq(&["solve", "--matrix", &mm, "--epsilon", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    assert!((r.result["solution_norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);

    let mm = write(
        dir.path(),
        "h3.mtx",
        "%%MatrixMarket matrix coordinate real hermitian\n2 2 3\n1 1 2\n2 1 1\n2 2 2\n",
    );
    // [[2,1],[1,2]] has eigenvalues 1 and 3, so x = b / 3
    let out = digiq(&["solve", "--matrix", &mm, "--epsilon", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    assert_eq!(r.operator.unwrap().nnz, 4);
    assert!((r.result["solution_norm"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-8);
}

#[test]
fn non_hermitian_file_solves_but_does_not_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let mm = write(
        dir.path(),
        "g.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2\n1 2 1\n2 2 3\n",
    );
    assert_eq!(digiq(&["solve", "--matrix", &mm]).status.code(), Some(0));
    let out = digiq(&["decompose", "--matrix", &mm]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report_of(&out).contract.error.unwrap().kind, "not_hermitian");
}

#[test]
fn state_dumps_round_trip_through_the_vector_source() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("x.bin");
    let out = digiq(&[
        "expm",
        "--family",
        "laplacian1d:dim=8",
        "--t",
        "0.25",
        "--format",
        "64/48",
        "--state-out",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let first = report_of(&out);
    let source = format!("file:{}", dump.display());
    let out = digiq(&["measure", "--vector", &source, "--format", "64/48", "--observable", "IIZ"]);
    // an evolved state is not normalized
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report_of(&out).contract.error.unwrap().kind, "unnormalized_state");
    assert!(first.result["state_norm"].as_f64().unwrap() < 1.0);

    let mut cfg = digiq_cli::RunConfig {
        command: Some(digiq_cli::Command::Expm),
        operator: Some(digiq::sparse::OperatorFamily::Laplacian1d { dim: 8 }),
        vector: VectorSource::File { path: dump.clone() },
        t: Some(0.0),
        format: "64/48".parse().unwrap(),
        ..Default::default()
    };
    cfg.output.state = Some(dir.path().join("y.bin"));
    let out = run(&cfg).unwrap();
    digiq_cli::emit(&out).unwrap();
    assert_eq!(std::fs::read(&dump).unwrap(), std::fs::read(dir.path().join("y.bin")).unwrap());
}

#[test]
fn sampled_measurement_reports_trial_count() {
    let out = digiq(&[
        "measure",
        "--observable",
        "ZI",
        "--vector",
        "basis:0",
        "--mode",
        "sampled",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report_of(&out);
    assert_eq!(r.derived["m"].value, 191);
    assert_eq!(r.result["expectations"][0]["value"], 1.0);
}

#[test]
fn observable_spec_file_is_decomposed() {
    let dir = tempfile::tempdir().unwrap();
    // projector onto |0> at site 1 of two
    let spec = write(
        dir.path(),
        "o.toml",
        "n_sites = 2\n[[clusters]]\nsites = [1]\nmatrix = [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]\n",
    );
    let out = digiq(&["measure", "--observable-spec", &spec, "--vector", "basis:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report_of(&out);
    assert_eq!(r.derived["pauli_terms"].value, 2);
    assert!((r.result["expectations"][0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
