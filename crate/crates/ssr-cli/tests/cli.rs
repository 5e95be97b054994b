//! End-to-end tests of the `ssr` binary: exit codes, output schemas, and
//! run-to-run determinism of the seeded commands.

use std::process::{Command, Output};

use serde_json::{json, Value};

fn ssr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssr"))
}

fn run(args: &[&str]) -> Output {
    ssr().args(args).output().expect("binary should run")
}

fn json_out(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, got {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn cluster_preset_reports_perfect_g1_and_is_deterministic() {
    let args = [
        "cluster",
        "--preset",
        "g1",
        "--method",
        "ssrk-scut",
        "--k",
        "4",
        "--K",
        "3",
        "--seed",
        "7",
    ];
    let mut first = json_out(&run(&args));
    assert_eq!(first["command"], "cluster");
    assert_eq!(first["config"]["clusters"], 3);
    assert_eq!(first["config"]["r"], 3);
    assert_eq!(first["results"]["accuracy"], json!(1.0));
    assert_eq!(first["results"]["converged"], json!(true));
    assert_eq!(first["results"]["labels"].as_array().unwrap().len(), 150);
    let rho = first["results"]["rho"].as_f64().unwrap();
    assert!(
        rho > 0.99,
        "well-separated blobs should sit near rho = 1, got {rho}"
    );

    // Identical invocation, identical bytes — modulo wall-clock timings.
    let mut second = json_out(&run(&args));
    first.as_object_mut().unwrap().remove("timings_ms");
    second.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(first, second);
}

#[test]
fn cluster_csv_format_emits_sample_label_rows() {
    let out = run(&[
        "cluster",
        "--preset",
        "g1",
        "--method",
        "ssrk-scut",
        "--K",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "sample,label");
    assert_eq!(lines.len(), 2 + 150);
    assert!(lines[2].starts_with("0,"));
}

#[test]
fn missing_input_file_exits_two() {
    let out = run(&[
        "cluster",
        "--input",
        "/nonexistent/data.csv",
        "--method",
        "kmeans",
        "--K",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn invalid_cluster_count_exits_one() {
    let out = run(&[
        "cluster",
        "--preset",
        "g1",
        "--method",
        "ssrk-scut",
        "--K",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_and_preset_together_exit_one() {
    let out = run(&[
        "cluster",
        "--preset",
        "g1",
        "--input",
        "whatever.csv",
        "--method",
        "kmeans",
        "--K",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn thread_env_is_validated() {
    let bad = ssr()
        .env("SSR_THREADS", "abc")
        .args([
            "cluster",
            "--preset",
            "g1",
            "--method",
            "ssrk-scut",
            "--K",
            "3",
        ])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));

    let good = ssr()
        .env("SSR_THREADS", "2")
        .args([
            "cluster", "--preset", "g1", "--method", "kmeans", "--K", "3",
        ])
        .output()
        .unwrap();
    assert!(good.status.success());
}

#[test]
fn gen_then_cluster_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g1.csv");
    let gen = run(&[
        "gen",
        "--preset",
        "g1",
        "--seed",
        "0",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(gen.status.success());

    let v = json_out(&run(&[
        "cluster",
        "--input",
        data.to_str().unwrap(),
        "--has-labels",
        "--method",
        "ssrk-scut",
        "--K",
        "3",
    ]));
    assert_eq!(v["results"]["accuracy"], json!(1.0));
}

#[test]
fn recovery_sweep_csv_has_contract_header_and_clean_noiseless_scores() {
    let out = run(&[
        "recovery-sweep",
        "--profile",
        "uniform",
        "--r",
        "2",
        "--n",
        "64",
        "--trials",
        "2",
        "--noise",
        "0,0.125",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert!(lines[0].starts_with('#'));
    assert_eq!(lines[1], "profile,r,noise_a,method,mean_score,std");
    assert_eq!(lines.len(), 2 + 2, "one row per noise level");
    let fields: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(fields[0], "uniform");
    assert_eq!(fields[3], "nscrt");
    let mean: f64 = fields[4].parse().unwrap();
    assert!(
        (mean - 1.0).abs() < 1e-9,
        "noiseless recovery should be exact, got {mean}"
    );
}

#[test]
fn rho_sweep_csv_has_contract_header_and_spearman_comments() {
    let out = run(&[
        "rho-sweep",
        "--separations",
        "2,6",
        "--trials",
        "2",
        "--points",
        "25",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[1], "separation,rho,mean_sparsity,scut_accuracy");
    assert_eq!(lines.len(), 2 + 2 + 2);
    assert!(lines[4].starts_with("# spearman_rho_accuracy="));
    assert!(lines[5].starts_with("# spearman_sparsity_accuracy="));
    // Wider separation should not hurt any of the three measurements here.
    let near: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
    let far: Vec<f64> = lines[3].split(',').map(|s| s.parse().unwrap()).collect();
    assert!(far[1] > near[1] && far[3] >= near[3]);
}

#[test]
fn eval_scores_two_label_files() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.csv");
    let truth = dir.path().join("truth.csv");
    // Labels live in the last field; extra columns are ignored.
    std::fs::write(&pred, "0\n0\n1\n1\n").unwrap();
    std::fs::write(&truth, "1.5,2.0,1\n1.5,2.0,1\n0.0,0.1,0\n9.9,9.9,2\n").unwrap();
    let v = json_out(&run(&[
        "eval",
        "--pred",
        pred.to_str().unwrap(),
        "--truth",
        truth.to_str().unwrap(),
    ]));
    assert_eq!(v["results"]["n"], 4);
    assert_eq!(v["results"]["accuracy"], json!(0.75));
}

#[test]
fn edge_list_input_feeds_graph_methods_only() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    std::fs::write(
        &graph,
        "# two triangles\n0 1 1.0\n1 2 1.0\n0 2 1.0\n3 4 1.0\n4 5 1.0\n3 5 1.0\n",
    )
    .unwrap();

    let v = json_out(&run(&[
        "cluster",
        "--input",
        graph.to_str().unwrap(),
        "--edge-list",
        "--method",
        "ssrk-scut",
        "--K",
        "2",
    ]));
    assert_eq!(v["results"]["labels"], json!([0, 0, 0, 1, 1, 1]));
    assert_eq!(v["results"]["rho"], json!(1.0));

    let rejected = run(&[
        "cluster",
        "--input",
        graph.to_str().unwrap(),
        "--edge-list",
        "--method",
        "kmeans",
        "--K",
        "2",
    ]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn ssr_command_reports_code_diagnostics() {
    let v = json_out(&run(&[
        "ssr",
        "--preset",
        "g1",
        "--variant",
        "kernel",
        "--k",
        "4",
        "--r",
        "3",
    ]));
    assert_eq!(v["command"], "ssr");
    let h = v["results"]["h"].as_array().unwrap();
    assert_eq!(h.len(), 3);
    assert_eq!(h[0].as_array().unwrap().len(), 150);
    assert!(v["results"]["weight_sum_max_dev"].as_f64().unwrap() < 1e-6);
    assert!(v["results"]["dictionary_gram_deviation"].as_f64().unwrap() < 0.35);

    let orig = json_out(&run(&[
        "ssr",
        "--preset",
        "iris",
        "--variant",
        "original",
        "--r",
        "3",
    ]));
    assert_eq!(orig["results"]["converged"], json!(true));
    assert!(orig["results"]["weight_sum_max_dev"].as_f64().unwrap() < 1e-6);
}

#[test]
fn outputs_land_in_files_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "cluster",
        "--preset",
        "g2",
        "--method",
        "rcut",
        "--K",
        "3",
        "--seed",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["config"]["method"], "rcut");
    assert!(v["results"]["kmeans_objective"].as_f64().unwrap() > 0.0);
}
