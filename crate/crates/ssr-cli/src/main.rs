//! `ssr` — seeded, reproducible runs of the spectral sparse representation
//! pipelines: clustering, code extraction, and the experiment sweeps, with
//! JSON/CSV result files that embed their full resolved configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ssr_core::cluster::{
    kmeans, linear_pipeline, rcut_pipeline, scut, ClusterLabels, KmeansOptions, LinearVariant,
};
use ssr_core::data::{iris, load_csv, load_edge_list, save_csv, Preset, SizeProfile};
use ssr_core::eval::{accuracy, nmi, rand_index};
use ssr_core::graph::{build_knn_similarity, laplacian, rho, SimilarityMatrix};
use ssr_core::linalg::{sym_eig, Which};
use ssr_core::nscrt::SparseCodes;
use ssr_core::ssr::{
    center_data, code_gram, dictionary, linear_kernel_similarity, sparsity, ssrk, ssro,
    virtual_data, SsrResult,
};
use ssr_core::sweeps::{recovery_sweep, rho_sweep, RecoverySweepConfig, RhoSweepConfig};
use ssr_core::{DataMatrix, Result, SsrError};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "ssr",
    version,
    about = "Spectral sparse representation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dataset and score against truth labels when present.
    Cluster(ClusterArgs),
    /// Compute sparse codes and representation diagnostics.
    Ssr(SsrArgs),
    /// Rotation-recovery benchmark grid (figure data).
    RecoverySweep(RecoverySweepArgs),
    /// Separation sweep relating rho, code sparsity, and accuracy.
    RhoSweep(RhoSweepArgs),
    /// Score a predicted labeling against a reference labeling.
    Eval(EvalArgs),
    /// Write a built-in dataset to CSV.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    SsrkScut,
    SsroScut,
    Rcut,
    Rcuto,
    Kpc,
    Kmeans,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::SsrkScut => "ssrk-scut",
            Method::SsroScut => "ssro-scut",
            Method::Rcut => "rcut",
            Method::Rcuto => "rcuto",
            Method::Kpc => "kpc",
            Method::Kmeans => "kmeans",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ClusterArgs {
    /// CSV dataset, samples as rows (or an edge list with --edge-list).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in dataset: g1, g2, g3, onion, iris.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    method: Method,
    /// kNN graph neighborhood size.
    #[arg(long = "k", default_value_t = 4)]
    knn_k: usize,
    /// Number of clusters.
    #[arg(long = "K")]
    clusters: usize,
    /// Representation rank for the SSR methods (defaults to K).
    #[arg(long)]
    r: Option<usize>,
    /// Truncation threshold override (default 0.6/sqrt(n)).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restarts for the K-means-based methods.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Treat --input as a similarity edge list.
    #[arg(long)]
    edge_list: bool,
    /// The final CSV column holds truth labels.
    #[arg(long)]
    has_labels: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Kernel,
    Original,
}

#[derive(Args)]
struct SsrArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in dataset: g1, g2, g3, onion, iris.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum, default_value_t = Variant::Kernel)]
    variant: Variant,
    /// kNN graph neighborhood size (kernel variant).
    #[arg(long = "k", default_value_t = 4)]
    knn_k: usize,
    /// Representation rank.
    #[arg(long)]
    r: usize,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    edge_list: bool,
    #[arg(long)]
    has_labels: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct RecoverySweepArgs {
    /// Cluster-size profile: uniform or exponential.
    #[arg(long, default_value = "uniform")]
    profile: String,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Comma-separated noise levels a (sigma = a / sqrt(max cluster size)).
    #[arg(long, default_value = "0.03125,0.0625,0.125,0.25")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RhoSweepArgs {
    /// Comma-separated triangle side lengths (default: 10 points in [1.5, 8]).
    #[arg(long)]
    separations: Option<String>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Samples per Gaussian class.
    #[arg(long, default_value_t = 50)]
    points: usize,
    #[arg(long = "k", default_value_t = 4)]
    knn_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted labels: last field of each CSV/whitespace row.
    #[arg(long)]
    pred: PathBuf,
    /// Reference labels in the same layout.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    /// Built-in dataset: g1, g2, g3, onion, iris.
    #[arg(long)]
    preset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                SsrError::Validation(_) => 1,
                SsrError::Parse { .. } | SsrError::Io(_) => 2,
                SsrError::Numeric(_) => 3,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Ssr(args) => cmd_ssr(args),
        Command::RecoverySweep(args) => cmd_recovery_sweep(args),
        Command::RhoSweep(args) => cmd_rho_sweep(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

/// SSR_THREADS caps the rayon pool; unset keeps the library default.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SSR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        SsrError::validation(format!(
            "SSR_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    if n == 0 {
        return Err(SsrError::validation("SSR_THREADS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| SsrError::validation(format!("cannot configure thread pool: {e}")))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// A dataset resolved from --preset/--input.
enum Input {
    Points {
        data: DataMatrix,
        truth: Option<ClusterLabels>,
    },
    Graph {
        w: SimilarityMatrix,
    },
}

fn resolve_input(
    input: &Option<PathBuf>,
    preset: &Option<String>,
    edge_list: bool,
    has_labels: bool,
    seed: u64,
) -> Result<Input> {
    match (input, preset) {
        (Some(_), Some(_)) => Err(SsrError::validation(
            "--input and --preset are mutually exclusive",
        )),
        (None, None) => Err(SsrError::validation(
            "one of --input or --preset is required",
        )),
        (Some(path), None) => {
            if edge_list {
                Ok(Input::Graph {
                    w: load_edge_list(path)?,
                })
            } else {
                let (data, truth) = load_csv(path, has_labels)?;
                Ok(Input::Points { data, truth })
            }
        }
        (None, Some(name)) => {
            if name.eq_ignore_ascii_case("iris") {
                let (data, truth) = iris();
                Ok(Input::Points {
                    data,
                    truth: Some(truth),
                })
            } else if let Some(p) = Preset::from_name(name) {
                let (data, truth) = p.generate(seed);
                Ok(Input::Points {
                    data,
                    truth: Some(truth),
                })
            } else {
                Err(SsrError::validation(format!(
                    "unknown preset '{name}' (expected g1, g2, g3, onion, or iris)"
                )))
            }
        }
    }
}

#[derive(Serialize)]
struct Timings {
    total_ms: f64,
}

#[derive(Serialize)]
struct ClusterConfig {
    input: Option<String>,
    preset: Option<String>,
    method: &'static str,
    knn_k: usize,
    clusters: usize,
    r: usize,
    lambda: Option<f64>,
    seed: u64,
    restarts: usize,
    edge_list: bool,
    has_labels: bool,
}

#[derive(Serialize)]
struct ClusterResults {
    labels: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rand_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_sparsity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_code_columns: Option<usize>,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kmeans_objective: Option<f64>,
}

#[derive(Serialize)]
struct ClusterReport {
    version: &'static str,
    command: &'static str,
    config: ClusterConfig,
    results: ClusterResults,
    timings_ms: Timings,
}

/// Mean column sparsity of H over informative columns, plus the count of
/// all-zero columns (possible when the graph has more components than r).
fn code_sparsity_stats(h: &ssr_core::Mat) -> Result<(Option<f64>, usize)> {
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut zeros = 0usize;
    for j in 0..h.cols() {
        let col = h.col(j);
        if col.iter().any(|&v| v != 0.0) {
            total += sparsity(&col)?;
            counted += 1;
        } else {
            zeros += 1;
        }
    }
    let mean = (counted > 0).then(|| total / counted as f64);
    Ok((mean, zeros))
}

fn cmd_cluster(args: ClusterArgs) -> Result<()> {
    let t0 = Instant::now();
    if args.clusters < 1 {
        return Err(SsrError::validation("--K must be at least 1"));
    }
    let input = resolve_input(
        &args.input,
        &args.preset,
        args.edge_list,
        args.has_labels,
        args.seed,
    )?;
    let k = args.clusters;
    let r = args.r.unwrap_or(k);

    // Resolve the graph (for graph methods) or the point data (for linear
    // methods); the rho diagnostic uses the graph when one exists and the
    // linear-kernel similarity of the centered data otherwise.
    let needs_points = matches!(
        args.method,
        Method::SsroScut | Method::Rcuto | Method::Kpc | Method::Kmeans
    );
    let (points, truth, graph): (
        Option<DataMatrix>,
        Option<ClusterLabels>,
        Option<SimilarityMatrix>,
    ) = match input {
        Input::Points { data, truth } => {
            let graph = match args.method {
                Method::SsrkScut | Method::Rcut => Some(build_knn_similarity(&data, args.knn_k)?),
                _ => None,
            };
            (Some(data), truth, graph)
        }
        Input::Graph { w } => {
            if needs_points {
                return Err(SsrError::validation(format!(
                    "method {} needs coordinate data, not an edge list",
                    args.method.name()
                )));
            }
            (None, None, Some(w))
        }
    };

    let kmeans_opts = KmeansOptions {
        restarts: args.restarts,
        seed: args.seed,
        ..Default::default()
    };

    let mut lambda_used = None;
    let mut mean_sparsity = None;
    let mut zero_code_columns = None;
    let mut converged = None;
    let mut kmeans_objective = None;

    let (labels, iterations) = match args.method {
        Method::SsrkScut => {
            let w = graph.as_ref().expect("graph resolved above");
            let res = ssrk(w, r, args.lambda)?;
            lambda_used = Some(res.lambda);
            converged = Some(res.codes.converged);
            let (ms, zc) = code_sparsity_stats(&res.codes.h)?;
            mean_sparsity = ms;
            zero_code_columns = Some(zc);
            (scut(&res.codes), res.codes.iterations)
        }
        Method::SsroScut => {
            let data = points.as_ref().expect("points resolved above");
            let centered = center_data(data);
            let res = ssro(&centered, r, args.lambda)?;
            lambda_used = Some(res.lambda);
            converged = Some(res.codes.converged);
            let (ms, zc) = code_sparsity_stats(&res.codes.h)?;
            mean_sparsity = ms;
            zero_code_columns = Some(zc);
            (scut(&res.codes), res.codes.iterations)
        }
        Method::Rcut => {
            let w = graph.as_ref().expect("graph resolved above");
            let km = rcut_pipeline(w, k, &kmeans_opts)?;
            kmeans_objective = Some(km.objective);
            (km.labels, km.iterations)
        }
        Method::Rcuto | Method::Kpc => {
            let data = points.as_ref().expect("points resolved above");
            let variant = if args.method == Method::Kpc {
                LinearVariant::Kpc
            } else {
                LinearVariant::Rcuto
            };
            let km = linear_pipeline(data, k, variant, &kmeans_opts)?;
            kmeans_objective = Some(km.objective);
            (km.labels, km.iterations)
        }
        Method::Kmeans => {
            let data = points.as_ref().expect("points resolved above");
            let km = kmeans(data, k, &kmeans_opts)?;
            kmeans_objective = Some(km.objective);
            (km.labels, km.iterations)
        }
    };

    let rho_value = match (&graph, &points) {
        (Some(w), _) => Some(rho(&laplacian(w), k)?.rho),
        (None, Some(data)) => {
            let w = linear_kernel_similarity(&center_data(data))?;
            Some(rho(&laplacian(&w), k)?.rho)
        }
        (None, None) => None,
    };

    let (acc, nmi_v, ri) = match &truth {
        Some(t) => (
            Some(accuracy(&labels, t)?),
            Some(nmi(&labels, t)?),
            Some(rand_index(&labels, t)?),
        ),
        None => (None, None, None),
    };

    let report = ClusterReport {
        version: VERSION,
        command: "cluster",
        config: ClusterConfig {
            input: args.input.as_ref().map(|p| p.display().to_string()),
            preset: args.preset.clone(),
            method: args.method.name(),
            knn_k: args.knn_k,
            clusters: k,
            r,
            lambda: lambda_used.or(args.lambda),
            seed: args.seed,
            restarts: args.restarts,
            edge_list: args.edge_list,
            has_labels: args.has_labels,
        },
        results: ClusterResults {
            labels: labels.labels().to_vec(),
            accuracy: acc,
            nmi: nmi_v,
            rand_index: ri,
            rho: rho_value,
            mean_sparsity,
            zero_code_columns,
            iterations,
            converged,
            kmeans_objective,
        },
        timings_ms: Timings {
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
        },
    };

    match args.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| SsrError::numeric(format!("JSON serialization failed: {e}")))?;
            text.push('\n');
            emit(&args.out, &text)
        }
        Format::Csv => {
            let mut text = format!(
                "# ssr {VERSION} cluster method={} preset={} input={} K={k} r={r} seed={}\n",
                args.method.name(),
                args.preset.as_deref().unwrap_or("-"),
                args.input
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "-".into()),
                args.seed
            );
            text.push_str("sample,label\n");
            for (i, &l) in labels.labels().iter().enumerate() {
                let _ = writeln!(text, "{i},{l}");
            }
            emit(&args.out, &text)
        }
    }
}

#[derive(Serialize)]
struct SsrConfig {
    input: Option<String>,
    preset: Option<String>,
    variant: &'static str,
    knn_k: usize,
    r: usize,
    lambda: f64,
    seed: u64,
    edge_list: bool,
}

#[derive(Serialize)]
struct SsrReportResults {
    h: Vec<Vec<f64>>,
    hbar_nonzeros: usize,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_sparsity: Option<f64>,
    zero_code_columns: usize,
    weight_sum_max_dev: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dictionary_coherence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dictionary_gram_deviation: Option<f64>,
}

#[derive(Serialize)]
struct SsrReport {
    version: &'static str,
    command: &'static str,
    config: SsrConfig,
    results: SsrReportResults,
    timings_ms: Timings,
}

fn weight_sum_max_dev(codes: &SparseCodes) -> f64 {
    let gram = code_gram(&codes.h);
    let n = gram.cols();
    let mut worst = 0.0f64;
    for j in 0..n {
        let s: f64 = (0..n).map(|i| gram[(i, j)]).sum();
        worst = worst.max((s - 1.0).abs());
    }
    worst
}

fn cmd_ssr(args: SsrArgs) -> Result<()> {
    let t0 = Instant::now();
    let input = resolve_input(
        &args.input,
        &args.preset,
        args.edge_list,
        args.has_labels,
        args.seed,
    )?;

    let run = match (args.variant, input) {
        (Variant::Kernel, Input::Points { data, .. }) => {
            let w = build_knn_similarity(&data, args.knn_k)?;
            kernel_ssr(&w, args.r, args.lambda)?
        }
        (Variant::Kernel, Input::Graph { w }) => kernel_ssr(&w, args.r, args.lambda)?,
        (Variant::Original, Input::Points { data, .. }) => {
            let centered = center_data(&data);
            let result = ssro(&centered, args.r, args.lambda)?;
            let w = linear_kernel_similarity(&centered)?;
            let rho_value = rho(&laplacian(&w), args.r)?.rho;
            let d = dictionary(centered.as_mat(), &result.codes.h)?;
            let coherence = d.mutual_coherence();
            CodeRun {
                result,
                rho: Some(rho_value),
                coherence: Some(coherence),
                gram_dev: None,
            }
        }
        (Variant::Original, Input::Graph { .. }) => {
            return Err(SsrError::validation(
                "the original-data variant needs coordinate data, not an edge list",
            ));
        }
    };

    let result = &run.result;
    let codes = &result.codes;
    let (mean_sparsity, zero_code_columns) = code_sparsity_stats(&codes.h)?;
    let h_rows: Vec<Vec<f64>> = (0..codes.h.rows())
        .map(|i| codes.h.row(i).to_vec())
        .collect();

    let report = SsrReport {
        version: VERSION,
        command: "ssr",
        config: SsrConfig {
            input: args.input.as_ref().map(|p| p.display().to_string()),
            preset: args.preset.clone(),
            variant: match args.variant {
                Variant::Kernel => "kernel",
                Variant::Original => "original",
            },
            knn_k: args.knn_k,
            r: args.r,
            lambda: result.lambda,
            seed: args.seed,
            edge_list: args.edge_list,
        },
        results: SsrReportResults {
            hbar_nonzeros: codes.hbar.data().iter().filter(|&&v| v != 0.0).count(),
            iterations: codes.iterations,
            converged: codes.converged,
            rho: run.rho,
            mean_sparsity,
            zero_code_columns,
            weight_sum_max_dev: weight_sum_max_dev(codes),
            dictionary_coherence: run.coherence,
            dictionary_gram_deviation: run.gram_dev,
            h: h_rows,
        },
        timings_ms: Timings {
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
        },
    };

    match args.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| SsrError::numeric(format!("JSON serialization failed: {e}")))?;
            text.push('\n');
            emit(&args.out, &text)
        }
        Format::Csv => {
            // The codes matrix itself, one row per line.
            let mut text = format!(
                "# ssr {VERSION} codes variant={} r={} lambda={}\n",
                report.config.variant, args.r, result.lambda
            );
            for i in 0..codes.h.rows() {
                let line: Vec<String> = codes.h.row(i).iter().map(|v| format!("{v}")).collect();
                let _ = writeln!(text, "{}", line.join(","));
            }
            emit(&args.out, &text)
        }
    }
}

/// An SSR run plus the diagnostics that depend on the input kind.
struct CodeRun {
    result: SsrResult,
    rho: Option<f64>,
    coherence: Option<f64>,
    gram_dev: Option<f64>,
}

fn kernel_ssr(w: &SimilarityMatrix, r: usize, lambda: Option<f64>) -> Result<CodeRun> {
    let result = ssrk(w, r, lambda)?;
    let l = laplacian(w);
    let rho_value = rho(&l, r)?.rho;
    // Dictionary diagnostics against the virtual data (full spectrum).
    let full = sym_eig(&l.matrix, l.matrix.rows(), Which::Smallest)?;
    let vd = virtual_data(&full)?;
    let d = dictionary(&vd, &result.codes.h)?;
    let lambda_n = *full.values.last().expect("spectrum is non-empty");
    let gram_dev = (lambda_n > 0.0).then(|| d.gram_deviation(lambda_n));
    Ok(CodeRun {
        result,
        rho: Some(rho_value),
        coherence: Some(d.mutual_coherence()),
        gram_dev,
    })
}

#[derive(Serialize)]
struct RecoverySweepReport {
    version: &'static str,
    command: &'static str,
    config: RecoverySweepEcho,
    rows: Vec<RecoveryRowOut>,
    timings_ms: Timings,
}

#[derive(Serialize)]
struct RecoverySweepEcho {
    profile: String,
    r: usize,
    n: usize,
    trials: usize,
    noise: Vec<f64>,
    seed: u64,
}

#[derive(Serialize)]
struct RecoveryRowOut {
    profile: String,
    r: usize,
    noise_a: f64,
    method: &'static str,
    mean_score: f64,
    std: f64,
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| SsrError::validation(format!("cannot parse {what} value '{s}'")))
        })
        .collect()
}

fn cmd_recovery_sweep(args: RecoverySweepArgs) -> Result<()> {
    let t0 = Instant::now();
    let profile = SizeProfile::from_name(&args.profile).ok_or_else(|| {
        SsrError::validation(format!(
            "unknown profile '{}' (expected uniform or exponential)",
            args.profile
        ))
    })?;
    let noise = parse_f64_list(&args.noise, "noise")?;
    let cfg = RecoverySweepConfig {
        profile,
        r: args.r,
        n: args.n,
        noise_levels: noise.clone(),
        trials: args.trials,
        seed: args.seed,
    };
    let rows = recovery_sweep(&cfg)?;
    let profile_name = match profile {
        SizeProfile::Uniform => "uniform",
        SizeProfile::Exponential => "exponential",
    };
    let rows_out: Vec<RecoveryRowOut> = rows
        .iter()
        .map(|row| RecoveryRowOut {
            profile: profile_name.to_string(),
            r: row.r,
            noise_a: row.noise_a,
            method: "nscrt",
            mean_score: row.mean_score,
            std: row.std,
        })
        .collect();

    match args.format {
        Format::Json => {
            let report = RecoverySweepReport {
                version: VERSION,
                command: "recovery-sweep",
                config: RecoverySweepEcho {
                    profile: profile_name.to_string(),
                    r: args.r,
                    n: args.n,
                    trials: args.trials,
                    noise,
                    seed: args.seed,
                },
                rows: rows_out,
                timings_ms: Timings {
                    total_ms: t0.elapsed().as_secs_f64() * 1e3,
                },
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| SsrError::numeric(format!("JSON serialization failed: {e}")))?;
            text.push('\n');
            emit(&args.out, &text)
        }
        Format::Csv => {
            let mut text = format!(
                "# ssr {VERSION} recovery-sweep profile={profile_name} r={} n={} trials={} seed={}\n",
                args.r, args.n, args.trials, args.seed
            );
            text.push_str("profile,r,noise_a,method,mean_score,std\n");
            for row in &rows_out {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    row.profile, row.r, row.noise_a, row.method, row.mean_score, row.std
                );
            }
            emit(&args.out, &text)
        }
    }
}

#[derive(Serialize)]
struct RhoSweepReport {
    version: &'static str,
    command: &'static str,
    config: RhoSweepEcho,
    rows: Vec<RhoRowOut>,
    spearman_rho_accuracy: f64,
    spearman_sparsity_accuracy: f64,
    timings_ms: Timings,
}

#[derive(Serialize)]
struct RhoSweepEcho {
    separations: Vec<f64>,
    trials: usize,
    points: usize,
    knn_k: usize,
    seed: u64,
}

#[derive(Serialize)]
struct RhoRowOut {
    separation: f64,
    rho: f64,
    mean_sparsity: f64,
    scut_accuracy: f64,
}

fn cmd_rho_sweep(args: RhoSweepArgs) -> Result<()> {
    let t0 = Instant::now();
    let separations = match &args.separations {
        Some(raw) => parse_f64_list(raw, "separation")?,
        None => RhoSweepConfig::default().separations,
    };
    let cfg = RhoSweepConfig {
        separations: separations.clone(),
        trials: args.trials,
        points_per_class: args.points,
        knn_k: args.knn_k,
        seed: args.seed,
    };
    let out = rho_sweep(&cfg)?;
    let rows: Vec<RhoRowOut> = out
        .rows
        .iter()
        .map(|r| RhoRowOut {
            separation: r.separation,
            rho: r.rho,
            mean_sparsity: r.mean_sparsity,
            scut_accuracy: r.scut_accuracy,
        })
        .collect();

    match args.format {
        Format::Json => {
            let report = RhoSweepReport {
                version: VERSION,
                command: "rho-sweep",
                config: RhoSweepEcho {
                    separations,
                    trials: args.trials,
                    points: args.points,
                    knn_k: args.knn_k,
                    seed: args.seed,
                },
                rows,
                spearman_rho_accuracy: out.spearman_rho_accuracy,
                spearman_sparsity_accuracy: out.spearman_sparsity_accuracy,
                timings_ms: Timings {
                    total_ms: t0.elapsed().as_secs_f64() * 1e3,
                },
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| SsrError::numeric(format!("JSON serialization failed: {e}")))?;
            text.push('\n');
            emit(&args.out, &text)
        }
        Format::Csv => {
            let mut text = format!(
                "# ssr {VERSION} rho-sweep trials={} points={} k={} seed={}\n",
                args.trials, args.points, args.knn_k, args.seed
            );
            text.push_str("separation,rho,mean_sparsity,scut_accuracy\n");
            for row in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    row.separation, row.rho, row.mean_sparsity, row.scut_accuracy
                );
            }
            let _ = writeln!(
                text,
                "# spearman_rho_accuracy={}",
                out.spearman_rho_accuracy
            );
            let _ = writeln!(
                text,
                "# spearman_sparsity_accuracy={}",
                out.spearman_sparsity_accuracy
            );
            emit(&args.out, &text)
        }
    }
}

#[derive(Serialize)]
struct EvalReport {
    version: &'static str,
    command: &'static str,
    config: EvalEcho,
    results: EvalResults,
    timings_ms: Timings,
}

#[derive(Serialize)]
struct EvalEcho {
    pred: String,
    truth: String,
}

#[derive(Serialize)]
struct EvalResults {
    n: usize,
    accuracy: f64,
    nmi: f64,
    rand_index: f64,
}

/// Labels file: last comma/whitespace field of each data row, any integers.
fn load_labels(path: &PathBuf) -> Result<ClusterLabels> {
    let text = std::fs::read_to_string(path)?;
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let last = trimmed
            .rsplit(|c: char| c == ',' || c.is_whitespace())
            .next()
            .unwrap_or(trimmed);
        let v: usize = last.parse().map_err(|_| SsrError::Parse {
            line: idx + 1,
            msg: format!("cannot parse label '{last}'"),
        })?;
        raw.push(v);
    }
    if raw.is_empty() {
        return Err(SsrError::validation("label file contains no labels"));
    }
    ClusterLabels::from_raw(&raw)
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let t0 = Instant::now();
    let pred = load_labels(&args.pred)?;
    let truth = load_labels(&args.truth)?;
    let results = EvalResults {
        n: pred.n(),
        accuracy: accuracy(&pred, &truth)?,
        nmi: nmi(&pred, &truth)?,
        rand_index: rand_index(&pred, &truth)?,
    };
    let report = EvalReport {
        version: VERSION,
        command: "eval",
        config: EvalEcho {
            pred: args.pred.display().to_string(),
            truth: args.truth.display().to_string(),
        },
        results,
        timings_ms: Timings {
            total_ms: t0.elapsed().as_secs_f64() * 1e3,
        },
    };
    match args.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| SsrError::numeric(format!("JSON serialization failed: {e}")))?;
            text.push('\n');
            emit(&args.out, &text)
        }
        Format::Csv => {
            let mut text = format!(
                "# ssr {VERSION} eval pred={} truth={}\n",
                report.config.pred, report.config.truth
            );
            text.push_str("metric,value\n");
            let _ = writeln!(text, "n,{}", report.results.n);
            let _ = writeln!(text, "accuracy,{}", report.results.accuracy);
            let _ = writeln!(text, "nmi,{}", report.results.nmi);
            let _ = writeln!(text, "rand_index,{}", report.results.rand_index);
            emit(&args.out, &text)
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let (data, labels) = if args.preset.eq_ignore_ascii_case("iris") {
        iris()
    } else {
        let preset = Preset::from_name(&args.preset).ok_or_else(|| {
            SsrError::validation(format!(
                "unknown preset '{}' (expected g1, g2, g3, onion, or iris)",
                args.preset
            ))
        })?;
        preset.generate(args.seed)
    };
    save_csv(&args.out, &data, Some(&labels))?;
    Ok(())
}
