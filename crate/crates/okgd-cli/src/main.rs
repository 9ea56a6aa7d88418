//! `okgd` — change-point detection for graph-indexed streams.
//!
//! The CLI is a client of the HTTP service: `okgd serve` runs the service;
//! `detect`, `synth`, and `bench` either talk to a running instance
//! (`--addr`) or spin one up in-process on a loopback port for the duration
//! of the command. `plot` is a local file transform.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on data errors.

use std::future::IntoFuture;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tokio::runtime::Runtime;

use okgd_client::{Client, ClientError};
use okgd_core::api::{BenchRequest, DetectRequest, GraphDto, SynthRequest, SynthResponse};
use okgd_core::config::{GraphSource, RunConfig, StreamSource};
use okgd_core::detector::DetectionResult;
use okgd_core::eval::BenchVariant;
use okgd_core::synth::{ScenarioKind, ScenarioSpec};
use okgd_core::{io, Error};

mod plot;

#[derive(Parser)]
#[command(name = "okgd", version, about = "Online kernel change-point detection over graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// Listen address.
        #[arg(long, default_value = "127.0.0.1:8787")]
        addr: String,
    },
    /// Run the detector over a stream and write the score trace.
    Detect(DetectArgs),
    /// Generate a synthetic scenario: stream CSV, graph edge list, ground
    /// truth, and a replay config.
    Synth(SynthArgs),
    /// Compare detector variants over many seeded scenario instances.
    Bench(BenchArgs),
    /// Turn a score-trace CSV into gnuplot-friendly data files.
    Plot(plot::PlotArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Run configuration (TOML). Flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stream CSV path (overrides the config's stream source).
    #[arg(long)]
    stream: Option<PathBuf>,
    /// Graph edge-list path (overrides the config's graph source).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Score-trace CSV output path (default: the config's output.trace, or
    /// trace.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON output path (defaults next to --out).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Detector seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Keep running after an alarm, resetting the windows (multi-outbreak
    /// streams).
    #[arg(long = "continue")]
    continue_after_alarm: bool,
    /// Apply the AR(1) residual filter at ingestion (CSV streams only).
    #[arg(long)]
    ar1: bool,
    /// Use a running service instead of an in-process one.
    #[arg(long)]
    addr: Option<String>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario kind: cluster-swap, one-cluster, random-locations, or null.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 20)]
    cluster_size: usize,
    #[arg(long, default_value_t = 0.5)]
    p_intra: f64,
    #[arg(long, default_value_t = 0.01)]
    p_inter: f64,
    #[arg(long, default_value_t = 500)]
    tau: usize,
    #[arg(long, default_value_t = 1500)]
    horizon: usize,
    /// Changed nodes for random-locations.
    #[arg(long, default_value_t = 10)]
    n_changed: usize,
    /// Changed cluster for one-cluster (random when omitted).
    #[arg(long)]
    changed_cluster: Option<usize>,
}

impl ScenarioArgs {
    fn to_spec(&self) -> Result<ScenarioSpec, Error> {
        Ok(ScenarioSpec {
            kind: self.scenario.parse::<ScenarioKind>()?,
            clusters: self.clusters,
            cluster_size: self.cluster_size,
            p_intra: self.p_intra,
            p_inter: self.p_inter,
            tau: self.tau,
            horizon: self.horizon,
            n_changed: self.n_changed,
            changed_cluster: self.changed_cluster,
        })
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for stream.csv, graph.edges, truth.txt, replay.toml.
    #[arg(long, default_value = "synth-out")]
    out_dir: PathBuf,
    #[arg(long)]
    addr: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Number of seeded scenario instances per variant.
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    /// Comma-separated variants: okgd, okgd-nograph.
    #[arg(long, default_value = "okgd,okgd-nograph")]
    variants: String,
    /// Report CSV path.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    /// Delay budget that defines "precision".
    #[arg(long, default_value_t = 150)]
    delay_budget: usize,
    /// Early alarms within this window of tau still count as detections.
    #[arg(long, default_value_t = 0)]
    tolerance: usize,
    /// Detector settings come from this run config's `[detector]` section.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    addr: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Serve { addr } => serve(&addr),
        Command::Detect(args) => detect(args),
        Command::Synth(args) => synth(args),
        Command::Bench(args) => bench(args),
        Command::Plot(args) => plot::run(args).map_err(CliError::from),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Data(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::Config(_) => CliError::Config(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<ClientError> for CliError {
    fn from(err: ClientError) -> Self {
        match &err {
            // the service maps config problems to 400
            ClientError::Api { status: 400, .. } => CliError::Config(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

/// Runs `f` against a service: either the one at `addr`, or an in-process
/// instance bound to a loopback port for the duration of the call.
fn with_service<T>(
    addr: Option<String>,
    f: impl FnOnce(&Runtime, &Client) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let rt = Runtime::new().map_err(|e| CliError::Data(format!("tokio runtime: {e}")))?;
    let base = match addr {
        Some(a) => {
            if a.starts_with("http://") || a.starts_with("https://") {
                a
            } else {
                format!("http://{a}")
            }
        }
        None => {
            let listener = rt
                .block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))
                .map_err(|e| CliError::Data(format!("bind loopback: {e}")))?;
            let local = listener
                .local_addr()
                .map_err(|e| CliError::Data(format!("local addr: {e}")))?;
            rt.spawn(axum::serve(listener, okgd_service::router()).into_future());
            format!("http://{local}")
        }
    };
    let client = Client::new(base);
    f(&rt, &client)
}

fn serve(addr: &str) -> Result<(), CliError> {
    let rt = Runtime::new().map_err(|e| CliError::Data(format!("tokio runtime: {e}")))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Config(format!("cannot bind {addr}: {e}")))?;
        let local = listener
            .local_addr()
            .map_err(|e| CliError::Data(e.to_string()))?;
        println!("okgd service listening on http://{local}");
        axum::serve(listener, okgd_service::router())
            .await
            .map_err(|e| CliError::Data(e.to_string()))
    })
}

fn load_run_config(path: Option<&Path>) -> Result<(RunConfig, PathBuf), CliError> {
    match path {
        Some(p) => {
            let text = io::read_to_string(p)?;
            let cfg: RunConfig = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let base = p.parent().unwrap_or(Path::new(".")).to_path_buf();
            Ok((cfg, base))
        }
        None => Ok((RunConfig::default(), PathBuf::from("."))),
    }
}

fn detect(args: DetectArgs) -> Result<(), CliError> {
    let (mut cfg, base_dir) = load_run_config(args.config.as_deref())?;
    if let Some(stream) = &args.stream {
        cfg.stream = Some(StreamSource::Csv { path: stream.clone(), ar1: args.ar1 });
    } else if args.ar1 {
        if let Some(StreamSource::Csv { ar1, .. }) = &mut cfg.stream {
            *ar1 = true;
        }
    }
    if let Some(graph) = &args.graph {
        cfg.graph = Some(GraphSource::EdgeList { path: graph.clone() });
    }
    if let Some(seed) = args.seed {
        cfg.detector.seed = seed;
    }
    // fail fast on bad settings before generating or uploading any data
    cfg.detector.validate()?;

    let loaded = cfg.load(&base_dir)?;
    let n_nodes = loaded.graph.n_nodes();
    let request = DetectRequest {
        config: cfg.detector.clone(),
        graph: GraphDto::from_graph(&loaded.graph),
        frames: loaded.frames,
        continue_after_alarm: args.continue_after_alarm,
    };

    let result = with_service(args.addr, |rt, client| {
        Ok(rt.block_on(client.detect(&request))?.result)
    })?;

    let out = args
        .out
        .or(cfg.output.trace.clone())
        .unwrap_or_else(|| PathBuf::from("trace.csv"));
    io::write_string(&out, &io::write_trace_csv(&result.records, n_nodes))?;
    let summary_path = args
        .summary
        .or(cfg.output.summary.clone())
        .unwrap_or_else(|| out.with_extension("summary.json"));
    io::write_string(&summary_path, &summary_json(&result))?;

    match result.tau_hat {
        Some(tau) => println!("detected=true tau_hat={tau} alarms={:?}", result.alarms),
        None => println!("detected=false"),
    }
    println!(
        "frames={} scored={} dictionary_sizes={:?}",
        result.frames_consumed,
        result.records.len(),
        result.dictionary_sizes
    );
    println!("trace: {}", out.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn summary_json(result: &DetectionResult) -> String {
    let summary = serde_json::json!({
        "detected": result.detected,
        "tau_hat": result.tau_hat,
        "alarms": result.alarms,
        "dictionary_sizes": result.dictionary_sizes,
        "frames_consumed": result.frames_consumed,
        "scored_steps": result.records.len(),
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let spec = args.scenario.to_spec()?;
    let request = SynthRequest { spec: spec.clone(), seed: args.seed };
    let resp: SynthResponse = with_service(args.addr, |rt, client| {
        Ok(rt.block_on(client.synth(&request))?)
    })?;

    std::fs::create_dir_all(&args.out_dir)?;
    let graph = resp.graph.to_graph()?;
    io::write_string(&args.out_dir.join("graph.edges"), &io::write_edge_list(&graph))?;
    io::write_string(
        &args.out_dir.join("stream.csv"),
        &io::write_stream_csv(&resp.frames)?,
    )?;
    io::write_string(
        &args.out_dir.join("truth.txt"),
        &io::write_ground_truth(resp.tau, &resp.changed),
    )?;

    // replay config: the same scenario regenerated from the seed
    let replay = RunConfig {
        stream: Some(StreamSource::Synthetic { spec, seed: Some(args.seed) }),
        ..RunConfig::default()
    };
    let replay_toml =
        toml::to_string_pretty(&replay).map_err(|e| CliError::Data(e.to_string()))?;
    io::write_string(&args.out_dir.join("replay.toml"), &replay_toml)?;

    println!(
        "scenario={} nodes={} frames={} tau={:?} changed={} -> {}",
        args.scenario.scenario,
        graph.n_nodes(),
        resp.frames.len(),
        resp.tau,
        resp.changed.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let spec = args.scenario.to_spec()?;
    let variants: Vec<BenchVariant> = args
        .variants
        .split(',')
        .map(|name| BenchVariant::from_name(name.trim()))
        .collect::<Result<_, _>>()?;
    let (cfg, _) = load_run_config(args.config.as_deref())?;
    let request = BenchRequest {
        spec,
        config: cfg.detector,
        variants,
        n_seeds: args.seeds,
        delay_budget: args.delay_budget,
        tolerance_window: args.tolerance,
    };
    let report = with_service(args.addr, |rt, client| {
        Ok(rt.block_on(client.bench(&request))?.report)
    })?;

    io::write_string(&args.out, &io::write_bench_csv(&report))?;
    for s in &report.summaries {
        let a = &s.aggregate;
        println!(
            "{}: detected {}/{} mean_delay={} std_delay={} false_alarms={} precision={:.0}% (budget {})",
            s.variant,
            a.n_detected,
            a.n_runs,
            a.mean_delay.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
            a.std_delay.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()),
            a.n_false_alarms,
            a.precision * 100.0,
            a.delay_budget,
        );
    }
    println!("report: {}", args.out.display());
    Ok(())
}
