//! `sst`: link prediction and transition counting from the command line.

mod settings;

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sst_core::counter::{count_transitions, CounterConfig};
use sst_core::io::{self as sio, StaticEdgeList, TemporalEdgeStream};
use sst_core::labeler::SstDescription;
use sst_core::predictor::{
    interpret, run_static_baselines, run_static_lp, run_temporal_baselines, run_temporal_lp, write_interpretation_csv,
    EvaluationReport, InterpretationRow, LpOutcome, StaticConfig, TemporalConfig,
};
use sst_core::svm::{LinearModel, SvmConfig};
use sst_core::{GraphChange, LabelRegistry, SstError};

use settings::{CliError, CliResult, Settings};

const VERSION: &str = env!("SST_VERSION");

#[derive(Parser)]
#[command(name = "sst", version = VERSION, about = "Subgraph-to-subgraph transition link prediction")]
struct Cli {
    /// `key = value` file with defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Static link prediction on an edge list.
    StaticLp(StaticArgs),
    /// Temporal link prediction on a timestamped interaction stream.
    TemporalLp(TemporalArgs),
    /// Rank the features of a saved model.
    Interpret(InterpretArgs),
    /// Write a preferential-attachment interaction stream.
    GenerateBa(BaArgs),
    /// Count the transitions around one edge change.
    Enumerate(EnumerateArgs),
    /// Common-neighbours and random scores on the prediction candidate sets.
    EvalBaselines(BaselineArgs),
}

#[derive(Args)]
struct SvmArgs {
    /// SVM regularization constant.
    #[arg(long = "c")]
    c: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of top-weighted SSTs rendered as Graphviz files.
    #[arg(long)]
    top_dot: Option<usize>,
}

#[derive(Args)]
struct StaticInput {
    /// Edge list, optionally gzipped.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    /// Name recorded in the report (default: file stem).
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Uniform non-edges per test edge in the AUC set.
    #[arg(long)]
    auc_negatives: Option<usize>,
    /// Skip the three-hop candidate set.
    #[arg(long)]
    no_aupr3: bool,
}

#[derive(Args)]
struct StaticArgs {
    #[command(flatten)]
    input: StaticInput,
    /// Sampled training non-edges per training edge.
    #[arg(long)]
    alpha: Option<usize>,
    /// Choose C on the validation split.
    #[arg(long)]
    tune_c: bool,
    #[command(flatten)]
    svm: SvmArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TemporalInput {
    /// Interaction stream (`source target time`), or `-` for stdin.
    #[arg(long)]
    stream: Option<String>,
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    base_buckets: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    auc_negatives: Option<usize>,
    #[arg(long)]
    no_aupr3: bool,
}

#[derive(Args)]
struct TemporalArgs {
    #[command(flatten)]
    input: TemporalInput,
    #[command(flatten)]
    svm: SvmArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct InterpretArgs {
    /// `model.json` written by a prediction run.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BaArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    /// Count the addition of the edge between two node labels.
    #[arg(long, num_args = 2, value_names = ["U", "V"], conflicts_with = "delete_edge")]
    add_edge: Option<Vec<String>>,
    /// Count the deletion of an existing edge.
    #[arg(long, num_args = 2, value_names = ["U", "V"])]
    delete_edge: Option<Vec<String>>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct BaselineArgs {
    /// `static` or `temporal`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    stream: Option<String>,
    #[arg(long)]
    undirected: bool,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    base_buckets: Option<usize>,
    #[arg(long)]
    auc_negatives: Option<usize>,
    #[arg(long)]
    no_aupr3: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::field("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::field("threads", e.to_string()))?;
    }
    let config = cli.config.as_deref();
    match cli.command {
        Command::StaticLp(a) => static_lp(a, config),
        Command::TemporalLp(a) => temporal_lp(a, config),
        Command::Interpret(a) => interpret_model(a, config),
        Command::GenerateBa(a) => generate_ba(a, config),
        Command::Enumerate(a) => enumerate(a, config),
        Command::EvalBaselines(a) => baselines(a, config),
    }
}

fn dataset_name(s: &mut Settings, flag: Option<String>, path: &str) -> CliResult<String> {
    let stem = Path::new(path)
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.trim_end_matches(".gz").trim_end_matches(".txt").to_string())
        .filter(|n| !n.is_empty() && n != "-")
        .unwrap_or_else(|| "stdin".to_string());
    s.get("dataset", flag, Some(stem))
}

fn load_graph(path: &str, directed: bool) -> CliResult<StaticEdgeList> {
    let list = sio::load_static(Path::new(path), directed).map_err(|e| in_file(path, e))?;
    if list.self_loops + list.duplicates > 0 {
        log::warn!(
            "{path}: dropped {} self-loops and {} duplicate edges",
            list.self_loops,
            list.duplicates
        );
    }
    Ok(list)
}

fn load_stream(path: &str, directed: bool) -> CliResult<TemporalEdgeStream> {
    let stream = if path == "-" {
        let stdin: Box<dyn Read> = Box::new(std::io::stdin());
        sio::read_temporal(sio::maybe_gzip(stdin)?, directed)?
    } else {
        sio::load_temporal(Path::new(path), directed).map_err(|e| in_file(path, e))?
    };
    if stream.self_loops > 0 {
        log::warn!("{path}: dropped {} self-loop interactions", stream.self_loops);
    }
    Ok(stream)
}

fn svm_settings(s: &mut Settings, a: &SvmArgs, seed: u64) -> CliResult<SvmConfig> {
    let d = SvmConfig::default();
    let c = s.get("c", a.c, Some(d.c))?;
    s.check("c", c.is_finite() && c > 0.0, "must be positive")?;
    let epochs = s.get("epochs", a.epochs, Some(d.epochs))?;
    s.check("epochs", epochs > 0, "must be at least 1")?;
    Ok(SvmConfig { c, epochs, seed })
}

fn static_settings(s: &mut Settings, a: &StaticInput) -> CliResult<StaticConfig> {
    let d = StaticConfig::default();
    let k = s.get("k", a.k, Some(d.k))?;
    s.check("k", (2..=9).contains(&k), "must be in 2..=9")?;
    let seed = s.get("seed", a.seed, Some(d.seed))?;
    let auc_negatives = s.get("auc-negatives", a.auc_negatives, Some(d.auc_negatives))?;
    s.check("auc-negatives", auc_negatives > 0, "must be at least 1")?;
    let aupr3 = !s.switch("no-aupr3", a.no_aupr3)?;
    Ok(StaticConfig {
        k,
        seed,
        auc_negatives,
        aupr3,
        ..d
    })
}

fn temporal_settings(s: &mut Settings, a: &TemporalInput) -> CliResult<TemporalConfig> {
    let d = TemporalConfig::default();
    let k = s.get("k", a.k, Some(d.k))?;
    s.check("k", (2..=9).contains(&k), "must be in 2..=9")?;
    let tau = s.get("tau", a.tau, Some(d.tau))?;
    s.check("tau", tau >= 3, "must be at least 3")?;
    let base_buckets = s.get("base-buckets", a.base_buckets, Some(tau.min(d.tau) - 2))?;
    s.check(
        "base-buckets",
        base_buckets >= 1 && base_buckets < tau - 1,
        "must be in 1..tau-1",
    )?;
    let seed = s.get("seed", a.seed, Some(d.seed))?;
    let auc_negatives = s.get("auc-negatives", a.auc_negatives, Some(d.auc_negatives))?;
    s.check("auc-negatives", auc_negatives > 0, "must be at least 1")?;
    let aupr3 = !s.switch("no-aupr3", a.no_aupr3)?;
    Ok(TemporalConfig {
        k,
        tau,
        base_buckets,
        seed,
        auc_negatives,
        aupr3,
        ..d
    })
}

fn static_lp(a: StaticArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("static-lp", config)?;
    let path: String = s.get("graph", a.input.graph.clone().map(path_string), None)?;
    let directed = s.switch("directed", a.input.directed)?;
    let dataset = dataset_name(&mut s, a.input.dataset.clone(), &path)?;
    let mut cfg = static_settings(&mut s, &a.input)?;
    cfg.alpha = s.get("alpha", a.alpha, Some(cfg.alpha))?;
    s.check("alpha", cfg.alpha > 0, "must be at least 1")?;
    cfg.tune_c = s.switch("tune-c", a.tune_c)?;
    cfg.svm = svm_settings(&mut s, &a.svm, cfg.seed)?;
    let out = output_dir(&mut s, &a.output)?;
    let top = s.get("top-dot", a.output.top_dot, Some(12usize))?;

    let list = load_graph(&path, directed)?;
    let mut outcome = run_static_lp(&dataset, &list.graph, &cfg)?;
    finish_report(&mut outcome.report, &s);
    write_outcome(&out, &outcome, top)?;
    print_summary(&outcome.report, &out);
    Ok(())
}

fn temporal_lp(a: TemporalArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("temporal-lp", config)?;
    let path: String = s.get("stream", a.input.stream.clone(), Some("-".to_string()))?;
    let directed = !s.switch("undirected", a.input.undirected)?;
    let dataset = dataset_name(&mut s, a.input.dataset.clone(), &path)?;
    let mut cfg = temporal_settings(&mut s, &a.input)?;
    cfg.svm = svm_settings(&mut s, &a.svm, cfg.seed)?;
    let out = output_dir(&mut s, &a.output)?;
    let top = s.get("top-dot", a.output.top_dot, Some(12usize))?;

    let stream = load_stream(&path, directed)?;
    let mut outcome = run_temporal_lp(&dataset, &stream, &cfg)?;
    finish_report(&mut outcome.report, &s);
    write_outcome(&out, &outcome, top)?;
    print_summary(&outcome.report, &out);
    Ok(())
}

fn interpret_model(a: InterpretArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("interpret", config)?;
    let path: String = s.get("model", a.model.map(path_string), None)?;
    let out = output_dir(&mut s, &a.output)?;
    let top = s.get("top-dot", a.output.top_dot, Some(12usize))?;
    let text = fs::read_to_string(&path).map_err(|e| in_file(&path, e.into()))?;
    let model = LinearModel::from_json(&text).map_err(|e| in_file(&path, e))?;
    let rows = interpret(&model);
    fs::create_dir_all(&out)?;
    write_interpretation_csv(&rows, BufWriter::new(fs::File::create(out.join("interpretation.csv"))?))?;
    write_dots(&out, &rows, top)?;
    let mut stdout = std::io::stdout().lock();
    for row in rows.iter().take(top) {
        writeln!(stdout, "{:>3} {:+.4} {}", row.rank, row.weight, row.decode)?;
    }
    writeln!(stdout, "wrote {}", out.join("interpretation.csv").display())?;
    Ok(())
}

fn generate_ba(a: BaArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("generate-ba", config)?;
    let n = s.get("n", a.n, Some(1000usize))?;
    let m = s.get("m", a.m, Some(2usize))?;
    let seed = s.get("seed", a.seed, Some(0u64))?;
    let output: Option<String> = match a.output.map(path_string) {
        Some(p) => Some(p),
        None => s
            .get("output", None, Some(String::new()))
            .map(|p| Some(p).filter(|p| !p.is_empty()))?,
    };
    let stream = sst_core::generators::barabasi_albert_stream(n, m, seed)?;
    match output {
        Some(p) => sio::write_temporal(&stream, BufWriter::new(fs::File::create(p)?))?,
        None => sio::write_temporal(&stream, BufWriter::new(std::io::stdout().lock()))?,
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("enumerate", config)?;
    let path: String = s.get("graph", a.graph.map(path_string), None)?;
    let directed = s.switch("directed", a.directed)?;
    let k = s.get("k", a.k, Some(3usize))?;
    s.check("k", (2..=9).contains(&k), "must be in 2..=9")?;
    let (pair, addition) = match (a.add_edge, a.delete_edge) {
        (Some(p), None) => (p, true),
        (None, Some(p)) => (p, false),
        _ => return Err(CliError::field("enumerate.change", "give --add-edge or --delete-edge")),
    };
    let list = load_graph(&path, directed)?;
    let node = |label: &str| -> CliResult<u32> {
        list.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u32)
            .ok_or_else(|| SstError::InvalidChange(format!("unknown node {label:?}")).into())
    };
    let (u, v) = (node(&pair[0])?, node(&pair[1])?);
    let change = if addition {
        GraphChange::add_edge(u, v)
    } else {
        GraphChange::delete_edge(u, v)
    };
    let registry = LabelRegistry::new();
    let vector = count_transitions(&list.graph, &change, &CounterConfig::new(k)?, &registry)?;
    let mut doc = vector.to_json(&registry);
    doc["nodes"] = json!({"source": pair[0], "target": pair[1]});
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &doc)?;
    writeln!(stdout)?;
    Ok(())
}

fn baselines(a: BaselineArgs, config: Option<&Path>) -> CliResult<()> {
    let mut s = Settings::load("eval-baselines", config)?;
    let default_mode = if a.stream.is_some() { "temporal" } else { "static" };
    let mode: String = s.get("mode", a.mode.clone(), Some(default_mode.to_string()))?;
    let out = s.get("out", a.out.clone().map(path_string), Some("sst-out".to_string()))?;
    let mut reports = match mode.as_str() {
        "static" => {
            let path: String = s.get("graph", a.graph.map(path_string), None)?;
            let directed = s.switch("directed", a.directed)?;
            let dataset = dataset_name(&mut s, a.dataset.clone(), &path)?;
            let input = StaticInput {
                graph: None,
                directed,
                dataset: None,
                k: None,
                seed: a.seed,
                auc_negatives: a.auc_negatives,
                no_aupr3: a.no_aupr3,
            };
            let cfg = static_settings(&mut s, &input)?;
            let list = load_graph(&path, directed)?;
            run_static_baselines(&dataset, &list.graph, &cfg)?
        }
        "temporal" => {
            let path: String = s.get("stream", a.stream.clone(), Some("-".to_string()))?;
            let directed = !s.switch("undirected", a.undirected)?;
            let dataset = dataset_name(&mut s, a.dataset.clone(), &path)?;
            let input = TemporalInput {
                stream: None,
                undirected: !directed,
                dataset: None,
                k: None,
                tau: a.tau,
                base_buckets: a.base_buckets,
                seed: a.seed,
                auc_negatives: a.auc_negatives,
                no_aupr3: a.no_aupr3,
            };
            let cfg = temporal_settings(&mut s, &input)?;
            let stream = load_stream(&path, directed)?;
            run_temporal_baselines(&dataset, &stream, &cfg)?
        }
        other => {
            return Err(CliError::field(
                "eval-baselines.mode",
                format!("expected static or temporal, got {other:?}"),
            ))
        }
    };
    for r in &mut reports {
        finish_report(r, &s);
    }
    let out = PathBuf::from(out);
    fs::create_dir_all(&out)?;
    let file = out.join("baselines.json");
    fs::write(&file, serde_json::to_string_pretty(&reports)? + "\n")?;
    for r in &reports {
        print_summary(r, &out);
    }
    Ok(())
}

fn in_file(path: &str, e: SstError) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{path}: {}", err.message);
    err
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

fn output_dir(s: &mut Settings, a: &OutputArgs) -> CliResult<PathBuf> {
    let out = s.get("out", a.out.clone().map(path_string), Some("sst-out".to_string()))?;
    Ok(PathBuf::from(out))
}

fn finish_report(report: &mut EvaluationReport, s: &Settings) {
    report.version = VERSION.to_string();
    let protocol = std::mem::take(&mut report.config);
    report.config = json!({"run": s.echo(), "protocol": protocol});
}

fn write_outcome(out: &Path, outcome: &LpOutcome, top: usize) -> CliResult<()> {
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), outcome.report.to_json()? + "\n")?;
    fs::write(out.join("model.json"), outcome.model.to_json()? + "\n")?;
    write_interpretation_csv(
        &outcome.interpretation,
        BufWriter::new(fs::File::create(out.join("interpretation.csv"))?),
    )?;
    if let Some(curve) = &outcome.pr_curve {
        curve.write_csv(BufWriter::new(fs::File::create(out.join("prcurve.csv"))?))?;
    }
    write_dots(out, &outcome.interpretation, top)
}

fn write_dots(out: &Path, rows: &[InterpretationRow], top: usize) -> CliResult<()> {
    if top == 0 {
        return Ok(());
    }
    let dir = out.join("ssts");
    fs::create_dir_all(&dir)?;
    for row in rows.iter().take(top) {
        let desc = SstDescription::parse(&row.label)?;
        let name = format!("rank{:02} w={:+.3}", row.rank, row.weight);
        fs::write(dir.join(format!("rank{:02}.dot", row.rank)), desc.to_dot(&name))?;
    }
    Ok(())
}

fn print_summary(r: &EvaluationReport, out: &Path) {
    let aupr3 = r
        .aupr3
        .map(|a| format!("{a:.4} ({} pos / {} neg)", r.aupr3_pos, r.aupr3_neg))
        .unwrap_or_else(|| "skipped".to_string());
    println!(
        "{} [{}] k={} seed={}: AUC {:.4} ({} pos / {} neg), AUPR3 {}, {:.1}s -> {}",
        r.dataset,
        r.mode,
        r.k,
        r.seed,
        r.auc,
        r.n_pos,
        r.n_neg,
        aupr3,
        r.runtime_s,
        out.display()
    );
}
