use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use web_time::Instant;

use pgscout::bench::{
    bench_csv, datatype_errors, datatype_spec, desk_spec, evaluate, gen_synthetic, inject_noise,
    majority_f1, run_benchmark, social_example, sweep, sweep_csv, BenchGrid, F1Report, GroundTruth,
    NoiseProfile, SyntheticSpec,
};
use pgscout::dataio::{
    load_graph, stream_batches, write_csv_pair, write_jsonl, BatchSize, GraphSource,
};
use pgscout::lsh::{CollisionRule, LshMethod};
use pgscout::model::{PropertyGraph, SchemaGraph};
use pgscout::pipeline::{
    discover_incremental, Discoverer, Discovery, DiscoveryConfig, StageTimings,
};
use pgscout::serialize::{
    assignment_csv, emit_pg_schema, emit_xsd, parse_pg_schema, schema_from_json, schema_to_json,
    write_text, SchemaMode,
};

const OUT_ENV: &str = "PGSCOUT_OUT";
const DEFAULT_OUT: &str = "pgscout-out";

/// Marks failures caused by the caller (exit code 1).
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "pgscout",
    version,
    about = "Discover schemas of property graphs"
)]
struct Cli {
    /// Worker threads for parallel stages (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML file whose keys mirror the command-line flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-batch discovery; writes schema files and a timing log.
    Discover(DiscoverCmd),
    /// Batch-wise discovery with per-batch schema snapshots.
    Incremental(IncrementalCmd),
    /// Drop properties and labels from a graph, recording the ground truth.
    InjectNoise(NoiseCmd),
    /// Generate a synthetic graph with known types.
    GenSynthetic(SynthCmd),
    /// Score an assignment (or a fresh discovery run) against ground truth.
    Evaluate(EvaluateCmd),
    /// ELSH F1* over an alpha × tables grid plus the adaptive choice.
    Sweep(SweepCmd),
    /// F1* over a noise × label-availability grid.
    Benchmark(BenchmarkCmd),
}

#[derive(Args, Clone, Default)]
struct InputArgs {
    /// JSONL graph file.
    #[arg(long, conflicts_with_all = ["nodes", "edges"])]
    input: Option<PathBuf>,
    /// CSV node file (with --edges).
    #[arg(long, requires = "edges")]
    nodes: Option<PathBuf>,
    /// CSV edge file (with --nodes).
    #[arg(long, requires = "nodes")]
    edges: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct PipelineArgs {
    #[arg(long)]
    method: Option<LshMethod>,
    /// Jaccard threshold for merging types.
    #[arg(long)]
    theta: Option<f64>,
    /// Label embedding dimension.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Estimate LSH parameters from a sample (default true).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    adaptive: Option<bool>,
    #[arg(long)]
    bucket_length: Option<f64>,
    #[arg(long)]
    tables: Option<usize>,
    /// Overrides the label-count multiplier of the adaptive bucket length.
    #[arg(long)]
    alpha: Option<f64>,
    /// `all`: same bucket in every table; `any`: a shared bucket in one table.
    #[arg(long)]
    collision_rule: Option<CollisionRule>,
    /// Infer presence, datatypes and cardinalities.
    #[arg(long)]
    postprocess: bool,
    /// Infer datatypes from seeded samples instead of full scans.
    #[arg(long)]
    sample_datatypes: bool,
}

#[derive(Args)]
struct DiscoverCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output directory (default: $PGSCOUT_OUT, then ./pgscout-out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IncrementalCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Elements per batch, or ALL.
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum GraphFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Args)]
struct NoiseCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Fraction of property instances to remove.
    #[arg(long)]
    drop_pct: Option<f64>,
    /// Fraction of nodes and of edges keeping their labels.
    #[arg(long)]
    label_avail: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<GraphFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Preset {
    Social,
    #[default]
    Desk,
    Datatype,
}

#[derive(Args)]
struct SynthCmd {
    #[arg(long, value_enum, conflicts_with = "spec")]
    preset: Option<Preset>,
    /// JSON synthetic spec (node and edge generators).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Node count for the desk preset.
    #[arg(long)]
    node_count: Option<usize>,
    /// Edge count for the desk preset.
    #[arg(long)]
    edge_count: Option<usize>,
    /// Nodes per type for the datatype preset.
    #[arg(long)]
    per_type: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<GraphFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateCmd {
    /// `element_id,kind,type` ground truth.
    #[arg(long)]
    truth: PathBuf,
    /// Assignment to score; without it discovery runs on the input graph.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    input: InputArgs,
    /// Ground truth; defaults to the input's own label keys.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    table_grid: Vec<usize>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkCmd {
    /// NAME=PATH of a JSONL graph; repeatable. Defaults to the desk preset.
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    /// Noise and availability fractions, e.g. `0,0.1,0.2,0.3,0.4:0,0.5,1`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    methods: Vec<LshMethod>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Keys mirror the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
struct FileConfig {
    #[serde(flatten)]
    discovery: DiscoveryConfig,
    out: Option<PathBuf>,
    input: Option<PathBuf>,
    nodes: Option<PathBuf>,
    edges: Option<PathBuf>,
    batch_size: Option<String>,
    threads: Option<usize>,
    drop_pct: Option<f64>,
    label_avail: Option<f64>,
    format: Option<GraphFormat>,
    preset: Option<Preset>,
    node_count: Option<usize>,
    edge_count: Option<usize>,
    per_type: Option<usize>,
    alphas: Option<Vec<f64>>,
    table_grid: Option<Vec<usize>>,
    grid: Option<String>,
    seeds: Option<Vec<u64>>,
    methods: Option<Vec<LshMethod>>,
    datasets: Option<Vec<String>>,
    truth: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| input_error(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| input_error(format!("config {}: {e}", path.display())))
    }

    fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.out.clone())
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn source(&self, args: &InputArgs) -> anyhow::Result<GraphSource> {
        let input = args.input.clone().or_else(|| self.input.clone());
        let nodes = args.nodes.clone().or_else(|| self.nodes.clone());
        let edges = args.edges.clone().or_else(|| self.edges.clone());
        match (input, nodes, edges) {
            (Some(p), None, None) => Ok(GraphSource::jsonl(p)),
            (None, Some(n), Some(e)) => Ok(GraphSource::csv_pair(n, e)),
            (None, None, None) => Err(input_error(
                "an input graph is required (--input, or --nodes with --edges)",
            )),
            _ => Err(input_error(
                "give either --input or both --nodes and --edges",
            )),
        }
    }

    fn discovery(&self, a: &PipelineArgs) -> anyhow::Result<DiscoveryConfig> {
        let mut c = self.discovery.clone();
        if let Some(m) = a.method {
            c.method = m;
        }
        if let Some(t) = a.theta {
            c.theta = t;
        }
        if let Some(d) = a.dim {
            c.dim = d;
        }
        if let Some(s) = a.seed {
            c.seed = s;
        }
        if let Some(ad) = a.adaptive {
            c.adaptive = ad;
        }
        c.bucket_length = a.bucket_length.or(c.bucket_length);
        c.tables = a.tables.or(c.tables);
        c.alpha = a.alpha.or(c.alpha);
        if let Some(r) = a.collision_rule {
            c.collision_rule = r;
        }
        c.postprocess |= a.postprocess;
        c.sample_datatypes |= a.sample_datatypes;
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<InputError>() {
            return 1;
        }
        if let Some(pe) = cause.downcast_ref::<pgscout::Error>() {
            return if pe.is_input_error() { 1 } else { 2 };
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            bail!(input_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Discover(c) => cmd_discover(&file, c),
        Command::Incremental(c) => cmd_incremental(&file, c),
        Command::InjectNoise(c) => cmd_inject_noise(&file, c),
        Command::GenSynthetic(c) => cmd_gen_synthetic(&file, c),
        Command::Evaluate(c) => cmd_evaluate(&file, c),
        Command::Sweep(c) => cmd_sweep(&file, c),
        Command::Benchmark(c) => cmd_benchmark(&file, c),
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| output_error(format!("cannot create {}: {e}", dir.display())))
}

/// Failures writing results are environmental, not caused by the input (exit code 2).
fn output_error(msg: String) -> anyhow::Error {
    anyhow::anyhow!(msg)
}

fn emit(path: &Path, text: &str) -> anyhow::Result<()> {
    write_text(path, text).map_err(|e| output_error(format!("{e:#}: {}", source_msg(&e))))
}

fn source_msg(e: &pgscout::Error) -> String {
    std::error::Error::source(e)
        .map(ToString::to_string)
        .unwrap_or_default()
}

fn run_discovery(source: &GraphSource, config: &DiscoveryConfig) -> anyhow::Result<Discovery> {
    let t = Instant::now();
    let graph = load_graph(source)?;
    let load = t.elapsed().as_secs_f64();
    let mut d = Discoverer::new(config.clone())?;
    d.add_load_time(load);
    let (nodes, edges) = graph.into_parts();
    d.process_batch(pgscout::dataio::Batch {
        index: 0,
        nodes,
        edges,
    })?;
    Ok(d.finish(config.postprocess))
}

/// Writes every schema artifact and re-parses each one before returning.
fn write_schema_outputs(out: &Path, schema: &SchemaGraph, strict: bool) -> anyhow::Result<()> {
    create_dir(out)?;
    let loose = emit_pg_schema(schema, SchemaMode::Loose)?;
    parse_pg_schema(&loose).context("LOOSE output does not parse")?;
    emit(&out.join("schema.loose.pgs"), &loose)?;
    let strict_path = out.join("schema.strict.pgs");
    if strict {
        let text = emit_pg_schema(schema, SchemaMode::Strict)?;
        parse_pg_schema(&text).context("STRICT output does not parse")?;
        emit(&strict_path, &text)?;
    } else if strict_path.exists() {
        // a stale STRICT file would contradict the other outputs
        fs::remove_file(&strict_path)
            .map_err(|e| input_error(format!("{}: {e}", strict_path.display())))?;
    }
    emit(&out.join("schema.xsd"), &emit_xsd(schema))?;
    let json = schema_to_json(schema);
    if schema_from_json(&json)? != schema.types_only() {
        bail!("schema JSON does not round-trip");
    }
    emit(&out.join("schema.json"), &json)?;
    emit(&out.join("assignment.csv"), &assignment_csv(schema)?)?;
    Ok(())
}

fn timings_json(timings: &StageTimings) -> anyhow::Result<serde_json::Value> {
    let mut v = serde_json::to_value(timings)?;
    v["total"] = serde_json::json!(timings.total());
    Ok(v)
}

fn write_timings(out: &Path, timings: &StageTimings) -> anyhow::Result<()> {
    emit(
        &out.join("timings.json"),
        &(serde_json::to_string_pretty(&timings_json(timings)?)? + "\n"),
    )?;
    Ok(())
}

fn finish_outputs(out: &Path, mut d: Discovery, strict: bool) -> anyhow::Result<()> {
    let t = Instant::now();
    write_schema_outputs(out, &d.schema, strict)?;
    d.timings.serialize += t.elapsed().as_secs_f64();
    write_timings(out, &d.timings)?;
    if !d.dropped_edges.is_empty() {
        log::warn!(
            "{} edges dropped for unknown endpoints",
            d.dropped_edges.len()
        );
    }
    println!(
        "{} node types, {} edge types -> {}",
        d.schema.node_types.len(),
        d.schema.edge_types.len(),
        out.display()
    );
    Ok(())
}

fn cmd_discover(file: &FileConfig, c: DiscoverCmd) -> anyhow::Result<()> {
    let config = file.discovery(&c.pipeline)?;
    let source = file.source(&c.input)?;
    let out = file.out_dir(c.out);
    let d = run_discovery(&source, &config)?;
    finish_outputs(&out, d, config.postprocess)
}

fn cmd_incremental(file: &FileConfig, c: IncrementalCmd) -> anyhow::Result<()> {
    let config = file.discovery(&c.pipeline)?;
    let size: BatchSize = c
        .batch_size
        .or_else(|| file.batch_size.clone())
        .unwrap_or_else(|| "10000".into())
        .parse()?;
    let source = file.source(&c.input)?.with_batch_size(size);
    let out = file.out_dir(c.out);
    create_dir(&out)?;
    let mut write_failure = None;
    let d = discover_incremental(stream_batches(&source)?, &config, |report, schema| {
        let path = out.join(format!("schema.batch{}.json", report.index));
        write_text(&path, &schema_to_json(schema)).inspect_err(|e| {
            write_failure = Some(output_error(format!("{e:#}: {}", source_msg(e))));
        })
    });
    if let Some(e) = write_failure {
        return Err(e);
    }
    let d = d?;
    finish_outputs(&out, d, true)
}

fn write_graph(
    out: &Path,
    graph: &PropertyGraph,
    truth: &GroundTruth,
    format: GraphFormat,
) -> anyhow::Result<()> {
    create_dir(out)?;
    match format {
        GraphFormat::Jsonl => write_jsonl(graph, &out.join("graph.jsonl"))
            .map_err(|e| output_error(format!("{e}: {}", source_msg(&e))))?,
        GraphFormat::Csv => write_csv_pair(graph, &out.join("nodes.csv"), &out.join("edges.csv"))
            .map_err(|e| output_error(format!("{e}: {}", source_msg(&e))))?,
    }
    emit(&out.join("truth.csv"), &truth.to_csv()?)?;
    println!(
        "{} nodes, {} edges -> {}",
        graph.node_count(),
        graph.edge_count(),
        out.display()
    );
    Ok(())
}

fn cmd_inject_noise(file: &FileConfig, c: NoiseCmd) -> anyhow::Result<()> {
    let graph = load_graph(&file.source(&c.input)?)?;
    let profile = NoiseProfile {
        property_drop_pct: c.drop_pct.or(file.drop_pct).unwrap_or(0.0),
        label_availability: c.label_avail.or(file.label_avail).unwrap_or(1.0),
        seed: c.seed.unwrap_or(file.discovery.seed),
    };
    let (noisy, truth) = inject_noise(&graph, &profile)?;
    write_graph(
        &file.out_dir(c.out),
        &noisy,
        &truth,
        c.format.or(file.format).unwrap_or_default(),
    )
}

fn cmd_gen_synthetic(file: &FileConfig, c: SynthCmd) -> anyhow::Result<()> {
    let seed = c.seed.unwrap_or(file.discovery.seed);
    let spec: Option<SyntheticSpec> = if let Some(path) = &c.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        Some(serde_json::from_str(&text)?)
    } else {
        match c.preset.or(file.preset).unwrap_or_default() {
            Preset::Social => None,
            Preset::Desk => Some(desk_spec(
                c.node_count.or(file.node_count).unwrap_or(20_000),
                c.edge_count.or(file.edge_count).unwrap_or(40_000),
            )),
            Preset::Datatype => Some(datatype_spec(c.per_type.or(file.per_type).unwrap_or(2_000))),
        }
    };
    let graph = match &spec {
        Some(s) => gen_synthetic(s, seed)?,
        None => social_example(),
    };
    let out = file.out_dir(c.out);
    write_graph(
        &out,
        &graph,
        &GroundTruth::of(&graph),
        c.format.or(file.format).unwrap_or_default(),
    )?;
    if let Some(s) = spec {
        emit(
            &out.join("spec.json"),
            &(serde_json::to_string_pretty(&s)? + "\n"),
        )?;
    }
    Ok(())
}

fn read_truth(path: &Path) -> anyhow::Result<GroundTruth> {
    let text =
        fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(GroundTruth::from_csv(&text, &path.display().to_string())?)
}

fn report_json(nodes: &F1Report, edges: &F1Report) -> serde_json::Value {
    serde_json::json!({
        "nodeF1": nodes.f1,
        "edgeF1": edges.f1,
        "nodeMicroAccuracy": nodes.micro_accuracy,
        "edgeMicroAccuracy": edges.micro_accuracy,
        "nodeTypes": nodes.per_type,
        "edgeTypes": edges.per_type,
    })
}

fn cmd_evaluate(file: &FileConfig, c: EvaluateCmd) -> anyhow::Result<()> {
    let truth = read_truth(&c.truth)?;
    let mut report = if let Some(path) = &c.assignment {
        let found = read_truth(path)?;
        report_json(
            &majority_f1(&found.nodes, &truth.nodes)?,
            &majority_f1(&found.edges, &truth.edges)?,
        )
    } else {
        let config = file.discovery(&c.pipeline)?;
        let d = run_discovery(&file.source(&c.input)?, &config)?;
        let e = evaluate(&d, &truth)?;
        let mut r = report_json(&e.nodes, &e.edges);
        if config.sample_datatypes {
            r["datatypeErrors"] = serde_json::to_value(datatype_errors(&d.stats, config.seed)?)?;
        }
        r["wallTimes"] = timings_json(&d.timings)?;
        r
    };
    if report.get("wallTimes").is_none() {
        report["wallTimes"] = serde_json::Value::Null;
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    let out = file.out_dir(c.out);
    create_dir(&out)?;
    emit(&out.join("eval.json"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_sweep(file: &FileConfig, c: SweepCmd) -> anyhow::Result<()> {
    let base = file.discovery(&c.pipeline)?;
    let graph = load_graph(&file.source(&c.input)?)?;
    let truth = match c.truth.or_else(|| file.truth.clone()) {
        Some(p) => read_truth(&p)?,
        None => GroundTruth::of(&graph),
    };
    let pick = |flag: Vec<f64>, cfg: &Option<Vec<f64>>, default: &[f64]| {
        if !flag.is_empty() {
            flag
        } else {
            cfg.clone().unwrap_or_else(|| default.to_vec())
        }
    };
    let alphas = pick(c.alphas, &file.alphas, &[0.5, 0.8, 1.0, 1.5, 2.0]);
    let tables = if !c.table_grid.is_empty() {
        c.table_grid
    } else {
        file.table_grid
            .clone()
            .unwrap_or_else(|| vec![5, 10, 20, 30])
    };
    let rows = sweep(&graph, &truth, &alphas, &tables, &base)?;
    let out = file.out_dir(c.out);
    create_dir(&out)?;
    emit(&out.join("sweep.csv"), &sweep_csv(&rows)?)?;
    println!(
        "{} sweep rows -> {}",
        rows.len(),
        out.join("sweep.csv").display()
    );
    Ok(())
}

fn parse_list(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| input_error(format!("bad grid value `{p}`: {e}")))
        })
        .collect()
}

fn cmd_benchmark(file: &FileConfig, c: BenchmarkCmd) -> anyhow::Result<()> {
    let base = file.discovery(&c.pipeline)?;
    let mut grid = BenchGrid::default();
    if let Some(g) = c.grid.or_else(|| file.grid.clone()) {
        let (noise, avail) = g
            .split_once(':')
            .ok_or_else(|| input_error("--grid takes NOISE_LIST:AVAILABILITY_LIST"))?;
        grid.noise = parse_list(noise)?;
        grid.label_availability = parse_list(avail)?;
    }
    if !c.seeds.is_empty() {
        grid.seeds = c.seeds;
    } else if let Some(s) = &file.seeds {
        grid.seeds = s.clone();
    }
    if !c.methods.is_empty() {
        grid.methods = c.methods;
    } else if let Some(m) = &file.methods {
        grid.methods = m.clone();
    }
    let specs = if !c.datasets.is_empty() {
        c.datasets
    } else {
        file.datasets.clone().unwrap_or_default()
    };
    let mut datasets = Vec::new();
    for s in &specs {
        let (name, path) = s
            .split_once('=')
            .ok_or_else(|| input_error(format!("--dataset expects NAME=PATH, got `{s}`")))?;
        datasets.push((name.to_string(), load_graph(&GraphSource::jsonl(path))?));
    }
    if datasets.is_empty() {
        datasets.push((
            "desk".to_string(),
            gen_synthetic(&desk_spec(20_000, 40_000), base.seed)?,
        ));
    }
    if grid.noise.is_empty() || grid.label_availability.is_empty() || grid.seeds.is_empty() {
        return Err(anyhow!(input_error("benchmark grid must not be empty")));
    }
    let rows = run_benchmark(&datasets, &grid, &base);
    let out = file.out_dir(c.out);
    create_dir(&out)?;
    emit(&out.join("benchmark.csv"), &bench_csv(&rows)?)?;
    println!(
        "{} benchmark rows -> {}",
        rows.len(),
        out.join("benchmark.csv").display()
    );
    Ok(())
}
