use std::error::Error;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tosg::brw::{brw_extract, BrwParams, WalkDirection};
use tosg::export::{diff_versions, export_bundle, ExportOptions};
use tosg::ibs::{ibs_extract_with_scores, write_scores_tsv, IbsParams, PprParams};
use tosg::kg::{ingest_path, IngestOptions, KnowledgeGraph, Provenance, Subgraph, RDF_TYPE};
use tosg::quality::{quality_report, render_table, targets_in, write_reports_tsv};
use tosg::rgcn::{check_pruning_invariance, FeatureAssignment, RgcnReferenceModel};
use tosg::sparql::{sparql_extract, Backend, EndpointConfig, SparqlError, SparqlParams};
use tosg::task::{build_labels, make_splits, resolve_targets, TaskConfig, TaskKind};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

/// Task-oriented subgraph extraction from RDF knowledge graphs.
#[derive(Parser)]
#[command(name = "tosg", version)]
struct Cli {
    /// Task configuration (TOML); subcommands can override it with --task.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output on stderr (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a dump and report its size; optionally re-emit it.
    Ingest(IngestArgs),
    /// Extract a task-oriented subgraph.
    Extract(ExtractArgs),
    /// Quality indicators of one subgraph.
    Metrics(MetricsArgs),
    /// Side-by-side indicators of several subgraphs.
    Compare(CompareArgs),
    /// Check that pruning target-unreachable vertices leaves RGCN target
    /// embeddings unchanged.
    Validate(ValidateArgs),
    /// Write a trainer-ready bundle.
    Export(ExportArgs),
    /// Triples added and removed between two versions of a dump.
    DiffVersions(DiffArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Type predicate IRI (defaults to the config value, then rdf:type).
    #[arg(long)]
    type_predicate: Option<String>,
    /// Fail on the first malformed line.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct IngestArgs {
    /// N-Triples (optionally gzipped) or s,p,o CSV.
    input: PathBuf,
    #[command(flatten)]
    graph: GraphInput,
    /// Write the parsed graph as N-Triples.
    #[arg(long)]
    nt: Option<PathBuf>,
    /// Write the parsed graph as s,p,o CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the vertex dictionary as TSV.
    #[arg(long)]
    dictionary: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Brw,
    Ibs,
    Sparql,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Outgoing,
    Both,
}

impl From<Dir> for WalkDirection {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Outgoing => WalkDirection::Outgoing,
            Dir::Both => WalkDirection::Both,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, value_enum)]
    engine: Engine,
    /// Task configuration (TOML).
    #[arg(long)]
    task: Option<PathBuf>,
    /// Input graph for brw and ibs.
    #[arg(long)]
    kg: Option<PathBuf>,
    /// Run sparql against a local dump instead of an endpoint.
    #[arg(long, conflicts_with = "endpoint")]
    local: Option<PathBuf>,
    /// SPARQL endpoint URL.
    #[arg(long, env = "TOSG_ENDPOINT")]
    endpoint: Option<String>,
    /// Graph IRI, scoped with FROM.
    #[arg(long)]
    graph: Option<String>,
    /// Bearer token for the endpoint.
    #[arg(long, env = "TOSG_TOKEN", hide_env_values = true)]
    token: Option<String>,
    /// Predicate direction: 1 outgoing, 2 both.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    d: u8,
    /// Hops: walk length for brw, pattern radius for sparql.
    #[arg(long, default_value_t = 1)]
    h: u8,
    /// Batch size: initial vertices (brw), partition size (ibs), page size (sparql).
    #[arg(long, default_value_t = 20_000)]
    bs: u64,
    /// Parallel sparql workers.
    #[arg(long, default_value_t = 4)]
    workers: usize,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = 2)]
    retries: u32,
    /// Do not ask the endpoint for gzip.
    #[arg(long)]
    no_compress: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Dir::Both)]
    direction: Dir,
    /// Walks per initial vertex (brw).
    #[arg(long, default_value_t = 1)]
    walks_per_seed: usize,
    /// Neighbors kept per target (ibs).
    #[arg(long, default_value_t = 16)]
    top_k: usize,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0002)]
    epsilon: f64,
    /// Write PPR scores (ibs) to this TSV.
    #[arg(long)]
    scores_out: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    input: GraphInput,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    subgraph: PathBuf,
    #[arg(long)]
    task: Option<PathBuf>,
    /// Full graph for target resolution.
    #[arg(long)]
    kg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    input: GraphInput,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Args)]
struct CompareArgs {
    /// `name=path` pairs.
    #[arg(required = true)]
    subgraphs: Vec<String>,
    #[arg(long)]
    task: Option<PathBuf>,
    #[arg(long)]
    kg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    input: GraphInput,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    subgraph: PathBuf,
    #[arg(long)]
    task: Option<PathBuf>,
    #[arg(long)]
    kg: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pass messages along edge direction only.
    #[arg(long)]
    no_inverse: bool,
    #[command(flatten)]
    input: GraphInput,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    subgraph: PathBuf,
    #[arg(long)]
    task: Option<PathBuf>,
    /// Full graph for labels and splits; defaults to the subgraph.
    #[arg(long)]
    kg: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Keep label-predicate edges of labeled targets (default for LP).
    #[arg(long, conflicts_with = "exclude_label_edges")]
    include_label_edges: bool,
    /// Drop label-predicate edges of labeled targets (default for NC).
    #[arg(long)]
    exclude_label_edges: bool,
    #[command(flatten)]
    input: GraphInput,
}

#[derive(Args)]
struct DiffArgs {
    old: PathBuf,
    new: PathBuf,
    /// Write added triples as N-Triples.
    #[arg(long)]
    added: Option<PathBuf>,
    /// Write removed triples as N-Triples.
    #[arg(long)]
    removed: Option<PathBuf>,
    #[command(flatten)]
    input: GraphInput,
}

struct Ctx {
    config: Option<PathBuf>,
}

impl Ctx {
    fn task(&self, explicit: &Option<PathBuf>) -> Result<TaskConfig> {
        let path = explicit
            .as_ref()
            .or(self.config.as_ref())
            .ok_or("a task configuration is required (--task or --config)")?;
        Ok(TaskConfig::load(path)?)
    }

    fn optional_task(&self, explicit: &Option<PathBuf>) -> Result<Option<TaskConfig>> {
        match explicit.as_ref().or(self.config.as_ref()) {
            Some(p) => Ok(Some(TaskConfig::load(p)?)),
            None => Ok(None),
        }
    }
}

fn type_predicate(input: &GraphInput, cfg: Option<&TaskConfig>) -> String {
    input
        .type_predicate
        .clone()
        .or_else(|| cfg.and_then(|c| c.type_predicate.clone()))
        .unwrap_or_else(|| RDF_TYPE.to_string())
}

fn load(path: &Path, input: &GraphInput, cfg: Option<&TaskConfig>) -> Result<KnowledgeGraph> {
    let opts = IngestOptions {
        type_predicate: type_predicate(input, cfg),
        strict: input.strict,
    };
    let out = ingest_path(path, &opts)?;
    if !out.errors.is_empty() {
        log::warn!("{}: skipped {} malformed lines", path.display(), out.errors.len());
        for e in out.errors.iter().take(5) {
            log::warn!("  {e}");
        }
    }
    log::info!(
        "{}: {} triples, {} vertices",
        path.display(),
        out.graph.num_triples(),
        out.graph.num_vertices()
    );
    Ok(out.graph)
}

fn load_subgraph(path: &Path, input: &GraphInput, cfg: Option<&TaskConfig>) -> Result<Subgraph> {
    let graph = load(path, input, cfg)?;
    let side = path.with_file_name("provenance.json");
    let provenance = if side.exists() {
        serde_json::from_slice(&fs::read(side)?)?
    } else {
        Provenance::new("file")
    };
    Ok(Subgraph::new(graph, provenance))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_subgraph(sg: &Subgraph, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    sg.write_ntriples(create(&out.join("subgraph.nt"))?)?;
    sg.write_csv(create(&out.join("subgraph.csv"))?)?;
    let mut prov = serde_json::to_vec_pretty(sg.provenance())?;
    prov.push(b'\n');
    fs::write(out.join("provenance.json"), prov)?;
    Ok(())
}

fn ingest(ctx: &Ctx, a: IngestArgs) -> Result<()> {
    let cfg = ctx.optional_task(&None)?;
    let opts = IngestOptions {
        type_predicate: type_predicate(&a.graph, cfg.as_ref()),
        strict: a.graph.strict,
    };
    let out = ingest_path(&a.input, &opts)?;
    let g = &out.graph;
    println!("statements\t{}", out.statements);
    println!("triples\t{}", g.num_triples());
    println!("vertices\t{}", g.num_vertices());
    println!("predicates\t{}", g.num_predicates());
    println!("node_types\t{}", g.num_node_types());
    println!("malformed_lines\t{}", out.errors.len());
    for e in &out.errors {
        log::warn!("{e}");
    }
    if let Some(p) = &a.nt {
        g.write_ntriples(create(p)?)?;
    }
    if let Some(p) = &a.csv {
        g.write_csv(create(p)?)?;
    }
    if let Some(p) = &a.dictionary {
        g.write_dictionary_tsv(create(p)?)?;
    }
    Ok(())
}

fn extract(ctx: &Ctx, a: ExtractArgs) -> Result<()> {
    let cfg = ctx.task(&a.task)?;
    let task = &cfg.task;
    let sg = match a.engine {
        Engine::Brw | Engine::Ibs => {
            let path = a.kg.as_ref().ok_or("--kg is required for brw and ibs")?;
            let kg = load(path, &a.input, Some(&cfg))?;
            if let Engine::Brw = a.engine {
                let params = BrwParams {
                    walk_length: a.h as usize,
                    batch_size: a.bs as usize,
                    walks_per_seed: a.walks_per_seed,
                    seed: a.seed,
                    direction: a.direction.into(),
                };
                brw_extract(&kg, task, &params)?
            } else {
                let params = IbsParams {
                    batch_size: a.bs as usize,
                    top_k: a.top_k,
                    ppr: PprParams {
                        alpha: a.alpha,
                        epsilon: a.epsilon,
                        direction: a.direction.into(),
                    },
                    seed: a.seed,
                };
                let outcome = ibs_extract_with_scores(&kg, task, &params)?;
                if let Some(p) = &a.scores_out {
                    write_scores_tsv(&kg, &outcome.scores, create(p)?)?;
                }
                outcome.subgraph
            }
        }
        Engine::Sparql => {
            let params = SparqlParams {
                d: a.d,
                h: a.h,
                batch_size: a.bs,
                workers: a.workers,
            };
            let result = match (&a.local, &a.endpoint) {
                (Some(path), _) => {
                    let kg = load(path, &a.input, Some(&cfg))?;
                    sparql_extract(Backend::Local(&kg), task, &params)
                }
                (None, Some(url)) => {
                    let mut ep = EndpointConfig::new(url.clone());
                    ep.graph = a.graph.clone();
                    ep.timeout = Duration::try_from_secs_f64(a.timeout)?;
                    ep.retries = a.retries;
                    ep.compress = !a.no_compress;
                    ep.type_predicate = type_predicate(&a.input, Some(&cfg));
                    ep.bearer_token = a.token.clone();
                    sparql_extract(Backend::Endpoint(ep), task, &params)
                }
                (None, None) => return Err("sparql needs --local FILE or --endpoint URL".into()),
            };
            match result {
                Err(SparqlError::JobFailed { index, job, cause, partial }) => {
                    fs::create_dir_all(&a.out)?;
                    let manifest = serde_json::json!({
                        "failed_job": index,
                        "job": job,
                        "cause": cause.to_string(),
                        "completed_jobs": partial.completed,
                        "rows": partial.rows.len(),
                    });
                    fs::write(a.out.join("partial_manifest.json"), serde_json::to_vec_pretty(&manifest)?)?;
                    let mut w = create(&a.out.join("partial.nt"))?;
                    for t in &partial.rows {
                        writeln!(w, "{t}")?;
                    }
                    w.flush()?;
                    return Err(format!(
                        "job {index} failed after retries: {cause}; partial results in {}",
                        a.out.display()
                    )
                    .into());
                }
                other => other?,
            }
        }
    };
    write_subgraph(&sg, &a.out)?;
    println!("triples\t{}", sg.num_triples());
    println!("vertices\t{}", sg.entity_vertices().count());
    println!("output\t{}", a.out.display());
    Ok(())
}

fn print_reports(reports: &[(String, tosg::quality::QualityReport)], format: Format) -> Result<()> {
    match format {
        Format::Text => print!("{}", render_table(reports)),
        Format::Tsv => write_reports_tsv(io::stdout().lock(), reports)?,
    }
    Ok(())
}

fn metrics(ctx: &Ctx, a: MetricsArgs) -> Result<()> {
    let cfg = ctx.task(&a.task)?;
    let sg = load(&a.subgraph, &a.input, Some(&cfg))?;
    let kg = a.kg.as_ref().map(|p| load(p, &a.input, Some(&cfg))).transpose()?;
    let report = quality_report(&sg, &cfg.task, kg.as_ref())?;
    let name = a
        .subgraph
        .file_stem()
        .map_or_else(|| "subgraph".to_string(), |s| s.to_string_lossy().into_owned());
    print_reports(&[(name, report)], a.format)
}

fn compare(ctx: &Ctx, a: CompareArgs) -> Result<()> {
    let cfg = ctx.task(&a.task)?;
    let kg = a.kg.as_ref().map(|p| load(p, &a.input, Some(&cfg))).transpose()?;
    let mut reports = Vec::new();
    for spec in &a.subgraphs {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| format!("expected name=path, got {spec}"))?;
        let sg = load(Path::new(path), &a.input, Some(&cfg))?;
        reports.push((name.to_string(), quality_report(&sg, &cfg.task, kg.as_ref())?));
    }
    print_reports(&reports, a.format)
}

fn validate(ctx: &Ctx, a: ValidateArgs) -> Result<bool> {
    let cfg = ctx.task(&a.task)?;
    let sg = load(&a.subgraph, &a.input, Some(&cfg))?;
    let kg = a.kg.as_ref().map(|p| load(p, &a.input, Some(&cfg))).transpose()?;
    let source = kg.as_ref().unwrap_or(&sg);
    let resolved = resolve_targets(source, &cfg.task)?.vertices;
    let targets = targets_in(&sg, resolved.iter().map(|&v| source.term(v).clone()));
    let mut model = RgcnReferenceModel::new(a.layers, a.dim, a.seed);
    model.inverse_relations = !a.no_inverse;
    let feats = FeatureAssignment::seeded(&sg, a.dim, a.seed);
    let check = check_pruning_invariance(&model, &sg, &targets, &feats)?;
    println!("targets\t{}", check.targets_compared);
    println!("kept_vertices\t{}", check.kept_vertices);
    println!("removed_vertices\t{}", check.removed_vertices);
    println!("max_delta\t{:e}", check.max_delta);
    let verdict = if check.bit_identical { "invariant" } else { "changed" };
    println!("verdict\t{verdict}");
    Ok(check.bit_identical)
}

fn export(ctx: &Ctx, a: ExportArgs) -> Result<()> {
    let cfg = ctx.task(&a.task)?;
    let sg = load_subgraph(&a.subgraph, &a.input, Some(&cfg))?;
    let kg = a.kg.as_ref().map(|p| load(p, &a.input, Some(&cfg))).transpose()?;
    let source = kg.as_ref().unwrap_or(sg.graph());
    let labels = match cfg.task.kind {
        TaskKind::NodeClassification => Some(build_labels(source, &cfg.task)?),
        TaskKind::LinkPrediction => None,
    };
    let splits = match &cfg.split {
        Some(spec) => {
            let targets = resolve_targets(source, &cfg.task)?.vertices;
            Some(make_splits(&targets, labels.as_ref(), source, spec)?)
        }
        None => None,
    };
    let mut options = ExportOptions::for_task(&cfg.task);
    if a.include_label_edges {
        options.exclude_label_edges = false;
    }
    if a.exclude_label_edges {
        options.exclude_label_edges = true;
    }
    let bundle = export_bundle(&sg, labels.as_ref(), splits.as_ref(), &a.out, &options)?;
    let c = &bundle.manifest.counts;
    println!("nodes\t{}", c.nodes);
    println!("edges\t{}", c.edges);
    println!("labels\t{}", c.labels);
    println!("splits\t{}/{}/{}", c.train, c.valid, c.test);
    println!("output\t{}", bundle.dir.display());
    Ok(())
}

fn diff(ctx: &Ctx, a: DiffArgs) -> Result<()> {
    let cfg = ctx.optional_task(&None)?;
    let old = load(&a.old, &a.input, cfg.as_ref())?;
    let new = load(&a.new, &a.input, cfg.as_ref())?;
    let d = diff_versions(&old, &new);
    println!("added\t{}", d.added.len());
    println!("removed\t{}", d.removed.len());
    for (path, rows) in [(&a.added, &d.added), (&a.removed, &d.removed)] {
        if let Some(p) = path {
            let mut w = create(p)?;
            for t in rows {
                writeln!(w, "{t}")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let ctx = Ctx { config: cli.config };
    match cli.command {
        Command::Ingest(a) => ingest(&ctx, a)?,
        Command::Extract(a) => extract(&ctx, a)?,
        Command::Metrics(a) => metrics(&ctx, a)?,
        Command::Compare(a) => compare(&ctx, a)?,
        Command::Validate(a) => return validate(&ctx, a),
        Command::Export(a) => export(&ctx, a)?,
        Command::DiffVersions(a) => diff(&ctx, a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
