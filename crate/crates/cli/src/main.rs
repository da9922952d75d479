//! `fuserag` — command-line front end for the ensemble retrieval engine.
//!
//! Subcommands mirror the engine's lifecycle: `ingest` and `build-kg`
//! produce the on-disk artifacts, `query` answers a single question,
//! `eval` scores the engine against a labelled set, and `serve` exposes
//! the same query path over HTTP. Exit codes are stable: 0 on success,
//! 1 for usage or configuration problems, 2 for malformed or missing
//! data, 3 for remote-service failures.

mod serve;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fuserag_core::config::PipelineConfig;
use fuserag_core::eval::{load_evalset, render_text_report};
use fuserag_core::fusion::{ProvenanceSummary, SourceTag};
use fuserag_core::generate::GeneratedResponse;
use fuserag_core::pipeline::{
    build_kg, hex_fingerprint, ingest_corpus, ArtifactLock, Pipeline, PipelineError, QueryResult,
    StageTimings, Variant,
};

#[derive(Parser)]
#[command(
    name = "fuserag",
    version,
    about = "Ensemble retrieval engine: vector search and knowledge-graph \
             retrieval joined by scored fusion"
)]
struct Cli {
    /// Configuration file (key = value sections); defaults to
    /// `fuserag.conf` when present, otherwise built-in defaults.
    /// Environment variables prefixed FUSERAG_ override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Chunk and embed the corpus, writing the vector index and chunk
    /// store artifacts.
    Ingest,
    /// Build the knowledge graph artifacts from the curated records.
    BuildKg {
        /// Also mine relations from the corpus and merge them into the
        /// graph.
        #[arg(long)]
        mine_corpus: bool,
    },
    /// Answer one question against the built artifacts.
    Query {
        /// The question text.
        question: String,
        /// Identifier attached to this query.
        #[arg(long, default_value = "q1")]
        id: String,
        /// Retrieval variant: ensemble, vector-only, graph-only,
        /// vector-heavy, or graph-heavy.
        #[arg(long, default_value = "ensemble")]
        variant: String,
        /// Disable graph retrieval (shorthand for --variant vector-only).
        #[arg(long, conflicts_with_all = ["no_vector", "variant"])]
        no_graph: bool,
        /// Disable vector retrieval (shorthand for --variant graph-only).
        #[arg(long, conflicts_with = "variant")]
        no_vector: bool,
        /// Print the full result as JSON instead of human-readable text.
        #[arg(long)]
        json: bool,
    },
    /// Run the offline evaluation and write per-variant reports.
    Eval {
        /// Evaluation set (JSONL of cases).
        #[arg(long, default_value = "data/evalset.jsonl")]
        evalset: PathBuf,
        /// Variant to evaluate (repeatable); all five when omitted.
        #[arg(long)]
        variant: Vec<String>,
    },
    /// Serve the query API over HTTP (POST /query, GET /health).
    Serve {
        /// Override the configured bind address (host:port).
        #[arg(long)]
        bind: Option<String>,
    },
}

/// Restores the default `SIGPIPE` disposition so that writing to a closed
/// pipe (e.g. `fuserag query ... | head`) terminates the process quietly
/// instead of panicking mid-print.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8, PipelineError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest => cmd_ingest(&config),
        Command::BuildKg { mine_corpus } => cmd_build_kg(&config, mine_corpus),
        Command::Query {
            question,
            id,
            variant,
            no_graph,
            no_vector,
            json,
        } => cmd_query(config, &question, &id, &variant, no_graph, no_vector, json),
        Command::Eval { evalset, variant } => cmd_eval(config, &evalset, &variant),
        Command::Serve { bind } => {
            serve::run_serve(config, bind)?;
            Ok(0)
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    match path {
        Some(p) => Ok(PipelineConfig::load(p)?),
        None => {
            let default = Path::new("fuserag.conf");
            if default.exists() {
                Ok(PipelineConfig::load(default)?)
            } else {
                Ok(PipelineConfig::from_env_only()?)
            }
        }
    }
}

fn cmd_ingest(config: &PipelineConfig) -> Result<u8, PipelineError> {
    let _lock = ArtifactLock::acquire(&config.paths.artifacts_dir)?;
    let summary = ingest_corpus(config)?;
    println!(
        "ingested {} documents into {} chunks (dim {})",
        summary.document_count, summary.chunk_count, summary.dim
    );
    println!("embedder fingerprint: {}", summary.embedder_fingerprint);
    println!("index:  {}", summary.index_path.display());
    println!("chunks: {}", summary.chunks_path.display());
    Ok(0)
}

fn cmd_build_kg(config: &PipelineConfig, mine_corpus: bool) -> Result<u8, PipelineError> {
    let _lock = ArtifactLock::acquire(&config.paths.artifacts_dir)?;
    let summary = build_kg(config, mine_corpus)?;
    println!(
        "graph built: {} entities, {} relations",
        summary.entity_count, summary.relation_count
    );
    if mine_corpus {
        println!(
            "corpus mining contributed {} edge records ({} relations without mining)",
            summary.mined_edge_records, summary.curated_relation_count
        );
    }
    let r = &summary.report;
    println!(
        "quality: {} dangling edges dropped, {} duplicate entities merged, {} duplicate edges merged",
        r.dangling_edges.len(),
        r.merged_duplicate_entities,
        r.merged_duplicate_edges
    );
    if !r.duplicate_aliases.is_empty() {
        println!("quality: {} aliases shared between entities", r.duplicate_aliases.len());
    }
    println!("graph:  {}", summary.canonical_path.display());
    println!("report: {}", summary.report_path.display());
    Ok(0)
}

/// The serialized result of one query; identical between the CLI's
/// `--json` output and the HTTP service. The full candidate audit is
/// written under the artifact directory and referenced by path.
#[derive(Debug, Serialize)]
pub struct QueryResponseBody {
    pub query_id: String,
    pub variant: String,
    pub response: GeneratedResponse,
    pub provenance: ProvenanceSummary,
    pub selected: Vec<SelectedCandidate>,
    pub audit_ref: String,
    pub timings: StageTimings,
}

/// One selected evidence item in rank order.
#[derive(Debug, Serialize)]
pub struct SelectedCandidate {
    pub rank: usize,
    pub id: String,
    pub source: SourceTag,
    pub doc_id: Option<String>,
    pub fused_score: f64,
}

/// Runs one query and writes its audit file; shared by the `query`
/// subcommand and the HTTP service so both produce identical results.
pub fn run_query(
    pipeline: &Pipeline,
    query_id: &str,
    question: &str,
    variant: Variant,
) -> Result<QueryResponseBody, PipelineError> {
    let result = pipeline.answer(query_id, question, variant)?;
    let audit_ref = write_audit(pipeline.config(), &result)?;
    let selected = result
        .context
        .candidates
        .iter()
        .enumerate()
        .map(|(i, c)| SelectedCandidate {
            rank: i + 1,
            id: c.id.clone(),
            source: c.source,
            doc_id: c.doc_id.clone(),
            fused_score: c.fused_score,
        })
        .collect();
    Ok(QueryResponseBody {
        query_id: result.query_id,
        variant: result.variant,
        response: result.response,
        provenance: result.context.provenance,
        selected,
        audit_ref,
        timings: result.timings,
    })
}

fn write_audit(config: &PipelineConfig, result: &QueryResult) -> Result<String, PipelineError> {
    let dir = config.paths.artifacts_dir.join("audit");
    fs::create_dir_all(&dir)?;
    let safe_id: String = result
        .query_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let path = dir.join(format!("{safe_id}.{}.jsonl", result.variant));
    fs::write(&path, result.context.to_audit_jsonl())?;
    Ok(path.display().to_string())
}

fn cmd_query(
    config: PipelineConfig,
    question: &str,
    id: &str,
    variant: &str,
    no_graph: bool,
    no_vector: bool,
    json: bool,
) -> Result<u8, PipelineError> {
    let variant = if no_graph {
        Variant::VectorOnly
    } else if no_vector {
        Variant::GraphOnly
    } else {
        parse_variant(variant)?
    };
    let pipeline = Pipeline::load(config)?;
    let body = run_query(&pipeline, id, question, variant)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&body).expect("result serializes"));
    } else {
        print_human(&body);
    }
    Ok(0)
}

fn parse_variant(s: &str) -> Result<Variant, PipelineError> {
    s.parse::<Variant>().map_err(|msg| {
        fuserag_core::config::ConfigError::Validation(msg).into()
    })
}

fn print_human(body: &QueryResponseBody) {
    println!("Answer ({}):", body.variant);
    println!("  {}", body.response.text);
    if body.response.degraded {
        println!("  (degraded: no evidence survived retrieval and fusion)");
    }
    println!();
    let p = &body.provenance;
    println!(
        "Provenance: vector={} graph={} filtered={} contradicted={} merged={} cross-verified={} selected={}",
        p.vector_candidates,
        p.graph_candidates,
        p.filtered_out,
        p.contradicted_removed,
        p.merged,
        p.cross_verified,
        p.selected
    );
    for item in &body.selected {
        let source = match item.source {
            SourceTag::Vector => "vector",
            SourceTag::Graph => "graph",
        };
        let doc = item
            .doc_id
            .as_deref()
            .map(|d| format!("  doc={d}"))
            .unwrap_or_default();
        println!(
            "  {}. [{source}] {}  score={:.4}{doc}",
            item.rank, item.id, item.fused_score
        );
    }
    println!("Audit: {}", body.audit_ref);
    let t = &body.timings;
    println!(
        "Timings (ms): process={:.3} embed={:.3} vector={:.3} graph={:.3} fusion={:.3} generation={:.3} total={:.3}",
        t.process_ms, t.embed_ms, t.vector_ms, t.graph_ms, t.fusion_ms, t.generation_ms, t.total_ms
    );
}

fn cmd_eval(
    config: PipelineConfig,
    evalset: &Path,
    variants: &[String],
) -> Result<u8, PipelineError> {
    let variants: Vec<Variant> = if variants.is_empty() {
        Variant::ALL.to_vec()
    } else {
        variants
            .iter()
            .map(|s| parse_variant(s))
            .collect::<Result<_, _>>()?
    };
    let contents = if evalset.exists() {
        fs::read_to_string(evalset)?
    } else {
        return Err(PipelineError::MissingArtifact(evalset.to_path_buf()));
    };
    let cases = load_evalset(&contents)?;
    let pipeline = Pipeline::load(config)?;
    fs::create_dir_all(&pipeline.config().paths.artifacts_dir)?;

    let mut worst_failure_fraction = 0.0f64;
    for variant in variants {
        let report = pipeline.run_eval(&cases, variant)?;
        let json_path = pipeline
            .config()
            .paths
            .eval_report_path(variant.as_str(), "json");
        let txt_path = pipeline
            .config()
            .paths
            .eval_report_path(variant.as_str(), "txt");
        let rendered = render_text_report(&report);
        fs::write(
            &json_path,
            serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
        fs::write(&txt_path, &rendered)?;
        println!("{rendered}");
        println!("reports: {} {}", json_path.display(), txt_path.display());
        println!();
        worst_failure_fraction = worst_failure_fraction.max(report.failure_fraction());
        for case in &report.cases {
            if let Some(err) = &case.error {
                eprintln!("case `{}` failed: {err}", case.query_id);
            }
        }
    }
    if worst_failure_fraction > 0.10 {
        eprintln!(
            "error: {:.0}% of cases failed (threshold 10%)",
            worst_failure_fraction * 100.0
        );
        return Ok(2);
    }
    Ok(0)
}

/// Health payload for GET /health; also printed by `serve` at startup.
#[derive(Debug, Serialize)]
pub struct HealthBody {
    pub status: &'static str,
    pub version: &'static str,
    pub embedder_fingerprint: String,
    pub index_entries: usize,
    pub graph_entities: usize,
    pub graph_relations: usize,
    pub generator: String,
}

pub fn health_body(pipeline: &Pipeline) -> HealthBody {
    HealthBody {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        embedder_fingerprint: hex_fingerprint(pipeline.index().fingerprint()),
        index_entries: pipeline.index().len(),
        graph_entities: pipeline.graph().entity_count(),
        graph_relations: pipeline.graph().relations().len(),
        generator: pipeline.generator_id().to_string(),
    }
}
