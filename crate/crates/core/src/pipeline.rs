//! End-to-end assembly: artifact construction, artifact loading, and the
//! query path that runs retrieval, fusion, and generation as one unit.
//!
//! The pipeline owns every long-lived resource (index, chunk store, graph,
//! gazetteer, stopword list, generator adapter) and exposes three entry
//! points: [`ingest_corpus`] and [`build_kg`] produce the on-disk artifacts,
//! and [`Pipeline::load`] + [`Pipeline::answer`] serve questions against
//! them. Every stage is timed individually and the total is defined as the
//! exact sum of the stages, so callers can always account for where a
//! request spent its time.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, GeneratorKind, PipelineConfig};
use crate::embed::{embed, EmbedError};
use crate::eval::{run_cases, validate_gold_claims, EvalCase, EvalError, EvalReport};
use crate::fusion::{fuse, FusedContext, FusionConfig, FusionError};
use crate::generate::{
    assemble_prompt, generate, GeneratedResponse, GenerateError, GeneratorAdapter, HttpGenerator,
    TemplateGenerator,
};
use crate::graph::{
    build_gazetteer, extract_relations, kg_query, parse_graph_records, translate_query, Graph,
    GraphError, GraphHit, QualityReport, Schema,
};
use crate::query::{process_query, Gazetteer, QueryError, RawQuery};
use crate::text::StopWords;
use crate::vector_store::{
    build_index, chunk_document, load_index, save_index, search, Chunk, ChunkStore, Document,
    VectorIndex, VectorStoreError,
};

/// Broad failure classes used to pick a process exit code: `Usage` covers
/// bad invocations and bad configuration, `Data` covers malformed or
/// missing inputs and artifacts, `Transport` covers remote-service
/// failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Transport,
}

impl ErrorClass {
    /// Stable process exit code for this class (success is 0).
    pub fn exit_code(&self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Transport => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    VectorStore(#[from] VectorStoreError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("corpus line {line}: {message}")]
    CorpusParse { line: usize, message: String },
    #[error("corpus line {line}: duplicate document id `{doc_id}`")]
    DuplicateDoc { line: usize, doc_id: String },
    #[error("corpus contains no documents")]
    EmptyCorpus,
    #[error("required file `{0}` is missing; run the ingestion commands first")]
    MissingArtifact(PathBuf),
    #[error(
        "index `{path}` was built with a different embedder configuration; \
         rebuild the index or restore the matching embedder settings"
    )]
    FingerprintMismatch { path: PathBuf },
    #[error("index references chunk `{chunk_id}` that is absent from the chunk store")]
    ChunkIndexMismatch { chunk_id: String },
    #[error("another ingestion is already running (lock file `{0}` exists)")]
    ArtifactsLocked(PathBuf),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

impl PipelineError {
    /// Maps every failure onto the exit-code class the CLI and service use.
    pub fn class(&self) -> ErrorClass {
        match self {
            PipelineError::Config(_) | PipelineError::Query(_) => ErrorClass::Usage,
            PipelineError::Embed(e) => embed_class(e),
            PipelineError::VectorStore(e) => match e {
                VectorStoreError::BadK
                | VectorStoreError::BadMaxChunkChars(_)
                | VectorStoreError::BadOverlap { .. } => ErrorClass::Usage,
                VectorStoreError::Embed(inner) => embed_class(inner),
                _ => ErrorClass::Data,
            },
            PipelineError::Graph(e) => match e {
                GraphError::BadMaxHops(_)
                | GraphError::NoAnchorEntity
                | GraphError::UnknownAnchor(_) => ErrorClass::Usage,
                _ => ErrorClass::Data,
            },
            PipelineError::Fusion(e) => match e {
                FusionError::BadConfig(_) => ErrorClass::Usage,
                FusionError::UnknownChunk(_) => ErrorClass::Data,
            },
            PipelineError::Generate(_) => ErrorClass::Transport,
            PipelineError::Eval(_)
            | PipelineError::CorpusParse { .. }
            | PipelineError::DuplicateDoc { .. }
            | PipelineError::EmptyCorpus
            | PipelineError::MissingArtifact(_)
            | PipelineError::FingerprintMismatch { .. }
            | PipelineError::ChunkIndexMismatch { .. }
            | PipelineError::Io(_) => ErrorClass::Data,
            PipelineError::ArtifactsLocked(_) => ErrorClass::Usage,
        }
    }
}

fn embed_class(e: &EmbedError) -> ErrorClass {
    match e {
        EmbedError::Transport(_)
        | EmbedError::Schema(_)
        | EmbedError::CountMismatch { .. }
        | EmbedError::DimMismatch { .. }
        | EmbedError::ZeroVector(_) => ErrorClass::Transport,
        EmbedError::DimTooSmall { .. }
        | EmbedError::MissingEndpoint
        | EmbedError::UnexpectedEndpoint => ErrorClass::Usage,
        EmbedError::EmptyText(_) => ErrorClass::Data,
    }
}

/// Named retrieval configurations. Each variant fixes which retrievers run,
/// the fusion weights, and whether claim checking is applied, so the same
/// question can be answered under directly comparable conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Both retrievers, configured weights, claim checking on.
    Ensemble,
    /// Vector retrieval alone, all weight on the vector score, and no
    /// claim checking: this is the uncorrected baseline the ensemble is
    /// measured against.
    VectorOnly,
    /// Graph retrieval alone with claim checking on.
    GraphOnly,
    /// Both retrievers with weights shifted toward the vector score.
    VectorHeavy,
    /// Both retrievers with weights shifted toward the graph score.
    GraphHeavy,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Ensemble,
        Variant::VectorOnly,
        Variant::GraphOnly,
        Variant::VectorHeavy,
        Variant::GraphHeavy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Ensemble => "ensemble",
            Variant::VectorOnly => "vector-only",
            Variant::GraphOnly => "graph-only",
            Variant::VectorHeavy => "vector-heavy",
            Variant::GraphHeavy => "graph-heavy",
        }
    }

    /// Resolves the variant into concrete query options. `base` supplies
    /// the configured fusion parameters; weight-overriding variants keep
    /// its thresholds and final size and replace only the weights.
    pub fn options(&self, base: &FusionConfig) -> QueryOptions {
        let with_weights = |wv: f64, wg: f64, wc: f64| FusionConfig {
            w_vector: wv,
            w_graph: wg,
            w_context: wc,
            ..*base
        };
        match self {
            Variant::Ensemble => QueryOptions {
                use_vector: true,
                use_graph: true,
                fusion: *base,
                fact_check: true,
            },
            Variant::VectorOnly => QueryOptions {
                use_vector: true,
                use_graph: false,
                fusion: with_weights(1.0, 0.0, 0.0),
                fact_check: false,
            },
            Variant::GraphOnly => QueryOptions {
                use_vector: false,
                use_graph: true,
                fusion: with_weights(0.0, 1.0, 0.0),
                fact_check: true,
            },
            Variant::VectorHeavy => QueryOptions {
                use_vector: true,
                use_graph: true,
                fusion: with_weights(0.6, 0.2, 0.2),
                fact_check: true,
            },
            Variant::GraphHeavy => QueryOptions {
                use_vector: true,
                use_graph: true,
                fusion: with_weights(0.2, 0.6, 0.2),
                fact_check: true,
            },
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .iter()
            .find(|v| v.as_str() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Variant::ALL.iter().map(|v| v.as_str()).collect();
                format!("unknown variant `{s}`; expected one of {}", names.join(", "))
            })
    }
}

/// Fully resolved knobs for a single query: which retrievers run, the
/// fusion parameters, and whether claim checking is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOptions {
    pub use_vector: bool,
    pub use_graph: bool,
    pub fusion: FusionConfig,
    pub fact_check: bool,
}

/// Wall-clock milliseconds per stage. `total_ms` is defined as the exact
/// sum of the stage entries, so the parts always account for the whole.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub process_ms: f64,
    pub embed_ms: f64,
    pub vector_ms: f64,
    pub graph_ms: f64,
    pub fusion_ms: f64,
    pub generation_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    fn finish(mut self) -> Self {
        self.total_ms = self.process_ms
            + self.embed_ms
            + self.vector_ms
            + self.graph_ms
            + self.fusion_ms
            + self.generation_ms;
        self
    }
}

/// Everything produced for one question: the generated response, the fused
/// evidence it was grounded on, and per-stage timings.
#[derive(Debug, Clone, Serialize)]
pub struct QueryResult {
    pub query_id: String,
    pub variant: String,
    pub response: GeneratedResponse,
    pub context: FusedContext,
    pub timings: StageTimings,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Parses a JSONL corpus. Every line must be a document object; line
/// numbers are reported on failure and duplicate ids are rejected.
pub fn parse_corpus(contents: &str) -> Result<Vec<Document>, PipelineError> {
    let mut docs: Vec<Document> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, line) in contents.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let doc: Document =
            serde_json::from_str(trimmed).map_err(|e| PipelineError::CorpusParse {
                line: line_no,
                message: e.to_string(),
            })?;
        if doc.doc_id.is_empty() {
            return Err(PipelineError::CorpusParse {
                line: line_no,
                message: "document id must be non-empty".to_string(),
            });
        }
        if doc.text.trim().is_empty() {
            return Err(PipelineError::CorpusParse {
                line: line_no,
                message: format!("document `{}` has empty text", doc.doc_id),
            });
        }
        if !seen.insert(doc.doc_id.clone()) {
            return Err(PipelineError::DuplicateDoc {
                line: line_no,
                doc_id: doc.doc_id,
            });
        }
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    Ok(docs)
}

fn read_required(path: &Path) -> Result<String, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingArtifact(path.to_path_buf()));
    }
    Ok(fs::read_to_string(path)?)
}

/// Renders a fingerprint or hash as lowercase hex.
pub fn hex_fingerprint(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Holds the artifact directory exclusively for the duration of an
/// ingestion command; the lock file is removed on drop.
#[derive(Debug)]
pub struct ArtifactLock {
    path: PathBuf,
}

impl ArtifactLock {
    pub fn acquire(artifacts_dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(artifacts_dir)?;
        let path = artifacts_dir.join(".ingest.lock");
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(_) => Ok(ArtifactLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                Err(PipelineError::ArtifactsLocked(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for ArtifactLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// What an ingestion run produced.
#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub document_count: usize,
    pub chunk_count: usize,
    pub dim: u32,
    pub embedder_fingerprint: String,
    pub index_path: PathBuf,
    pub chunks_path: PathBuf,
}

/// Reads the corpus, chunks it, embeds every chunk, and writes the index
/// and chunk-store artifacts. The caller is expected to hold the
/// [`ArtifactLock`].
pub fn ingest_corpus(config: &PipelineConfig) -> Result<IngestSummary, PipelineError> {
    config.validate()?;
    let contents = read_required(&config.paths.corpus)?;
    let docs = parse_corpus(&contents)?;
    let mut chunks: Vec<Chunk> = Vec::new();
    for doc in &docs {
        chunks.extend(chunk_document(
            doc,
            config.retrieval.max_chunk_chars,
            config.retrieval.overlap_chars,
        )?);
    }
    let index = build_index(&chunks, &config.embedder)?;
    let store = ChunkStore::from_chunks(chunks)?;
    fs::create_dir_all(&config.paths.artifacts_dir)?;
    let index_path = config.paths.index_path();
    let chunks_path = config.paths.chunks_path();
    save_index(&index, &index_path)?;
    fs::write(&chunks_path, store.to_jsonl())?;
    Ok(IngestSummary {
        document_count: docs.len(),
        chunk_count: store.len(),
        dim: index.dim(),
        embedder_fingerprint: hex_fingerprint(index.fingerprint()),
        index_path,
        chunks_path,
    })
}

/// What a graph build produced.
#[derive(Debug, Clone, Serialize)]
pub struct KgBuildSummary {
    pub entity_count: usize,
    pub relation_count: usize,
    /// Relation count when built from the curated records alone.
    pub curated_relation_count: usize,
    /// Edge records contributed by corpus mining (0 when mining is off).
    pub mined_edge_records: usize,
    pub report: QualityReport,
    pub canonical_path: PathBuf,
    pub report_path: PathBuf,
}

/// Builds the knowledge graph from the curated records, optionally
/// augmented with relations mined from the corpus, then writes the
/// canonical graph and its quality report. The caller is expected to hold
/// the [`ArtifactLock`].
pub fn build_kg(config: &PipelineConfig, mine_corpus: bool) -> Result<KgBuildSummary, PipelineError> {
    config.validate()?;
    let graph_contents = read_required(&config.paths.graph)?;
    let schema_contents = read_required(&config.paths.schema)?;
    let schema = Schema::parse(&schema_contents)?;
    let records = parse_graph_records(&graph_contents)?;
    let (curated_graph, curated_report) = Graph::build(records.clone(), schema.clone())?;
    let curated_relation_count = curated_graph.relations().len();

    let (graph, report, mined_edge_records) = if mine_corpus {
        let corpus = read_required(&config.paths.corpus)?;
        let docs = parse_corpus(&corpus)?;
        let gazetteer = build_gazetteer(&curated_graph);
        let mined = extract_relations(&docs, &gazetteer);
        let mined_count = mined.len();
        let mut all = records;
        all.extend(mined);
        let (graph, report) = Graph::build(all, schema)?;
        (graph, report, mined_count)
    } else {
        (curated_graph, curated_report, 0)
    };

    fs::create_dir_all(&config.paths.artifacts_dir)?;
    let canonical_path = config.paths.canonical_graph_path();
    let report_path = config.paths.kg_report_path();
    fs::write(&canonical_path, graph.to_canonical_jsonl())?;
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    Ok(KgBuildSummary {
        entity_count: graph.entity_count(),
        relation_count: graph.relations().len(),
        curated_relation_count,
        mined_edge_records,
        report,
        canonical_path,
        report_path,
    })
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        PipelineError::Io(io::Error::new(io::ErrorKind::InvalidData, e))
    }
}

/// A fully loaded engine: artifacts in memory, ready to answer questions.
pub struct Pipeline {
    config: PipelineConfig,
    index: VectorIndex,
    chunks: ChunkStore,
    graph: Graph,
    gazetteer: Gazetteer,
    stopwords: StopWords,
    generator: Box<dyn GeneratorAdapter>,
}

impl Pipeline {
    /// Assembles a pipeline from in-memory parts. The gazetteer is derived
    /// from the graph and the generator adapter from the configuration.
    pub fn from_parts(
        config: PipelineConfig,
        index: VectorIndex,
        chunks: ChunkStore,
        graph: Graph,
        stopwords: StopWords,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        let expected = config.embedder.fingerprint();
        if index.fingerprint() != &expected {
            return Err(PipelineError::FingerprintMismatch {
                path: config.paths.index_path(),
            });
        }
        if index.len() != chunks.len() {
            return Err(PipelineError::ChunkIndexMismatch {
                chunk_id: format!(
                    "(index holds {} entries, chunk store holds {})",
                    index.len(),
                    chunks.len()
                ),
            });
        }
        for entry in index.entries() {
            if chunks.get(&entry.chunk_id).is_none() {
                return Err(PipelineError::ChunkIndexMismatch {
                    chunk_id: entry.chunk_id.clone(),
                });
            }
        }
        let gazetteer = build_gazetteer(&graph);
        let generator: Box<dyn GeneratorAdapter> = match config.generator.kind {
            GeneratorKind::Template => Box::new(TemplateGenerator),
            GeneratorKind::Http => {
                let endpoint = config.generator.endpoint.clone().ok_or_else(|| {
                    ConfigError::Validation(
                        "generator.kind = http requires generator.endpoint".to_string(),
                    )
                })?;
                Box::new(HttpGenerator::new(
                    endpoint,
                    config.generator.timeout_ms,
                    config.generator.max_response_chars,
                ))
            }
        };
        Ok(Pipeline {
            config,
            index,
            chunks,
            graph,
            gazetteer,
            stopwords,
            generator,
        })
    }

    /// Loads every artifact named by the configuration and refuses
    /// mismatched combinations: the index must carry the fingerprint of
    /// the configured embedder and every index entry must resolve in the
    /// chunk store.
    pub fn load(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let index_path = config.paths.index_path();
        if !index_path.exists() {
            return Err(PipelineError::MissingArtifact(index_path));
        }
        let index = load_index(&index_path)?;
        let chunks_contents = read_required(&config.paths.chunks_path())?;
        let chunks = ChunkStore::parse_jsonl(&chunks_contents)?;
        let graph_contents = read_required(&config.paths.canonical_graph_path())?;
        let schema_contents = read_required(&config.paths.schema)?;
        let schema = Schema::parse(&schema_contents)?;
        let records = parse_graph_records(&graph_contents)?;
        let (graph, _report) = Graph::build(records, schema)?;
        let stopwords = if config.paths.stopwords.exists() {
            StopWords::load(&config.paths.stopwords).map_err(PipelineError::Io)?
        } else {
            return Err(PipelineError::MissingArtifact(config.paths.stopwords.clone()));
        };
        Pipeline::from_parts(config, index, chunks, graph, stopwords)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn chunks(&self) -> &ChunkStore {
        &self.chunks
    }

    /// Identifier of the active generator adapter.
    pub fn generator_id(&self) -> &str {
        self.generator.id()
    }

    /// Answers one question under a named variant.
    pub fn answer(
        &self,
        query_id: &str,
        question: &str,
        variant: Variant,
    ) -> Result<QueryResult, PipelineError> {
        let options = variant.options(&self.config.fusion);
        self.answer_with_options(query_id, question, variant.as_str(), &options)
    }

    /// Answers one question under explicit options. Stages that are
    /// disabled contribute zero hits and zero milliseconds.
    pub fn answer_with_options(
        &self,
        query_id: &str,
        question: &str,
        variant_label: &str,
        options: &QueryOptions,
    ) -> Result<QueryResult, PipelineError> {
        let mut timings = StageTimings::default();

        let start = Instant::now();
        let raw = RawQuery::new(query_id, question)?;
        let pq = process_query(raw, &self.gazetteer, &self.stopwords)?;
        timings.process_ms = ms(start);

        let vector_hits = if options.use_vector {
            let start = Instant::now();
            let qvec = embed(question, &self.config.embedder)?;
            timings.embed_ms = ms(start);
            let start = Instant::now();
            let hits = search(&self.index, &qvec, self.config.retrieval.k_vector)?;
            timings.vector_ms = ms(start);
            hits
        } else {
            Vec::new()
        };

        let graph_hits: Vec<GraphHit> = if options.use_graph {
            let start = Instant::now();
            let hits = match translate_query(&pq) {
                Ok(mut pattern) => {
                    pattern.max_hops = self.config.retrieval.max_hops;
                    kg_query(&self.graph, &pattern, self.config.retrieval.k_graph)?
                }
                // No recognizable anchor entity: the graph side simply
                // contributes nothing rather than failing the query.
                Err(GraphError::NoAnchorEntity) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            timings.graph_ms = ms(start);
            hits
        } else {
            Vec::new()
        };

        let start = Instant::now();
        let context = fuse(
            &vector_hits,
            &graph_hits,
            &pq,
            &options.fusion,
            &self.graph,
            &self.gazetteer,
            &self.chunks,
            options.fact_check,
        )?;
        timings.fusion_ms = ms(start);

        let start = Instant::now();
        let prompt = assemble_prompt(&context, self.config.generator.evidence_budget_chars);
        let response = generate(&prompt, self.generator.as_ref())?;
        timings.generation_ms = ms(start);

        Ok(QueryResult {
            query_id: query_id.to_string(),
            variant: variant_label.to_string(),
            response,
            context,
            timings: timings.finish(),
        })
    }

    /// Runs every case under one variant and aggregates the metrics.
    /// Gold claims are validated against the graph up front; a case whose
    /// answer fails is recorded as a failure and the run continues.
    pub fn run_eval(
        &self,
        cases: &[EvalCase],
        variant: Variant,
    ) -> Result<EvalReport, PipelineError> {
        validate_gold_claims(cases, &self.graph)?;
        let report = run_cases(
            variant.as_str(),
            cases,
            &self.graph,
            &self.gazetteer,
            |case| {
                self.answer(&case.query_id, &case.query_text, variant)
                    .map(|r| r.response.text)
                    .map_err(|e| e.to_string())
            },
        );
        Ok(report)
    }
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("index_len", &self.index.len())
            .field("chunks", &self.chunks.len())
            .field("entities", &self.graph.entity_count())
            .field("generator", &self.generator.id())
            .finish()
    }
}
