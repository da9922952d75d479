//! Pipeline configuration: a small sectioned key-value file format with
//! typed accessors, environment-variable overrides, and validation that
//! runs before any command touches data.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::embed::{EmbedderKind, EmbedderSpec};
use crate::fusion::FusionConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config section `{0}`")]
    UnknownSection(String),
    #[error("unknown config key `{key}` in section `{section}`")]
    UnknownKey { section: String, key: String },
    #[error("config value [{section}] {key} = `{value}`: {message}")]
    BadValue {
        section: String,
        key: String,
        value: String,
        message: String,
    },
    #[error("environment override `{0}` does not name a config key")]
    BadEnvOverride(String),
    #[error("config invalid: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Environment override prefix; `FUSERAG_<SECTION>_<KEY>` beats the file.
pub const ENV_PREFIX: &str = "FUSERAG_";

const SECTIONS: &[(&str, &[&str])] = &[
    ("embedder", &["kind", "dim", "endpoint", "model_name", "timeout_ms"]),
    (
        "fusion",
        &["w_vector", "w_graph", "w_context", "tau_vector", "tau_graph", "k_final"],
    ),
    (
        "retrieval",
        &["k_vector", "k_graph", "max_chunk_chars", "overlap_chars", "max_hops"],
    ),
    (
        "generator",
        &["kind", "endpoint", "timeout_ms", "max_response_chars", "evidence_budget_chars"],
    ),
    ("paths", &["corpus", "graph", "schema", "stopwords", "artifacts_dir"]),
    ("service", &["bind"]),
    ("logging", &["level"]),
];

fn known_key(section: &str, key: &str) -> bool {
    SECTIONS
        .iter()
        .any(|(s, keys)| *s == section && keys.contains(&key))
}

fn known_section(section: &str) -> bool {
    SECTIONS.iter().any(|(s, _)| *s == section)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Template,
    Http,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalConfig {
    pub k_vector: usize,
    pub k_graph: usize,
    pub max_chunk_chars: usize,
    pub overlap_chars: usize,
    pub max_hops: u8,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k_vector: 5,
            k_graph: 5,
            max_chunk_chars: 1000,
            overlap_chars: 100,
            max_hops: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub max_response_chars: usize,
    pub evidence_budget_chars: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            kind: GeneratorKind::Template,
            endpoint: None,
            timeout_ms: 10_000,
            max_response_chars: crate::generate::DEFAULT_MAX_RESPONSE_CHARS,
            evidence_budget_chars: crate::generate::DEFAULT_EVIDENCE_BUDGET_CHARS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathsConfig {
    pub corpus: PathBuf,
    pub graph: PathBuf,
    pub schema: PathBuf,
    pub stopwords: PathBuf,
    pub artifacts_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            corpus: "data/corpus.jsonl".into(),
            graph: "data/graph.jsonl".into(),
            schema: "data/schema.json".into(),
            stopwords: "data/stopwords.txt".into(),
            artifacts_dir: "artifacts".into(),
        }
    }
}

impl PathsConfig {
    pub fn index_path(&self) -> PathBuf {
        self.artifacts_dir.join("index.frvi")
    }

    pub fn chunks_path(&self) -> PathBuf {
        self.artifacts_dir.join("chunks.jsonl")
    }

    pub fn canonical_graph_path(&self) -> PathBuf {
        self.artifacts_dir.join("graph.canonical.jsonl")
    }

    pub fn kg_report_path(&self) -> PathBuf {
        self.artifacts_dir.join("kg_report.json")
    }

    pub fn eval_report_path(&self, variant: &str, extension: &str) -> PathBuf {
        self.artifacts_dir.join(format!("report.{variant}.{extension}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub embedder: EmbedderSpec,
    pub fusion: FusionConfig,
    pub retrieval: RetrievalConfig,
    pub generator: GeneratorConfig,
    pub paths: PathsConfig,
    pub bind: String,
    pub log_level: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            embedder: EmbedderSpec::default(),
            fusion: FusionConfig::default(),
            retrieval: RetrievalConfig::default(),
            generator: GeneratorConfig::default(),
            paths: PathsConfig::default(),
            bind: "127.0.0.1:8080".to_string(),
            log_level: "info".to_string(),
        }
    }
}

type RawConfig = BTreeMap<(String, String), String>;

/// Parses the `[section]` / `key = value` file format. `#` starts a
/// full-line comment; blank lines are ignored; keys outside a section or
/// unknown sections/keys are errors.
fn parse_raw(contents: &str) -> Result<RawConfig, ConfigError> {
    let mut raw = RawConfig::new();
    let mut section: Option<String> = None;
    for (idx, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                message: "unterminated section header".into(),
            })?;
            let name = name.trim().to_lowercase();
            if !known_section(&name) {
                return Err(ConfigError::UnknownSection(name));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim().to_lowercase();
        let value = value.trim().to_string();
        let section = section.clone().ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            message: "key appears before any [section] header".into(),
        })?;
        if !known_key(&section, &key) {
            return Err(ConfigError::UnknownKey { section, key });
        }
        raw.insert((section, key), value);
    }
    Ok(raw)
}

/// Applies `FUSERAG_<SECTION>_<KEY>` environment overrides on top of the
/// parsed file. Section names contain no underscores, so the first
/// underscore after the prefix separates section from key.
fn apply_env(
    raw: &mut RawConfig,
    vars: impl Iterator<Item = (String, String)>,
) -> Result<(), ConfigError> {
    for (name, value) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let Some((section, key)) = rest.split_once('_') else {
            return Err(ConfigError::BadEnvOverride(name));
        };
        let section = section.to_lowercase();
        let key = key.to_lowercase();
        if !known_section(&section) || !known_key(&section, &key) {
            return Err(ConfigError::BadEnvOverride(name));
        }
        raw.insert((section, key), value);
    }
    Ok(())
}

struct TypedReader<'a> {
    raw: &'a RawConfig,
}

impl<'a> TypedReader<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a str> {
        self.raw
            .get(&(section.to_string(), key.to_string()))
            .map(|s| s.as_str())
    }

    fn parse<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        what: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(value) => value.parse::<T>().map(Some).map_err(|_| ConfigError::BadValue {
                section: section.into(),
                key: key.into(),
                value: value.into(),
                message: format!("expected {what}"),
            }),
        }
    }
}

impl PipelineConfig {
    /// Builds a config from file contents plus explicit environment
    /// pairs. Pass an empty iterator to ignore the environment.
    pub fn from_str_with_env(
        contents: &str,
        vars: impl Iterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut raw = parse_raw(contents)?;
        apply_env(&mut raw, vars)?;
        let reader = TypedReader { raw: &raw };
        let mut config = PipelineConfig::default();

        if let Some(kind) = reader.get("embedder", "kind") {
            config.embedder.kind = match kind {
                "builtin-hash" => EmbedderKind::BuiltinHash,
                "external" => EmbedderKind::External,
                other => {
                    return Err(ConfigError::BadValue {
                        section: "embedder".into(),
                        key: "kind".into(),
                        value: other.into(),
                        message: "expected `builtin-hash` or `external`".into(),
                    })
                }
            };
        }
        if let Some(dim) = reader.parse::<u32>("embedder", "dim", "an unsigned integer")? {
            config.embedder.dim = dim;
        }
        if let Some(endpoint) = reader.get("embedder", "endpoint") {
            config.embedder.endpoint = Some(endpoint.to_string());
        }
        if let Some(model) = reader.get("embedder", "model_name") {
            config.embedder.model_name = Some(model.to_string());
        }
        if let Some(ms) = reader.parse::<u64>("embedder", "timeout_ms", "an unsigned integer")? {
            config.embedder.timeout_ms = ms;
        }

        for (key, slot) in [
            ("w_vector", &mut config.fusion.w_vector),
            ("w_graph", &mut config.fusion.w_graph),
            ("w_context", &mut config.fusion.w_context),
            ("tau_vector", &mut config.fusion.tau_vector),
            ("tau_graph", &mut config.fusion.tau_graph),
        ] {
            if let Some(v) = reader.parse::<f64>("fusion", key, "a real number")? {
                *slot = v;
            }
        }
        if let Some(k) = reader.parse::<usize>("fusion", "k_final", "an unsigned integer")? {
            config.fusion.k_final = k;
        }

        for (key, slot) in [
            ("k_vector", &mut config.retrieval.k_vector),
            ("k_graph", &mut config.retrieval.k_graph),
            ("max_chunk_chars", &mut config.retrieval.max_chunk_chars),
            ("overlap_chars", &mut config.retrieval.overlap_chars),
        ] {
            if let Some(v) = reader.parse::<usize>("retrieval", key, "an unsigned integer")? {
                *slot = v;
            }
        }
        if let Some(hops) = reader.parse::<u8>("retrieval", "max_hops", "1 or 2")? {
            config.retrieval.max_hops = hops;
        }

        if let Some(kind) = reader.get("generator", "kind") {
            config.generator.kind = match kind {
                "template" => GeneratorKind::Template,
                "http" => GeneratorKind::Http,
                other => {
                    return Err(ConfigError::BadValue {
                        section: "generator".into(),
                        key: "kind".into(),
                        value: other.into(),
                        message: "expected `template` or `http`".into(),
                    })
                }
            };
        }
        if let Some(endpoint) = reader.get("generator", "endpoint") {
            config.generator.endpoint = Some(endpoint.to_string());
        }
        if let Some(ms) = reader.parse::<u64>("generator", "timeout_ms", "an unsigned integer")? {
            config.generator.timeout_ms = ms;
        }
        for (key, slot) in [
            ("max_response_chars", &mut config.generator.max_response_chars),
            ("evidence_budget_chars", &mut config.generator.evidence_budget_chars),
        ] {
            if let Some(v) = reader.parse::<usize>("generator", key, "an unsigned integer")? {
                *slot = v;
            }
        }

        for (key, slot) in [
            ("corpus", &mut config.paths.corpus),
            ("graph", &mut config.paths.graph),
            ("schema", &mut config.paths.schema),
            ("stopwords", &mut config.paths.stopwords),
            ("artifacts_dir", &mut config.paths.artifacts_dir),
        ] {
            if let Some(v) = reader.get("paths", key) {
                *slot = PathBuf::from(v);
            }
        }

        if let Some(bind) = reader.get("service", "bind") {
            config.bind = bind.to_string();
        }
        if let Some(level) = reader.get("logging", "level") {
            config.log_level = level.to_string();
        }

        config.validate()?;
        Ok(config)
    }

    /// Parses file contents, then applies overrides from the real
    /// process environment.
    pub fn parse_str(contents: &str) -> Result<Self, ConfigError> {
        Self::from_str_with_env(contents, std::env::vars())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Defaults plus environment overrides, for running without a file.
    pub fn from_env_only() -> Result<Self, ConfigError> {
        Self::parse_str("")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.embedder
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        self.fusion
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        if self.retrieval.k_vector == 0 || self.retrieval.k_graph == 0 {
            return Err(ConfigError::Validation(
                "retrieval k_vector and k_graph must be at least 1".into(),
            ));
        }
        if self.retrieval.max_chunk_chars == 0 {
            return Err(ConfigError::Validation(
                "max_chunk_chars must be at least 1".into(),
            ));
        }
        if self.retrieval.overlap_chars >= self.retrieval.max_chunk_chars {
            return Err(ConfigError::Validation(format!(
                "overlap_chars ({}) must be smaller than max_chunk_chars ({})",
                self.retrieval.overlap_chars, self.retrieval.max_chunk_chars
            )));
        }
        if !matches!(self.retrieval.max_hops, 1 | 2) {
            return Err(ConfigError::Validation(format!(
                "max_hops must be 1 or 2, got {}",
                self.retrieval.max_hops
            )));
        }
        match self.generator.kind {
            GeneratorKind::Http if self.generator.endpoint.is_none() => {
                return Err(ConfigError::Validation(
                    "generator kind `http` requires an endpoint".into(),
                ));
            }
            GeneratorKind::Template if self.generator.endpoint.is_some() => {
                return Err(ConfigError::Validation(
                    "generator kind `template` does not take an endpoint".into(),
                ));
            }
            _ => {}
        }
        if self.generator.evidence_budget_chars == 0 || self.generator.max_response_chars == 0 {
            return Err(ConfigError::Validation(
                "generator budgets must be at least 1".into(),
            ));
        }
        if self.bind.trim().is_empty() {
            return Err(ConfigError::Validation("service bind must be non-empty".into()));
        }
        if !["error", "warn", "info", "debug"].contains(&self.log_level.as_str()) {
            return Err(ConfigError::Validation(format!(
                "log level must be error|warn|info|debug, got `{}`",
                self.log_level
            )));
        }
        Ok(())
    }
}
