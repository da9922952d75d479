//! Text embedding: a deterministic built-in feature-hashing embedder and
//! an adapter for an external HTTP embedding service. Both produce
//! L2-normalized vectors of a configured dimension.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::{stem, tokenize};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("text at index {0} contains no usable tokens after normalization")]
    EmptyText(usize),
    #[error("embedding dim must be at least {min}, got {got}")]
    DimTooSmall { min: u32, got: u32 },
    #[error("external embedder requires an endpoint")]
    MissingEndpoint,
    #[error("built-in embedder does not take an endpoint")]
    UnexpectedEndpoint,
    #[error("embedding service returned {got} vectors for {expected} texts")]
    CountMismatch { expected: usize, got: usize },
    #[error("embedding service returned dim {got}, expected {expected} (index {index})")]
    DimMismatch {
        expected: usize,
        got: usize,
        index: usize,
    },
    #[error("embedding service returned a zero vector at index {0}")]
    ZeroVector(usize),
    #[error("embedding service transport failure: {0}")]
    Transport(String),
    #[error("embedding service response malformed: {0}")]
    Schema(String),
}

pub const MIN_DIM: u32 = 8;
pub const DEFAULT_DIM: u32 = 384;
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

/// Which embedding backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderKind {
    BuiltinHash,
    External,
}

/// Full description of an embedding configuration. Two specs with the
/// same fingerprint produce comparable vector spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedderSpec {
    pub kind: EmbedderKind,
    pub dim: u32,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub timeout_ms: u64,
}

impl Default for EmbedderSpec {
    fn default() -> Self {
        EmbedderSpec {
            kind: EmbedderKind::BuiltinHash,
            dim: DEFAULT_DIM,
            endpoint: None,
            model_name: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

impl EmbedderSpec {
    pub fn builtin(dim: u32) -> Self {
        EmbedderSpec {
            dim,
            ..EmbedderSpec::default()
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim < MIN_DIM {
            return Err(EmbedError::DimTooSmall {
                min: MIN_DIM,
                got: self.dim,
            });
        }
        match self.kind {
            EmbedderKind::External if self.endpoint.is_none() => Err(EmbedError::MissingEndpoint),
            EmbedderKind::BuiltinHash if self.endpoint.is_some() => {
                Err(EmbedError::UnexpectedEndpoint)
            }
            _ => Ok(()),
        }
    }

    /// SHA-256 digest of the canonical identity string: hashing scheme,
    /// dimension, and model name. The endpoint URL is deliberately
    /// excluded — moving a service does not change its vector space.
    pub fn fingerprint(&self) -> [u8; 32] {
        let kind_tag = match self.kind {
            EmbedderKind::BuiltinHash => "builtin-hash|fnv1a64|uni+bi",
            EmbedderKind::External => "external",
        };
        let model = self.model_name.as_deref().unwrap_or("-");
        let canonical = format!("fuserag-embedder/v1|{kind_tag}|{}|{model}", self.dim);
        let digest = Sha256::digest(canonical.as_bytes());
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        out
    }
}

/// An L2-normalized embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// Cosine similarity accumulated in f64 over f32 components.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    let dot: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x as f64) * (y as f64))
        .sum();
    let na = a.l2_norm();
    let nb = b.l2_norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

const FNV_OFFSET: u64 = 0xCBF2_9CE4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01B3;
const BUCKET_TAG: &[u8] = b"bucket\0";
const SIGN_TAG: &[u8] = b"sign\0";
const BIGRAM_JOIN: char = '\u{1f}';

fn fnv1a64(tag: &[u8], data: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &byte in tag.iter().chain(data) {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Stemmed token stream feeding the hasher.
fn normalize_tokens(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| stem(t)).collect()
}

/// Hashed features: all unigrams in token order, then all bigrams (token
/// pairs joined by a non-text separator) in order.
fn features(tokens: &[String]) -> Vec<String> {
    let mut feats: Vec<String> = tokens.to_vec();
    for pair in tokens.windows(2) {
        feats.push(format!("{}{}{}", pair[0], BIGRAM_JOIN, pair[1]));
    }
    feats
}

fn embed_builtin(text: &str, dim: u32, index: usize) -> Result<EmbeddingVector, EmbedError> {
    let tokens = normalize_tokens(text);
    if tokens.is_empty() {
        return Err(EmbedError::EmptyText(index));
    }
    let mut values = vec![0.0f32; dim as usize];
    for feature in features(&tokens) {
        let bytes = feature.as_bytes();
        let bucket = (fnv1a64(BUCKET_TAG, bytes) % dim as u64) as usize;
        let sign = if fnv1a64(SIGN_TAG, bytes) & 1 == 0 {
            1.0f32
        } else {
            -1.0f32
        };
        values[bucket] += sign;
    }
    let norm = values
        .iter()
        .map(|&v| (v as f64) * (v as f64))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        // Signed counts can cancel only when every feature vanishes,
        // which non-empty token lists prevent; guard regardless.
        return Err(EmbedError::ZeroVector(index));
    }
    for v in &mut values {
        *v = ((*v as f64) / norm) as f32;
    }
    Ok(EmbeddingVector { values })
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct ExternalResponse {
    vectors: Vec<Vec<f32>>,
}

fn embed_external(texts: &[String], spec: &EmbedderSpec) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let endpoint = spec.endpoint.as_deref().ok_or(EmbedError::MissingEndpoint)?;
    for (index, text) in texts.iter().enumerate() {
        if normalize_tokens(text).is_empty() {
            return Err(EmbedError::EmptyText(index));
        }
    }
    let client = reqwest::blocking::Client::builder()
        .timeout(std::time::Duration::from_millis(spec.timeout_ms))
        .build()
        .map_err(|e| EmbedError::Transport(e.to_string()))?;
    let request = ExternalRequest {
        model: spec.model_name.as_deref().unwrap_or(""),
        texts,
    };
    let response = client
        .post(endpoint)
        .json(&request)
        .send()
        .map_err(|e| EmbedError::Transport(e.to_string()))?;
    if !response.status().is_success() {
        return Err(EmbedError::Transport(format!(
            "embedding service answered {}",
            response.status()
        )));
    }
    let parsed: ExternalResponse = response
        .json()
        .map_err(|e| EmbedError::Schema(e.to_string()))?;
    if parsed.vectors.len() != texts.len() {
        return Err(EmbedError::CountMismatch {
            expected: texts.len(),
            got: parsed.vectors.len(),
        });
    }
    let mut out = Vec::with_capacity(parsed.vectors.len());
    for (index, values) in parsed.vectors.into_iter().enumerate() {
        if values.len() != spec.dim as usize {
            return Err(EmbedError::DimMismatch {
                expected: spec.dim as usize,
                got: values.len(),
                index,
            });
        }
        // Normalize locally: unit norm is this module's postcondition, not
        // the remote service's promise.
        let mut vector = EmbeddingVector { values };
        let norm = vector.l2_norm();
        if norm == 0.0 {
            return Err(EmbedError::ZeroVector(index));
        }
        for v in &mut vector.values {
            *v = ((*v as f64) / norm) as f32;
        }
        out.push(vector);
    }
    Ok(out)
}

/// Embeds one text.
pub fn embed(text: &str, spec: &EmbedderSpec) -> Result<EmbeddingVector, EmbedError> {
    spec.validate()?;
    match spec.kind {
        EmbedderKind::BuiltinHash => embed_builtin(text, spec.dim, 0),
        EmbedderKind::External => {
            let texts = vec![text.to_string()];
            Ok(embed_external(&texts, spec)?.remove(0))
        }
    }
}

/// Embeds a batch. The external backend sends a single request;
/// the built-in backend maps over the inputs.
pub fn embed_batch(texts: &[String], spec: &EmbedderSpec) -> Result<Vec<EmbeddingVector>, EmbedError> {
    spec.validate()?;
    match spec.kind {
        EmbedderKind::BuiltinHash => texts
            .iter()
            .enumerate()
            .map(|(i, t)| embed_builtin(t, spec.dim, i))
            .collect(),
        EmbedderKind::External => embed_external(texts, spec),
    }
}
