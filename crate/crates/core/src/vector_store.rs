//! Dense vector store: document chunking, exact cosine top-k search over
//! unit-norm embeddings, and a versioned binary on-disk format that
//! records the embedder fingerprint it was built with.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{embed_batch, EmbedError, EmbedderSpec, EmbeddingVector};

#[derive(Debug, Error)]
pub enum VectorStoreError {
    #[error("document id must be non-empty")]
    EmptyDocId,
    #[error("document `{0}` has empty text")]
    EmptyDocText(String),
    #[error("max_chunk_chars must be at least 1, got {0}")]
    BadMaxChunkChars(usize),
    #[error("overlap_chars ({overlap}) must be smaller than max_chunk_chars ({max})")]
    BadOverlap { overlap: usize, max: usize },
    #[error("duplicate chunk id `{0}`")]
    DuplicateChunkId(String),
    #[error("chunk id `{0}` exceeds the maximum encodable length")]
    ChunkIdTooLong(String),
    #[error("embedding produced norm {norm} for chunk `{chunk_id}`, expected 1")]
    NotUnitNorm { chunk_id: String, norm: f64 },
    #[error("query dim {query} does not match index dim {index}")]
    DimMismatch { query: usize, index: usize },
    #[error("search over an empty index")]
    EmptyIndex,
    #[error("k must be at least 1")]
    BadK,
    #[error("index file malformed: {0}")]
    Format(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

pub const DEFAULT_MAX_CHUNK_CHARS: usize = 1000;
pub const DEFAULT_OVERLAP_CHARS: usize = 100;
pub const DEFAULT_K: usize = 5;

const MAGIC: &[u8; 4] = b"FRVI";
const FORMAT_VERSION: u32 = 1;

/// A source document for ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Result<Self, VectorStoreError> {
        let doc_id = doc_id.into();
        let text = text.into();
        if doc_id.is_empty() {
            return Err(VectorStoreError::EmptyDocId);
        }
        if text.trim().is_empty() {
            return Err(VectorStoreError::EmptyDocText(doc_id));
        }
        Ok(Document {
            doc_id,
            text,
            metadata: BTreeMap::new(),
        })
    }
}

/// A contiguous slice of a document. `char_range` is in characters
/// (not bytes) relative to the document text; consecutive chunks of one
/// document overlap by exactly the configured amount.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub text: String,
    pub char_range: (usize, usize),
}

/// Splits a document into overlapping chunks of at most `max_chunk_chars`
/// characters. Chunks prefer to end just after a sentence terminator
/// followed by whitespace; otherwise they cut at the size limit. The
/// original text is exactly reconstructable by appending each chunk minus
/// its leading `overlap_chars` characters.
pub fn chunk_document(
    doc: &Document,
    max_chunk_chars: usize,
    overlap_chars: usize,
) -> Result<Vec<Chunk>, VectorStoreError> {
    if max_chunk_chars == 0 {
        return Err(VectorStoreError::BadMaxChunkChars(max_chunk_chars));
    }
    if overlap_chars >= max_chunk_chars {
        return Err(VectorStoreError::BadOverlap {
            overlap: overlap_chars,
            max: max_chunk_chars,
        });
    }
    let chars: Vec<char> = doc.text.chars().collect();
    let n = chars.len();
    let mut chunks = Vec::new();
    let mut start = 0usize;
    let mut ordinal = 0usize;
    while start < n {
        let end = if n - start <= max_chunk_chars {
            n
        } else {
            let window_end = start + max_chunk_chars;
            // Latest sentence boundary inside the window that still
            // guarantees forward progress after overlap.
            let mut cut = window_end;
            let floor = start + overlap_chars + 1;
            let mut p = window_end;
            while p >= floor.max(2) {
                if chars[p - 1].is_whitespace() && matches!(chars[p - 2], '.' | '!' | '?') {
                    cut = p;
                    break;
                }
                p -= 1;
            }
            cut
        };
        chunks.push(Chunk {
            chunk_id: format!("{}#{}", doc.doc_id, ordinal),
            doc_id: doc.doc_id.clone(),
            text: chars[start..end].iter().collect(),
            char_range: (start, end),
        });
        if end >= n {
            break;
        }
        start = end - overlap_chars;
        ordinal += 1;
    }
    Ok(chunks)
}

/// One stored embedding.
#[derive(Debug, Clone)]
pub struct IndexEntry {
    pub chunk_id: String,
    pub values: Vec<f32>,
}

/// An in-memory exact-search index over unit-norm embeddings.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    dim: u32,
    fingerprint: [u8; 32],
    entries: Vec<IndexEntry>,
}

/// A search result; `rank` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorHit {
    pub chunk_id: String,
    pub score: f32,
    pub rank: usize,
}

impl VectorIndex {
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }
}

/// Embeds chunks and assembles the index. Chunk ids must be unique; every
/// embedding is checked for unit norm at index time.
pub fn build_index(chunks: &[Chunk], spec: &EmbedderSpec) -> Result<VectorIndex, VectorStoreError> {
    let mut seen = BTreeSet::new();
    for chunk in chunks {
        if !seen.insert(chunk.chunk_id.as_str()) {
            return Err(VectorStoreError::DuplicateChunkId(chunk.chunk_id.clone()));
        }
        if chunk.chunk_id.len() > u16::MAX as usize {
            return Err(VectorStoreError::ChunkIdTooLong(chunk.chunk_id.clone()));
        }
    }
    let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
    let vectors = embed_batch(&texts, spec)?;
    let mut entries = Vec::with_capacity(chunks.len());
    for (chunk, vector) in chunks.iter().zip(vectors) {
        let norm = vector.l2_norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(VectorStoreError::NotUnitNorm {
                chunk_id: chunk.chunk_id.clone(),
                norm,
            });
        }
        entries.push(IndexEntry {
            chunk_id: chunk.chunk_id.clone(),
            values: vector.values,
        });
    }
    Ok(VectorIndex {
        dim: spec.dim,
        fingerprint: spec.fingerprint(),
        entries,
    })
}

/// Exact top-k search: dot product against every entry (cosine, since
/// both sides are unit norm), sorted by score descending with ties broken
/// by ascending chunk id.
pub fn search(
    index: &VectorIndex,
    query: &EmbeddingVector,
    k: usize,
) -> Result<Vec<VectorHit>, VectorStoreError> {
    if k == 0 {
        return Err(VectorStoreError::BadK);
    }
    if index.is_empty() {
        return Err(VectorStoreError::EmptyIndex);
    }
    if query.dim() != index.dim as usize {
        return Err(VectorStoreError::DimMismatch {
            query: query.dim(),
            index: index.dim as usize,
        });
    }
    let mut hits: Vec<VectorHit> = index
        .entries
        .iter()
        .map(|entry| {
            let score: f32 = entry
                .values
                .iter()
                .zip(&query.values)
                .map(|(&a, &b)| a * b)
                .sum();
            VectorHit {
                chunk_id: entry.chunk_id.clone(),
                score,
                rank: 0,
            }
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.chunk_id.cmp(&b.chunk_id))
    });
    hits.truncate(k);
    for (i, hit) in hits.iter_mut().enumerate() {
        hit.rank = i + 1;
    }
    Ok(hits)
}

/// Writes the index in its binary format: magic, format version, dim,
/// entry count, embedder fingerprint, then one record per entry (id
/// length, id bytes, dim little-endian f32 values).
pub fn save_index(index: &VectorIndex, path: &Path) -> Result<(), VectorStoreError> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&index.dim.to_le_bytes());
    out.extend_from_slice(&(index.entries.len() as u64).to_le_bytes());
    out.extend_from_slice(&index.fingerprint);
    for entry in &index.entries {
        let id_bytes = entry.chunk_id.as_bytes();
        if id_bytes.len() > u16::MAX as usize {
            return Err(VectorStoreError::ChunkIdTooLong(entry.chunk_id.clone()));
        }
        out.extend_from_slice(&(id_bytes.len() as u16).to_le_bytes());
        out.extend_from_slice(id_bytes);
        for &value in &entry.values {
            out.extend_from_slice(&value.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

fn read_exact_or_format(
    reader: &mut impl Read,
    buf: &mut [u8],
    what: &str,
) -> Result<(), VectorStoreError> {
    reader
        .read_exact(buf)
        .map_err(|_| VectorStoreError::Format(format!("truncated while reading {what}")))
}

/// Reads an index file, validating magic, version, and structure. The
/// caller is responsible for comparing the stored fingerprint against the
/// active embedder configuration.
pub fn load_index(path: &Path) -> Result<VectorIndex, VectorStoreError> {
    let data = std::fs::read(path)?;
    let mut reader: &[u8] = &data;
    let mut magic = [0u8; 4];
    read_exact_or_format(&mut reader, &mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(VectorStoreError::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let mut u32_buf = [0u8; 4];
    read_exact_or_format(&mut reader, &mut u32_buf, "format version")?;
    let version = u32::from_le_bytes(u32_buf);
    if version != FORMAT_VERSION {
        return Err(VectorStoreError::Format(format!(
            "unsupported format version {version}"
        )));
    }
    read_exact_or_format(&mut reader, &mut u32_buf, "dim")?;
    let dim = u32::from_le_bytes(u32_buf);
    if dim == 0 {
        return Err(VectorStoreError::Format("dim is zero".into()));
    }
    let mut u64_buf = [0u8; 8];
    read_exact_or_format(&mut reader, &mut u64_buf, "entry count")?;
    let count = u64::from_le_bytes(u64_buf);
    let mut fingerprint = [0u8; 32];
    read_exact_or_format(&mut reader, &mut fingerprint, "fingerprint")?;
    let mut entries = Vec::new();
    for i in 0..count {
        let mut u16_buf = [0u8; 2];
        read_exact_or_format(&mut reader, &mut u16_buf, &format!("id length of entry {i}"))?;
        let id_len = u16::from_le_bytes(u16_buf) as usize;
        let mut id_bytes = vec![0u8; id_len];
        read_exact_or_format(&mut reader, &mut id_bytes, &format!("id of entry {i}"))?;
        let chunk_id = String::from_utf8(id_bytes)
            .map_err(|_| VectorStoreError::Format(format!("entry {i} id is not UTF-8")))?;
        let mut values = Vec::with_capacity(dim as usize);
        let mut f32_buf = [0u8; 4];
        for _ in 0..dim {
            read_exact_or_format(&mut reader, &mut f32_buf, &format!("vector of entry {i}"))?;
            values.push(f32::from_le_bytes(f32_buf));
        }
        entries.push(IndexEntry { chunk_id, values });
    }
    if !reader.is_empty() {
        return Err(VectorStoreError::Format(format!(
            "{} trailing bytes after the last entry",
            reader.len()
        )));
    }
    Ok(VectorIndex {
        dim,
        fingerprint,
        entries,
    })
}

/// Chunk texts and provenance kept alongside the index so retrieval can
/// hand full passages to fusion and generation.
#[derive(Debug, Clone, Default)]
pub struct ChunkStore {
    by_id: BTreeMap<String, Chunk>,
}

impl ChunkStore {
    pub fn from_chunks(chunks: Vec<Chunk>) -> Result<Self, VectorStoreError> {
        let mut by_id = BTreeMap::new();
        for chunk in chunks {
            if by_id.insert(chunk.chunk_id.clone(), chunk.clone()).is_some() {
                return Err(VectorStoreError::DuplicateChunkId(chunk.chunk_id));
            }
        }
        Ok(ChunkStore { by_id })
    }

    pub fn get(&self, chunk_id: &str) -> Option<&Chunk> {
        self.by_id.get(chunk_id)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Chunk> {
        self.by_id.values()
    }

    /// One JSON object per chunk, ordered by chunk id.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for chunk in self.by_id.values() {
            out.push_str(&serde_json::to_string(chunk).expect("serializable chunk"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(contents: &str) -> Result<Self, VectorStoreError> {
        let mut chunks = Vec::new();
        for (idx, line) in contents.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let chunk: Chunk = serde_json::from_str(line).map_err(|e| {
                VectorStoreError::Format(format!("chunk line {}: {e}", idx + 1))
            })?;
            chunks.push(chunk);
        }
        ChunkStore::from_chunks(chunks)
    }
}
