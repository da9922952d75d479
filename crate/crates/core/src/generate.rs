//! Response generation over the fused evidence context: prompt assembly
//! under a character budget, a deterministic template generator, and an
//! adapter for an external HTTP generation service. The generator only
//! restates retrieved evidence — empty evidence yields an explicit
//! refusal instead of a fabricated answer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{FusedContext, SourceTag};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("generation service transport failure: {0}")]
    Transport(String),
    #[error("generation service response malformed: {0}")]
    Schema(String),
    #[error("generation service returned empty text")]
    EmptyResponse,
}

pub const DEFAULT_EVIDENCE_BUDGET_CHARS: usize = 4000;
pub const DEFAULT_MAX_RESPONSE_CHARS: usize = 2000;

/// Fixed answer when no usable evidence survives retrieval and fusion.
pub const REFUSAL_TEXT: &str =
    "I do not have enough retrieved evidence to answer this question.";

/// Instruction prefix sent to generation backends.
pub const SYSTEM_PREAMBLE: &str = "Answer strictly from the supplied evidence. \
If the evidence does not answer the question, say so.";

/// One evidence passage in the prompt, tagged with its retrieval source
/// and provenance id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceBlock {
    pub tag: String,
    pub id: String,
    pub text: String,
}

/// A fully assembled generation request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub system: String,
    pub evidence: Vec<EvidenceBlock>,
    pub question: String,
}

impl Prompt {
    /// Plain-text rendering: preamble, one bracket-tagged block per
    /// evidence passage, then the question.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.system);
        out.push('\n');
        for block in &self.evidence {
            out.push_str(&format!(
                "[source:{} id={}] {}\n",
                block.tag, block.id, block.text
            ));
        }
        out.push_str("Question: ");
        out.push_str(&self.question);
        out
    }
}

/// Builds the prompt from ranked fused evidence. Blocks are taken in rank
/// order; a block that would push the total evidence text over
/// `budget_chars` is dropped whole, never truncated mid-passage.
pub fn assemble_prompt(ctx: &FusedContext, budget_chars: usize) -> Prompt {
    let mut evidence = Vec::new();
    let mut used = 0usize;
    for candidate in &ctx.candidates {
        let len = candidate.text.chars().count();
        if used + len > budget_chars {
            continue;
        }
        used += len;
        evidence.push(EvidenceBlock {
            tag: match candidate.source {
                SourceTag::Vector => "vector".to_string(),
                SourceTag::Graph => "graph".to_string(),
            },
            id: candidate.id.clone(),
            text: candidate.text.clone(),
        });
    }
    Prompt {
        system: SYSTEM_PREAMBLE.to_string(),
        evidence,
        question: ctx.query.original.text.clone(),
    }
}

/// A generated answer with the provenance ids it drew from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedResponse {
    pub text: String,
    pub cited_provenance: Vec<String>,
    pub generator_id: String,
    /// True when the generator refused for lack of evidence.
    pub degraded: bool,
}

/// A pluggable generation backend.
pub trait GeneratorAdapter: Send + Sync {
    fn generate(&self, prompt: &Prompt) -> Result<GeneratedResponse, GenerateError>;
    fn id(&self) -> &str;
}

/// Deterministic extractive generator: quotes the top evidence block
/// verbatim and cites every block in the prompt.
#[derive(Debug, Default, Clone)]
pub struct TemplateGenerator;

impl GeneratorAdapter for TemplateGenerator {
    fn generate(&self, prompt: &Prompt) -> Result<GeneratedResponse, GenerateError> {
        let top = prompt
            .evidence
            .first()
            .expect("empty evidence is handled before adapter dispatch");
        let ids: Vec<&str> = prompt.evidence.iter().map(|b| b.id.as_str()).collect();
        // Cited ids are separated by periods so downstream text analysis
        // treats each as its own sentence-like fragment; ids can embed
        // entity names, and running them together would read as an
        // asserted relationship between those entities.
        let text = format!(
            "Based on the retrieved evidence: {} [Sources: {}.]",
            top.text,
            ids.join(". ")
        );
        Ok(GeneratedResponse {
            text,
            cited_provenance: ids.iter().map(|s| s.to_string()).collect(),
            generator_id: self.id().to_string(),
            degraded: false,
        })
    }

    fn id(&self) -> &str {
        "template-v1"
    }
}

#[derive(Serialize)]
struct HttpGenRequest<'a> {
    system: &'a str,
    evidence: &'a [EvidenceBlock],
    question: &'a str,
}

#[derive(Deserialize)]
struct HttpGenResponse {
    text: String,
}

/// Adapter for an external HTTP generation service speaking a minimal
/// JSON protocol: the prompt goes out as structured blocks, the answer
/// comes back as `{"text": ...}`.
#[derive(Debug, Clone)]
pub struct HttpGenerator {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub max_response_chars: usize,
}

impl HttpGenerator {
    pub fn new(endpoint: impl Into<String>, timeout_ms: u64, max_response_chars: usize) -> Self {
        HttpGenerator {
            endpoint: endpoint.into(),
            timeout_ms,
            max_response_chars,
        }
    }
}

impl GeneratorAdapter for HttpGenerator {
    fn generate(&self, prompt: &Prompt) -> Result<GeneratedResponse, GenerateError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_millis(self.timeout_ms))
            .build()
            .map_err(|e| GenerateError::Transport(e.to_string()))?;
        let request = HttpGenRequest {
            system: &prompt.system,
            evidence: &prompt.evidence,
            question: &prompt.question,
        };
        let response = client
            .post(&self.endpoint)
            .json(&request)
            .send()
            .map_err(|e| GenerateError::Transport(e.to_string()))?;
        if !response.status().is_success() {
            return Err(GenerateError::Transport(format!(
                "generation service answered {}",
                response.status()
            )));
        }
        let parsed: HttpGenResponse = response
            .json()
            .map_err(|e| GenerateError::Schema(e.to_string()))?;
        if parsed.text.trim().is_empty() {
            return Err(GenerateError::EmptyResponse);
        }
        let mut text = parsed.text;
        if text.chars().count() > self.max_response_chars {
            text = text.chars().take(self.max_response_chars).collect();
        }
        Ok(GeneratedResponse {
            text,
            cited_provenance: prompt.evidence.iter().map(|b| b.id.clone()).collect(),
            generator_id: self.id().to_string(),
            degraded: false,
        })
    }

    fn id(&self) -> &str {
        "http-v1"
    }
}

/// Generates an answer for the prompt. A prompt with no evidence blocks
/// short-circuits to the refusal response without touching the adapter.
pub fn generate(
    prompt: &Prompt,
    adapter: &dyn GeneratorAdapter,
) -> Result<GeneratedResponse, GenerateError> {
    if prompt.evidence.is_empty() {
        return Ok(GeneratedResponse {
            text: REFUSAL_TEXT.to_string(),
            cited_provenance: Vec::new(),
            generator_id: adapter.id().to_string(),
            degraded: true,
        });
    }
    let response = adapter.generate(prompt)?;
    debug_assert!(
        response
            .cited_provenance
            .iter()
            .all(|id| prompt.evidence.iter().any(|b| &b.id == id)),
        "cited provenance must be a subset of prompt evidence ids"
    );
    Ok(response)
}
