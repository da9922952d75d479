//! Query processing: normalization, stopword removal, entity recognition
//! against an alias gazetteer, and relation-intent detection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EntityKind, RelKind};
use crate::text::{stem, tokenize, tokenize_spans, StopWords};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("query text is empty")]
    Empty,
    #[error("query text contains no usable tokens after normalization")]
    EmptyAfterNormalization,
}

/// An incoming question with a caller-supplied id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawQuery {
    pub id: String,
    pub text: String,
}

impl RawQuery {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self, QueryError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(QueryError::Empty);
        }
        Ok(RawQuery { id, text })
    }
}

/// An entity recognized in query or corpus text. `span` is the byte range
/// of the matched surface form in the original string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub surface: String,
    pub span: (usize, usize),
    pub entity_id: String,
    pub kind: EntityKind,
}

/// The normalized, enriched form of a query that retrieval consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedQuery {
    pub original: RawQuery,
    /// Lowercased, stemmed tokens of the full question.
    pub tokens: Vec<String>,
    /// `tokens` with stopwords removed; drives relation-intent detection.
    pub key_terms: Vec<String>,
    pub entities: Vec<EntityMention>,
    pub relation_intent: Option<RelKind>,
}

/// Lowercases, tokenizes, and stems query text. Distinguishes an entirely
/// empty input from one that normalizes to nothing (e.g. only
/// punctuation).
pub fn normalize(text: &str) -> Result<Vec<String>, QueryError> {
    if text.trim().is_empty() {
        return Err(QueryError::Empty);
    }
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(QueryError::EmptyAfterNormalization);
    }
    Ok(tokens.iter().map(|t| stem(t)).collect())
}

/// Drops stopwords from an already-normalized token list, preserving
/// order and duplicates of the surviving terms.
pub fn remove_stopwords(tokens: &[String], stopwords: &StopWords) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stopwords.contains(t))
        .cloned()
        .collect()
}

/// Alias lookup table mapping normalized (stemmed) alias token sequences
/// to entity ids. Collisions resolve to the smallest entity id.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    by_key: BTreeMap<String, (String, EntityKind)>,
    max_alias_tokens: usize,
}

impl Gazetteer {
    pub fn new() -> Self {
        Gazetteer::default()
    }

    pub fn insert(&mut self, alias: &str, entity_id: &str, kind: EntityKind) {
        let stems: Vec<String> = tokenize(alias).iter().map(|t| stem(t)).collect();
        if stems.is_empty() {
            return;
        }
        self.max_alias_tokens = self.max_alias_tokens.max(stems.len());
        let key = stems.join(" ");
        match self.by_key.get(&key) {
            Some((existing, _)) if existing.as_str() <= entity_id => {}
            _ => {
                self.by_key.insert(key, (entity_id.to_string(), kind));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    fn lookup(&self, key: &str) -> Option<&(String, EntityKind)> {
        self.by_key.get(key)
    }
}

/// Finds gazetteer entities in text by greedy longest-match over stemmed
/// tokens, scanning left to right without overlaps.
pub fn recognize_entities(text: &str, gazetteer: &Gazetteer) -> Vec<EntityMention> {
    if gazetteer.is_empty() {
        return Vec::new();
    }
    let spans = tokenize_spans(text);
    let stems: Vec<String> = spans.iter().map(|s| stem(&s.text)).collect();
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < spans.len() {
        let longest = gazetteer.max_alias_tokens.min(spans.len() - i);
        let mut matched = 0;
        for len in (1..=longest).rev() {
            let key = stems[i..i + len].join(" ");
            if let Some((entity_id, kind)) = gazetteer.lookup(&key) {
                let start = spans[i].start;
                let end = spans[i + len - 1].end;
                mentions.push(EntityMention {
                    surface: text[start..end].to_string(),
                    span: (start, end),
                    entity_id: entity_id.clone(),
                    kind: *kind,
                });
                matched = len;
                break;
            }
        }
        i += if matched > 0 { matched } else { 1 };
    }
    mentions
}

enum Trigger {
    Exact(&'static str),
    Prefix(&'static str),
}

/// Trigger table scanned per key term; within one term, earlier rows win.
const TRIGGERS: &[(Trigger, RelKind)] = &[
    (Trigger::Prefix("treat"), RelKind::Treats),
    (Trigger::Prefix("help"), RelKind::Treats),
    (Trigger::Prefix("symptom"), RelKind::HasSymptom),
    (Trigger::Exact("gene"), RelKind::AssociatedGene),
    (Trigger::Prefix("genet"), RelKind::AssociatedGene),
    (Trigger::Prefix("interact"), RelKind::InteractsWith),
    (Trigger::Prefix("contraind"), RelKind::ContraindicatedWith),
    (Trigger::Prefix("associ"), RelKind::AssociatedWith),
];

/// Maps normalized key terms to a relation intent via a trigger table.
/// The first term (in query order) that matches any trigger decides; terms
/// with no trigger are skipped. Returns None when nothing fires.
pub fn detect_relation_intent(key_terms: &[String]) -> Option<RelKind> {
    for term in key_terms {
        for (trigger, rel) in TRIGGERS {
            let fired = match trigger {
                Trigger::Exact(word) => term == word,
                Trigger::Prefix(prefix) => term.starts_with(prefix),
            };
            if fired {
                return Some(*rel);
            }
        }
    }
    None
}

/// Full query-processing pass: normalize, drop stopwords, recognize
/// entities, detect relation intent.
pub fn process_query(
    raw: RawQuery,
    gazetteer: &Gazetteer,
    stopwords: &StopWords,
) -> Result<ProcessedQuery, QueryError> {
    let tokens = normalize(&raw.text)?;
    let key_terms = remove_stopwords(&tokens, stopwords);
    let entities = recognize_entities(&raw.text, gazetteer);
    let relation_intent = detect_relation_intent(&key_terms);
    Ok(ProcessedQuery {
        original: raw,
        tokens,
        key_terms,
        entities,
        relation_intent,
    })
}
