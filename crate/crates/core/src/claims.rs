//! Factual-claim extraction from free text: each sentence that mentions
//! two or more known entities yields (subject, relation, object) triples
//! suitable for verification against the knowledge graph.

use serde::{Deserialize, Serialize};

use crate::graph::RelKind;
use crate::query::{detect_relation_intent, recognize_entities, Gazetteer};
use crate::text::{split_sentences, stem, tokenize};

/// A checkable statement: two entity ids joined by a relation kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Claim {
    pub src: String,
    pub rel: RelKind,
    pub dst: String,
}

impl Claim {
    pub fn new(src: impl Into<String>, rel: RelKind, dst: impl Into<String>) -> Self {
        Claim {
            src: src.into(),
            rel,
            dst: dst.into(),
        }
    }
}

/// Extracts claims sentence by sentence. Within a sentence, entity ids
/// are ordered by first mention; every ordered pair (earlier, later)
/// becomes one claim. The relation is the sentence's trigger-table
/// intent, defaulting to ASSOCIATED_WITH when no trigger fires.
pub fn extract_claims(text: &str, gazetteer: &Gazetteer) -> Vec<Claim> {
    let mut claims = Vec::new();
    for sentence in split_sentences(text) {
        let mentions = recognize_entities(sentence.text, gazetteer);
        let mut ids: Vec<String> = Vec::new();
        for mention in &mentions {
            if !ids.contains(&mention.entity_id) {
                ids.push(mention.entity_id.clone());
            }
        }
        if ids.len() < 2 {
            continue;
        }
        let terms: Vec<String> = tokenize(sentence.text).iter().map(|t| stem(t)).collect();
        let rel = detect_relation_intent(&terms).unwrap_or(RelKind::AssociatedWith);
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                let claim = Claim::new(ids[i].clone(), rel, ids[j].clone());
                if !claims.contains(&claim) {
                    claims.push(claim);
                }
            }
        }
    }
    claims
}
