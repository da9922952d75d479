//! Scored fusion of vector and graph retrieval: threshold prefiltering,
//! context scoring, cross-retriever fact checking, weighted score fusion,
//! and deterministic ranking of the merged evidence set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::claims::{extract_claims, Claim};
use crate::graph::{verbalize_hit, ClaimVerdict, Graph, GraphHit};
use crate::query::{recognize_entities, Gazetteer, ProcessedQuery};
use crate::vector_store::{ChunkStore, VectorHit};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("fusion config invalid: {0}")]
    BadConfig(String),
    #[error("vector hit references unknown chunk `{0}`")]
    UnknownChunk(String),
}

/// Where a candidate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Vector,
    Graph,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateFlags {
    /// Dropped by the score prefilter.
    pub filtered: bool,
    /// Carried a claim the graph contradicts; removed from the context.
    pub contradicted: bool,
    /// At least one claim confirmed by the graph, or merged across
    /// retrievers.
    pub cross_verified: bool,
}

/// One piece of candidate evidence flowing through fusion.
#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    /// Chunk id for vector candidates, entity id for graph candidates.
    pub id: String,
    pub source: SourceTag,
    pub doc_id: Option<String>,
    pub text: String,
    /// Vector relevance mapped to [0, 1]; absent for graph candidates.
    pub s_vector: Option<f64>,
    /// Graph path accuracy in [0, 1]; absent for pure vector candidates.
    pub s_graph: Option<f64>,
    /// Entity overlap with the query in [0, 1].
    pub s_context: f64,
    pub fused_score: f64,
    pub flags: CandidateFlags,
    /// For graph candidates: the final path edge as a claim, used to
    /// detect agreement with vector evidence.
    pub key_claim: Option<Claim>,
    /// Id of the vector candidate this graph candidate merged into.
    pub merged_into: Option<String>,
}

impl Candidate {
    /// Cosine similarity is mapped affinely from [-1, 1] to [0, 1]; the
    /// map is strictly monotone, so fused rankings under degenerate
    /// weights reproduce raw vector rankings exactly.
    pub fn from_vector_hit(hit: &VectorHit, chunks: &ChunkStore) -> Result<Self, FusionError> {
        let chunk = chunks
            .get(&hit.chunk_id)
            .ok_or_else(|| FusionError::UnknownChunk(hit.chunk_id.clone()))?;
        Ok(Candidate {
            id: hit.chunk_id.clone(),
            source: SourceTag::Vector,
            doc_id: Some(chunk.doc_id.clone()),
            text: chunk.text.clone(),
            s_vector: Some(((hit.score as f64) + 1.0) / 2.0),
            s_graph: None,
            s_context: 0.0,
            fused_score: 0.0,
            flags: CandidateFlags::default(),
            key_claim: None,
            merged_into: None,
        })
    }

    pub fn from_graph_hit(hit: &GraphHit, graph: &Graph) -> Self {
        let key_claim = hit.path.last().map(|edge| Claim {
            src: edge.src.clone(),
            rel: edge.rel_kind,
            dst: edge.dst.clone(),
        });
        Candidate {
            // Graph candidates are namespaced so their ids can never
            // collide with chunk ids in audits and citations.
            id: format!("kg:{}", hit.entity.entity_id),
            source: SourceTag::Graph,
            doc_id: None,
            text: verbalize_hit(hit, graph),
            s_vector: None,
            s_graph: Some(hit.accuracy),
            s_context: 0.0,
            fused_score: 0.0,
            flags: CandidateFlags::default(),
            key_claim,
            merged_into: None,
        }
    }
}

/// Fusion weights and thresholds. Weights must be non-negative and sum
/// to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub w_vector: f64,
    pub w_graph: f64,
    pub w_context: f64,
    pub tau_vector: f64,
    pub tau_graph: f64,
    pub k_final: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            w_vector: 0.4,
            w_graph: 0.4,
            w_context: 0.2,
            tau_vector: 0.25,
            tau_graph: 0.30,
            k_final: 6,
        }
    }
}

impl FusionConfig {
    pub fn with_weights(w_vector: f64, w_graph: f64, w_context: f64) -> Self {
        FusionConfig {
            w_vector,
            w_graph,
            w_context,
            ..FusionConfig::default()
        }
    }

    /// Preset favoring dense retrieval.
    pub fn vector_heavy() -> Self {
        Self::with_weights(0.6, 0.2, 0.2)
    }

    /// Preset favoring graph retrieval.
    pub fn graph_heavy() -> Self {
        Self::with_weights(0.2, 0.6, 0.2)
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        let weights = [self.w_vector, self.w_graph, self.w_context];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(FusionError::BadConfig(
                "weights must be non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(FusionError::BadConfig(format!(
                "weights must sum to 1, got {sum}"
            )));
        }
        for (name, tau) in [("tau_vector", self.tau_vector), ("tau_graph", self.tau_graph)] {
            if !(0.0..=1.0).contains(&tau) {
                return Err(FusionError::BadConfig(format!(
                    "{name} must lie in [0, 1], got {tau}"
                )));
            }
        }
        if self.k_final == 0 {
            return Err(FusionError::BadConfig("k_final must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters describing what fusion did, for reporting and audit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ProvenanceSummary {
    pub vector_candidates: usize,
    pub graph_candidates: usize,
    pub filtered_out: usize,
    pub contradicted_removed: usize,
    pub merged: usize,
    pub cross_verified: usize,
    pub selected: usize,
}

/// The fused evidence context handed to generation.
#[derive(Debug, Clone, Serialize)]
pub struct FusedContext {
    pub query: ProcessedQuery,
    /// Final ranked evidence, best first.
    pub candidates: Vec<Candidate>,
    /// Every candidate that entered fusion, including filtered, removed,
    /// and merged ones, with their final flags and scores.
    pub audit: Vec<Candidate>,
    pub provenance: ProvenanceSummary,
}

impl FusedContext {
    /// One JSON object per audited candidate.
    pub fn to_audit_jsonl(&self) -> String {
        let mut out = String::new();
        for candidate in &self.audit {
            out.push_str(&serde_json::to_string(candidate).expect("serializable candidate"));
            out.push('\n');
        }
        out
    }
}

/// Drops candidates whose source score falls below its floor. Returns
/// (kept, dropped); dropped candidates carry the `filtered` flag.
pub fn prefilter(candidates: Vec<Candidate>, cfg: &FusionConfig) -> (Vec<Candidate>, Vec<Candidate>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for mut candidate in candidates {
        let below = match candidate.source {
            SourceTag::Vector => candidate.s_vector.unwrap_or(0.0) < cfg.tau_vector,
            SourceTag::Graph => candidate.s_graph.unwrap_or(0.0) < cfg.tau_graph,
        };
        if below {
            candidate.flags.filtered = true;
            dropped.push(candidate);
        } else {
            kept.push(candidate);
        }
    }
    (kept, dropped)
}

/// Jaccard overlap between the entity ids mentioned in the query and
/// those mentioned in the candidate text; 0 when either side mentions no
/// entities.
pub fn context_score(candidate: &Candidate, pq: &ProcessedQuery, gazetteer: &Gazetteer) -> f64 {
    let query_ids: BTreeSet<&str> = pq.entities.iter().map(|m| m.entity_id.as_str()).collect();
    let text_mentions = recognize_entities(&candidate.text, gazetteer);
    let text_ids: BTreeSet<String> = text_mentions.into_iter().map(|m| m.entity_id).collect();
    if query_ids.is_empty() || text_ids.is_empty() {
        return 0.0;
    }
    let intersection = text_ids
        .iter()
        .filter(|id| query_ids.contains(id.as_str()))
        .count();
    let union = query_ids.len() + text_ids.len() - intersection;
    intersection as f64 / union as f64
}

/// Weighted linear fusion; absent source scores contribute zero.
pub fn fuse_score(candidate: &Candidate, cfg: &FusionConfig) -> f64 {
    cfg.w_vector * candidate.s_vector.unwrap_or(0.0)
        + cfg.w_graph * candidate.s_graph.unwrap_or(0.0)
        + cfg.w_context * candidate.s_context
}

struct DecisionOutcome {
    kept: Vec<Candidate>,
    contradicted: Vec<Candidate>,
    merged_away: Vec<Candidate>,
}

/// Cross-checks every candidate's claims against the graph. Candidates
/// with a contradicted claim are removed; candidates with a supported
/// claim are marked cross-verified. Graph candidates whose path fact also
/// appears in a vector candidate's text merge into that candidate (first
/// match in rank order), which keeps the vector text, both source scores,
/// and the larger context score.
fn decision_fuse(
    vector_candidates: Vec<Candidate>,
    graph_candidates: Vec<Candidate>,
    graph: &Graph,
    gazetteer: &Gazetteer,
) -> DecisionOutcome {
    let mut contradicted = Vec::new();

    let verify = |candidate: &mut Candidate| -> bool {
        let claims = extract_claims(&candidate.text, gazetteer);
        let mut any_contradicted = false;
        let mut any_supported = false;
        for claim in &claims {
            match graph.verify_claim(&claim.src, claim.rel, &claim.dst) {
                ClaimVerdict::Contradicted => any_contradicted = true,
                ClaimVerdict::Supported => any_supported = true,
                ClaimVerdict::Unknown => {}
            }
        }
        if any_contradicted {
            candidate.flags.contradicted = true;
            return false;
        }
        if any_supported {
            candidate.flags.cross_verified = true;
        }
        true
    };

    let mut vectors: Vec<(Candidate, Vec<Claim>)> = Vec::new();
    for mut candidate in vector_candidates {
        if verify(&mut candidate) {
            let claims = extract_claims(&candidate.text, gazetteer);
            vectors.push((candidate, claims));
        } else {
            contradicted.push(candidate);
        }
    }

    let mut graphs: Vec<Candidate> = Vec::new();
    for mut candidate in graph_candidates {
        if verify(&mut candidate) {
            graphs.push(candidate);
        } else {
            contradicted.push(candidate);
        }
    }

    let mut merged_away = Vec::new();
    let mut unmerged = Vec::new();
    for mut g in graphs {
        let target = g.key_claim.as_ref().and_then(|key| {
            vectors
                .iter()
                .position(|(_, claims)| claims.contains(key))
        });
        match target {
            Some(idx) => {
                let (v, _) = &mut vectors[idx];
                v.s_graph = Some(match v.s_graph {
                    Some(existing) => existing.max(g.s_graph.unwrap_or(0.0)),
                    None => g.s_graph.unwrap_or(0.0),
                });
                v.s_context = v.s_context.max(g.s_context);
                v.flags.cross_verified = true;
                g.merged_into = Some(v.id.clone());
                merged_away.push(g);
            }
            None => unmerged.push(g),
        }
    }

    let mut kept: Vec<Candidate> = vectors.into_iter().map(|(c, _)| c).collect();
    kept.extend(unmerged);
    DecisionOutcome {
        kept,
        contradicted,
        merged_away,
    }
}

/// Runs the full fusion pipeline over raw retrieval output:
/// convert, prefilter, context-score, decision-fuse (when `fact_check`),
/// score, sort, deduplicate by document, truncate to `k_final`.
#[allow(clippy::too_many_arguments)]
pub fn fuse(
    vector_hits: &[VectorHit],
    graph_hits: &[GraphHit],
    pq: &ProcessedQuery,
    cfg: &FusionConfig,
    graph: &Graph,
    gazetteer: &Gazetteer,
    chunks: &ChunkStore,
    fact_check: bool,
) -> Result<FusedContext, FusionError> {
    cfg.validate()?;
    let mut provenance = ProvenanceSummary {
        vector_candidates: vector_hits.len(),
        graph_candidates: graph_hits.len(),
        ..ProvenanceSummary::default()
    };

    let vector_candidates: Vec<Candidate> = vector_hits
        .iter()
        .map(|hit| Candidate::from_vector_hit(hit, chunks))
        .collect::<Result<_, _>>()?;
    let graph_candidates: Vec<Candidate> = graph_hits
        .iter()
        .map(|hit| Candidate::from_graph_hit(hit, graph))
        .collect();

    let (mut vector_kept, vector_dropped) = prefilter(vector_candidates, cfg);
    let (mut graph_kept, graph_dropped) = prefilter(graph_candidates, cfg);
    provenance.filtered_out = vector_dropped.len() + graph_dropped.len();

    for candidate in vector_kept.iter_mut().chain(graph_kept.iter_mut()) {
        candidate.s_context = context_score(candidate, pq, gazetteer);
    }

    let outcome = if fact_check {
        decision_fuse(vector_kept, graph_kept, graph, gazetteer)
    } else {
        let mut kept = vector_kept;
        kept.extend(graph_kept);
        DecisionOutcome {
            kept,
            contradicted: Vec::new(),
            merged_away: Vec::new(),
        }
    };
    provenance.contradicted_removed = outcome.contradicted.len();
    provenance.merged = outcome.merged_away.len();

    let mut scored = outcome.kept;
    for candidate in &mut scored {
        candidate.fused_score = fuse_score(candidate, cfg);
    }
    scored.sort_by(|a, b| {
        b.fused_score
            .partial_cmp(&a.fused_score)
            .expect("fused scores are finite")
            .then_with(|| a.id.cmp(&b.id))
    });

    let mut seen_docs = BTreeSet::new();
    let mut selected = Vec::new();
    let mut cut = Vec::new();
    for candidate in scored {
        let duplicate_doc = candidate
            .doc_id
            .as_ref()
            .map(|d| !seen_docs.insert(d.clone()))
            .unwrap_or(false);
        if duplicate_doc || selected.len() >= cfg.k_final {
            cut.push(candidate);
        } else {
            selected.push(candidate);
        }
    }

    provenance.selected = selected.len();
    provenance.cross_verified = selected
        .iter()
        .filter(|c| c.flags.cross_verified)
        .count();

    let mut audit = selected.clone();
    audit.extend(cut);
    audit.extend(outcome.merged_away);
    audit.extend(outcome.contradicted);
    audit.extend(vector_dropped);
    audit.extend(graph_dropped);

    Ok(FusedContext {
        query: pq.clone(),
        candidates: selected,
        audit,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EntityKind, GraphPattern, GraphRecord, RelKind, Schema};
    use crate::query::{process_query, RawQuery};
    use crate::text::StopWords;
    use crate::vector_store::Chunk;
    use std::collections::BTreeMap;

    fn node(id: &str, kind: EntityKind, label: &str) -> GraphRecord {
        GraphRecord::Node {
            id: id.to_string(),
            kind,
            label: label.to_string(),
            aliases: vec![],
            props: BTreeMap::new(),
            sources: vec![],
        }
    }

    fn edge(src: &str, dst: &str, rel: RelKind, confidence: f64) -> GraphRecord {
        GraphRecord::Edge {
            src: src.to_string(),
            dst: dst.to_string(),
            rel,
            confidence,
            sources: vec![],
        }
    }

    fn fixture() -> (Graph, Gazetteer, ChunkStore) {
        let records = vec![
            node("bipolar_disorder", EntityKind::Condition, "bipolar disorder"),
            node("lithium", EntityKind::Treatment, "lithium"),
            node("diazepam", EntityKind::Treatment, "diazepam"),
            edge("lithium", "bipolar_disorder", RelKind::Treats, 0.95),
            edge(
                "diazepam",
                "bipolar_disorder",
                RelKind::ContraindicatedWith,
                0.9,
            ),
        ];
        let (graph, _) = crate::graph::Graph::build(records, Schema::default()).unwrap();
        let gaz = crate::graph::build_gazetteer(&graph);
        let chunks = ChunkStore::from_chunks(vec![
            Chunk {
                chunk_id: "d1#0".into(),
                doc_id: "d1".into(),
                text: "Lithium treats bipolar disorder.".into(),
                char_range: (0, 32),
            },
            Chunk {
                chunk_id: "d2#0".into(),
                doc_id: "d2".into(),
                text: "Diazepam treats bipolar disorder.".into(),
                char_range: (0, 33),
            },
            Chunk {
                chunk_id: "d3#0".into(),
                doc_id: "d3".into(),
                text: "Regular sleep routines support recovery.".into(),
                char_range: (0, 40),
            },
        ])
        .unwrap();
        (graph, gaz, chunks)
    }

    fn query(graph_gaz: &Gazetteer) -> ProcessedQuery {
        process_query(
            RawQuery::new("q1", "What treats bipolar disorder?").unwrap(),
            graph_gaz,
            &StopWords::parse("what"),
        )
        .unwrap()
    }

    fn vector_hit(id: &str, score: f32, rank: usize) -> VectorHit {
        VectorHit {
            chunk_id: id.to_string(),
            score,
            rank,
        }
    }

    #[test]
    fn fused_score_weights_available_components() {
        let candidate = Candidate {
            id: "x".into(),
            source: SourceTag::Vector,
            doc_id: None,
            text: String::new(),
            s_vector: Some(0.8),
            s_graph: None,
            s_context: 0.5,
            fused_score: 0.0,
            flags: CandidateFlags::default(),
            key_claim: None,
            merged_into: None,
        };
        let cfg = FusionConfig {
            w_vector: 0.5,
            w_graph: 0.3,
            w_context: 0.2,
            ..FusionConfig::default()
        };
        assert!((fuse_score(&candidate, &cfg) - 0.50).abs() < 1e-12);
    }

    #[test]
    fn config_validation_rejects_bad_weights() {
        assert!(FusionConfig::with_weights(0.5, 0.4, 0.2).validate().is_err());
        assert!(FusionConfig::with_weights(-0.1, 0.9, 0.2).validate().is_err());
        assert!(FusionConfig::default().validate().is_ok());
        assert!(FusionConfig::vector_heavy().validate().is_ok());
        assert!(FusionConfig::graph_heavy().validate().is_ok());
    }

    #[test]
    fn prefilter_flags_and_separates_low_scores() {
        let (_, _, chunks) = fixture();
        let hits = [vector_hit("d1#0", 0.9, 1), vector_hit("d3#0", -0.9, 2)];
        let candidates: Vec<Candidate> = hits
            .iter()
            .map(|h| Candidate::from_vector_hit(h, &chunks).unwrap())
            .collect();
        let cfg = FusionConfig::default();
        let (kept, dropped) = prefilter(candidates, &cfg);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].id, "d3#0");
        assert!(dropped[0].flags.filtered);
    }

    #[test]
    fn context_score_is_entity_jaccard() {
        let (_, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let hit = vector_hit("d1#0", 0.9, 1);
        let candidate = Candidate::from_vector_hit(&hit, &chunks).unwrap();
        // Query mentions {bipolar_disorder}; text mentions
        // {lithium, bipolar_disorder}: overlap 1 of 2.
        assert!((context_score(&candidate, &pq, &gaz) - 0.5).abs() < 1e-12);

        let neutral = Candidate {
            text: "no entities here".into(),
            ..candidate
        };
        assert_eq!(context_score(&neutral, &pq, &gaz), 0.0);
    }

    #[test]
    fn contradicted_vector_candidate_is_removed() {
        let (graph, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let hits = vec![vector_hit("d1#0", 0.9, 1), vector_hit("d2#0", 0.95, 2)];
        let ctx = fuse(
            &hits,
            &[],
            &pq,
            &FusionConfig::default(),
            &graph,
            &gaz,
            &chunks,
            true,
        )
        .unwrap();
        let ids: Vec<&str> = ctx.candidates.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, vec!["d1#0"], "the contraindicated claim must go");
        assert_eq!(ctx.provenance.contradicted_removed, 1);
        let removed = ctx
            .audit
            .iter()
            .find(|c| c.id == "d2#0")
            .expect("removed candidate stays in the audit");
        assert!(removed.flags.contradicted);
    }

    #[test]
    fn fact_check_off_keeps_contradicted_candidates() {
        let (graph, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let hits = vec![vector_hit("d2#0", 0.95, 1)];
        let ctx = fuse(
            &hits,
            &[],
            &pq,
            &FusionConfig::default(),
            &graph,
            &gaz,
            &chunks,
            false,
        )
        .unwrap();
        assert_eq!(ctx.candidates.len(), 1);
        assert_eq!(ctx.provenance.contradicted_removed, 0);
    }

    #[test]
    fn agreeing_graph_hit_merges_into_vector_candidate() {
        let (graph, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let pattern = GraphPattern {
            anchor_entity: "bipolar_disorder".into(),
            rel_kind: Some(RelKind::Treats),
            target_kind: Some(EntityKind::Treatment),
            direction: crate::graph::Direction::Both,
            max_hops: 1,
        };
        let graph_hits = crate::graph::kg_query(&graph, &pattern, 5).unwrap();
        assert_eq!(graph_hits.len(), 1);
        let vector_hits = vec![vector_hit("d1#0", 0.9, 1)];
        let ctx = fuse(
            &vector_hits,
            &graph_hits,
            &pq,
            &FusionConfig::default(),
            &graph,
            &gaz,
            &chunks,
            true,
        )
        .unwrap();
        assert_eq!(ctx.candidates.len(), 1);
        let merged = &ctx.candidates[0];
        assert_eq!(merged.id, "d1#0");
        assert_eq!(merged.source, SourceTag::Vector);
        assert!(merged.s_vector.is_some());
        assert!((merged.s_graph.unwrap() - 0.95).abs() < 1e-12);
        assert!(merged.flags.cross_verified);
        assert_eq!(ctx.provenance.merged, 1);
        let away = ctx
            .audit
            .iter()
            .find(|c| c.merged_into.is_some())
            .expect("merged-away candidate audited");
        assert_eq!(away.merged_into.as_deref(), Some("d1#0"));
    }

    #[test]
    fn dedup_keeps_best_chunk_per_document() {
        let (graph, gaz, _) = fixture();
        let pq = query(&gaz);
        let chunks = ChunkStore::from_chunks(vec![
            Chunk {
                chunk_id: "d1#0".into(),
                doc_id: "d1".into(),
                text: "Lithium treats bipolar disorder.".into(),
                char_range: (0, 32),
            },
            Chunk {
                chunk_id: "d1#1".into(),
                doc_id: "d1".into(),
                text: "Lithium treats bipolar disorder effectively.".into(),
                char_range: (20, 64),
            },
        ])
        .unwrap();
        let hits = vec![vector_hit("d1#0", 0.8, 2), vector_hit("d1#1", 0.9, 1)];
        let ctx = fuse(
            &hits,
            &[],
            &pq,
            &FusionConfig::default(),
            &graph,
            &gaz,
            &chunks,
            true,
        )
        .unwrap();
        assert_eq!(ctx.candidates.len(), 1);
        assert_eq!(ctx.candidates[0].id, "d1#1");
    }

    #[test]
    fn truncates_to_k_final() {
        let (graph, gaz, _) = fixture();
        let pq = query(&gaz);
        let chunks = ChunkStore::from_chunks(
            (0..10)
                .map(|i| Chunk {
                    chunk_id: format!("doc{i}#0"),
                    doc_id: format!("doc{i}"),
                    text: format!("Neutral passage number {i}."),
                    char_range: (0, 10),
                })
                .collect(),
        )
        .unwrap();
        let hits: Vec<VectorHit> = (0..10)
            .map(|i| vector_hit(&format!("doc{i}#0"), 0.9 - 0.01 * i as f32, i + 1))
            .collect();
        let cfg = FusionConfig {
            k_final: 3,
            ..FusionConfig::default()
        };
        let ctx = fuse(&hits, &[], &pq, &cfg, &graph, &gaz, &chunks, true).unwrap();
        assert_eq!(ctx.candidates.len(), 3);
        assert_eq!(ctx.audit.len(), 10);
    }

    #[test]
    fn degenerate_vector_weights_reproduce_vector_ranking() {
        let (graph, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let hits = vec![
            vector_hit("d1#0", 0.7, 1),
            vector_hit("d3#0", 0.4, 2),
            vector_hit("d2#0", -0.2, 3),
        ];
        let cfg = FusionConfig {
            w_vector: 1.0,
            w_graph: 0.0,
            w_context: 0.0,
            tau_vector: 0.0,
            tau_graph: 0.0,
            k_final: 10,
        };
        let ctx = fuse(&hits, &[], &pq, &cfg, &graph, &gaz, &chunks, false).unwrap();
        let fused_ids: Vec<&str> = ctx.candidates.iter().map(|c| c.id.as_str()).collect();
        let hit_ids: Vec<&str> = hits.iter().map(|h| h.chunk_id.as_str()).collect();
        assert_eq!(fused_ids, hit_ids);
    }

    #[test]
    fn audit_jsonl_has_one_line_per_candidate() {
        let (graph, gaz, chunks) = fixture();
        let pq = query(&gaz);
        let hits = vec![vector_hit("d1#0", 0.9, 1), vector_hit("d3#0", -0.9, 2)];
        let ctx = fuse(
            &hits,
            &[],
            &pq,
            &FusionConfig::default(),
            &graph,
            &gaz,
            &chunks,
            true,
        )
        .unwrap();
        let jsonl = ctx.to_audit_jsonl();
        assert_eq!(jsonl.lines().count(), ctx.audit.len());
        for line in jsonl.lines() {
            let value: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(value.get("id").is_some());
            assert!(value.get("flags").is_some());
        }
    }
}
