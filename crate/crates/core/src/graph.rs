//! Typed property graph of domain knowledge: build, quality-check,
//! persist, and query entities (conditions, treatments, symptoms, genetic
//! markers, nutrients) connected by confidence-weighted relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::{detect_relation_intent, recognize_entities, Gazetteer, ProcessedQuery};
use crate::text::{split_sentences, stem, tokenize};
use crate::vector_store::Document;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph record parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate entity id `{id}` with conflicting kinds {first:?} and {second:?}")]
    KindConflict {
        id: String,
        first: EntityKind,
        second: EntityKind,
    },
    #[error("entity kind {kind:?} of `{id}` is not allowed by the schema")]
    KindNotAllowed { id: String, kind: EntityKind },
    #[error("relation kind {rel:?} on edge {src} -> {dst} is not allowed by the schema")]
    RelKindNotAllowed {
        src: String,
        dst: String,
        rel: RelKind,
    },
    #[error("confidence {confidence} on edge {src} -> {dst} is outside [0, 1]")]
    ConfidenceOutOfRange {
        src: String,
        dst: String,
        confidence: f64,
    },
    #[error("entity `{id}` has an empty label")]
    EmptyLabel { id: String },
    #[error("query has no anchor entity")]
    NoAnchorEntity,
    #[error("unknown anchor entity `{0}`")]
    UnknownAnchor(String),
    #[error("max_hops must be 1 or 2, got {0}")]
    BadMaxHops(u8),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Entity categories. Serialized in snake_case in graph files.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Condition,
    Treatment,
    Symptom,
    GeneticMarker,
    Nutrient,
}

impl EntityKind {
    pub const ALL: [EntityKind; 5] = [
        EntityKind::Condition,
        EntityKind::Treatment,
        EntityKind::Symptom,
        EntityKind::GeneticMarker,
        EntityKind::Nutrient,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityKind::Condition => "condition",
            EntityKind::Treatment => "treatment",
            EntityKind::Symptom => "symptom",
            EntityKind::GeneticMarker => "genetic_marker",
            EntityKind::Nutrient => "nutrient",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "condition" => Ok(EntityKind::Condition),
            "treatment" => Ok(EntityKind::Treatment),
            "symptom" => Ok(EntityKind::Symptom),
            "genetic_marker" => Ok(EntityKind::GeneticMarker),
            "nutrient" => Ok(EntityKind::Nutrient),
            other => Err(format!("unknown entity kind `{other}`")),
        }
    }
}

/// Relation categories. Serialized in SCREAMING_SNAKE_CASE in graph files.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelKind {
    Treats,
    HasSymptom,
    AssociatedGene,
    InteractsWith,
    ContraindicatedWith,
    AssociatedWith,
}

impl RelKind {
    pub const ALL: [RelKind; 6] = [
        RelKind::Treats,
        RelKind::HasSymptom,
        RelKind::AssociatedGene,
        RelKind::InteractsWith,
        RelKind::ContraindicatedWith,
        RelKind::AssociatedWith,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RelKind::Treats => "TREATS",
            RelKind::HasSymptom => "HAS_SYMPTOM",
            RelKind::AssociatedGene => "ASSOCIATED_GENE",
            RelKind::InteractsWith => "INTERACTS_WITH",
            RelKind::ContraindicatedWith => "CONTRAINDICATED_WITH",
            RelKind::AssociatedWith => "ASSOCIATED_WITH",
        }
    }
}

impl fmt::Display for RelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TREATS" => Ok(RelKind::Treats),
            "HAS_SYMPTOM" => Ok(RelKind::HasSymptom),
            "ASSOCIATED_GENE" => Ok(RelKind::AssociatedGene),
            "INTERACTS_WITH" => Ok(RelKind::InteractsWith),
            "CONTRAINDICATED_WITH" => Ok(RelKind::ContraindicatedWith),
            "ASSOCIATED_WITH" => Ok(RelKind::AssociatedWith),
            other => Err(format!("unknown relation kind `{other}`")),
        }
    }
}

/// Declares which kinds are accepted and which relation kinds are
/// functional (single-valued per source) or symmetric (direction-free).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub entity_kinds: BTreeSet<EntityKind>,
    pub relation_kinds: BTreeSet<RelKind>,
    #[serde(default)]
    pub functional: BTreeSet<RelKind>,
    #[serde(default)]
    pub symmetric: BTreeSet<RelKind>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            entity_kinds: EntityKind::ALL.into_iter().collect(),
            relation_kinds: RelKind::ALL.into_iter().collect(),
            functional: BTreeSet::new(),
            symmetric: [
                RelKind::InteractsWith,
                RelKind::ContraindicatedWith,
                RelKind::AssociatedWith,
            ]
            .into_iter()
            .collect(),
        }
    }
}

impl Schema {
    pub fn parse(contents: &str) -> Result<Self, GraphError> {
        serde_json::from_str(contents).map_err(|e| GraphError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub entity_id: String,
    pub kind: EntityKind,
    pub label: String,
    pub aliases: Vec<String>,
    pub props: BTreeMap<String, String>,
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub src: String,
    pub dst: String,
    pub rel_kind: RelKind,
    pub confidence: f64,
    pub sources: Vec<String>,
}

/// One line of the graph file: either a node or an edge record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GraphRecord {
    Node {
        id: String,
        kind: EntityKind,
        label: String,
        #[serde(default)]
        aliases: Vec<String>,
        #[serde(default)]
        props: BTreeMap<String, String>,
        #[serde(default)]
        sources: Vec<String>,
    },
    Edge {
        src: String,
        dst: String,
        rel: RelKind,
        confidence: f64,
        #[serde(default)]
        sources: Vec<String>,
    },
}

/// Parses the line-delimited graph file format, reporting the first
/// malformed line by number.
pub fn parse_graph_records(contents: &str) -> Result<Vec<GraphRecord>, GraphError> {
    let mut records = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let record: GraphRecord = serde_json::from_str(line).map_err(|e| GraphError::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Build-time findings: issues are reported, not silently discarded.
#[derive(Debug, Clone, Default, Serialize)]
pub struct QualityReport {
    pub entity_count: usize,
    pub relation_count: usize,
    pub per_entity_kind: BTreeMap<String, usize>,
    pub per_relation_kind: BTreeMap<String, usize>,
    /// Edges whose endpoints were missing, as (src, dst, rel) triples.
    pub dangling_edges: Vec<(String, String, String)>,
    /// Normalized alias forms claimed by more than one entity.
    pub duplicate_aliases: Vec<(String, Vec<String>)>,
    /// Entities whose alias list normalized to nothing usable.
    pub empty_alias_entities: Vec<String>,
    pub merged_duplicate_entities: usize,
    pub merged_duplicate_edges: usize,
}

#[derive(Debug, Clone)]
pub struct Graph {
    entities: BTreeMap<String, Entity>,
    /// Sorted by (src, dst, rel_kind); index maps share this ordering.
    relations: Vec<Relation>,
    out_edges: BTreeMap<String, Vec<usize>>,
    in_edges: BTreeMap<String, Vec<usize>>,
    triples: BTreeSet<(String, RelKind, String)>,
    schema: Schema,
}

/// Direction constraint applied to every traversed hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Both,
}

/// A structured one- or two-hop pattern query against the graph.
///
/// All filters are optional: with neither `rel_kind` nor `target_kind` the
/// pattern is a plain neighborhood query around the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPattern {
    pub anchor_entity: String,
    pub rel_kind: Option<RelKind>,
    pub target_kind: Option<EntityKind>,
    pub direction: Direction,
    pub max_hops: u8,
}

/// A query result: the reached entity, the best path to it, and the
/// path-confidence product used as the hit's accuracy score.
#[derive(Debug, Clone, Serialize)]
pub struct GraphHit {
    pub entity: Entity,
    pub path: Vec<Relation>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimVerdict {
    Supported,
    Contradicted,
    Unknown,
}

impl Graph {
    /// Builds a referentially closed graph from parsed records.
    ///
    /// Entities with the same id merge (alias/prop/source union) unless
    /// their kinds conflict, which is a hard error. Duplicate
    /// (src, dst, rel) edges keep the maximum confidence and the union of
    /// sources. Edges naming unknown entities are dropped and reported.
    pub fn build(
        records: Vec<GraphRecord>,
        schema: Schema,
    ) -> Result<(Graph, QualityReport), GraphError> {
        let mut report = QualityReport::default();
        let mut entities: BTreeMap<String, Entity> = BTreeMap::new();
        let mut edge_records = Vec::new();
        for record in records {
            match record {
                GraphRecord::Node {
                    id,
                    kind,
                    label,
                    aliases,
                    props,
                    sources,
                } => {
                    if !schema.entity_kinds.contains(&kind) {
                        return Err(GraphError::KindNotAllowed { id, kind });
                    }
                    if label.trim().is_empty() {
                        return Err(GraphError::EmptyLabel { id });
                    }
                    match entities.get_mut(&id) {
                        None => {
                            entities.insert(
                                id.clone(),
                                Entity {
                                    entity_id: id,
                                    kind,
                                    label,
                                    aliases,
                                    props,
                                    sources,
                                },
                            );
                        }
                        Some(existing) => {
                            if existing.kind != kind {
                                return Err(GraphError::KindConflict {
                                    id,
                                    first: existing.kind,
                                    second: kind,
                                });
                            }
                            existing.aliases.extend(aliases);
                            for (k, v) in props {
                                existing.props.entry(k).or_insert(v);
                            }
                            existing.sources.extend(sources);
                            report.merged_duplicate_entities += 1;
                        }
                    }
                }
                GraphRecord::Edge {
                    src,
                    dst,
                    rel,
                    confidence,
                    sources,
                } => {
                    if !schema.relation_kinds.contains(&rel) {
                        return Err(GraphError::RelKindNotAllowed { src, dst, rel });
                    }
                    if !(0.0..=1.0).contains(&confidence) || !confidence.is_finite() {
                        return Err(GraphError::ConfidenceOutOfRange {
                            src,
                            dst,
                            confidence,
                        });
                    }
                    edge_records.push((src, dst, rel, confidence, sources));
                }
            }
        }

        // Canonicalize alias lists: the normalized label always counts as
        // an alias, everything is lowercased, deduplicated, and sorted.
        for entity in entities.values_mut() {
            let mut aliases: BTreeSet<String> = entity
                .aliases
                .iter()
                .map(|a| a.to_lowercase())
                .filter(|a| !a.trim().is_empty())
                .collect();
            aliases.insert(entity.label.to_lowercase());
            entity.aliases = aliases.into_iter().collect();
            entity.sources.sort();
            entity.sources.dedup();
        }

        // Merge duplicate edges, drop dangling ones.
        let mut merged: BTreeMap<(String, String, RelKind), Relation> = BTreeMap::new();
        for (src, dst, rel, confidence, sources) in edge_records {
            if !entities.contains_key(&src) || !entities.contains_key(&dst) {
                report
                    .dangling_edges
                    .push((src, dst, rel.as_str().to_string()));
                continue;
            }
            match merged.entry((src.clone(), dst.clone(), rel)) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(Relation {
                        src,
                        dst,
                        rel_kind: rel,
                        confidence,
                        sources,
                    });
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let existing = slot.get_mut();
                    existing.confidence = existing.confidence.max(confidence);
                    existing.sources.extend(sources);
                    report.merged_duplicate_edges += 1;
                }
            }
        }
        let mut relations: Vec<Relation> = merged.into_values().collect();
        for rel in &mut relations {
            rel.sources.sort();
            rel.sources.dedup();
        }

        // Alias collision report: one normalized alias key naming several
        // entities (lookups resolve to the smallest entity id).
        let mut alias_owners: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for entity in entities.values() {
            let mut usable = false;
            for alias in &entity.aliases {
                let key = alias_key(alias);
                if key.is_empty() {
                    continue;
                }
                usable = true;
                alias_owners
                    .entry(key)
                    .or_default()
                    .insert(entity.entity_id.clone());
            }
            if !usable {
                report.empty_alias_entities.push(entity.entity_id.clone());
            }
        }
        for (key, owners) in &alias_owners {
            if owners.len() > 1 {
                report
                    .duplicate_aliases
                    .push((key.clone(), owners.iter().cloned().collect()));
            }
        }

        report.entity_count = entities.len();
        report.relation_count = relations.len();
        for entity in entities.values() {
            *report
                .per_entity_kind
                .entry(entity.kind.as_str().to_string())
                .or_default() += 1;
        }
        for rel in &relations {
            *report
                .per_relation_kind
                .entry(rel.rel_kind.as_str().to_string())
                .or_default() += 1;
        }

        let mut out_edges: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut in_edges: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut triples = BTreeSet::new();
        for (idx, rel) in relations.iter().enumerate() {
            out_edges.entry(rel.src.clone()).or_default().push(idx);
            in_edges.entry(rel.dst.clone()).or_default().push(idx);
            triples.insert((rel.src.clone(), rel.rel_kind, rel.dst.clone()));
        }

        Ok((
            Graph {
                entities,
                relations,
                out_edges,
                in_edges,
                triples,
                schema,
            },
            report,
        ))
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn has_triple(&self, src: &str, rel: RelKind, dst: &str) -> bool {
        self.triples
            .contains(&(src.to_string(), rel, dst.to_string()))
    }

    /// Canonical line-delimited serialization: nodes sorted by id, then
    /// edges sorted by (src, dst, rel). Identical graphs serialize to
    /// identical bytes.
    pub fn to_canonical_jsonl(&self) -> String {
        let mut out = String::new();
        for entity in self.entities.values() {
            let record = GraphRecord::Node {
                id: entity.entity_id.clone(),
                kind: entity.kind,
                label: entity.label.clone(),
                aliases: entity.aliases.clone(),
                props: entity.props.clone(),
                sources: entity.sources.clone(),
            };
            out.push_str(&serde_json::to_string(&record).expect("serializable record"));
            out.push('\n');
        }
        for rel in &self.relations {
            let record = GraphRecord::Edge {
                src: rel.src.clone(),
                dst: rel.dst.clone(),
                rel: rel.rel_kind,
                confidence: rel.confidence,
                sources: rel.sources.clone(),
            };
            out.push_str(&serde_json::to_string(&record).expect("serializable record"));
            out.push('\n');
        }
        out
    }

    /// Checks a single (src, rel, dst) claim against the graph.
    ///
    /// Supported: the directed triple exists, or the relation kind is
    /// declared symmetric and the reversed triple exists. Contradicted: a
    /// CONTRAINDICATED_WITH edge links the two ids in either direction, or
    /// the relation kind is declared functional and the graph records a
    /// different target for the same source. Unknown otherwise.
    pub fn verify_claim(&self, src: &str, rel: RelKind, dst: &str) -> ClaimVerdict {
        if self.has_triple(src, rel, dst) {
            return ClaimVerdict::Supported;
        }
        if self.schema.symmetric.contains(&rel) && self.has_triple(dst, rel, src) {
            return ClaimVerdict::Supported;
        }
        if rel != RelKind::ContraindicatedWith
            && (self.has_triple(src, RelKind::ContraindicatedWith, dst)
                || self.has_triple(dst, RelKind::ContraindicatedWith, src))
        {
            return ClaimVerdict::Contradicted;
        }
        if self.schema.functional.contains(&rel) {
            if let Some(indices) = self.out_edges.get(src) {
                for &idx in indices {
                    let edge = &self.relations[idx];
                    if edge.rel_kind == rel && edge.dst != dst {
                        return ClaimVerdict::Contradicted;
                    }
                }
            }
        }
        ClaimVerdict::Unknown
    }

    /// Traversal steps leaving `current`, ordered deterministically by
    /// (neighbor id, relation kind, direction, edge index).
    fn steps(&self, current: &str, direction: Direction) -> Vec<Step> {
        let mut steps = Vec::new();
        if matches!(direction, Direction::Out | Direction::Both) {
            if let Some(indices) = self.out_edges.get(current) {
                for &idx in indices {
                    steps.push(Step {
                        edge: idx,
                        other: self.relations[idx].dst.clone(),
                        reversed: false,
                    });
                }
            }
        }
        if matches!(direction, Direction::In | Direction::Both) {
            if let Some(indices) = self.in_edges.get(current) {
                for &idx in indices {
                    steps.push(Step {
                        edge: idx,
                        other: self.relations[idx].src.clone(),
                        reversed: true,
                    });
                }
            }
        }
        steps.sort_by(|a, b| {
            a.other
                .cmp(&b.other)
                .then_with(|| self.relations[a.edge].rel_kind.cmp(&self.relations[b.edge].rel_kind))
                .then_with(|| a.reversed.cmp(&b.reversed))
                .then_with(|| a.edge.cmp(&b.edge))
        });
        steps
    }
}

struct Step {
    edge: usize,
    other: String,
    reversed: bool,
}

/// Candidate path bookkeeping during traversal: best accuracy first, then
/// fewer hops, then the lexicographically smallest canonical step key.
struct BestPath {
    accuracy: f64,
    edges: Vec<usize>,
    key: Vec<(String, String, bool)>,
}

fn alias_key(alias: &str) -> String {
    tokenize(alias)
        .iter()
        .map(|t| stem(t))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Builds the alias lookup table from every entity's alias list.
///
/// Keys are stemmed token sequences, so surface inflections ("treatments"
/// vs "treatment") still resolve. When two entities claim one alias the
/// smallest entity id wins; the collision shows up in the quality report.
pub fn build_gazetteer(graph: &Graph) -> Gazetteer {
    let mut gaz = Gazetteer::new();
    for entity in graph.entities.values() {
        for alias in &entity.aliases {
            gaz.insert(alias, &entity.entity_id, entity.kind);
        }
    }
    gaz
}

/// Turns a processed query into a graph pattern.
///
/// The anchor is the first recognized entity; the relation filter comes
/// from the detected intent; the target kind is implied by the relation
/// (genes for ASSOCIATED_GENE, treatments for TREATS, symptoms for
/// HAS_SYMPTOM). Queries without entities cannot anchor a traversal.
pub fn translate_query(pq: &ProcessedQuery) -> Result<GraphPattern, GraphError> {
    let anchor = pq.entities.first().ok_or(GraphError::NoAnchorEntity)?;
    let rel_kind = pq.relation_intent;
    let target_kind = match rel_kind {
        Some(RelKind::AssociatedGene) => Some(EntityKind::GeneticMarker),
        Some(RelKind::Treats) => Some(EntityKind::Treatment),
        Some(RelKind::HasSymptom) => Some(EntityKind::Symptom),
        _ => None,
    };
    Ok(GraphPattern {
        anchor_entity: anchor.entity_id.clone(),
        rel_kind,
        target_kind,
        direction: Direction::Both,
        max_hops: 1,
    })
}

/// Executes a pattern query: all simple paths of 1..=max_hops hops from
/// the anchor, honoring the relation filter on every hop, the direction
/// constraint on every hop, and the target-kind filter on the final
/// entity. One hit per reached entity carrying its best path; hits sorted
/// by accuracy descending, ties by ascending entity id, truncated to k.
pub fn kg_query(graph: &Graph, pattern: &GraphPattern, k: usize) -> Result<Vec<GraphHit>, GraphError> {
    if !matches!(pattern.max_hops, 1 | 2) {
        return Err(GraphError::BadMaxHops(pattern.max_hops));
    }
    if graph.entity(&pattern.anchor_entity).is_none() {
        return Err(GraphError::UnknownAnchor(pattern.anchor_entity.clone()));
    }
    let mut best: BTreeMap<String, BestPath> = BTreeMap::new();
    let mut visited = vec![pattern.anchor_entity.clone()];
    let mut edges = Vec::new();
    let mut key = Vec::new();
    walk(
        graph,
        pattern,
        &mut visited,
        &mut edges,
        &mut key,
        1.0,
        &mut best,
    );
    let mut hits: Vec<GraphHit> = best
        .into_iter()
        .map(|(id, path)| GraphHit {
            entity: graph.entities[&id].clone(),
            path: path.edges.iter().map(|&i| graph.relations[i].clone()).collect(),
            accuracy: path.accuracy,
        })
        .collect();
    hits.sort_by(|a, b| {
        b.accuracy
            .partial_cmp(&a.accuracy)
            .expect("accuracies are finite")
            .then_with(|| a.entity.entity_id.cmp(&b.entity.entity_id))
    });
    hits.truncate(k);
    Ok(hits)
}

fn walk(
    graph: &Graph,
    pattern: &GraphPattern,
    visited: &mut Vec<String>,
    edges: &mut Vec<usize>,
    key: &mut Vec<(String, String, bool)>,
    accuracy: f64,
    best: &mut BTreeMap<String, BestPath>,
) {
    let current = visited.last().expect("path starts at anchor").clone();
    if !edges.is_empty() {
        let entity = &graph.entities[&current];
        let kind_ok = pattern
            .target_kind
            .map(|k| entity.kind == k)
            .unwrap_or(true);
        if kind_ok {
            let candidate_better = match best.get(&current) {
                None => true,
                Some(existing) => {
                    accuracy > existing.accuracy
                        || (accuracy == existing.accuracy
                            && (edges.len() < existing.edges.len()
                                || (edges.len() == existing.edges.len()
                                    && key[..] < existing.key[..])))
                }
            };
            if candidate_better {
                best.insert(
                    current.clone(),
                    BestPath {
                        accuracy,
                        edges: edges.clone(),
                        key: key.clone(),
                    },
                );
            }
        }
    }
    if edges.len() >= pattern.max_hops as usize {
        return;
    }
    for step in graph.steps(&current, pattern.direction) {
        if visited.contains(&step.other) {
            continue;
        }
        let edge = &graph.relations[step.edge];
        if let Some(rel) = pattern.rel_kind {
            if edge.rel_kind != rel {
                continue;
            }
        }
        visited.push(step.other.clone());
        edges.push(step.edge);
        key.push((
            step.other.clone(),
            edge.rel_kind.as_str().to_string(),
            step.reversed,
        ));
        walk(
            graph,
            pattern,
            visited,
            edges,
            key,
            accuracy * edge.confidence,
            best,
        );
        key.pop();
        edges.pop();
        visited.pop();
    }
}

/// Renders a hit's path as one declarative sentence per hop, each stated
/// in the edge's stored direction so downstream claim extraction recovers
/// exactly the underlying triples.
pub fn verbalize_hit(hit: &GraphHit, graph: &Graph) -> String {
    let sentences: Vec<String> = hit
        .path
        .iter()
        .map(|rel| verbalize_relation(rel, graph))
        .collect();
    sentences.join(" ")
}

fn label_of(graph: &Graph, id: &str) -> String {
    graph
        .entity(id)
        .map(|e| e.label.clone())
        .unwrap_or_else(|| id.to_string())
}

fn verbalize_relation(rel: &Relation, graph: &Graph) -> String {
    let src = label_of(graph, &rel.src);
    let dst = label_of(graph, &rel.dst);
    match rel.rel_kind {
        RelKind::Treats => format!("{src} treats {dst}."),
        RelKind::HasSymptom => format!("{src} has symptoms including {dst}."),
        RelKind::AssociatedGene => format!("{src} is linked to genetic marker {dst}."),
        RelKind::InteractsWith => format!("{src} interacts with {dst}."),
        RelKind::ContraindicatedWith => format!("{src} is contraindicated with {dst}."),
        RelKind::AssociatedWith => format!("{src} is associated with {dst}."),
    }
}

/// Mines candidate relations from corpus sentences: every sentence with
/// two or more distinct recognized entities yields ordered entity pairs
/// tagged with the sentence's trigger relation (ASSOCIATED_WITH when no
/// trigger fires). Confidence grows with corpus-wide co-occurrence count,
/// capped at 1 from five co-occurrences up.
pub fn extract_relations(docs: &[Document], gazetteer: &Gazetteer) -> Vec<GraphRecord> {
    let mut counts: BTreeMap<(String, String, RelKind), usize> = BTreeMap::new();
    for doc in docs {
        for sentence in split_sentences(&doc.text) {
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
                    *counts
                        .entry((ids[i].clone(), ids[j].clone(), rel))
                        .or_default() += 1;
                }
            }
        }
    }
    counts
        .into_iter()
        .map(|((src, dst, rel), n)| GraphRecord::Edge {
            src,
            dst,
            rel,
            confidence: (n as f64 / 5.0).min(1.0),
            sources: vec!["corpus".to_string()],
        })
        .collect()
}
