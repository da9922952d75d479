//! Ensemble retrieval engine combining dense-vector search with
//! knowledge-graph pattern queries.
//!
//! The pipeline runs a user question through query processing, two
//! independent retrievers (an exact cosine-similarity vector index and an
//! in-memory typed property graph), a scored fusion stage that filters,
//! cross-verifies, and re-ranks the combined evidence, and a pluggable
//! answer generator. A full offline evaluation harness (BLEU, ROUGE-1/2/L,
//! simplified METEOR, overall mean, and a claim-level hallucination-rate
//! protocol) ships alongside.
//!
//! Everything is deterministic by construction: the built-in embedder is a
//! seeded feature hasher, all rankings carry total tie-break orders, and
//! reports serialize with stable field and key ordering.

pub mod claims;
pub mod config;
pub mod embed;
pub mod eval;
pub mod fusion;
pub mod generate;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod query;
pub mod text;
pub mod vector_store;
