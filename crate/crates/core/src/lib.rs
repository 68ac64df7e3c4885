//! Supply-chain knowledge graph toolkit.
//!
//! Builds a typed knowledge graph from company tables, derives
//! `capability_produces` and `complimentary_product_to` edges from
//! co-occurrence counts, and trains a relational GraphSAGE encoder with a
//! DistMult decoder to predict missing links, scored by per-relation AUC.

pub mod config;
pub mod derive;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod ontology;
pub mod pipeline;
pub mod sampling;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Entity, EntityId, FrozenGraph, KnowledgeGraph, Triplet};
pub use ontology::{Direction, EntityType, Ontology, RelationType};
