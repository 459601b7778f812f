//! Knowledge-graph driven selection of technological enablers for an
//! end-to-end system design.
//!
//! The crate is organised along the selection flow:
//!
//! * [`catalog`] ingests and validates the input universe (enablers, design
//!   principles, KPIs, KVIs and technical requirements).
//! * [`kgraph`] builds the undirected knowledge graph with node and edge
//!   feature encodings.
//! * [`scoring`] computes KPI scores, node weights and the KPI-score histogram.
//! * [`pruner`] implements prioritization, clustering, KPI-threshold pruning
//!   and dependency repair.
//! * [`kvimap`] maps enablers to KVIs, computes KVI-category coverage and ranks
//!   re-introduction candidates.
//! * [`pipeline`] drives the whole loop and records it in a replayable
//!   [`pipeline::Session`].
//! * [`reports`] renders graphs, histograms, coverage and selections.

pub mod catalog;
pub mod hash;
pub mod kgraph;
pub mod kvimap;
pub mod pipeline;
pub mod pruner;
pub mod reports;
pub mod scoring;

pub use catalog::{Catalog, Enabler, Id, KviCategory};
pub use kgraph::{build_full_kg, EdgeKind, KnowledgeGraph, NodeKind};
pub use pipeline::{run_batch, Decision, Session, SessionStatus, StageKind};
pub use pruner::{PruneConfig, PruneOutcome};

/// The bundled cooperating-mobile-robots catalog.
pub const COBOTS_FIXTURE: &str = include_str!("../fixtures/cobots.json");
