//! Numeric node features derived from raw catalog fields.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::Enabler;
use crate::kgraph::{KnowledgeGraph, NodeKind};

/// Node weight of an enabler flagged critical for 5G to 6G migration.
pub const MIGRATION_CRITICAL_WEIGHT: u8 = 3;
/// Node weight of every other enabler.
pub const DEFAULT_NODE_WEIGHT: u8 = 1;

/// Signed sum of the enabler's per-KPI impacts. KPIs absent from the map
/// count as neutral.
pub fn kpi_score(e: &Enabler) -> i64 {
    e.kpi_impacts.values().sum()
}

pub fn node_weight(e: &Enabler) -> u8 {
    if e.migration_critical {
        MIGRATION_CRITICAL_WEIGHT
    } else {
        DEFAULT_NODE_WEIGHT
    }
}

/// Frequency of KPI scores over the enabler nodes of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub buckets: BTreeMap<i64, usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.buckets.values().sum()
    }

    pub fn count(&self, score: i64) -> usize {
        self.buckets.get(&score).copied().unwrap_or(0)
    }
}

/// Principle nodes are excluded.
pub fn kpi_histogram(g: &KnowledgeGraph) -> Histogram {
    let mut buckets = BTreeMap::new();
    for node in g.nodes.values().filter(|n| n.kind == NodeKind::Enabler) {
        *buckets.entry(node.features.kpi_score).or_insert(0) += 1;
    }
    Histogram { buckets }
}
