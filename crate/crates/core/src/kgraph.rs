//! The undirected knowledge graph of enablers and design principles.
//!
//! Nodes carry the encoded enabler features; edges are either enabler to
//! enabler dependencies (weight 0) or enabler to principle fulfilment
//! (weight 1). Graphs are immutable values: pruning derives new graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{validate_catalog, Catalog, Id, ValidationReport};
use crate::scoring::{kpi_score, node_weight, DEFAULT_NODE_WEIGHT};

/// Weight of an enabler to design-principle edge.
pub const FULFILLS_EDGE_WEIGHT: u8 = 1;
/// Weight of an enabler to enabler dependency edge.
pub const DEPENDENCY_EDGE_WEIGHT: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Enabler,
    Principle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeFeatures {
    /// Present on enabler nodes only.
    pub trl: Option<u8>,
    pub node_weight: u8,
    pub kpi_score: i64,
    /// True iff the enabler has at least one fulfils edge. Always false on
    /// principle nodes.
    pub fulfills_any_principle: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    pub name: String,
    /// Functional category, enabler nodes only.
    pub category: Option<String>,
    pub features: NodeFeatures,
    /// Declared dependencies (direction kept for repair; the edge itself is
    /// undirected). May reference enablers no longer in a pruned graph.
    pub depends_on: BTreeSet<Id>,
}

impl Node {
    pub fn color(&self) -> &'static str {
        match self.kind {
            NodeKind::Principle => "green",
            NodeKind::Enabler if self.features.fulfills_any_principle => "blue",
            NodeKind::Enabler => "orange",
        }
    }

    pub fn is_migration_critical(&self) -> bool {
        self.kind == NodeKind::Enabler && self.features.node_weight > DEFAULT_NODE_WEIGHT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Dependency,
    Fulfills,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Dependency => "dependency",
            EdgeKind::Fulfills => "fulfills",
        }
    }

    pub fn weight(self) -> u8 {
        match self {
            EdgeKind::Dependency => DEPENDENCY_EDGE_WEIGHT,
            EdgeKind::Fulfills => FULFILLS_EDGE_WEIGHT,
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            EdgeKind::Dependency => "red",
            EdgeKind::Fulfills => "green",
        }
    }
}

/// Undirected edge; endpoints are stored in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    a: Id,
    b: Id,
    pub kind: EdgeKind,
}

impl Edge {
    /// Panics on a self-loop.
    pub fn new(x: Id, y: Id, kind: EdgeKind) -> Self {
        assert_ne!(x, y, "self-loop");
        if x < y {
            Edge { a: x, b: y, kind }
        } else {
            Edge { a: y, b: x, kind }
        }
    }

    pub fn endpoints(&self) -> (&Id, &Id) {
        (&self.a, &self.b)
    }

    pub fn touches(&self, id: &str) -> bool {
        self.a.as_str() == id || self.b.as_str() == id
    }

    pub fn other(&self, id: &str) -> Option<&Id> {
        if self.a.as_str() == id {
            Some(&self.b)
        } else if self.b.as_str() == id {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn weight(&self) -> u8 {
        self.kind.weight()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum KgError {
    #[error("catalog failed validation with {} violation(s)", .0.violations.len())]
    Integrity(ValidationReport),
    #[error("unknown node '{0}'")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphWire", try_from = "GraphWire")]
pub struct KnowledgeGraph {
    /// Fingerprint of the catalog the graph was built from.
    pub provenance: String,
    pub nodes: BTreeMap<Id, Node>,
    pub edges: BTreeSet<Edge>,
}

impl KnowledgeGraph {
    pub fn empty(provenance: impl Into<String>) -> Self {
        KnowledgeGraph {
            provenance: provenance.into(),
            nodes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    pub fn enabler_ids(&self) -> BTreeSet<Id> {
        self.nodes
            .iter()
            .filter(|(_, n)| n.kind == NodeKind::Enabler)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn enabler_count(&self) -> usize {
        self.nodes.values().filter(|n| n.kind == NodeKind::Enabler).count()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Adjacent node ids, optionally restricted to one edge kind.
    pub fn neighbors(&self, id: &str, kind: Option<EdgeKind>) -> Result<BTreeSet<Id>, KgError> {
        if !self.contains(id) {
            return Err(KgError::UnknownNode(id.to_owned()));
        }
        Ok(self
            .edges
            .iter()
            .filter(|e| kind.is_none_or(|k| e.kind == k))
            .filter_map(|e| e.other(id).cloned())
            .collect())
    }

    /// Subgraph on `enablers` (ids not in the graph are ignored) plus every
    /// principle that keeps at least one fulfils edge to a kept enabler.
    pub fn induced(&self, enablers: &BTreeSet<Id>) -> KnowledgeGraph {
        let kept_enabler = |id: &Id| {
            enablers.contains(id)
                && self.nodes.get(id).is_some_and(|n| n.kind == NodeKind::Enabler)
        };
        let mut keep: BTreeSet<&Id> = self.nodes.keys().filter(|id| kept_enabler(id)).collect();
        for e in &self.edges {
            if e.kind == EdgeKind::Fulfills {
                let (x, y) = e.endpoints();
                if kept_enabler(x) {
                    keep.insert(y);
                } else if kept_enabler(y) {
                    keep.insert(x);
                }
            }
        }
        let nodes = self
            .nodes
            .iter()
            .filter(|(id, _)| keep.contains(id))
            .map(|(id, n)| (id.clone(), n.clone()))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| {
                let (x, y) = e.endpoints();
                keep.contains(x) && keep.contains(y)
            })
            .cloned()
            .collect();
        KnowledgeGraph {
            provenance: self.provenance.clone(),
            nodes,
            edges,
        }
    }

    /// Canonical JSON; equal graphs give equal bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn content_hash(&self) -> String {
        crate::hash::sha256_hex(self.to_canonical_json().as_bytes())
    }
}

/// Builds the full graph from a validated catalog.
pub fn build_full_kg(c: &Catalog) -> Result<KnowledgeGraph, KgError> {
    let report = validate_catalog(c);
    if !report.is_valid() {
        return Err(KgError::Integrity(report));
    }
    Ok(assemble(c))
}

/// Graph assembly without validation; dangling references are skipped.
fn assemble(c: &Catalog) -> KnowledgeGraph {
    let enabler_ids: BTreeSet<&Id> = c.enablers.iter().map(|e| &e.id).collect();
    let principle_ids: BTreeSet<&Id> = c.principles.iter().map(|p| &p.id).collect();

    let mut edges = BTreeSet::new();
    for e in &c.enablers {
        for d in &e.dependency_ids {
            if d != &e.id && enabler_ids.contains(d) {
                edges.insert(Edge::new(e.id.clone(), d.clone(), EdgeKind::Dependency));
            }
        }
        for p in &e.principle_ids {
            if principle_ids.contains(p) && !enabler_ids.contains(p) {
                edges.insert(Edge::new(e.id.clone(), p.clone(), EdgeKind::Fulfills));
            }
        }
    }

    let mut nodes = BTreeMap::new();
    for p in &c.principles {
        nodes.insert(
            p.id.clone(),
            Node {
                kind: NodeKind::Principle,
                name: p.name.clone(),
                category: None,
                features: NodeFeatures {
                    trl: None,
                    node_weight: DEFAULT_NODE_WEIGHT,
                    kpi_score: 0,
                    fulfills_any_principle: false,
                },
                depends_on: BTreeSet::new(),
            },
        );
    }
    for e in &c.enablers {
        let fulfills = edges
            .iter()
            .any(|x| x.kind == EdgeKind::Fulfills && x.touches(e.id.as_str()));
        nodes.insert(
            e.id.clone(),
            Node {
                kind: NodeKind::Enabler,
                name: e.name.clone(),
                category: Some(e.category.clone()),
                features: NodeFeatures {
                    trl: u8::try_from(e.trl).ok(),
                    node_weight: node_weight(e),
                    kpi_score: kpi_score(e),
                    fulfills_any_principle: fulfills,
                },
                depends_on: e
                    .dependency_ids
                    .iter()
                    .filter(|d| *d != &e.id && enabler_ids.contains(d))
                    .cloned()
                    .collect(),
            },
        );
    }
    KnowledgeGraph {
        provenance: c.fingerprint(),
        nodes,
        edges,
    }
}

/// Discrepancies between a graph and the graph a catalog would produce.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiff {
    pub added_enablers: BTreeSet<Id>,
    pub removed_enablers: BTreeSet<Id>,
    pub added_principles: BTreeSet<Id>,
    pub removed_principles: BTreeSet<Id>,
    pub added_dependencies: BTreeSet<(Id, Id)>,
    pub removed_dependencies: BTreeSet<(Id, Id)>,
    pub added_fulfills: BTreeSet<(Id, Id)>,
    pub removed_fulfills: BTreeSet<(Id, Id)>,
    /// Nodes present on both sides whose features or attributes differ.
    pub changed_nodes: BTreeSet<Id>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        *self == GraphDiff::default()
    }
}

impl fmt::Display for GraphDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "+{} -{} enablers, +{} -{} principles, +{} -{} dependencies, +{} -{} fulfils, {} changed",
            self.added_enablers.len(),
            self.removed_enablers.len(),
            self.added_principles.len(),
            self.removed_principles.len(),
            self.added_dependencies.len(),
            self.removed_dependencies.len(),
            self.added_fulfills.len(),
            self.removed_fulfills.len(),
            self.changed_nodes.len()
        )
    }
}

/// Compares `g` with the full graph of `c` by id.
pub fn diff_catalog(g: &KnowledgeGraph, c: &Catalog) -> GraphDiff {
    let fresh = assemble(c);
    let ids = |graph: &KnowledgeGraph, kind| -> BTreeSet<Id> {
        graph
            .nodes
            .iter()
            .filter(|(_, n)| n.kind == kind)
            .map(|(id, _)| id.clone())
            .collect()
    };
    let pairs = |graph: &KnowledgeGraph, kind| -> BTreeSet<(Id, Id)> {
        graph
            .edges
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| (e.a.clone(), e.b.clone()))
            .collect()
    };
    let (old_e, new_e) = (ids(g, NodeKind::Enabler), ids(&fresh, NodeKind::Enabler));
    let (old_p, new_p) = (ids(g, NodeKind::Principle), ids(&fresh, NodeKind::Principle));
    let (old_d, new_d) = (pairs(g, EdgeKind::Dependency), pairs(&fresh, EdgeKind::Dependency));
    let (old_f, new_f) = (pairs(g, EdgeKind::Fulfills), pairs(&fresh, EdgeKind::Fulfills));
    let changed_nodes = g
        .nodes
        .iter()
        .filter(|(id, n)| fresh.nodes.get(*id).is_some_and(|m| m != *n))
        .map(|(id, _)| id.clone())
        .collect();
    GraphDiff {
        added_enablers: &new_e - &old_e,
        removed_enablers: &old_e - &new_e,
        added_principles: &new_p - &old_p,
        removed_principles: &old_p - &new_p,
        added_dependencies: &new_d - &old_d,
        removed_dependencies: &old_d - &new_d,
        added_fulfills: &new_f - &old_f,
        removed_fulfills: &old_f - &new_f,
        changed_nodes,
    }
}

// Canonical wire form, also the GraphJson export format.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphWire {
    provenance: String,
    nodes: Vec<NodeWire>,
    edges: Vec<EdgeWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeWire {
    id: Id,
    kind: NodeKind,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trl: Option<u8>,
    node_weight: u8,
    kpi_score: i64,
    fulfills_any_principle: bool,
    color: String,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    depends_on: BTreeSet<Id>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeWire {
    source: Id,
    target: Id,
    kind: EdgeKind,
    weight: u8,
    color: String,
}

impl From<KnowledgeGraph> for GraphWire {
    fn from(g: KnowledgeGraph) -> Self {
        GraphWire {
            provenance: g.provenance,
            nodes: g
                .nodes
                .into_iter()
                .map(|(id, n)| NodeWire {
                    color: n.color().to_owned(),
                    id,
                    kind: n.kind,
                    name: n.name,
                    category: n.category,
                    trl: n.features.trl,
                    node_weight: n.features.node_weight,
                    kpi_score: n.features.kpi_score,
                    fulfills_any_principle: n.features.fulfills_any_principle,
                    depends_on: n.depends_on,
                })
                .collect(),
            edges: g
                .edges
                .into_iter()
                .map(|e| EdgeWire {
                    weight: e.weight(),
                    color: e.kind.color().to_owned(),
                    source: e.a,
                    target: e.b,
                    kind: e.kind,
                })
                .collect(),
        }
    }
}

impl TryFrom<GraphWire> for KnowledgeGraph {
    type Error = String;

    fn try_from(w: GraphWire) -> Result<Self, String> {
        let mut nodes = BTreeMap::new();
        for n in w.nodes {
            let node = Node {
                kind: n.kind,
                name: n.name,
                category: n.category,
                features: NodeFeatures {
                    trl: n.trl,
                    node_weight: n.node_weight,
                    kpi_score: n.kpi_score,
                    fulfills_any_principle: n.fulfills_any_principle,
                },
                depends_on: n.depends_on,
            };
            if node.color() != n.color {
                return Err(format!("node '{}' has color '{}', expected '{}'", n.id, n.color, node.color()));
            }
            if nodes.insert(n.id.clone(), node).is_some() {
                return Err(format!("duplicate node '{}'", n.id));
            }
        }
        let mut edges = BTreeSet::new();
        for e in w.edges {
            if e.source == e.target {
                return Err(format!("self-loop on '{}'", e.source));
            }
            let kind_of = |id: &Id| {
                nodes
                    .get(id)
                    .map(|n: &Node| n.kind)
                    .ok_or_else(|| format!("edge endpoint '{id}' is not a node"))
            };
            let ends = (kind_of(&e.source)?, kind_of(&e.target)?);
            let ok = match e.kind {
                EdgeKind::Dependency => ends == (NodeKind::Enabler, NodeKind::Enabler),
                EdgeKind::Fulfills => {
                    ends == (NodeKind::Enabler, NodeKind::Principle)
                        || ends == (NodeKind::Principle, NodeKind::Enabler)
                }
            };
            if !ok {
                return Err(format!("{:?} edge {}-{} joins wrong node kinds", e.kind, e.source, e.target));
            }
            if e.weight != e.kind.weight() || e.color != e.kind.color() {
                return Err(format!("edge {}-{} has wrong weight or color", e.source, e.target));
            }
            if !edges.insert(Edge::new(e.source.clone(), e.target.clone(), e.kind)) {
                return Err(format!("parallel edge {}-{}", e.source, e.target));
            }
        }
        Ok(KnowledgeGraph {
            provenance: w.provenance,
            nodes,
            edges,
        })
    }
}
