//! Graph reduction: prioritization, clustering, KPI-threshold pruning and
//! dependency repair. Every operation maps a graph snapshot to a new
//! [`PruneOutcome`] and never mutates its input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, Id, KviCategory, TRL_MAX, TRL_MIN};
use crate::kgraph::{KnowledgeGraph, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ClusterPolicy {
    #[default]
    KeepAll,
    BestPerCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DependencyPolicy {
    #[default]
    Flag,
    ReaddClosure,
    DropDependents,
}

/// Thresholds applied by one restart round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdEntry {
    pub trl_min: u8,
    pub kpi_score_min: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneConfig {
    pub trl_min: u8,
    pub kpi_score_min: i64,
    pub keep_migration_critical: bool,
    pub carry_over_ids: BTreeSet<Id>,
    pub cluster_policy: ClusterPolicy,
    pub dependency_policy: DependencyPolicy,
    /// Required number of contributing enabler categories per KVI category.
    /// Categories missing from the map require 1.
    pub coverage_min: BTreeMap<KviCategory, usize>,
    /// Bound on pragmatic re-introduction rounds before a restart.
    pub max_pragmatic_iterations: u32,
    pub threshold_schedule: Vec<ThresholdEntry>,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig {
            trl_min: 2,
            kpi_score_min: 1,
            keep_migration_critical: true,
            carry_over_ids: BTreeSet::new(),
            cluster_policy: ClusterPolicy::KeepAll,
            dependency_policy: DependencyPolicy::Flag,
            coverage_min: KviCategory::ALL.into_iter().map(|c| (c, 1)).collect(),
            max_pragmatic_iterations: 3,
            threshold_schedule: vec![
                ThresholdEntry { trl_min: 2, kpi_score_min: 1 },
                ThresholdEntry { trl_min: 2, kpi_score_min: 0 },
            ],
        }
    }
}

impl PruneConfig {
    pub fn coverage_min_for(&self, category: KviCategory) -> usize {
        self.coverage_min.get(&category).copied().unwrap_or(1)
    }

    /// Range checks; returns one message per problem.
    pub fn validate(&self) -> Vec<String> {
        let trl_ok = |t: u8| (TRL_MIN..=TRL_MAX).contains(&i64::from(t));
        let mut problems = Vec::new();
        if !trl_ok(self.trl_min) {
            problems.push(format!("trl_min {} outside [{TRL_MIN},{TRL_MAX}]", self.trl_min));
        }
        for (i, e) in self.threshold_schedule.iter().enumerate() {
            if !trl_ok(e.trl_min) {
                problems.push(format!(
                    "threshold_schedule[{i}].trl_min {} outside [{TRL_MIN},{TRL_MAX}]",
                    e.trl_min
                ));
            }
        }
        problems
    }
}

/// Partial config, applied on top of a base config. Used by command-line
/// flags, what-if queries and interactive decisions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trl_min: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kpi_score_min: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_migration_critical: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carry_over_ids: Option<BTreeSet<Id>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_policy: Option<ClusterPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependency_policy: Option<DependencyPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage_min: Option<BTreeMap<KviCategory, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pragmatic_iterations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_schedule: Option<Vec<ThresholdEntry>>,
}

impl ConfigOverrides {
    pub fn apply(&self, base: &PruneConfig) -> PruneConfig {
        let mut c = base.clone();
        if let Some(v) = self.trl_min {
            c.trl_min = v;
        }
        if let Some(v) = self.kpi_score_min {
            c.kpi_score_min = v;
        }
        if let Some(v) = self.keep_migration_critical {
            c.keep_migration_critical = v;
        }
        if let Some(v) = &self.carry_over_ids {
            c.carry_over_ids = v.clone();
        }
        if let Some(v) = self.cluster_policy {
            c.cluster_policy = v;
        }
        if let Some(v) = self.dependency_policy {
            c.dependency_policy = v;
        }
        if let Some(v) = &self.coverage_min {
            c.coverage_min = v.clone();
        }
        if let Some(v) = self.max_pragmatic_iterations {
            c.max_pragmatic_iterations = v;
        }
        if let Some(v) = &self.threshold_schedule {
            c.threshold_schedule = v.clone();
        }
        c
    }
}

/// Why an enabler was kept or dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    MeetsTrl,
    MigrationCritical,
    BelowTrl,
    ClusterKeptAll,
    ClusterBest,
    ClusterDominated,
    MeetsKpiScore,
    CarryOver,
    BelowKpiScore,
    DependencyReadded,
    MissingDependency,
    PragmaticReintroduction,
}

impl Reason {
    pub fn is_retention(self) -> bool {
        !matches!(
            self,
            Reason::BelowTrl
                | Reason::ClusterDominated
                | Reason::BelowKpiScore
                | Reason::MissingDependency
        )
    }

    pub fn describe(self) -> &'static str {
        match self {
            Reason::MeetsTrl => "meets TRL threshold",
            Reason::MigrationCritical => "migration critical",
            Reason::BelowTrl => "below TRL threshold",
            Reason::ClusterKeptAll => "cluster kept whole",
            Reason::ClusterBest => "best in cluster",
            Reason::ClusterDominated => "dominated within cluster",
            Reason::MeetsKpiScore => "meets KPI score threshold",
            Reason::CarryOver => "carry-over",
            Reason::BelowKpiScore => "below KPI score threshold",
            Reason::DependencyReadded => "re-added as dependency",
            Reason::MissingDependency => "missing dependency",
            Reason::PragmaticReintroduction => "pragmatic re-introduction",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

/// A retained enabler whose declared dependency is not retained.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DependencyViolation {
    pub retained: Id,
    pub missing: Id,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneOutcome {
    pub graph: KnowledgeGraph,
    pub removed_ids: BTreeSet<Id>,
    pub retained_ids: BTreeSet<Id>,
    /// Sorted by (retained, missing).
    pub dependency_violations: Vec<DependencyViolation>,
    pub reasons: BTreeMap<Id, Reason>,
}

impl PruneOutcome {
    /// Outcome of no pruning at all: everything kept, no reasons recorded.
    pub fn unpruned(g: &KnowledgeGraph) -> Self {
        let retained_ids = g.enabler_ids();
        PruneOutcome {
            dependency_violations: violations(g, &retained_ids),
            graph: g.clone(),
            removed_ids: BTreeSet::new(),
            retained_ids,
            reasons: BTreeMap::new(),
        }
    }

    /// Builds the outcome for per-enabler decisions over `source`.
    fn from_decisions(source: &KnowledgeGraph, reasons: BTreeMap<Id, Reason>) -> Self {
        let (retained_ids, removed_ids): (BTreeSet<Id>, BTreeSet<Id>) = {
            let mut kept = BTreeSet::new();
            let mut dropped = BTreeSet::new();
            for (id, r) in &reasons {
                if r.is_retention() {
                    kept.insert(id.clone());
                } else {
                    dropped.insert(id.clone());
                }
            }
            (kept, dropped)
        };
        let graph = source.induced(&retained_ids);
        let dependency_violations = violations(&graph, &retained_ids);
        PruneOutcome {
            graph,
            removed_ids,
            retained_ids,
            dependency_violations,
            reasons,
        }
    }

    pub fn universe(&self) -> BTreeSet<Id> {
        &self.retained_ids | &self.removed_ids
    }

    /// Chains a later stage onto this one. The result spans this outcome's
    /// universe; later reasons override earlier ones.
    pub fn then(&self, later: &PruneOutcome) -> PruneOutcome {
        let mut reasons = self.reasons.clone();
        reasons.extend(later.reasons.iter().map(|(k, v)| (k.clone(), *v)));
        let removed_ids = &(&self.universe() | &later.universe()) - &later.retained_ids;
        PruneOutcome {
            graph: later.graph.clone(),
            removed_ids,
            retained_ids: later.retained_ids.clone(),
            dependency_violations: later.dependency_violations.clone(),
            reasons,
        }
    }
}

fn violations(g: &KnowledgeGraph, retained: &BTreeSet<Id>) -> Vec<DependencyViolation> {
    let mut out: Vec<DependencyViolation> = retained
        .iter()
        .filter_map(|id| g.node(id.as_str()).map(|n| (id, n)))
        .flat_map(|(id, n)| {
            n.depends_on
                .iter()
                .filter(|d| !retained.contains(*d))
                .map(move |d| DependencyViolation {
                    retained: id.clone(),
                    missing: d.clone(),
                })
        })
        .collect();
    out.sort();
    out
}

/// Keeps enablers at or above `trl_min`, plus migration-critical enablers
/// when `keep_migration_critical` is set.
pub fn prioritize(g: &KnowledgeGraph, cfg: &PruneConfig) -> PruneOutcome {
    let reasons = g
        .nodes
        .iter()
        .filter(|(_, n)| n.kind == NodeKind::Enabler)
        .map(|(id, n)| {
            let trl = n.features.trl.unwrap_or(0);
            let reason = if trl >= cfg.trl_min {
                Reason::MeetsTrl
            } else if cfg.keep_migration_critical && n.is_migration_critical() {
                Reason::MigrationCritical
            } else {
                Reason::BelowTrl
            };
            (id.clone(), reason)
        })
        .collect();
    PruneOutcome::from_decisions(g, reasons)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub label: String,
    pub member_ids: BTreeSet<Id>,
}

/// Groups the enablers of `g` by their catalog category, sorted by label.
pub fn cluster_enablers(g: &KnowledgeGraph, c: &Catalog) -> Vec<Cluster> {
    let index = c.enabler_index();
    let mut groups: BTreeMap<String, BTreeSet<Id>> = BTreeMap::new();
    for (id, node) in g.nodes.iter().filter(|(_, n)| n.kind == NodeKind::Enabler) {
        let label = index
            .get(id)
            .map(|e| e.category.clone())
            .or_else(|| node.category.clone())
            .unwrap_or_default();
        groups.entry(label).or_default().insert(id.clone());
    }
    groups
        .into_iter()
        .map(|(label, member_ids)| Cluster { label, member_ids })
        .collect()
}

/// `KeepAll` is the identity; `BestPerCluster` keeps, per cluster, the
/// member with the highest (kpi_score, trl), smallest id on ties.
pub fn select_in_clusters(
    clusters: &[Cluster],
    g: &KnowledgeGraph,
    policy: ClusterPolicy,
) -> PruneOutcome {
    let mut reasons: BTreeMap<Id, Reason> = g
        .enabler_ids()
        .into_iter()
        .map(|id| (id, Reason::ClusterKeptAll))
        .collect();
    if policy == ClusterPolicy::BestPerCluster {
        for cluster in clusters {
            let members: Vec<&Id> = cluster
                .member_ids
                .iter()
                .filter(|id| reasons.contains_key(*id))
                .collect();
            let best = members.iter().copied().max_by(|x, y| {
                let (fx, fy) = (&g.nodes[*x].features, &g.nodes[*y].features);
                (fx.kpi_score, fx.trl)
                    .cmp(&(fy.kpi_score, fy.trl))
                    .then_with(|| y.cmp(x))
            });
            for id in members {
                let r = if Some(id) == best {
                    Reason::ClusterBest
                } else {
                    Reason::ClusterDominated
                };
                reasons.insert(id.clone(), r);
            }
        }
    }
    PruneOutcome::from_decisions(g, reasons)
}

/// Keeps enablers with `kpi_score >= kpi_score_min`, plus carry-over ids.
pub fn prune_by_kpi(g: &KnowledgeGraph, cfg: &PruneConfig) -> PruneOutcome {
    let reasons = g
        .nodes
        .iter()
        .filter(|(_, n)| n.kind == NodeKind::Enabler)
        .map(|(id, n)| {
            let reason = if n.features.kpi_score >= cfg.kpi_score_min {
                Reason::MeetsKpiScore
            } else if cfg.carry_over_ids.contains(id) {
                Reason::CarryOver
            } else {
                Reason::BelowKpiScore
            };
            (id.clone(), reason)
        })
        .collect();
    PruneOutcome::from_decisions(g, reasons)
}

/// Resolves retained enablers whose dependencies were pruned.
///
/// * `Flag` leaves the outcome unchanged.
/// * `ReaddClosure` re-adds, from `full`, every enabler reachable from the
///   retained set along declared dependencies.
/// * `DropDependents` removes retained enablers with missing dependencies
///   until none remain.
pub fn repair_dependencies(
    outcome: &PruneOutcome,
    full: &KnowledgeGraph,
    policy: DependencyPolicy,
) -> PruneOutcome {
    match policy {
        DependencyPolicy::Flag => outcome.clone(),
        DependencyPolicy::ReaddClosure => {
            let mut retained = outcome.retained_ids.clone();
            let mut reasons = outcome.reasons.clone();
            let mut stack: Vec<Id> = retained.iter().cloned().collect();
            while let Some(id) = stack.pop() {
                let Some(node) = full.node(id.as_str()) else {
                    continue;
                };
                for dep in &node.depends_on {
                    if full.contains(dep.as_str()) && retained.insert(dep.clone()) {
                        reasons.insert(dep.clone(), Reason::DependencyReadded);
                        stack.push(dep.clone());
                    }
                }
            }
            rebuild(full, outcome, retained, reasons)
        }
        DependencyPolicy::DropDependents => {
            let mut retained = outcome.retained_ids.clone();
            let mut reasons = outcome.reasons.clone();
            loop {
                let broken: BTreeSet<Id> = violations(&outcome.graph, &retained)
                    .into_iter()
                    .map(|v| v.retained)
                    .collect();
                if broken.is_empty() {
                    break;
                }
                for id in broken {
                    retained.remove(&id);
                    reasons.insert(id, Reason::MissingDependency);
                }
            }
            rebuild(&outcome.graph, outcome, retained, reasons)
        }
    }
}

fn rebuild(
    source: &KnowledgeGraph,
    before: &PruneOutcome,
    retained_ids: BTreeSet<Id>,
    reasons: BTreeMap<Id, Reason>,
) -> PruneOutcome {
    let graph = source.induced(&retained_ids);
    let dependency_violations = violations(&graph, &retained_ids);
    let removed_ids = &(&before.universe() | &retained_ids) - &retained_ids;
    PruneOutcome {
        graph,
        removed_ids,
        retained_ids,
        dependency_violations,
        reasons,
    }
}

/// Moves `ids` from removed to retained and restores their edges from `full`.
pub(crate) fn readmit(
    outcome: &PruneOutcome,
    full: &KnowledgeGraph,
    ids: &BTreeSet<Id>,
    reason: Reason,
) -> PruneOutcome {
    let retained = &outcome.retained_ids | ids;
    let mut reasons = outcome.reasons.clone();
    for id in ids {
        reasons.insert(id.clone(), reason);
    }
    rebuild(full, outcome, retained, reasons)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{Catalog, Enabler};
    use crate::kgraph::build_full_kg;

    fn e(id: &str, trl: i64, critical: bool, score: i64, deps: &[&str]) -> Enabler {
        let mut impacts = BTreeMap::new();
        for i in 0..score.unsigned_abs() {
            impacts.insert(Id::new(format!("k{i}")), score.signum());
        }
        Enabler {
            id: Id::from(id),
            name: id.into(),
            category: format!("cat-{}", &id[..1]),
            trl,
            migration_critical: critical,
            kpi_impacts: impacts,
            principle_ids: Default::default(),
            dependency_ids: deps.iter().map(|d| Id::from(*d)).collect(),
            requirement_ids: Default::default(),
        }
    }

    fn graph(enablers: Vec<Enabler>) -> (Catalog, KnowledgeGraph) {
        let c = Catalog {
            use_case_name: "t".into(),
            kpis: (0..5)
                .map(|i| crate::catalog::KpiRequirement {
                    id: Id::new(format!("k{i}")),
                    name: format!("kpi {i}"),
                    target: String::new(),
                    unit: String::new(),
                    rationale: String::new(),
                })
                .collect(),
            requirements: vec![],
            kvis: vec![],
            key_values: vec![],
            principles: vec![],
            enablers,
        };
        let g = build_full_kg(&c).unwrap();
        (c, g)
    }

    fn ids(v: &[&str]) -> BTreeSet<Id> {
        v.iter().map(|s| Id::from(*s)).collect()
    }

    #[test]
    fn prioritize_reasons() {
        let (_, g) = graph(vec![
            e("low", 1, false, 0, &[]),
            e("mig", 1, true, 0, &[]),
            e("top", 9, false, 0, &[]),
        ]);
        let o = prioritize(&g, &PruneConfig::default());
        assert_eq!(o.reasons[&Id::from("low")], Reason::BelowTrl);
        assert_eq!(o.reasons[&Id::from("low")].to_string(), "below TRL threshold");
        assert_eq!(o.reasons[&Id::from("mig")], Reason::MigrationCritical);
        assert_eq!(o.reasons[&Id::from("mig")].to_string(), "migration critical");
        assert_eq!(o.retained_ids, ids(&["mig", "top"]));
        assert_eq!(o.removed_ids, ids(&["low"]));
        assert!(!o.graph.contains("low"));
    }

    #[test]
    fn prune_by_kpi_threshold_and_carry_over() {
        let (_, g) = graph(vec![
            e("zero", 5, false, 0, &[]),
            e("one", 5, false, 1, &[]),
            e("kept", 5, false, 0, &[]),
        ]);
        let cfg = PruneConfig {
            carry_over_ids: ids(&["kept"]),
            ..PruneConfig::default()
        };
        let o = prune_by_kpi(&g, &cfg);
        assert_eq!(o.reasons[&Id::from("zero")], Reason::BelowKpiScore);
        assert_eq!(o.reasons[&Id::from("one")], Reason::MeetsKpiScore);
        assert_eq!(o.reasons[&Id::from("kept")], Reason::CarryOver);
        assert_eq!(o.reasons[&Id::from("kept")].to_string(), "carry-over");
        assert_eq!(o.retained_ids, ids(&["kept", "one"]));
    }

    #[test]
    fn clusters_by_category() {
        let (c, g) = graph(vec![
            e("a1", 5, false, 0, &[]),
            e("a2", 5, false, 0, &[]),
            e("b1", 5, false, 0, &[]),
        ]);
        let cl = cluster_enablers(&g, &c);
        let sizes: Vec<_> = cl.iter().map(|c| c.member_ids.len()).collect();
        assert_eq!(sizes, [2, 1]);
        let (c, g) = graph(vec![]);
        assert!(cluster_enablers(&g, &c).is_empty());
    }

    #[test]
    fn best_per_cluster_tie_breaks() {
        let (c, g) = graph(vec![e("x", 5, false, 3, &[]), e("xy", 5, false, 1, &[])]);
        let o = select_in_clusters(&cluster_enablers(&g, &c), &g, ClusterPolicy::BestPerCluster);
        assert_eq!(o.retained_ids, ids(&["x"]));

        let (c, g) = graph(vec![e("xa", 4, false, 2, &[]), e("xb", 6, false, 2, &[])]);
        let o = select_in_clusters(&cluster_enablers(&g, &c), &g, ClusterPolicy::BestPerCluster);
        assert_eq!(o.retained_ids, ids(&["xb"]));

        let (c, g) = graph(vec![e("xb", 6, false, 2, &[]), e("xa", 6, false, 2, &[])]);
        let o = select_in_clusters(&cluster_enablers(&g, &c), &g, ClusterPolicy::BestPerCluster);
        assert_eq!(o.retained_ids, ids(&["xa"]));

        let o = select_in_clusters(&cluster_enablers(&g, &c), &g, ClusterPolicy::KeepAll);
        assert_eq!(o.retained_ids, g.enabler_ids());
    }

    #[test]
    fn repair_policies() {
        let (_, g) = graph(vec![e("a", 5, false, 1, &["b"]), e("b", 5, false, 0, &[])]);
        let o = prune_by_kpi(&g, &PruneConfig::default());
        assert_eq!(
            o.dependency_violations,
            vec![DependencyViolation {
                retained: Id::from("a"),
                missing: Id::from("b")
            }]
        );
        assert_eq!(repair_dependencies(&o, &g, DependencyPolicy::Flag), o);

        let r = repair_dependencies(&o, &g, DependencyPolicy::ReaddClosure);
        assert_eq!(r.retained_ids, ids(&["a", "b"]));
        assert!(r.dependency_violations.is_empty());
        assert_eq!(r.reasons[&Id::from("b")], Reason::DependencyReadded);

        let d = repair_dependencies(&o, &g, DependencyPolicy::DropDependents);
        assert!(d.retained_ids.is_empty());
        assert_eq!(d.removed_ids, ids(&["a", "b"]));
        assert!(d.dependency_violations.is_empty());
    }

    #[test]
    fn readd_closure_follows_chains() {
        let (_, g) = graph(vec![
            e("a", 5, false, 1, &["b"]),
            e("b", 5, false, 0, &["c"]),
            e("c", 5, false, 0, &[]),
            e("d", 5, false, 0, &[]),
        ]);
        let o = prune_by_kpi(&g, &PruneConfig::default());
        let r = repair_dependencies(&o, &g, DependencyPolicy::ReaddClosure);
        assert_eq!(r.retained_ids, ids(&["a", "b", "c"]));
        assert_eq!(r.removed_ids, ids(&["d"]));
    }

    #[test]
    fn then_spans_the_earlier_universe() {
        let (_, g) = graph(vec![
            e("a", 1, false, 1, &[]),
            e("b", 5, false, 0, &[]),
            e("c", 5, false, 2, &[]),
        ]);
        let cfg = PruneConfig::default();
        let p = prioritize(&g, &cfg);
        let k = prune_by_kpi(&p.graph, &cfg);
        let both = p.then(&k);
        assert_eq!(both.retained_ids, ids(&["c"]));
        assert_eq!(both.removed_ids, ids(&["a", "b"]));
        assert_eq!(both.reasons[&Id::from("a")], Reason::BelowTrl);
        assert_eq!(both.reasons[&Id::from("b")], Reason::BelowKpiScore);
    }

    #[test]
    fn config_json_uses_field_names_and_defaults() {
        let cfg: PruneConfig = serde_json::from_str(r#"{"kpi_score_min": 2}"#).unwrap();
        assert_eq!(cfg.kpi_score_min, 2);
        assert_eq!(cfg.trl_min, 2);
        assert_eq!(cfg.max_pragmatic_iterations, 3);
        assert_eq!(cfg.threshold_schedule.len(), 2);
        assert!(serde_json::from_str::<PruneConfig>(r#"{"kpi_min": 2}"#).is_err());
        assert_eq!(
            PruneConfig { trl_min: 0, ..Default::default() }.validate().len(),
            1
        );
    }
}
