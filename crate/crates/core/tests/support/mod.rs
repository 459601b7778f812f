//! Random catalogs, an independent brute-force selection oracle, and the
//! invariant checks shared by the property and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use kgsel_core::catalog::{
    Catalog, DesignPrinciple, Enabler, Id, KpiRequirement, Kvi, KviCategory, Pillar,
    TechnicalRequirement,
};
use kgsel_core::kgraph::{build_full_kg, KnowledgeGraph, NodeKind};
use kgsel_core::kvimap::{coverage, pragmatic_candidates, reintroduce, CoverageReport};
use kgsel_core::pipeline::{evaluate, run_batch, store, Session};
use kgsel_core::pruner::{
    cluster_enablers, prioritize, prune_by_kpi, repair_dependencies, ClusterPolicy,
    DependencyPolicy, PruneConfig, PruneOutcome, ThresholdEntry,
};
use kgsel_core::reports::{graph_json, import_graph};
use kgsel_core::scoring::kpi_histogram;
use proptest::prelude::*;

pub const KPIS: usize = 8;
pub const PRINCIPLES: usize = 4;
pub const REQUIREMENTS: usize = 6;
pub const CATEGORIES: usize = 7;

/// Requirement `r{i}` backs a KVI in `KviCategory::ALL[i]`; `r0` also backs a
/// Safety KVI so some requirements span two categories.
fn kvis() -> Vec<Kvi> {
    let mut out: Vec<Kvi> = KviCategory::ALL
        .into_iter()
        .enumerate()
        .map(|(i, cat)| Kvi {
            id: Id::new(format!("kvi{i}")),
            description: format!("kvi {i}"),
            category: cat,
            pillar: Pillar::Economic,
            requirement_ids: [Id::new(format!("r{i}"))].into(),
        })
        .collect();
    out.push(Kvi {
        id: Id::new("kvi-extra"),
        description: "extra".into(),
        category: KviCategory::Safety,
        pillar: Pillar::Social,
        requirement_ids: [Id::new("r0")].into(),
    });
    out
}

#[derive(Debug, Clone)]
pub struct RawEnabler {
    pub trl: i64,
    pub critical: bool,
    pub impacts: Vec<i64>,
    pub principles: u8,
    pub reqs: u8,
    pub category: usize,
    pub deps: Vec<usize>,
}

fn raw_enabler() -> impl Strategy<Value = RawEnabler> {
    (
        1i64..=9,
        prop::bool::weighted(0.2),
        prop::collection::vec(-1i64..=1, KPIS),
        0u8..(1 << PRINCIPLES),
        0u8..(1 << REQUIREMENTS),
        0usize..CATEGORIES,
        prop::collection::vec(0usize..64, 0..3),
    )
        .prop_map(|(trl, critical, impacts, principles, reqs, category, deps)| RawEnabler {
            trl,
            critical,
            impacts,
            principles,
            reqs,
            category,
            deps,
        })
}

pub fn build_catalog(raw: &[RawEnabler]) -> Catalog {
    let n = raw.len();
    let enablers = raw
        .iter()
        .enumerate()
        .map(|(i, r)| Enabler {
            id: Id::new(format!("e{i:02}")),
            name: format!("enabler {i}"),
            category: format!("cat{}", r.category),
            trl: r.trl,
            migration_critical: r.critical,
            kpi_impacts: r
                .impacts
                .iter()
                .enumerate()
                .map(|(k, v)| (Id::new(format!("k{k}")), *v))
                .collect(),
            principle_ids: (0..PRINCIPLES)
                .filter(|p| r.principles & (1 << p) != 0)
                .map(|p| Id::new(format!("p{p}")))
                .collect(),
            dependency_ids: r
                .deps
                .iter()
                .map(|d| d % n)
                .filter(|d| *d != i)
                .map(|d| Id::new(format!("e{d:02}")))
                .collect(),
            requirement_ids: (0..REQUIREMENTS)
                .filter(|q| r.reqs & (1 << q) != 0)
                .map(|q| Id::new(format!("r{q}")))
                .collect(),
        })
        .collect();
    Catalog {
        use_case_name: "random".into(),
        kpis: (0..KPIS)
            .map(|k| KpiRequirement {
                id: Id::new(format!("k{k}")),
                name: format!("kpi {k}"),
                target: String::new(),
                unit: String::new(),
                rationale: String::new(),
            })
            .collect(),
        requirements: (0..REQUIREMENTS)
            .map(|q| TechnicalRequirement {
                id: Id::new(format!("r{q}")),
                label: format!("req {q}"),
            })
            .collect(),
        kvis: kvis(),
        key_values: vec![],
        principles: (0..PRINCIPLES)
            .map(|p| DesignPrinciple {
                id: Id::new(format!("p{p}")),
                name: format!("principle {p}"),
            })
            .collect(),
        enablers,
    }
}

pub fn arb_catalog(max_enablers: usize) -> impl Strategy<Value = Catalog> {
    prop::collection::vec(raw_enabler(), 0..=max_enablers).prop_map(|r| build_catalog(&r))
}

pub fn arb_config(max_enablers: usize) -> impl Strategy<Value = PruneConfig> {
    (
        1u8..=9,
        -4i64..=4,
        any::<bool>(),
        prop::collection::btree_set(0usize..max_enablers.max(1), 0..3),
        prop_oneof![Just(ClusterPolicy::KeepAll), Just(ClusterPolicy::BestPerCluster)],
        prop_oneof![
            Just(DependencyPolicy::Flag),
            Just(DependencyPolicy::ReaddClosure),
            Just(DependencyPolicy::DropDependents)
        ],
        prop::collection::vec(0usize..=2, KviCategory::ALL.len()),
        0u32..=3,
        prop::collection::vec((1u8..=9, -4i64..=4), 0..3),
    )
        .prop_map(|(trl_min, kpi_score_min, keep, carry, cp, dp, mins, m, sched)| PruneConfig {
            trl_min,
            kpi_score_min,
            keep_migration_critical: keep,
            carry_over_ids: carry.into_iter().map(|i| Id::new(format!("e{i:02}"))).collect(),
            cluster_policy: cp,
            dependency_policy: dp,
            coverage_min: KviCategory::ALL.into_iter().zip(mins).collect(),
            max_pragmatic_iterations: m,
            threshold_schedule: sched
                .into_iter()
                .map(|(trl_min, kpi_score_min)| ThresholdEntry { trl_min, kpi_score_min })
                .collect(),
        })
}

type Check = Result<(), TestCaseError>;

/// Every structural and monotonic invariant of one random catalog.
pub fn check_invariants(c: &Catalog, cfg: &PruneConfig) -> Check {
    let g = build_full_kg(c).map_err(|e| TestCaseError::fail(e.to_string()))?;

    // adjacency symmetry
    for a in g.nodes.keys() {
        for b in g.neighbors(a.as_str(), None).unwrap() {
            prop_assert!(g.neighbors(b.as_str(), None).unwrap().contains(a));
        }
    }
    // GraphJson round-trip
    prop_assert_eq!(&import_graph(graph_json(&g).as_bytes()).unwrap(), &g);
    // histogram totals
    prop_assert_eq!(kpi_histogram(&g).total(), c.enablers.len());

    let p = prioritize(&g, cfg);
    prop_assert_eq!(kpi_histogram(&p.graph).total(), p.retained_ids.len());
    // idempotence
    let pp = prioritize(&p.graph, cfg);
    prop_assert_eq!(&pp.retained_ids, &p.retained_ids);
    let k = prune_by_kpi(&g, cfg);
    let kk = prune_by_kpi(&k.graph, cfg);
    prop_assert_eq!(&kk.retained_ids, &k.retained_ids);
    // migration-critical survival
    if cfg.keep_migration_critical {
        for e in c.enablers.iter().filter(|e| e.migration_critical) {
            prop_assert!(p.retained_ids.contains(&e.id));
        }
    }
    // partition of the universe
    prop_assert!(p.retained_ids.is_disjoint(&p.removed_ids));
    prop_assert_eq!(p.universe(), g.enabler_ids());

    // monotonicity in both thresholds (KeepAll, so cluster selection is the identity)
    let mut lo = cfg.clone();
    lo.cluster_policy = ClusterPolicy::KeepAll;
    let mut hi_trl = lo.clone();
    hi_trl.trl_min = lo.trl_min.saturating_add(1).min(9);
    let mut hi_kpi = lo.clone();
    hi_kpi.kpi_score_min += 1;
    let base = evaluate(&g, c, &lo);
    prop_assert!(evaluate(&g, c, &hi_trl).retained_ids.is_subset(&base.retained_ids));
    prop_assert!(evaluate(&g, c, &hi_kpi).retained_ids.is_subset(&base.retained_ids));

    // repair policies
    let pruned = p.then(&prune_by_kpi(&p.graph, cfg));
    let closure = repair_dependencies(&pruned, &g, DependencyPolicy::ReaddClosure);
    prop_assert!(closure.dependency_violations.is_empty());
    prop_assert!(pruned.retained_ids.is_subset(&closure.retained_ids));
    let dropped = repair_dependencies(&pruned, &g, DependencyPolicy::DropDependents);
    prop_assert!(dropped.dependency_violations.is_empty());
    prop_assert!(dropped.retained_ids.is_subset(&pruned.retained_ids));

    // coverage never decreases under reintroduce
    let clusters = cluster_enablers(&pruned.graph, c);
    let before = coverage(&pruned, &clusters, c, cfg);
    if !before.gaps.is_empty() {
        let cands = pragmatic_candidates(&g, &pruned, &before, c).unwrap();
        let ids: BTreeSet<Id> = cands.iter().take(2).map(|x| x.enabler_id.clone()).collect();
        let after_o = reintroduce(&pruned, &g, &ids).unwrap();
        let after = coverage(&after_o, &cluster_enablers(&after_o.graph, c), c, cfg);
        for cat in KviCategory::ALL {
            prop_assert!(after.counts[&cat] >= before.counts[&cat]);
        }
    }

    // session replay determinism
    let a = run_batch(c, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = run_batch(c, cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let ha: Vec<_> = a.stages.iter().map(|r| r.snapshot.clone()).collect();
    let hb: Vec<_> = b.stages.iter().map(|r| r.snapshot.clone()).collect();
    prop_assert_eq!(&ha, &hb);
    let (header, entries) = a.log();
    let catalogs = [(a.catalog_version.clone(), Arc::clone(a.catalog()))].into();
    let r = Session::replay(&header, &entries, &catalogs)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let hr: Vec<_> = r.stages.iter().map(|r| r.snapshot.clone()).collect();
    prop_assert_eq!(&ha, &hr);
    prop_assert_eq!(store::to_jsonl(&r), store::to_jsonl(&a));
    Ok(())
}

// Brute-force oracle. Works on raw catalog fields only.

pub struct OracleResult {
    pub scores: BTreeMap<String, i64>,
    pub retained: BTreeSet<String>,
    pub counts: BTreeMap<KviCategory, usize>,
    pub gaps: BTreeSet<KviCategory>,
}

fn subsets(items: &[String]) -> impl Iterator<Item = BTreeSet<String>> + '_ {
    (0u32..(1 << items.len())).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| s.clone())
            .collect()
    })
}

fn closed(set: &BTreeSet<String>, deps: &BTreeMap<String, BTreeSet<String>>) -> bool {
    set.iter().all(|e| deps[e].iter().all(|d| set.contains(d)))
}

pub fn oracle(c: &Catalog, cfg: &PruneConfig) -> OracleResult {
    let ids: Vec<String> = c.enablers.iter().map(|e| e.id.as_str().to_owned()).collect();
    let by: BTreeMap<&str, &Enabler> = c.enablers.iter().map(|e| (e.id.as_str(), e)).collect();
    let scores: BTreeMap<String, i64> = c
        .enablers
        .iter()
        .map(|e| (e.id.as_str().to_owned(), e.kpi_impacts.values().copied().sum()))
        .collect();
    let deps: BTreeMap<String, BTreeSet<String>> = c
        .enablers
        .iter()
        .map(|e| {
            (
                e.id.as_str().to_owned(),
                e.dependency_ids.iter().map(|d| d.as_str().to_owned()).collect(),
            )
        })
        .collect();

    let prio: BTreeSet<String> = ids
        .iter()
        .filter(|i| {
            let e = by[i.as_str()];
            e.trl >= i64::from(cfg.trl_min) || (cfg.keep_migration_critical && e.migration_critical)
        })
        .cloned()
        .collect();
    let clustered: BTreeSet<String> = match cfg.cluster_policy {
        ClusterPolicy::KeepAll => prio.clone(),
        ClusterPolicy::BestPerCluster => prio
            .iter()
            .filter(|i| {
                let e = by[i.as_str()];
                // no other member of the category beats it
                !prio.iter().any(|j| {
                    let f = by[j.as_str()];
                    j != *i
                        && f.category == e.category
                        && (scores[j], f.trl, std::cmp::Reverse(j.as_str()))
                            > (scores[*i], e.trl, std::cmp::Reverse(i.as_str()))
                })
            })
            .cloned()
            .collect(),
    };
    let pruned: BTreeSet<String> = clustered
        .iter()
        .filter(|i| scores[*i] >= cfg.kpi_score_min || cfg.carry_over_ids.contains(i.as_str()))
        .cloned()
        .collect();
    let retained = match cfg.dependency_policy {
        DependencyPolicy::Flag => pruned,
        // smallest dependency-closed superset
        DependencyPolicy::ReaddClosure => subsets(&ids)
            .filter(|s| pruned.is_subset(s) && closed(s, &deps))
            .min_by_key(|s| s.len())
            .unwrap(),
        // largest dependency-closed subset
        DependencyPolicy::DropDependents => {
            let p: Vec<String> = pruned.iter().cloned().collect();
            subsets(&p)
                .filter(|s| closed(s, &deps))
                .max_by_key(|s| s.len())
                .unwrap()
        }
    };

    let mut counts = BTreeMap::new();
    let mut gaps = BTreeSet::new();
    for cat in KviCategory::ALL {
        let reqs: BTreeSet<&str> = c
            .kvis
            .iter()
            .filter(|k| k.category == cat)
            .flat_map(|k| k.requirement_ids.iter().map(|r| r.as_str()))
            .collect();
        let labels: BTreeSet<&str> = retained
            .iter()
            .map(|i| by[i.as_str()])
            .filter(|e| e.requirement_ids.iter().any(|r| reqs.contains(r.as_str())))
            .map(|e| e.category.as_str())
            .collect();
        counts.insert(cat, labels.len());
        let assessed = c.kvis.iter().any(|k| k.category == cat);
        if assessed && labels.len() < cfg.coverage_min.get(&cat).copied().unwrap_or(1) {
            gaps.insert(cat);
        }
    }
    OracleResult {
        scores,
        retained,
        counts,
        gaps,
    }
}

pub fn engine(c: &Catalog, cfg: &PruneConfig) -> (KnowledgeGraph, PruneOutcome, CoverageReport) {
    let g = build_full_kg(c).unwrap();
    let o = evaluate(&g, c, cfg);
    let cov = coverage(&o, &cluster_enablers(&o.graph, c), c, cfg);
    (g, o, cov)
}

pub fn check_oracle(c: &Catalog, cfg: &PruneConfig) -> Check {
    let want = oracle(c, cfg);
    let (g, o, cov) = engine(c, cfg);
    let scores: BTreeMap<String, i64> = g
        .nodes
        .iter()
        .filter(|(_, n)| n.kind == NodeKind::Enabler)
        .map(|(id, n)| (id.as_str().to_owned(), n.features.kpi_score))
        .collect();
    prop_assert_eq!(scores, want.scores);
    let got: BTreeSet<String> = o.retained_ids.iter().map(|i| i.as_str().to_owned()).collect();
    prop_assert_eq!(got, want.retained);
    prop_assert_eq!(cov.counts, want.counts);
    prop_assert_eq!(cov.gaps, want.gaps);
    Ok(())
}
