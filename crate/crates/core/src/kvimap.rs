//! Enabler to KVI mapping through technical requirements, KVI-category
//! coverage, and ranking of pruned enablers that could close coverage gaps.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, Enabler, Id, KviCategory};
use crate::kgraph::KnowledgeGraph;
use crate::pruner::{readmit, Cluster, PruneConfig, PruneOutcome, Reason};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KviError {
    #[error("coverage report has no gaps")]
    EmptyGapSet,
    #[error("enabler(s) not currently removed: {}", join(.0))]
    NotRemoved(Vec<Id>),
}

fn join(ids: &[Id]) -> String {
    ids.iter().map(Id::as_str).collect::<Vec<_>>().join(", ")
}

impl KviError {
    pub fn code(&self) -> &'static str {
        match self {
            KviError::EmptyGapSet => "EmptyGapSet",
            KviError::NotRemoved(_) => "NotRemoved",
        }
    }
}

/// KVIs whose technical requirements intersect the enabler's.
pub fn enabler_kvis(e: &Enabler, c: &Catalog) -> BTreeSet<Id> {
    c.kvis
        .iter()
        .filter(|k| !k.requirement_ids.is_disjoint(&e.requirement_ids))
        .map(|k| k.id.clone())
        .collect()
}

/// KVI categories reached by the enabler.
pub fn enabler_categories(e: &Enabler, c: &Catalog) -> BTreeSet<KviCategory> {
    c.kvis
        .iter()
        .filter(|k| !k.requirement_ids.is_disjoint(&e.requirement_ids))
        .map(|k| k.category)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Number of contributing enabler categories, for all six KVI categories.
    pub counts: BTreeMap<KviCategory, usize>,
    pub contributing: BTreeMap<KviCategory, BTreeSet<String>>,
    pub gaps: BTreeSet<KviCategory>,
    pub coverage_min: BTreeMap<KviCategory, usize>,
}

/// A cluster contributes to a KVI category iff one of its retained members
/// maps to a KVI of that category.
pub fn coverage(
    outcome: &PruneOutcome,
    clusters: &[Cluster],
    c: &Catalog,
    cfg: &PruneConfig,
) -> CoverageReport {
    let index = c.enabler_index();
    let mut contributing: BTreeMap<KviCategory, BTreeSet<String>> =
        KviCategory::ALL.into_iter().map(|k| (k, BTreeSet::new())).collect();
    for cluster in clusters {
        for id in cluster.member_ids.intersection(&outcome.retained_ids) {
            if let Some(e) = index.get(id) {
                for k in enabler_categories(e, c) {
                    contributing
                        .get_mut(&k)
                        .expect("all categories present")
                        .insert(cluster.label.clone());
                }
            }
        }
    }
    let counts: BTreeMap<KviCategory, usize> =
        contributing.iter().map(|(k, s)| (*k, s.len())).collect();
    let coverage_min: BTreeMap<KviCategory, usize> = KviCategory::ALL
        .into_iter()
        .map(|k| (k, cfg.coverage_min_for(k)))
        .collect();
    // A category the catalog has no KVI for cannot be assessed.
    let assessed: BTreeSet<KviCategory> = c.kvis.iter().map(|k| k.category).collect();
    let gaps = assessed
        .into_iter()
        .filter(|k| counts[k] < coverage_min[k])
        .collect();
    CoverageReport {
        counts,
        contributing,
        gaps,
        coverage_min,
    }
}

pub fn kv_satisfied(report: &CoverageReport) -> bool {
    report.gaps.is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PragmaticCandidate {
    pub enabler_id: Id,
    pub gap_categories_addressed: BTreeSet<KviCategory>,
    pub kpi_score: i64,
    pub trl: u8,
    /// 1-based position in the ranking.
    pub rank: usize,
    pub rationale: String,
}

/// Removed enablers that map to at least one gap category, ranked by
/// (gaps addressed desc, kpi_score desc, trl desc, id asc).
pub fn pragmatic_candidates(
    full: &KnowledgeGraph,
    outcome: &PruneOutcome,
    report: &CoverageReport,
    c: &Catalog,
) -> Result<Vec<PragmaticCandidate>, KviError> {
    if report.gaps.is_empty() {
        return Err(KviError::EmptyGapSet);
    }
    let index = c.enabler_index();
    let mut out: Vec<PragmaticCandidate> = outcome
        .removed_ids
        .iter()
        .filter_map(|id| {
            let e = index.get(id)?;
            let node = full.node(id.as_str())?;
            let hits: BTreeSet<KviCategory> = enabler_categories(e, c)
                .intersection(&report.gaps)
                .copied()
                .collect();
            if hits.is_empty() {
                return None;
            }
            let why = outcome
                .reasons
                .get(id)
                .map(|r| r.describe())
                .unwrap_or("removed");
            let gaps: Vec<&str> = hits.iter().map(|k| k.as_str()).collect();
            Some(PragmaticCandidate {
                enabler_id: id.clone(),
                rationale: format!("addresses {}; removed: {why}", gaps.join(", ")),
                gap_categories_addressed: hits,
                kpi_score: node.features.kpi_score,
                trl: node.features.trl.unwrap_or(0),
                rank: 0,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        y.gap_categories_addressed
            .len()
            .cmp(&x.gap_categories_addressed.len())
            .then(y.kpi_score.cmp(&x.kpi_score))
            .then(y.trl.cmp(&x.trl))
            .then(x.enabler_id.cmp(&y.enabler_id))
    });
    for (i, cand) in out.iter_mut().enumerate() {
        cand.rank = i + 1;
    }
    Ok(out)
}

/// Batch stand-in for the designer: the best-ranked candidate for each gap.
pub fn top_candidate_per_gap(
    candidates: &[PragmaticCandidate],
    report: &CoverageReport,
) -> BTreeSet<Id> {
    report
        .gaps
        .iter()
        .filter_map(|gap| {
            candidates
                .iter()
                .find(|c| c.gap_categories_addressed.contains(gap))
                .map(|c| c.enabler_id.clone())
        })
        .collect()
}

/// Moves `ids` back into the retained set with their edges from `full`.
pub fn reintroduce(
    outcome: &PruneOutcome,
    full: &KnowledgeGraph,
    ids: &BTreeSet<Id>,
) -> Result<PruneOutcome, KviError> {
    let missing: Vec<Id> = ids
        .iter()
        .filter(|id| !outcome.removed_ids.contains(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(KviError::NotRemoved(missing));
    }
    if ids.is_empty() {
        return Ok(outcome.clone());
    }
    Ok(readmit(outcome, full, ids, Reason::PragmaticReintroduction))
}
