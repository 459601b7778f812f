//! End-to-end selection flow and its replayable session record.
//!
//! A [`Session`] is a state machine over [`StageKind`]s. Every step is driven
//! by a [`Decision`] (made by a designer in interactive mode, or by
//! [`Session::next_auto_decision`] in batch mode) and appends exactly one
//! [`StageRecord`]. The stage list is append-only; snapshots are
//! content-addressed so that replaying a session's decisions can be checked
//! hash for hash.
//!
//! ```text
//! Loaded -> FullKG -> Prioritized -> Clustered -> Pruned -> CoverageAnalyzed
//!                                        ^                   |   |      |
//!                                        |   PragmaticApplied <-+   |   +-> Finalized
//!                                        +------ Restarted <---------+
//! ```

pub mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{validate_catalog, Catalog, Id, KviCategory, ValidationReport};
use crate::kgraph::{build_full_kg, diff_catalog, KgError, KnowledgeGraph};
use crate::kvimap::{
    coverage, kv_satisfied, pragmatic_candidates, reintroduce, top_candidate_per_gap,
    CoverageReport, KviError, PragmaticCandidate,
};
use crate::pruner::{
    cluster_enablers, prioritize, prune_by_kpi, repair_dependencies, select_in_clusters, Cluster,
    ClusterPolicy, ConfigOverrides, DependencyPolicy, DependencyViolation, PruneConfig,
    PruneOutcome, Reason,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StageKind {
    Loaded,
    FullKG,
    Prioritized,
    Clustered,
    Pruned,
    CoverageAnalyzed,
    PragmaticApplied,
    Restarted,
    Finalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionStatus {
    InProgress,
    Finalized,
    Exhausted,
}

/// A step requested by the designer (or the batch driver).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Decision {
    /// At `FullKG`.
    Prioritize {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trl_min: Option<u8>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        keep_migration_critical: Option<bool>,
    },
    /// At `Prioritized`.
    Cluster {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        policy: Option<ClusterPolicy>,
    },
    /// At `Clustered` or `Restarted`.
    Prune {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kpi_score_min: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        carry_over_ids: Option<BTreeSet<Id>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dependency_policy: Option<DependencyPolicy>,
    },
    /// At `Pruned` or `PragmaticApplied`.
    Analyze,
    /// At `CoverageAnalyzed` with gaps, fewer than M pragmatic rounds done.
    AcceptCandidates { ids: BTreeSet<Id> },
    /// At `CoverageAnalyzed` with gaps, once the pragmatic budget is spent or
    /// no candidate is left.
    Restart,
    /// At `CoverageAnalyzed` without gaps.
    Finalize,
}

impl Decision {
    pub fn name(&self) -> &'static str {
        match self {
            Decision::Prioritize { .. } => "Prioritize",
            Decision::Cluster { .. } => "Cluster",
            Decision::Prune { .. } => "Prune",
            Decision::Analyze => "Analyze",
            Decision::AcceptCandidates { .. } => "AcceptCandidates",
            Decision::Restart => "Restart",
            Decision::Finalize => "Finalize",
        }
    }

    pub fn prioritize() -> Self {
        Decision::Prioritize {
            trl_min: None,
            keep_migration_critical: None,
        }
    }

    pub fn cluster() -> Self {
        Decision::Cluster { policy: None }
    }

    pub fn prune() -> Self {
        Decision::Prune {
            kpi_score_min: None,
            carry_over_ids: None,
            dependency_policy: None,
        }
    }
}

/// What caused a stage to be appended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "trigger", rename_all = "snake_case")]
pub enum Trigger {
    Start,
    Decision { decision: Decision },
    Refresh { catalog_version: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub nodes: usize,
    pub edges: usize,
    pub retained: usize,
    pub removed: usize,
    pub trl_min: u8,
    pub kpi_score_min: i64,
    pub pragmatic_iteration: u32,
    pub restart_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<BTreeSet<KviCategory>>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub accepted: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub seq: usize,
    pub kind: StageKind,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub trigger: Trigger,
    /// Content hash of the stage [`Snapshot`]; absent for `Loaded`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
    pub summary: StageSummary,
}

/// Immutable state captured at a stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub graph: KnowledgeGraph,
    pub removed_ids: BTreeSet<Id>,
    pub reasons: BTreeMap<Id, Reason>,
    pub dependency_violations: Vec<DependencyViolation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageReport>,
}

impl Snapshot {
    pub fn of(outcome: &PruneOutcome, coverage: Option<CoverageReport>) -> Self {
        Snapshot {
            graph: outcome.graph.clone(),
            removed_ids: outcome.removed_ids.clone(),
            reasons: outcome.reasons.clone(),
            dependency_violations: outcome.dependency_violations.clone(),
            coverage,
        }
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    pub fn content_hash(&self) -> String {
        crate::hash::sha256_hex(self.to_canonical_json().as_bytes())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("catalog failed validation with {} violation(s)", .0.violations.len())]
    InvalidCatalog(ValidationReport),
    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("decision {decision} is illegal at stage {stage:?}: {detail}")]
    IllegalTransition {
        stage: StageKind,
        decision: String,
        detail: String,
    },
    #[error("session is closed ({0:?})")]
    SessionClosed(SessionStatus),
    #[error(transparent)]
    Kvi(#[from] KviError),
    #[error("replay diverged at stage {seq}: {detail}")]
    ReplayMismatch { seq: usize, detail: String },
    #[error("session log: {0}")]
    Log(String),
}

impl PipelineError {
    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::InvalidCatalog(_) => "InvalidCatalog",
            PipelineError::InvalidConfig(_) => "InvalidConfig",
            PipelineError::IllegalTransition { .. } => "IllegalTransition",
            PipelineError::SessionClosed(_) => "SessionClosed",
            PipelineError::Kvi(e) => e.code(),
            PipelineError::ReplayMismatch { .. } => "ReplayMismatch",
            PipelineError::Log(_) => "SessionLogError",
        }
    }
}

impl From<KgError> for PipelineError {
    fn from(e: KgError) -> Self {
        match e {
            KgError::Integrity(r) => PipelineError::InvalidCatalog(r),
            KgError::UnknownNode(id) => PipelineError::Log(format!("unknown node '{id}'")),
        }
    }
}

/// Derived working state; always reproducible from the stage history.
#[derive(Debug, Clone)]
struct WorkState {
    full: Arc<KnowledgeGraph>,
    /// Outcome after prioritization and cluster selection, spanning the full
    /// graph. KPI pruning restarts from here.
    clustered: PruneOutcome,
    /// Latest outcome, spanning the full graph.
    current: PruneOutcome,
    coverage: Option<CoverageReport>,
    candidates: Vec<PragmaticCandidate>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub catalog_version: String,
    /// Effective config; decisions may override the initial one.
    pub config: PruneConfig,
    pub stages: Vec<StageRecord>,
    pub pragmatic_iteration: u32,
    pub restart_index: usize,
    pub status: SessionStatus,
    /// Set when the threshold schedule ran out without satisfying the KVs.
    pub exhausted_at_ms: Option<u64>,
    initial_config: PruneConfig,
    initial_catalog_version: String,
    created_ms: u64,
    catalogs: BTreeMap<String, Arc<Catalog>>,
    snapshots: BTreeMap<String, Arc<Snapshot>>,
    state: WorkState,
}

pub(crate) fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Session {
    /// Starts a session: appends `Loaded` and `FullKG`.
    pub fn new(
        id: impl Into<String>,
        catalog: Arc<Catalog>,
        config: PruneConfig,
    ) -> Result<Self, PipelineError> {
        Self::new_at(id.into(), catalog, config, now_ms())
    }

    fn new_at(
        id: String,
        catalog: Arc<Catalog>,
        config: PruneConfig,
        ts: u64,
    ) -> Result<Self, PipelineError> {
        let problems = config.validate();
        if !problems.is_empty() {
            return Err(PipelineError::InvalidConfig(problems));
        }
        let full = Arc::new(build_full_kg(&catalog)?);
        let version = full.provenance.clone();
        let current = PruneOutcome::unpruned(&full);
        let mut s = Session {
            id,
            catalog_version: version.clone(),
            config: config.clone(),
            stages: Vec::new(),
            pragmatic_iteration: 0,
            restart_index: 0,
            status: SessionStatus::InProgress,
            exhausted_at_ms: None,
            initial_config: config,
            initial_catalog_version: version.clone(),
            created_ms: ts,
            catalogs: [(version, catalog)].into(),
            snapshots: BTreeMap::new(),
            state: WorkState {
                full,
                clustered: current.clone(),
                current,
                coverage: None,
                candidates: Vec::new(),
            },
        };
        s.push(StageKind::Loaded, Trigger::Start, None, ts, None, BTreeSet::new());
        let snap = Snapshot::of(&s.state.current, None);
        s.push(StageKind::FullKG, Trigger::Start, Some(snap), ts, None, BTreeSet::new());
        Ok(s)
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalogs[&self.catalog_version]
    }

    pub fn catalogs(&self) -> impl Iterator<Item = (&String, &Arc<Catalog>)> {
        self.catalogs.iter()
    }

    pub fn initial_config(&self) -> &PruneConfig {
        &self.initial_config
    }

    pub fn created_ms(&self) -> u64 {
        self.created_ms
    }

    pub fn full_graph(&self) -> &KnowledgeGraph {
        &self.state.full
    }

    /// Latest outcome, spanning every enabler of the full graph.
    pub fn current_outcome(&self) -> &PruneOutcome {
        &self.state.current
    }

    /// Latest coverage analysis, if any has been run.
    pub fn last_coverage(&self) -> Option<&CoverageReport> {
        self.state.coverage.as_ref()
    }

    /// Coverage of the current outcome, computed on demand.
    pub fn current_coverage(&self) -> CoverageReport {
        let c = self.catalog();
        let clusters = cluster_enablers(&self.state.current.graph, c);
        coverage(&self.state.current, &clusters, c, &self.config)
    }

    pub fn current_clusters(&self) -> Vec<Cluster> {
        cluster_enablers(&self.state.current.graph, self.catalog())
    }

    /// Candidates of the latest coverage analysis.
    pub fn candidates(&self) -> &[PragmaticCandidate] {
        &self.state.candidates
    }

    pub fn current_stage(&self) -> StageKind {
        self.stages.last().expect("sessions start with two stages").kind
    }

    pub fn snapshot(&self, hash: &str) -> Option<&Arc<Snapshot>> {
        self.snapshots.get(hash)
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (&String, &Arc<Snapshot>)> {
        self.snapshots.iter()
    }

    /// Snapshot of stage `seq`, or of the latest stage that has one.
    pub fn stage_snapshot(&self, seq: Option<usize>) -> Option<&Arc<Snapshot>> {
        let record = match seq {
            Some(i) => self.stages.get(i)?,
            None => self.stages.iter().rev().find(|r| r.snapshot.is_some())?,
        };
        self.snapshots.get(record.snapshot.as_ref()?)
    }

    fn push(
        &mut self,
        kind: StageKind,
        trigger: Trigger,
        snapshot: Option<Snapshot>,
        ts: u64,
        clusters: Option<usize>,
        accepted: BTreeSet<Id>,
    ) {
        let gaps = snapshot
            .as_ref()
            .and_then(|s| s.coverage.as_ref())
            .map(|c| c.gaps.clone());
        let hash = snapshot.map(|snap| {
            let h = snap.content_hash();
            self.snapshots.entry(h.clone()).or_insert_with(|| Arc::new(snap));
            h
        });
        let cur = &self.state.current;
        let summary = StageSummary {
            nodes: cur.graph.nodes.len(),
            edges: cur.graph.edges.len(),
            retained: cur.retained_ids.len(),
            removed: cur.removed_ids.len(),
            trl_min: self.config.trl_min,
            kpi_score_min: self.config.kpi_score_min,
            pragmatic_iteration: self.pragmatic_iteration,
            restart_index: self.restart_index,
            clusters,
            gaps,
            accepted,
        };
        self.stages.push(StageRecord {
            seq: self.stages.len(),
            kind,
            timestamp_ms: ts,
            trigger,
            snapshot: hash,
            summary,
        });
    }

    /// The decision the batch driver takes at the current stage.
    pub fn next_auto_decision(&self) -> Option<Decision> {
        if self.status != SessionStatus::InProgress {
            return None;
        }
        Some(match self.current_stage() {
            StageKind::Loaded | StageKind::FullKG => Decision::prioritize(),
            StageKind::Prioritized => Decision::cluster(),
            StageKind::Clustered | StageKind::Restarted => Decision::prune(),
            StageKind::Pruned | StageKind::PragmaticApplied => Decision::Analyze,
            StageKind::CoverageAnalyzed => {
                let report = self.state.coverage.as_ref().expect("analysis recorded");
                if kv_satisfied(report) {
                    Decision::Finalize
                } else if self.pragmatic_iteration < self.config.max_pragmatic_iterations
                    && !self.state.candidates.is_empty()
                {
                    Decision::AcceptCandidates {
                        ids: top_candidate_per_gap(&self.state.candidates, report),
                    }
                } else {
                    Decision::Restart
                }
            }
            StageKind::Finalized => return None,
        })
    }

    /// Applies one decision. On error the session is left untouched.
    pub fn advance(&mut self, decision: Decision) -> Result<(), PipelineError> {
        self.advance_at(decision, now_ms())
    }

    fn advance_at(&mut self, decision: Decision, ts: u64) -> Result<(), PipelineError> {
        if self.status != SessionStatus::InProgress {
            return Err(PipelineError::SessionClosed(self.status));
        }
        let stage = self.current_stage();
        let illegal = |detail: &str| PipelineError::IllegalTransition {
            stage,
            decision: decision.name().to_owned(),
            detail: detail.to_owned(),
        };
        let catalog = Arc::clone(self.catalog());
        let full = Arc::clone(&self.state.full);
        let trigger = Trigger::Decision {
            decision: decision.clone(),
        };

        match (&decision, stage) {
            (
                Decision::Prioritize {
                    trl_min,
                    keep_migration_critical,
                },
                StageKind::FullKG,
            ) => {
                let cfg = ConfigOverrides {
                    trl_min: *trl_min,
                    keep_migration_critical: *keep_migration_critical,
                    ..Default::default()
                }
                .apply(&self.config);
                check_config(&cfg)?;
                let outcome = prioritize(&full, &cfg);
                self.config = cfg;
                self.state.clustered = outcome.clone();
                self.state.current = outcome;
                let snap = Snapshot::of(&self.state.current, None);
                self.push(StageKind::Prioritized, trigger, Some(snap), ts, None, BTreeSet::new());
            }
            (Decision::Cluster { policy }, StageKind::Prioritized) => {
                let mut cfg = self.config.clone();
                if let Some(p) = policy {
                    cfg.cluster_policy = *p;
                }
                let prioritized = self.state.current.clone();
                let (clustered, n) = cluster_step(&prioritized, &catalog, cfg.cluster_policy);
                self.config = cfg;
                self.state.clustered = clustered.clone();
                self.state.current = clustered;
                let snap = Snapshot::of(&self.state.current, None);
                self.push(StageKind::Clustered, trigger, Some(snap), ts, Some(n), BTreeSet::new());
            }
            (
                Decision::Prune {
                    kpi_score_min,
                    carry_over_ids,
                    dependency_policy,
                },
                StageKind::Clustered | StageKind::Restarted,
            ) => {
                let cfg = ConfigOverrides {
                    kpi_score_min: *kpi_score_min,
                    carry_over_ids: carry_over_ids.clone(),
                    dependency_policy: *dependency_policy,
                    ..Default::default()
                }
                .apply(&self.config);
                let pruned = prune_step(&self.state.clustered, &full, &cfg);
                self.config = cfg;
                self.state.current = pruned;
                let snap = Snapshot::of(&self.state.current, None);
                self.push(StageKind::Pruned, trigger, Some(snap), ts, None, BTreeSet::new());
            }
            (Decision::Analyze, StageKind::Pruned | StageKind::PragmaticApplied) => {
                let clusters = cluster_enablers(&self.state.current.graph, &catalog);
                let report = coverage(&self.state.current, &clusters, &catalog, &self.config);
                let candidates = if kv_satisfied(&report) {
                    Vec::new()
                } else {
                    pragmatic_candidates(&full, &self.state.current, &report, &catalog)?
                };
                self.state.candidates = candidates;
                self.state.coverage = Some(report.clone());
                let snap = Snapshot::of(&self.state.current, Some(report));
                self.push(
                    StageKind::CoverageAnalyzed,
                    trigger,
                    Some(snap),
                    ts,
                    Some(clusters.len()),
                    BTreeSet::new(),
                );
            }
            (Decision::AcceptCandidates { ids }, StageKind::CoverageAnalyzed) => {
                let report = self.state.coverage.as_ref().expect("analysis recorded");
                if kv_satisfied(report) {
                    return Err(illegal("coverage has no gaps"));
                }
                if self.pragmatic_iteration >= self.config.max_pragmatic_iterations {
                    return Err(illegal(&format!(
                        "pragmatic iteration budget of {} is spent",
                        self.config.max_pragmatic_iterations
                    )));
                }
                let readmitted = reintroduce(&self.state.current, &full, ids)?;
                let repaired =
                    repair_dependencies(&readmitted, &full, self.config.dependency_policy);
                self.state.current = repaired;
                self.pragmatic_iteration += 1;
                let snap = Snapshot::of(&self.state.current, None);
                self.push(StageKind::PragmaticApplied, trigger, Some(snap), ts, None, ids.clone());
            }
            (Decision::Restart, StageKind::CoverageAnalyzed) => {
                let report = self.state.coverage.as_ref().expect("analysis recorded");
                if kv_satisfied(report) {
                    return Err(illegal("coverage has no gaps"));
                }
                if self.pragmatic_iteration < self.config.max_pragmatic_iterations
                    && !self.state.candidates.is_empty()
                {
                    return Err(illegal(&format!(
                        "{} of {} pragmatic iterations used and candidates remain",
                        self.pragmatic_iteration, self.config.max_pragmatic_iterations
                    )));
                }
                let Some(entry) = self.config.threshold_schedule.get(self.restart_index).copied()
                else {
                    self.status = SessionStatus::Exhausted;
                    self.exhausted_at_ms = Some(ts);
                    return Ok(());
                };
                let mut cfg = self.config.clone();
                cfg.trl_min = entry.trl_min;
                cfg.kpi_score_min = entry.kpi_score_min;
                let prioritized = prioritize(&full, &cfg);
                let (clustered, n) = cluster_step(&prioritized, &catalog, cfg.cluster_policy);
                self.config = cfg;
                self.restart_index += 1;
                self.pragmatic_iteration = 0;
                self.state.clustered = clustered.clone();
                self.state.current = clustered;
                self.state.coverage = None;
                self.state.candidates = Vec::new();
                let snap = Snapshot::of(&self.state.current, None);
                self.push(StageKind::Restarted, trigger, Some(snap), ts, Some(n), BTreeSet::new());
            }
            (Decision::Finalize, StageKind::CoverageAnalyzed) => {
                let report = self.state.coverage.clone().expect("analysis recorded");
                if !kv_satisfied(&report) {
                    return Err(illegal("coverage gaps remain"));
                }
                self.status = SessionStatus::Finalized;
                let snap = Snapshot::of(&self.state.current, Some(report));
                self.push(StageKind::Finalized, trigger, Some(snap), ts, None, BTreeSet::new());
            }
            _ => return Err(illegal("not accepted at this stage")),
        }
        Ok(())
    }

    /// Rebuilds from a changed catalog. A no-op when the catalog yields the
    /// same graph; otherwise a new `FullKG` stage starts a fresh sequence
    /// with the current config (carry-over ids included).
    pub fn refresh(&mut self, catalog: Arc<Catalog>) -> Result<bool, PipelineError> {
        self.refresh_at(catalog, now_ms())
    }

    fn refresh_at(&mut self, catalog: Arc<Catalog>, ts: u64) -> Result<bool, PipelineError> {
        if self.status != SessionStatus::InProgress {
            return Err(PipelineError::SessionClosed(self.status));
        }
        let report = validate_catalog(&catalog);
        if !report.is_valid() {
            return Err(PipelineError::InvalidCatalog(report));
        }
        if diff_catalog(&self.state.full, &catalog).is_empty() {
            return Ok(false);
        }
        let full = Arc::new(build_full_kg(&catalog)?);
        let version = full.provenance.clone();
        let current = PruneOutcome::unpruned(&full);
        self.catalogs.insert(version.clone(), catalog);
        self.catalog_version = version.clone();
        self.pragmatic_iteration = 0;
        self.restart_index = 0;
        self.state = WorkState {
            full,
            clustered: current.clone(),
            current,
            coverage: None,
            candidates: Vec::new(),
        };
        let snap = Snapshot::of(&self.state.current, None);
        self.push(
            StageKind::FullKG,
            Trigger::Refresh {
                catalog_version: version,
            },
            Some(snap),
            ts,
            None,
            BTreeSet::new(),
        );
        Ok(true)
    }

    /// Drives the session with [`Session::next_auto_decision`] until it is
    /// finalized or exhausted.
    pub fn run_to_completion(&mut self) -> Result<(), PipelineError> {
        while let Some(d) = self.next_auto_decision() {
            self.advance(d)?;
        }
        Ok(())
    }

    /// Re-applies a recorded history to a new session and checks that every
    /// snapshot hash matches.
    pub fn replay(
        header: &store::SessionHeader,
        entries: &[store::LogEntry],
        catalogs: &BTreeMap<String, Arc<Catalog>>,
    ) -> Result<Session, PipelineError> {
        let first = catalogs
            .get(&header.catalog_version)
            .ok_or_else(|| PipelineError::Log(format!("missing catalog {}", header.catalog_version)))?;
        let mut s = Session::new_at(
            header.session_id.clone(),
            Arc::clone(first),
            header.config.clone(),
            header.created_ms,
        )?;
        let mut next_seq = s.stages.len();
        for entry in entries {
            match entry {
                store::LogEntry::Header(_) => {
                    return Err(PipelineError::Log("duplicate header".into()));
                }
                store::LogEntry::Stage(rec) if rec.trigger == Trigger::Start => {
                    let ours = s.stages.get(rec.seq).ok_or_else(|| PipelineError::ReplayMismatch {
                        seq: rec.seq,
                        detail: "unexpected start stage".into(),
                    })?;
                    if ours.snapshot != rec.snapshot || ours.kind != rec.kind {
                        return Err(PipelineError::ReplayMismatch {
                            seq: rec.seq,
                            detail: "initial graph differs".into(),
                        });
                    }
                }
                store::LogEntry::Stage(rec) => {
                    if rec.seq != next_seq {
                        return Err(PipelineError::ReplayMismatch {
                            seq: rec.seq,
                            detail: format!("expected stage {next_seq}"),
                        });
                    }
                    match &rec.trigger {
                        Trigger::Decision { decision } => {
                            s.advance_at(decision.clone(), rec.timestamp_ms)?
                        }
                        Trigger::Refresh { catalog_version } => {
                            let c = catalogs.get(catalog_version).ok_or_else(|| {
                                PipelineError::Log(format!("missing catalog {catalog_version}"))
                            })?;
                            s.refresh_at(Arc::clone(c), rec.timestamp_ms)?;
                        }
                        Trigger::Start => unreachable!(),
                    }
                    let ours = s.stages.last().expect("stage appended");
                    if ours.kind != rec.kind || ours.snapshot != rec.snapshot || ours.seq != rec.seq {
                        return Err(PipelineError::ReplayMismatch {
                            seq: rec.seq,
                            detail: format!(
                                "expected {:?} {:?}, replayed {:?} {:?}",
                                rec.kind, rec.snapshot, ours.kind, ours.snapshot
                            ),
                        });
                    }
                    next_seq += 1;
                }
                store::LogEntry::Exhausted { timestamp_ms } => {
                    s.advance_at(Decision::Restart, *timestamp_ms)?;
                    if s.status != SessionStatus::Exhausted {
                        return Err(PipelineError::ReplayMismatch {
                            seq: next_seq,
                            detail: "expected schedule exhaustion".into(),
                        });
                    }
                }
            }
        }
        Ok(s)
    }

    /// Header and entries of the append-only session log.
    pub fn log(&self) -> (store::SessionHeader, Vec<store::LogEntry>) {
        let header = store::SessionHeader {
            format_version: store::LOG_FORMAT_VERSION,
            session_id: self.id.clone(),
            catalog_version: self.initial_catalog_version.clone(),
            config: self.initial_config.clone(),
            created_ms: self.created_ms,
        };
        let mut entries: Vec<store::LogEntry> =
            self.stages.iter().cloned().map(store::LogEntry::Stage).collect();
        if let Some(ts) = self.exhausted_at_ms {
            entries.push(store::LogEntry::Exhausted { timestamp_ms: ts });
        }
        (header, entries)
    }
}

fn check_config(cfg: &PruneConfig) -> Result<(), PipelineError> {
    let problems = cfg.validate();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::InvalidConfig(problems))
    }
}

fn cluster_step(
    prioritized: &PruneOutcome,
    catalog: &Catalog,
    policy: ClusterPolicy,
) -> (PruneOutcome, usize) {
    let clusters = cluster_enablers(&prioritized.graph, catalog);
    let selected = select_in_clusters(&clusters, &prioritized.graph, policy);
    (prioritized.then(&selected), clusters.len())
}

fn prune_step(clustered: &PruneOutcome, full: &KnowledgeGraph, cfg: &PruneConfig) -> PruneOutcome {
    let pruned = clustered.then(&prune_by_kpi(&clustered.graph, cfg));
    repair_dependencies(&pruned, full, cfg.dependency_policy)
}

/// Prioritize, cluster, prune and repair in one go, without a session.
/// Used for what-if exploration and the `prune` command.
pub fn evaluate(full: &KnowledgeGraph, catalog: &Catalog, cfg: &PruneConfig) -> PruneOutcome {
    let (clustered, _) = cluster_step(&prioritize(full, cfg), catalog, cfg.cluster_policy);
    prune_step(&clustered, full, cfg)
}

/// Deterministic id for batch sessions: equal inputs give equal ids.
pub fn batch_session_id(c: &Catalog, cfg: &PruneConfig) -> String {
    let cfg_json = serde_json::to_string(cfg).expect("config serializes");
    let h = crate::hash::sha256_hex(format!("{}\n{cfg_json}", c.fingerprint()).as_bytes());
    format!("batch-{}", &h[..16])
}

/// Runs the whole selection flow without human input.
pub fn run_batch(c: &Catalog, cfg: &PruneConfig) -> Result<Session, PipelineError> {
    let report = validate_catalog(c);
    if !report.is_valid() {
        return Err(PipelineError::InvalidCatalog(report));
    }
    let mut s = Session::new(batch_session_id(c, cfg), Arc::new(c.clone()), cfg.clone())?;
    s.run_to_completion()?;
    Ok(s)
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
