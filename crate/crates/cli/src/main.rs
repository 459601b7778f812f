use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgsel_core::catalog::{parse_catalog_path, validate_catalog, Catalog, CatalogError, Id};
use kgsel_core::kgraph::build_full_kg;
use kgsel_core::kvimap::{coverage, kv_satisfied, pragmatic_candidates};
use kgsel_core::pipeline::store::SessionDir;
use kgsel_core::pipeline::{evaluate, run_batch, PipelineError, Snapshot, Trigger};
use kgsel_core::pruner::{
    cluster_enablers, prioritize, ClusterPolicy, ConfigOverrides, DependencyPolicy, PruneConfig,
};
use kgsel_core::reports::{export, ExportFormat, ExportTarget};
use kgsel_core::scoring::kpi_histogram;
use kgsel_core::{KviCategory, SessionStatus};

mod table;
use table::Table;

#[derive(Parser)]
#[command(name = "kgsel", version, about = "Select 6G enablers with a knowledge graph")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a catalog (JSON file or CSV bundle directory) for integrity problems.
    Validate { catalog: PathBuf },
    /// Build the full knowledge graph.
    Build {
        catalog: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "graph-json")]
        fmt: ExportFormat,
    },
    /// Prioritize, cluster and prune once, without coverage analysis.
    Prune {
        catalog: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        /// Where to write the result (selection CSV unless --fmt says otherwise).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "selection-csv")]
        fmt: ExportFormat,
    },
    /// KPI histogram after prioritization, plus KVI coverage of the pruned selection.
    Analyze {
        catalog: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Run the whole pipeline without interaction.
    Run {
        catalog: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        /// Session directory to write; must not exist yet.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long, env = "KGSEL_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "KGSEL_DATA_DIR", default_value = "kgsel-data")]
        data_dir: PathBuf,
        /// Static files to serve for paths the API does not claim.
        #[arg(long, env = "KGSEL_UI_DIR")]
        ui_dir: Option<PathBuf>,
    },
    /// Render a stored session.
    Export {
        session: PathBuf,
        #[arg(long)]
        fmt: ExportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Knobs {
    /// JSON file with PruneConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trl_min: Option<u8>,
    #[arg(long, allow_hyphen_values = true)]
    kpi_min: Option<i64>,
    /// File listing enabler ids to keep regardless of KPI score, one per line.
    #[arg(long)]
    carry_over: Option<PathBuf>,
    #[arg(long)]
    dep_policy: Option<DepPolicy>,
    #[arg(long)]
    cluster_policy: Option<ClusterArg>,
    #[arg(long)]
    max_pragmatic: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepPolicy {
    Flag,
    ReaddClosure,
    DropDependents,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterArg {
    KeepAll,
    BestPerCluster,
}

/// Exit 1 for inputs that fail validation, 2 for everything the user must
/// fix in the invocation itself (bad paths, bad flag values, clobbering).
enum Failure {
    Invalid(String),
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<CatalogError> for Failure {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Io { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Log(m) => Failure::Usage(m),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Validate { catalog } => validate(&catalog, cli.json),
        Command::Build { catalog, output, fmt } => build(&catalog, output.as_deref(), fmt),
        Command::Prune {
            catalog,
            knobs,
            output,
            fmt,
        } => prune(&catalog, &knobs, output.as_deref(), fmt, cli.json),
        Command::Analyze { catalog, knobs } => analyze(&catalog, &knobs, cli.json),
        Command::Run {
            catalog,
            knobs,
            output,
        } => run(&catalog, &knobs, output.as_deref(), cli.json),
        Command::Serve {
            addr,
            data_dir,
            ui_dir,
        } => serve(addr, data_dir, ui_dir),
        Command::Export {
            session,
            fmt,
            output,
        } => export_session(&session, fmt, output.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) | Failure::Usage(m) => eprintln!("kgsel: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load(path: &Path) -> Result<Catalog, Failure> {
    let c = parse_catalog_path(path)?;
    let report = validate_catalog(&c);
    if !report.is_valid() {
        return Err(Failure::Invalid(format!(
            "{}: {} violations (run `kgsel validate` for details)",
            path.display(),
            report.violations.len()
        )));
    }
    Ok(c)
}

fn config(k: &Knobs) -> Result<PruneConfig, Failure> {
    let base = match &k.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => PruneConfig::default(),
    };
    let carry_over_ids = match &k.carry_over {
        Some(p) => Some(
            fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(Id::new)
                .collect(),
        ),
        None => None,
    };
    let cfg = ConfigOverrides {
        trl_min: k.trl_min,
        kpi_score_min: k.kpi_min,
        carry_over_ids,
        dependency_policy: k.dep_policy.map(|p| match p {
            DepPolicy::Flag => DependencyPolicy::Flag,
            DepPolicy::ReaddClosure => DependencyPolicy::ReaddClosure,
            DepPolicy::DropDependents => DependencyPolicy::DropDependents,
        }),
        cluster_policy: k.cluster_policy.map(|p| match p {
            ClusterArg::KeepAll => ClusterPolicy::KeepAll,
            ClusterArg::BestPerCluster => ClusterPolicy::BestPerCluster,
        }),
        max_pragmatic_iterations: k.max_pragmatic,
        ..Default::default()
    }
    .apply(&base);
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Failure::Usage(format!("invalid config: {}", problems.join("; "))));
    }
    Ok(cfg)
}

fn emit(output: Option<&Path>, body: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn json_line(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn validate(path: &Path, json: bool) -> Outcome {
    let c = parse_catalog_path(path)?;
    let report = validate_catalog(&c);
    if json {
        json_line(&report);
    } else {
        if !report.violations.is_empty() {
            let mut t = Table::new(["entity", "id", "field", "message"]);
            for v in &report.violations {
                t.row([format!("{:?}", v.entity), v.id.clone(), v.field.clone(), v.message.clone()]);
            }
            print!("{t}");
        }
        println!("{} violations", report.violations.len());
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!("{} is not a valid catalog", path.display())))
    }
}

fn build(path: &Path, output: Option<&Path>, fmt: ExportFormat) -> Outcome {
    let c = load(path)?;
    let g = build_full_kg(&c).map_err(PipelineError::from)?;
    let body = export(ExportTarget::Graph(&g), fmt).map_err(|e| Failure::Usage(e.to_string()))?;
    emit(output, &body)?;
    if output.is_some() {
        eprintln!("{} nodes, {} edges", g.nodes.len(), g.edges.len());
    }
    Ok(())
}

fn prune(path: &Path, knobs: &Knobs, output: Option<&Path>, fmt: ExportFormat, json: bool) -> Outcome {
    let c = load(path)?;
    let cfg = config(knobs)?;
    let g = build_full_kg(&c).map_err(PipelineError::from)?;
    let outcome = evaluate(&g, &c, &cfg);
    let snap = Snapshot::of(&outcome, None);
    if let Some(p) = output {
        let body = match fmt {
            ExportFormat::SelectionCsv => kgsel_core::reports::selection_csv(&snap),
            f => export(ExportTarget::Graph(&outcome.graph), f)
                .map_err(|e| Failure::Usage(e.to_string()))?,
        };
        emit(Some(p), &body)?;
    }
    if json {
        json_line(&outcome);
        return Ok(());
    }
    let mut reasons: BTreeMap<String, usize> = BTreeMap::new();
    for r in outcome.reasons.values() {
        *reasons.entry(r.to_string()).or_default() += 1;
    }
    let mut t = Table::new(["", "count"]);
    t.row(["retained".into(), outcome.retained_ids.len().to_string()]);
    t.row(["removed".into(), outcome.removed_ids.len().to_string()]);
    t.row([
        "dependency violations".into(),
        outcome.dependency_violations.len().to_string(),
    ]);
    for (r, n) in reasons {
        t.row([format!("  {r}"), n.to_string()]);
    }
    print!("{t}");
    Ok(())
}

fn analyze(path: &Path, knobs: &Knobs, json: bool) -> Outcome {
    let c = load(path)?;
    let cfg = config(knobs)?;
    let g = build_full_kg(&c).map_err(PipelineError::from)?;
    let hist = kpi_histogram(&prioritize(&g, &cfg).graph);
    let outcome = evaluate(&g, &c, &cfg);
    let clusters = cluster_enablers(&outcome.graph, &c);
    let report = coverage(&outcome, &clusters, &c, &cfg);
    let candidates = if kv_satisfied(&report) {
        Vec::new()
    } else {
        pragmatic_candidates(&g, &outcome, &report, &c).map_err(PipelineError::from)?
    };
    if json {
        json_line(&serde_json::json!({
            "histogram": hist,
            "clusters": clusters.len(),
            "retained": outcome.retained_ids.len(),
            "coverage": report,
            "candidates": candidates,
        }));
        return Ok(());
    }
    println!("KPI score histogram after prioritization");
    let mut t = Table::new(["score", "enablers"]);
    for (s, n) in &hist.buckets {
        t.row([s.to_string(), n.to_string()]);
    }
    print!("{t}");
    println!();
    println!(
        "{} retained in {} clusters; coverage per KVI category",
        outcome.retained_ids.len(),
        clusters.len()
    );
    let mut t = Table::new(["category", "clusters", "required", "gap"]);
    for k in KviCategory::ALL {
        let gap = report.gaps.contains(&k);
        t.row([
            k.as_str().to_owned(),
            report.counts.get(&k).copied().unwrap_or(0).to_string(),
            cfg.coverage_min_for(k).to_string(),
            if gap { "yes".into() } else { String::new() },
        ]);
    }
    print!("{t}");
    if !candidates.is_empty() {
        println!();
        println!("pragmatic candidates");
        let mut t = Table::new(["rank", "enabler", "kpi", "trl", "rationale"]);
        for p in &candidates {
            t.row([
                p.rank.to_string(),
                p.enabler_id.to_string(),
                p.kpi_score.to_string(),
                p.trl.to_string(),
                p.rationale.clone(),
            ]);
        }
        print!("{t}");
    }
    Ok(())
}

fn run(path: &Path, knobs: &Knobs, output: Option<&Path>, json: bool) -> Outcome {
    let c = load(path)?;
    let cfg = config(knobs)?;
    if let Some(dir) = output {
        if dir.exists() && fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(true) {
            return Err(Failure::Usage(format!("{} exists and is not empty", dir.display())));
        }
    }
    let s = run_batch(&c, &cfg)?;
    if let Some(dir) = output {
        SessionDir::create(dir, &s)?;
    }
    if json {
        json_line(&serde_json::json!({
            "session_id": s.id,
            "status": s.status,
            "retained": s.current_outcome().retained_ids.len(),
            "stages": s.stages,
        }));
    } else {
        let mut t = Table::new(["seq", "stage", "decision", "retained", "removed", "clusters", "gaps"]);
        for r in &s.stages {
            let decision = match &r.trigger {
                Trigger::Decision { decision } => decision.name().to_owned(),
                Trigger::Start => "start".into(),
                Trigger::Refresh { .. } => "refresh".into(),
            };
            let gaps = r.summary.gaps.as_ref().map(|g| {
                g.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",")
            });
            t.row([
                r.seq.to_string(),
                r.kind.to_string(),
                decision,
                r.summary.retained.to_string(),
                r.summary.removed.to_string(),
                r.summary.clusters.map(|n| n.to_string()).unwrap_or_default(),
                gaps.unwrap_or_default(),
            ]);
        }
        print!("{t}");
        println!(
            "{:?}: {} enablers selected",
            s.status,
            s.current_outcome().retained_ids.len()
        );
    }
    match s.status {
        SessionStatus::Exhausted => Err(Failure::Invalid(
            "threshold schedule exhausted before every KVI category was covered".into(),
        )),
        _ => Ok(()),
    }
}

fn serve(addr: SocketAddr, data_dir: PathBuf, ui_dir: Option<PathBuf>) -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
    rt.block_on(kgsel_server::serve(kgsel_server::ServerConfig {
        addr,
        data_dir,
        ui_dir,
    }))
    .map_err(Failure::Usage)
}

fn export_session(dir: &Path, fmt: ExportFormat, output: Option<&Path>) -> Outcome {
    let (_, s) = SessionDir::load(dir)?;
    let body = export(ExportTarget::Session(&s), fmt).map_err(|e| Failure::Usage(e.to_string()))?;
    emit(output, &body)
}
