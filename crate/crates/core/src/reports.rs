//! Serialization of graphs, histograms, coverage reports and sessions.
//!
//! All output is byte-deterministic: nodes are ordered by id and edges by
//! (endpoints, kind).

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kgraph::{KnowledgeGraph, NodeKind};
use crate::kvimap::CoverageReport;
use crate::pipeline::{store, Session, Snapshot};
use crate::scoring::{kpi_histogram, Histogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    GraphJson,
    Dot,
    #[serde(rename = "graphml")]
    GraphML,
    HistogramCsv,
    CoverageJson,
    SelectionCsv,
    SessionLog,
    MarkdownSummary,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 8] = [
        ExportFormat::GraphJson,
        ExportFormat::Dot,
        ExportFormat::GraphML,
        ExportFormat::HistogramCsv,
        ExportFormat::CoverageJson,
        ExportFormat::SelectionCsv,
        ExportFormat::SessionLog,
        ExportFormat::MarkdownSummary,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::GraphJson => "graph-json",
            ExportFormat::Dot => "dot",
            ExportFormat::GraphML => "graphml",
            ExportFormat::HistogramCsv => "histogram-csv",
            ExportFormat::CoverageJson => "coverage-json",
            ExportFormat::SelectionCsv => "selection-csv",
            ExportFormat::SessionLog => "session-log",
            ExportFormat::MarkdownSummary => "markdown-summary",
        }
    }

    pub fn media_type(self) -> &'static str {
        match self {
            ExportFormat::GraphJson | ExportFormat::CoverageJson => "application/json",
            ExportFormat::Dot => "text/vnd.graphviz",
            ExportFormat::GraphML => "application/graphml+xml",
            ExportFormat::HistogramCsv | ExportFormat::SelectionCsv => "text/csv",
            ExportFormat::SessionLog => "application/jsonl",
            ExportFormat::MarkdownSummary => "text/markdown",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        let alias = match norm.as_str() {
            "json" | "graphjson" => "graph-json",
            "markdown" | "md" => "markdown-summary",
            "jsonl" | "log" => "session-log",
            "selection" | "csv" => "selection-csv",
            "histogram" => "histogram-csv",
            "coverage" => "coverage-json",
            other => other,
        };
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == alias)
            .ok_or_else(|| {
                let names: Vec<&str> = ExportFormat::ALL.iter().map(|f| f.as_str()).collect();
                format!("unknown format '{s}' (expected one of {})", names.join(", "))
            })
    }
}

pub enum ExportTarget<'a> {
    Graph(&'a KnowledgeGraph),
    Histogram(&'a Histogram),
    Coverage(&'a CoverageReport),
    Session(&'a Session),
}

impl ExportTarget<'_> {
    fn kind(&self) -> &'static str {
        match self {
            ExportTarget::Graph(_) => "graph",
            ExportTarget::Histogram(_) => "histogram",
            ExportTarget::Coverage(_) => "coverage",
            ExportTarget::Session(_) => "session",
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("format {format} cannot render a {target}")]
    IncompatibleFormat { format: ExportFormat, target: String },
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::IncompatibleFormat { .. } => "IncompatibleFormat",
            ReportError::Syntax { .. } => "SyntaxError",
            ReportError::Schema(_) => "SchemaError",
        }
    }
}

pub fn export(target: ExportTarget<'_>, fmt: ExportFormat) -> Result<String, ReportError> {
    let incompatible = |t: &ExportTarget<'_>| ReportError::IncompatibleFormat {
        format: fmt,
        target: t.kind().to_owned(),
    };
    match (&target, fmt) {
        (ExportTarget::Graph(g), ExportFormat::GraphJson) => Ok(graph_json(g)),
        (ExportTarget::Graph(g), ExportFormat::Dot) => Ok(dot(g)),
        (ExportTarget::Graph(g), ExportFormat::GraphML) => Ok(graphml(g)),
        (ExportTarget::Graph(g), ExportFormat::HistogramCsv) => Ok(histogram_csv(&kpi_histogram(g))),
        (ExportTarget::Histogram(h), ExportFormat::HistogramCsv) => Ok(histogram_csv(h)),
        (ExportTarget::Coverage(c), ExportFormat::CoverageJson) => Ok(coverage_json(c)),
        (ExportTarget::Session(s), f) => {
            let snap = s.stage_snapshot(None).expect("sessions hold a full graph");
            match f {
                ExportFormat::GraphJson => Ok(graph_json(&snap.graph)),
                ExportFormat::Dot => Ok(dot(&snap.graph)),
                ExportFormat::GraphML => Ok(graphml(&snap.graph)),
                ExportFormat::HistogramCsv => Ok(histogram_csv(&kpi_histogram(&snap.graph))),
                ExportFormat::CoverageJson => Ok(coverage_json(&s.current_coverage())),
                ExportFormat::SelectionCsv => Ok(selection_csv(snap)),
                ExportFormat::SessionLog => Ok(store::to_jsonl(s)),
                ExportFormat::MarkdownSummary => Ok(markdown_summary(s)),
            }
        }
        _ => Err(incompatible(&target)),
    }
}

pub fn graph_json(g: &KnowledgeGraph) -> String {
    let mut s = serde_json::to_string_pretty(g).expect("graph serializes");
    s.push('\n');
    s
}

/// Parses a graph produced by the GraphJson export.
pub fn import_graph(bytes: &[u8]) -> Result<KnowledgeGraph, ReportError> {
    serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => ReportError::Schema(e.to_string()),
        _ => ReportError::Syntax {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        },
    })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn dot(g: &KnowledgeGraph) -> String {
    let mut out = String::from("graph kg {\n  node [style=filled];\n");
    for (id, n) in &g.nodes {
        let shape = match n.kind {
            NodeKind::Enabler => "ellipse",
            NodeKind::Principle => "box",
        };
        let _ = write!(
            out,
            "  \"{}\" [label=\"{}\", shape={shape}, color=\"{c}\", fillcolor=\"{c}\", weight={}, kpi_score={}",
            dot_escape(id.as_str()),
            dot_escape(&n.name),
            n.features.node_weight,
            n.features.kpi_score,
            c = n.color(),
        );
        if let Some(trl) = n.features.trl {
            let _ = write!(out, ", trl={trl}");
        }
        out.push_str("];\n");
    }
    for e in &g.edges {
        let (a, b) = e.endpoints();
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [kind={}, weight={}, color=\"{}\"];",
            dot_escape(a.as_str()),
            dot_escape(b.as_str()),
            e.kind.as_str(),
            e.weight(),
            e.kind.color()
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn graphml(g: &KnowledgeGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n\
         \x20 <key id=\"kind\" for=\"all\" attr.name=\"kind\" attr.type=\"string\"/>\n\
         \x20 <key id=\"color\" for=\"all\" attr.name=\"color\" attr.type=\"string\"/>\n\
         \x20 <key id=\"weight\" for=\"all\" attr.name=\"weight\" attr.type=\"int\"/>\n\
         \x20 <key id=\"trl\" for=\"node\" attr.name=\"trl\" attr.type=\"int\"/>\n\
         \x20 <key id=\"kpi_score\" for=\"node\" attr.name=\"kpi_score\" attr.type=\"int\"/>\n\
         \x20 <graph id=\"kg\" edgedefault=\"undirected\">\n",
    );
    for (id, n) in &g.nodes {
        let kind = match n.kind {
            NodeKind::Enabler => "enabler",
            NodeKind::Principle => "principle",
        };
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(id.as_str()));
        let _ = writeln!(out, "      <data key=\"name\">{}</data>", xml_escape(&n.name));
        let _ = writeln!(out, "      <data key=\"kind\">{kind}</data>");
        let _ = writeln!(out, "      <data key=\"color\">{}</data>", n.color());
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", n.features.node_weight);
        if let Some(trl) = n.features.trl {
            let _ = writeln!(out, "      <data key=\"trl\">{trl}</data>");
        }
        let _ = writeln!(out, "      <data key=\"kpi_score\">{}</data>", n.features.kpi_score);
        out.push_str("    </node>\n");
    }
    for e in &g.edges {
        let (a, b) = e.endpoints();
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\">",
            xml_escape(a.as_str()),
            xml_escape(b.as_str())
        );
        let _ = writeln!(out, "      <data key=\"kind\">{}</data>", e.kind.as_str());
        let _ = writeln!(out, "      <data key=\"color\">{}</data>", e.kind.color());
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", e.weight());
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["score", "count"]).expect("in-memory write");
    for (score, count) in &h.buckets {
        w.write_record([score.to_string(), count.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn coverage_json(c: &CoverageReport) -> String {
    let mut s = serde_json::to_string_pretty(c).expect("coverage serializes");
    s.push('\n');
    s
}

/// One row per retained enabler: id, name, category, trl, kpi_score, reason.
pub fn selection_csv(snap: &Snapshot) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "name", "category", "trl", "kpi_score", "reason"])
        .expect("in-memory write");
    for (id, n) in snap.graph.nodes.iter().filter(|(_, n)| n.kind == NodeKind::Enabler) {
        let reason = snap
            .reasons
            .get(id)
            .map(|r| r.to_string())
            .unwrap_or_else(|| "unpruned".to_owned());
        w.write_record([
            id.as_str(),
            &n.name,
            n.category.as_deref().unwrap_or(""),
            &n.features.trl.map(|t| t.to_string()).unwrap_or_default(),
            &n.features.kpi_score.to_string(),
            &reason,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn markdown_summary(s: &Session) -> String {
    let c = s.catalog();
    let snap = s.stage_snapshot(None).expect("sessions hold a full graph");
    let retained = snap.graph.enabler_count();
    let mut out = String::new();
    let _ = writeln!(out, "# Enabler selection: {}\n", md_cell(&c.use_case_name));
    let _ = writeln!(out, "- Session: `{}`", s.id);
    let _ = writeln!(out, "- Catalog version: `{}`", s.catalog_version);
    let _ = writeln!(out, "- Status: {:?}", s.status);
    let _ = writeln!(
        out,
        "- Thresholds: TRL >= {}, KPI score >= {}",
        s.config.trl_min, s.config.kpi_score_min
    );
    let _ = writeln!(
        out,
        "- Retained: {retained} of {} enablers\n",
        s.full_graph().enabler_count()
    );

    out.push_str("## Stages\n\n| # | Stage | Retained | Removed | Gaps |\n|---|---|---|---|---|\n");
    for r in &s.stages {
        let gaps = r
            .summary
            .gaps
            .as_ref()
            .map(|g| {
                if g.is_empty() {
                    "none".to_owned()
                } else {
                    g.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
                }
            })
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.seq, r.kind, r.summary.retained, r.summary.removed, gaps
        );
    }
    if s.exhausted_at_ms.is_some() {
        out.push_str("\nThreshold schedule exhausted without satisfying every KVI category.\n");
    }

    let cov = s.current_coverage();
    out.push_str("\n## Coverage\n\n| KVI category | Clusters | Required |\n|---|---|---|\n");
    for (cat, n) in &cov.counts {
        let _ = writeln!(
            out,
            "| {} | {} | {} |",
            cat,
            n,
            cov.coverage_min.get(cat).copied().unwrap_or(1)
        );
    }

    out.push_str(
        "\n## Selection\n\n| Enabler | Category | TRL | KPI score | Reason |\n|---|---|---|---|---|\n",
    );
    for (id, n) in snap.graph.nodes.iter().filter(|(_, n)| n.kind == NodeKind::Enabler) {
        let reason = snap
            .reasons
            .get(id)
            .map(|r| r.to_string())
            .unwrap_or_else(|| "unpruned".to_owned());
        let _ = writeln!(
            out,
            "| {} (`{}`) | {} | {} | {} | {} |",
            md_cell(&n.name),
            id,
            md_cell(n.category.as_deref().unwrap_or("")),
            n.features.trl.map(|t| t.to_string()).unwrap_or_default(),
            n.features.kpi_score,
            reason
        );
    }
    out
}
