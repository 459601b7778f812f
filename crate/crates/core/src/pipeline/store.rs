//! On-disk session layout:
//!
//! ```text
//! <dir>/session.jsonl            header line, then one line per stage
//! <dir>/catalogs/<version>.json  every catalog version the session used
//! <dir>/snapshots/<hash>.json    content-addressed stage snapshots
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{PipelineError, Session, StageRecord};
use crate::catalog::{load_catalog_json, Catalog};
use crate::pruner::PruneConfig;

pub const LOG_FORMAT_VERSION: u32 = 1;
pub const LOG_FILE: &str = "session.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub format_version: u32,
    pub session_id: String,
    pub catalog_version: String,
    pub config: PruneConfig,
    pub created_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogEntry {
    Header(SessionHeader),
    Stage(StageRecord),
    Exhausted { timestamp_ms: u64 },
}

impl LogEntry {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log entry serializes")
    }
}

/// Renders the full log as JSON lines.
pub fn to_jsonl(session: &Session) -> String {
    let (header, entries) = session.log();
    let mut out = LogEntry::Header(header).to_line();
    out.push('\n');
    for e in entries {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

/// Parses a log; the first line must be the header.
pub fn parse_jsonl(text: &str) -> Result<(SessionHeader, Vec<LogEntry>), PipelineError> {
    let mut header = None;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry = serde_json::from_str(line)
            .map_err(|e| PipelineError::Log(format!("line {}: {e}", i + 1)))?;
        match (entry, header.is_none()) {
            (LogEntry::Header(h), true) => header = Some(h),
            (_, true) => return Err(PipelineError::Log("log does not start with a header".into())),
            (e, false) => entries.push(e),
        }
    }
    let header = header.ok_or_else(|| PipelineError::Log("empty log".into()))?;
    if header.format_version != LOG_FORMAT_VERSION {
        return Err(PipelineError::Log(format!(
            "unsupported log format version {}",
            header.format_version
        )));
    }
    Ok((header, entries))
}

fn io_err(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Log(format!("{}: {e}", path.display()))
}

/// A session directory that is kept in step with an in-memory [`Session`].
#[derive(Debug)]
pub struct SessionDir {
    root: PathBuf,
    written: usize,
}

impl SessionDir {
    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Creates the directory and writes everything the session holds so far.
    pub fn create(root: impl Into<PathBuf>, session: &Session) -> Result<Self, PipelineError> {
        let root = root.into();
        for sub in ["catalogs", "snapshots"] {
            let p = root.join(sub);
            fs::create_dir_all(&p).map_err(|e| io_err(&p, e))?;
        }
        let log = root.join(LOG_FILE);
        let (header, _) = session.log();
        let mut f = File::create(&log).map_err(|e| io_err(&log, e))?;
        writeln!(f, "{}", LogEntry::Header(header).to_line()).map_err(|e| io_err(&log, e))?;
        let mut dir = SessionDir { root, written: 0 };
        dir.sync(session)?;
        Ok(dir)
    }

    /// Appends log entries and writes catalogs and snapshots not yet on disk.
    pub fn sync(&mut self, session: &Session) -> Result<(), PipelineError> {
        for (version, catalog) in session.catalogs() {
            let p = self.root.join("catalogs").join(format!("{version}.json"));
            if !p.exists() {
                fs::write(&p, catalog.to_json()).map_err(|e| io_err(&p, e))?;
            }
        }
        for (hash, snap) in session.snapshots() {
            let p = self.root.join("snapshots").join(format!("{hash}.json"));
            if !p.exists() {
                fs::write(&p, snap.to_canonical_json()).map_err(|e| io_err(&p, e))?;
            }
        }
        let (_, entries) = session.log();
        if entries.len() > self.written {
            let log = self.root.join(LOG_FILE);
            let mut f = OpenOptions::new()
                .append(true)
                .open(&log)
                .map_err(|e| io_err(&log, e))?;
            let mut buf = String::new();
            for e in &entries[self.written..] {
                buf.push_str(&e.to_line());
                buf.push('\n');
            }
            f.write_all(buf.as_bytes()).map_err(|e| io_err(&log, e))?;
            f.sync_data().map_err(|e| io_err(&log, e))?;
            self.written = entries.len();
        }
        Ok(())
    }

    /// Reads the log and catalogs and replays the session.
    pub fn load(root: impl Into<PathBuf>) -> Result<(Self, Session), PipelineError> {
        let root = root.into();
        let (header, entries) = read_log(&root)?;
        let catalogs = read_catalogs(&root)?;
        let session = Session::replay(&header, &entries, &catalogs)?;
        let written = entries.len();
        Ok((SessionDir { root, written }, session))
    }
}

pub fn read_log(root: &Path) -> Result<(SessionHeader, Vec<LogEntry>), PipelineError> {
    let log = root.join(LOG_FILE);
    let f = File::open(&log).map_err(|e| io_err(&log, e))?;
    let mut text = String::new();
    for line in BufReader::new(f).lines() {
        text.push_str(&line.map_err(|e| io_err(&log, e))?);
        text.push('\n');
    }
    parse_jsonl(&text)
}

fn read_catalogs(root: &Path) -> Result<BTreeMap<String, Arc<Catalog>>, PipelineError> {
    let dir = root.join("catalogs");
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
        let p = entry.map_err(|e| io_err(&dir, e))?.path();
        if p.extension().and_then(|x| x.to_str()) != Some("json") {
            continue;
        }
        let bytes = fs::read(&p).map_err(|e| io_err(&p, e))?;
        let c = load_catalog_json(&bytes)
            .map_err(|e| PipelineError::Log(format!("{}: {e}", p.display())))?;
        out.insert(c.fingerprint(), Arc::new(c));
    }
    Ok(out)
}
