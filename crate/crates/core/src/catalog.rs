//! Input data model: enablers, design principles, KPIs, KVIs, key values and
//! technical requirements, plus JSON / CSV-bundle ingestion and validation.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque identifier, used verbatim as graph node id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Id(String);

impl Id {
    pub fn new(s: impl Into<String>) -> Self {
        Id(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Id {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Id {
    fn from(s: &str) -> Self {
        Id(s.to_owned())
    }
}

impl From<String> for Id {
    fn from(s: String) -> Self {
        Id(s)
    }
}

/// The six coarse KVI classes used for coverage analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KviCategory {
    Energy,
    MaterialsWaste,
    Safety,
    TrustworthinessPrivacySecurity,
    ProductivityEfficiency,
    Costs,
}

impl KviCategory {
    pub const ALL: [KviCategory; 6] = [
        KviCategory::Energy,
        KviCategory::MaterialsWaste,
        KviCategory::Safety,
        KviCategory::TrustworthinessPrivacySecurity,
        KviCategory::ProductivityEfficiency,
        KviCategory::Costs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KviCategory::Energy => "Energy",
            KviCategory::MaterialsWaste => "MaterialsWaste",
            KviCategory::Safety => "Safety",
            KviCategory::TrustworthinessPrivacySecurity => "TrustworthinessPrivacySecurity",
            KviCategory::ProductivityEfficiency => "ProductivityEfficiency",
            KviCategory::Costs => "Costs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for KviCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sustainability pillar a KV or KVI belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pillar {
    Environmental,
    Social,
    Economic,
}

impl Pillar {
    pub fn as_str(self) -> &'static str {
        match self {
            Pillar::Environmental => "Environmental",
            Pillar::Social => "Social",
            Pillar::Economic => "Economic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Pillar::Environmental, Pillar::Social, Pillar::Economic]
            .into_iter()
            .find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpiRequirement {
    pub id: Id,
    pub name: String,
    /// Range expression, e.g. `<= 5 ms`.
    pub target: String,
    pub unit: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnicalRequirement {
    pub id: Id,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kvi {
    pub id: Id,
    pub description: String,
    pub category: KviCategory,
    pub pillar: Pillar,
    pub requirement_ids: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyValue {
    pub id: Id,
    pub pillar: Pillar,
    pub description: String,
    pub kvi_ids: BTreeSet<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignPrinciple {
    pub id: Id,
    pub name: String,
}

/// A candidate technology component.
///
/// `kpi_impacts` is sparse: KPIs missing from the map are neutral. Impacts are
/// stored as raw integers so that out-of-range values surface as validation
/// violations rather than parse failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Enabler {
    pub id: Id,
    pub name: String,
    /// Functional cluster label.
    pub category: String,
    pub trl: i64,
    pub migration_critical: bool,
    #[serde(default)]
    pub kpi_impacts: BTreeMap<Id, i64>,
    #[serde(default)]
    pub principle_ids: BTreeSet<Id>,
    #[serde(default)]
    pub dependency_ids: BTreeSet<Id>,
    #[serde(default)]
    pub requirement_ids: BTreeSet<Id>,
}

pub const TRL_MIN: i64 = 1;
pub const TRL_MAX: i64 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub use_case_name: String,
    pub kpis: Vec<KpiRequirement>,
    pub requirements: Vec<TechnicalRequirement>,
    pub kvis: Vec<Kvi>,
    pub key_values: Vec<KeyValue>,
    pub principles: Vec<DesignPrinciple>,
    pub enablers: Vec<Enabler>,
}

impl Catalog {
    pub fn enabler(&self, id: &str) -> Option<&Enabler> {
        self.enablers.iter().find(|e| e.id.as_str() == id)
    }

    pub fn enabler_index(&self) -> BTreeMap<&Id, &Enabler> {
        self.enablers.iter().map(|e| (&e.id, e)).collect()
    }

    pub fn kvi(&self, id: &str) -> Option<&Kvi> {
        self.kvis.iter().find(|k| k.id.as_str() == id)
    }

    /// Pretty, field-ordered JSON. This is the canonical interchange form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    /// Content hash of the canonical JSON form; used as the catalog version.
    pub fn fingerprint(&self) -> String {
        crate::hash::sha256_hex(self.to_json().as_bytes())
    }
}

/// Entity class a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Catalog,
    Kpi,
    Requirement,
    Kvi,
    KeyValue,
    Principle,
    Enabler,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub entity: EntityKind,
    pub id: String,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} '{}' field '{}': {}",
            self.entity, self.id, self.field, self.message
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: EntityKind, id: &str, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            entity,
            id: id.to_owned(),
            field: field.to_owned(),
            message: message.into(),
        });
    }
}

fn check_unique<'a>(
    report: &mut ValidationReport,
    entity: EntityKind,
    ids: impl Iterator<Item = &'a Id>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.as_str().is_empty() {
            report.push(entity, "", "id", "id must be non-empty");
        }
        if !seen.insert(id.as_str()) {
            report.push(entity, id.as_str(), "id", "duplicate id");
        }
    }
    seen
}

/// Reports every invariant and referential-integrity violation. An empty
/// report means every downstream id lookup succeeds.
pub fn validate_catalog(c: &Catalog) -> ValidationReport {
    let mut r = ValidationReport::default();

    if c.use_case_name.trim().is_empty() {
        r.push(EntityKind::Catalog, "", "use_case_name", "must be non-empty");
    }

    let kpis = check_unique(&mut r, EntityKind::Kpi, c.kpis.iter().map(|k| &k.id));
    let reqs = check_unique(&mut r, EntityKind::Requirement, c.requirements.iter().map(|q| &q.id));
    let kvis = check_unique(&mut r, EntityKind::Kvi, c.kvis.iter().map(|k| &k.id));
    check_unique(&mut r, EntityKind::KeyValue, c.key_values.iter().map(|k| &k.id));
    let principles = check_unique(&mut r, EntityKind::Principle, c.principles.iter().map(|p| &p.id));
    let enablers = check_unique(&mut r, EntityKind::Enabler, c.enablers.iter().map(|e| &e.id));

    for k in &c.kpis {
        if k.name.trim().is_empty() {
            r.push(EntityKind::Kpi, k.id.as_str(), "name", "must be non-empty");
        }
    }

    for k in &c.kvis {
        if k.requirement_ids.is_empty() {
            r.push(EntityKind::Kvi, k.id.as_str(), "requirement_ids", "must be non-empty");
        }
        for q in &k.requirement_ids {
            if !reqs.contains(q.as_str()) {
                r.push(
                    EntityKind::Kvi,
                    k.id.as_str(),
                    "requirement_ids",
                    format!("unknown technical requirement '{q}'"),
                );
            }
        }
    }

    for kv in &c.key_values {
        if kv.kvi_ids.is_empty() {
            r.push(EntityKind::KeyValue, kv.id.as_str(), "kvi_ids", "must be non-empty");
        }
        for k in &kv.kvi_ids {
            if !kvis.contains(k.as_str()) {
                r.push(
                    EntityKind::KeyValue,
                    kv.id.as_str(),
                    "kvi_ids",
                    format!("unknown KVI '{k}'"),
                );
            }
        }
    }

    // Enablers and principles share the graph node namespace.
    for p in &c.principles {
        if enablers.contains(p.id.as_str()) {
            r.push(
                EntityKind::Principle,
                p.id.as_str(),
                "id",
                "id collides with an enabler id",
            );
        }
    }

    for e in &c.enablers {
        let id = e.id.as_str();
        if !(TRL_MIN..=TRL_MAX).contains(&e.trl) {
            r.push(
                EntityKind::Enabler,
                id,
                "trl",
                format!("TRL {} outside [{TRL_MIN},{TRL_MAX}]", e.trl),
            );
        }
        if e.category.trim().is_empty() {
            r.push(EntityKind::Enabler, id, "category", "must be non-empty");
        }
        for (k, v) in &e.kpi_impacts {
            if !kpis.contains(k.as_str()) {
                r.push(EntityKind::Enabler, id, "kpi_impacts", format!("unknown KPI '{k}'"));
            }
            if !(-1..=1).contains(v) {
                r.push(
                    EntityKind::Enabler,
                    id,
                    "kpi_impacts",
                    format!("impact {v} for KPI '{k}' outside {{-1,0,+1}}"),
                );
            }
        }
        for p in &e.principle_ids {
            if !principles.contains(p.as_str()) {
                r.push(
                    EntityKind::Enabler,
                    id,
                    "principle_ids",
                    format!("unknown design principle '{p}'"),
                );
            }
        }
        for d in &e.dependency_ids {
            if d == &e.id {
                r.push(EntityKind::Enabler, id, "dependency_ids", "enabler depends on itself");
            } else if !enablers.contains(d.as_str()) {
                r.push(
                    EntityKind::Enabler,
                    id,
                    "dependency_ids",
                    format!("unknown enabler '{d}'"),
                );
            }
        }
        for q in &e.requirement_ids {
            if !reqs.contains(q.as_str()) {
                r.push(
                    EntityKind::Enabler,
                    id,
                    "requirement_ids",
                    format!("unknown technical requirement '{q}'"),
                );
            }
        }
    }
    r
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },
    #[error("schema error at {location}: {message}")]
    Schema {
        location: String,
        message: String,
        violations: Vec<Violation>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CatalogError {
    fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        CatalogError::Schema {
            location: location.into(),
            message: message.into(),
            violations: Vec::new(),
        }
    }

    /// Machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::Syntax { .. } => "SyntaxError",
            CatalogError::Schema { .. } => "SchemaError",
            CatalogError::Io { .. } => "IoError",
        }
    }
}

fn reject_invalid(c: Catalog) -> Result<Catalog, CatalogError> {
    let report = validate_catalog(&c);
    match report.violations.first() {
        None => Ok(c),
        Some(first) => Err(CatalogError::Schema {
            location: format!("{:?} '{}' field '{}'", first.entity, first.id, first.field),
            message: if report.violations.len() == 1 {
                first.message.clone()
            } else {
                format!(
                    "{} (and {} more violation(s))",
                    first.message,
                    report.violations.len() - 1
                )
            },
            violations: report.violations,
        }),
    }
}

/// Parses a JSON catalog without running validation.
pub fn parse_catalog_json(bytes: &[u8]) -> Result<Catalog, CatalogError> {
    serde_json::from_slice(bytes).map_err(|e| {
        let location = format!("line {} column {}", e.line(), e.column());
        match e.classify() {
            serde_json::error::Category::Data => CatalogError::schema(location, e.to_string()),
            _ => CatalogError::Syntax {
                location,
                message: e.to_string(),
            },
        }
    })
}

/// Parses and validates a JSON catalog.
pub fn load_catalog_json(bytes: &[u8]) -> Result<Catalog, CatalogError> {
    reject_invalid(parse_catalog_json(bytes)?)
}

/// One CSV file per entity class. Set-valued columns are `;`-separated;
/// `kpi_impacts` entries are `kpi:impact`, e.g. `k1:+1;k2:-1`.
pub mod csv_bundle {
    pub const USE_CASE: (&str, &[&str]) = ("use_case.csv", &["use_case_name"]);
    pub const KPIS: (&str, &[&str]) = ("kpis.csv", &["id", "name", "target", "unit", "rationale"]);
    pub const REQUIREMENTS: (&str, &[&str]) = ("requirements.csv", &["id", "label"]);
    pub const KVIS: (&str, &[&str]) = (
        "kvis.csv",
        &["id", "description", "category", "pillar", "requirement_ids"],
    );
    pub const KEY_VALUES: (&str, &[&str]) =
        ("key_values.csv", &["id", "pillar", "description", "kvi_ids"]);
    pub const PRINCIPLES: (&str, &[&str]) = ("principles.csv", &["id", "name"]);
    pub const ENABLERS: (&str, &[&str]) = (
        "enablers.csv",
        &[
            "id",
            "name",
            "category",
            "trl",
            "migration_critical",
            "kpi_impacts",
            "principle_ids",
            "dependency_ids",
            "requirement_ids",
        ],
    );
    pub const FILES: [(&str, &[&str]); 7] =
        [USE_CASE, KPIS, REQUIREMENTS, KVIS, KEY_VALUES, PRINCIPLES, ENABLERS];
}

/// In-memory CSV bundle keyed by file name.
#[derive(Debug, Clone, Default)]
pub struct CsvBundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl CsvBundle {
    pub fn from_dir(dir: &Path) -> Result<Self, CatalogError> {
        let mut files = BTreeMap::new();
        for (name, _) in csv_bundle::FILES {
            let path = dir.join(name);
            let bytes = std::fs::read(&path).map_err(|source| CatalogError::Io {
                path: path.display().to_string(),
                source,
            })?;
            files.insert(name.to_owned(), bytes);
        }
        Ok(CsvBundle { files })
    }

    /// Writes `c` as a bundle. Used to produce ingestion fixtures.
    pub fn from_catalog(c: &Catalog) -> Self {
        fn join<'a>(ids: impl Iterator<Item = &'a Id>) -> String {
            ids.map(Id::as_str).collect::<Vec<_>>().join(";")
        }
        fn write(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).expect("in-memory write");
            for row in rows {
                w.write_record(&row).expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        let mut files = BTreeMap::new();
        let mut put = |spec: (&str, &[&str]), rows| {
            files.insert(spec.0.to_owned(), write(spec.1, rows));
        };
        put(csv_bundle::USE_CASE, vec![vec![c.use_case_name.clone()]]);
        put(
            csv_bundle::KPIS,
            c.kpis
                .iter()
                .map(|k| {
                    vec![
                        k.id.to_string(),
                        k.name.clone(),
                        k.target.clone(),
                        k.unit.clone(),
                        k.rationale.clone(),
                    ]
                })
                .collect(),
        );
        put(
            csv_bundle::REQUIREMENTS,
            c.requirements
                .iter()
                .map(|q| vec![q.id.to_string(), q.label.clone()])
                .collect(),
        );
        put(
            csv_bundle::KVIS,
            c.kvis
                .iter()
                .map(|k| {
                    vec![
                        k.id.to_string(),
                        k.description.clone(),
                        k.category.to_string(),
                        k.pillar.as_str().to_owned(),
                        join(k.requirement_ids.iter()),
                    ]
                })
                .collect(),
        );
        put(
            csv_bundle::KEY_VALUES,
            c.key_values
                .iter()
                .map(|kv| {
                    vec![
                        kv.id.to_string(),
                        kv.pillar.as_str().to_owned(),
                        kv.description.clone(),
                        join(kv.kvi_ids.iter()),
                    ]
                })
                .collect(),
        );
        put(
            csv_bundle::PRINCIPLES,
            c.principles
                .iter()
                .map(|p| vec![p.id.to_string(), p.name.clone()])
                .collect(),
        );
        put(
            csv_bundle::ENABLERS,
            c.enablers
                .iter()
                .map(|e| {
                    vec![
                        e.id.to_string(),
                        e.name.clone(),
                        e.category.clone(),
                        e.trl.to_string(),
                        e.migration_critical.to_string(),
                        e.kpi_impacts
                            .iter()
                            .map(|(k, v)| format!("{k}:{v:+}"))
                            .collect::<Vec<_>>()
                            .join(";"),
                        join(e.principle_ids.iter()),
                        join(e.dependency_ids.iter()),
                        join(e.requirement_ids.iter()),
                    ]
                })
                .collect(),
        );
        CsvBundle { files }
    }
}

struct CsvTable {
    file: &'static str,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(bundle: &CsvBundle, spec: (&'static str, &[&str])) -> Result<CsvTable, CatalogError> {
    let (file, header) = spec;
    let bytes = bundle
        .files
        .get(file)
        .ok_or_else(|| CatalogError::schema(file, "missing file in bundle"))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    let found = reader
        .headers()
        .map_err(|e| CatalogError::Syntax {
            location: format!("{file} line 1"),
            message: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = found.iter().collect();
    if found != header {
        return Err(CatalogError::schema(
            format!("{file} line 1"),
            format!("expected columns {header:?}, found {found:?}"),
        ));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CatalogError::Syntax {
            location: format!(
                "{file} line {}",
                e.position().map(|p| p.line()).unwrap_or_default()
            ),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or_default();
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(CsvTable { file, rows })
}

fn split_ids(s: &str) -> BTreeSet<Id> {
    s.split(';')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(Id::from)
        .collect()
}

impl CsvTable {
    fn at(&self, line: u64, column: &str) -> String {
        format!("{} line {line} column '{column}'", self.file)
    }
}

/// Parses a CSV bundle without running validation.
pub fn parse_catalog_csv(bundle: &CsvBundle) -> Result<Catalog, CatalogError> {
    let use_case = read_table(bundle, csv_bundle::USE_CASE)?;
    let use_case_name = match use_case.rows.as_slice() {
        [(_, row)] => row[0].clone(),
        _ => {
            return Err(CatalogError::schema(
                use_case.file,
                "expected exactly one data row",
            ))
        }
    };

    let t = read_table(bundle, csv_bundle::KPIS)?;
    let kpis = t
        .rows
        .into_iter()
        .map(|(_, r)| KpiRequirement {
            id: Id::from(r[0].as_str()),
            name: r[1].clone(),
            target: r[2].clone(),
            unit: r[3].clone(),
            rationale: r[4].clone(),
        })
        .collect();

    let t = read_table(bundle, csv_bundle::REQUIREMENTS)?;
    let requirements = t
        .rows
        .into_iter()
        .map(|(_, r)| TechnicalRequirement {
            id: Id::from(r[0].as_str()),
            label: r[1].clone(),
        })
        .collect();

    let t = read_table(bundle, csv_bundle::KVIS)?;
    let mut kvis = Vec::new();
    for (line, r) in &t.rows {
        kvis.push(Kvi {
            id: Id::from(r[0].as_str()),
            description: r[1].clone(),
            category: KviCategory::parse(&r[2]).ok_or_else(|| {
                CatalogError::schema(t.at(*line, "category"), format!("unknown KVI category '{}'", r[2]))
            })?,
            pillar: Pillar::parse(&r[3]).ok_or_else(|| {
                CatalogError::schema(t.at(*line, "pillar"), format!("unknown pillar '{}'", r[3]))
            })?,
            requirement_ids: split_ids(&r[4]),
        });
    }

    let t = read_table(bundle, csv_bundle::KEY_VALUES)?;
    let mut key_values = Vec::new();
    for (line, r) in &t.rows {
        key_values.push(KeyValue {
            id: Id::from(r[0].as_str()),
            pillar: Pillar::parse(&r[1]).ok_or_else(|| {
                CatalogError::schema(t.at(*line, "pillar"), format!("unknown pillar '{}'", r[1]))
            })?,
            description: r[2].clone(),
            kvi_ids: split_ids(&r[3]),
        });
    }

    let t = read_table(bundle, csv_bundle::PRINCIPLES)?;
    let principles = t
        .rows
        .into_iter()
        .map(|(_, r)| DesignPrinciple {
            id: Id::from(r[0].as_str()),
            name: r[1].clone(),
        })
        .collect();

    let t = read_table(bundle, csv_bundle::ENABLERS)?;
    let mut enablers = Vec::new();
    for (line, r) in &t.rows {
        let trl = r[3].trim().parse::<i64>().map_err(|_| {
            CatalogError::schema(t.at(*line, "trl"), format!("'{}' is not an integer", r[3]))
        })?;
        let migration_critical = match r[4].trim() {
            "true" | "yes" => true,
            "false" | "no" => false,
            "" => {
                return Err(CatalogError::schema(
                    t.at(*line, "migration_critical"),
                    "missing required boolean",
                ))
            }
            other => {
                return Err(CatalogError::schema(
                    t.at(*line, "migration_critical"),
                    format!("'{other}' is not a boolean"),
                ))
            }
        };
        let mut kpi_impacts = BTreeMap::new();
        for entry in r[5].split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = entry.rsplit_once(':').ok_or_else(|| {
                CatalogError::schema(
                    t.at(*line, "kpi_impacts"),
                    format!("entry '{entry}' is not 'kpi:impact'"),
                )
            })?;
            let v = v.trim().trim_start_matches('+').parse::<i64>().map_err(|_| {
                CatalogError::schema(
                    t.at(*line, "kpi_impacts"),
                    format!("impact '{v}' is not an integer"),
                )
            })?;
            kpi_impacts.insert(Id::from(k.trim()), v);
        }
        enablers.push(Enabler {
            id: Id::from(r[0].as_str()),
            name: r[1].clone(),
            category: r[2].clone(),
            trl,
            migration_critical,
            kpi_impacts,
            principle_ids: split_ids(&r[6]),
            dependency_ids: split_ids(&r[7]),
            requirement_ids: split_ids(&r[8]),
        });
    }

    Ok(Catalog {
        use_case_name,
        kpis,
        requirements,
        kvis,
        key_values,
        principles,
        enablers,
    })
}

/// Parses and validates a CSV bundle.
pub fn load_catalog_csv(bundle: &CsvBundle) -> Result<Catalog, CatalogError> {
    reject_invalid(parse_catalog_csv(bundle)?)
}

/// Loads from a JSON file, or from a CSV bundle when `path` is a directory.
pub fn load_catalog_path(path: &Path) -> Result<Catalog, CatalogError> {
    reject_invalid(parse_catalog_path(path)?)
}

pub fn parse_catalog_path(path: &Path) -> Result<Catalog, CatalogError> {
    if path.is_dir() {
        parse_catalog_csv(&CsvBundle::from_dir(path)?)
    } else {
        let bytes = std::fs::read(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        parse_catalog_json(&bytes)
    }
}
