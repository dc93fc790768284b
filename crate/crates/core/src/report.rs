//! Result tables and their CSV/JSON rendering.
//!
//! Every table is built from already computed analyses, never touches the
//! clock, and shows paths relative to the corpus root, so two runs over the
//! same tree emit the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::bundle::{display_path, model_stats, name_substring_stats, relative, LicenseId, MeshType, StructureClass};
use crate::compare::{DiscrepancyReport, FkFlag};
use crate::corpus::{BundleAnalysis, CorpusAnalysis};
use crate::dedup::{cross_source_counts, extension_of, DedupResult};
use crate::model::RobotModel;
use crate::validate::{Code, Diagnostic};

/// Terms counted by [`name_stats`].
pub const NAME_TERMS: [&str; 2] = ["world", "flange"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n.into())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

impl From<FkFlag> for Cell {
    fn from(f: FkFlag) -> Self {
        match f {
            FkFlag::Same => Cell::Bool(false),
            FkFlag::Different => Cell::Bool(true),
            FkFlag::Incomparable => Cell::Str("incomparable".into()),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Str(s) => f.write_str(s),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Float(x) => write!(f, "{x}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Null => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Int(n) => Value::Number((*n).into()),
            Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Null => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub name: String,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ReportTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    /// Panics if the row length differs from the header length.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row length does not match columns of table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Cell at `row` in the named column.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.rows.get(row)?.get(col)
    }
}

macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$(Cell::from($cell)),*]
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Write `table` to `sink`; returns the number of bytes written.
pub fn emit<W: Write + ?Sized>(table: &ReportTable, format: Format, sink: &mut W) -> io::Result<usize> {
    let bytes = render(table, format)?;
    sink.write_all(&bytes)?;
    Ok(bytes.len())
}

pub fn render(table: &ReportTable, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::CRLF)
                .from_writer(Vec::new());
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(ToString::to_string))?;
            }
            w.into_inner().map_err(|e| e.into_error())
        }
        Format::Json => {
            let objects: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let map: Map<String, Value> = table
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(map)
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&Value::Array(objects))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn joined<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|t| t.to_string()).collect::<Vec<_>>().join(";")
}

fn error_codes(b: &BundleAnalysis) -> String {
    let codes: BTreeSet<Code> = b.diagnostics.iter().filter(|d| d.is_error()).map(|d| d.code).collect();
    joined(codes)
}

/// One row per bundle.
pub fn inventory(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new(
        "inventory",
        &[
            "source",
            "id",
            "robot",
            "manufacturer",
            "type",
            "path",
            "structure",
            "parses",
            "errors",
            "links",
            "joints",
            "lines",
            "xacro_banner",
            "xacro_by_dataset",
            "license",
            "visual_meshes",
            "collision_meshes",
            "missing_meshes",
        ],
    );
    for b in &corpus.bundles {
        let r = &b.record;
        let (links, joints) = match &b.model {
            Ok(m) => (Some(m.links.len()), Some(m.joints.len())),
            Err(_) => (None, None),
        };
        t.push(row![
            r.source_name.as_str(),
            r.id.as_str(),
            r.robot_name.as_str(),
            r.manufacturer.as_str(),
            r.robot_type.as_str(),
            b.path.as_str(),
            b.structure.as_str(),
            b.model.is_ok(),
            error_codes(b),
            links,
            joints,
            b.line_count,
            b.xacro_banner,
            r.xacro_generated_by_dataset,
            b.license.as_str(),
            joined(b.inventory.visual_types()),
            joined(b.inventory.collision_types()),
            b.missing_meshes.len(),
        ]);
    }
    t
}

/// Count of distinct bundle directories per folder layout.
pub fn structures(corpus: &CorpusAnalysis) -> ReportTable {
    let mut dirs: BTreeMap<StructureClass, BTreeSet<std::path::PathBuf>> = BTreeMap::new();
    for b in &corpus.bundles {
        dirs.entry(b.structure).or_default().insert(b.record.structure_dir());
    }
    let mut t = ReportTable::new("structures", &["structure", "directories", "bundles"]);
    for class in StructureClass::ALL {
        let bundles = corpus.bundles.iter().filter(|b| b.structure == class).count();
        let n = dirs.get(&class).map_or(0, BTreeSet::len);
        t.push(row![class.as_str(), n, bundles]);
    }
    t
}

/// Who generated each URDF with xacro, per source plus a total row.
pub fn xacro(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new(
        "xacro",
        &["source", "by_us", "by_others_xacro", "by_others_without", "total"],
    );
    let mut per: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for s in &corpus.scan.sources {
        per.entry(s.name.as_str()).or_default();
    }
    for b in &corpus.bundles {
        let slot = if b.record.xacro_generated_by_dataset {
            0
        } else if b.xacro_banner {
            1
        } else {
            2
        };
        per.entry(b.record.source_name.as_str()).or_default()[slot] += 1;
    }
    let mut total = [0usize; 3];
    for (source, counts) in &per {
        for i in 0..3 {
            total[i] += counts[i];
        }
        t.push(row![*source, counts[0], counts[1], counts[2], counts.iter().sum::<usize>()]);
    }
    t.push(row!["total", total[0], total[1], total[2], total.iter().sum::<usize>()]);
    t
}

pub const DIAGNOSTIC_COLUMNS: [&str; 7] = ["file", "severity", "code", "subject", "line", "column", "message"];

pub fn push_diagnostics(t: &mut ReportTable, file: &str, diags: &[Diagnostic]) {
    for d in diags {
        t.push(row![
            file,
            d.severity.to_string(),
            d.code.as_str(),
            d.subject.as_str(),
            d.line,
            d.column,
            d.message.as_str(),
        ]);
    }
}

/// Every diagnostic of every bundle.
pub fn parsing_errors(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("parsing_errors", &DIAGNOSTIC_COLUMNS);
    for b in &corpus.bundles {
        push_diagnostics(&mut t, &b.path, &b.diagnostics);
    }
    t
}

/// Per code: files affected and total findings.
pub fn parsing_summary(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("parsing_summary", &["code", "severity", "files", "occurrences"]);
    let codes = Code::ERRORS.into_iter().chain([Code::UndefinedMaterial, Code::Other]);
    for code in codes {
        let occurrences: usize = corpus
            .bundles
            .iter()
            .map(|b| b.diagnostics.iter().filter(|d| d.code == code).count())
            .sum();
        let files = corpus
            .bundles
            .iter()
            .filter(|b| b.diagnostics.iter().any(|d| d.code == code))
            .count();
        t.push(row![code.as_str(), code.severity().to_string(), files, occurrences]);
    }
    let failing = corpus.bundles.iter().filter(|b| b.has_errors()).count();
    t.push(row!["any_error", "error", failing, Cell::Null]);
    t
}

/// Bundles referring to each CAD type, split by usage. `any` counts bundles
/// with at least one mesh of that usage; `type_sum` adds the per-type rows,
/// so a bundle mixing formats is counted once per format.
pub fn mesh_types(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("mesh_types", &["mesh_type", "visual_bundles", "collision_bundles"]);
    let (mut visual_sum, mut collision_sum) = (0, 0);
    for ty in MeshType::ALL {
        let visual = corpus.bundles.iter().filter(|b| b.inventory.visual.contains_key(&ty)).count();
        let collision = corpus.bundles.iter().filter(|b| b.inventory.collision.contains_key(&ty)).count();
        visual_sum += visual;
        collision_sum += collision;
        t.push(row![ty.as_str(), visual, collision]);
    }
    t.push(row!["type_sum", visual_sum, collision_sum]);
    let visual = corpus.bundles.iter().filter(|b| b.inventory.has_visual_meshes()).count();
    let collision = corpus.bundles.iter().filter(|b| b.inventory.has_collision_meshes()).count();
    t.push(row!["any", visual, collision]);
    t
}

pub fn licenses(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("licenses", &["license", "bundles"]);
    for id in LicenseId::ALL {
        let n = corpus.bundles.iter().filter(|b| b.license == id).count();
        t.push(row![id.as_str(), n]);
    }
    t
}

/// Files containing each contact-information term.
pub fn contact(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("contact", &["term", "files"]);
    let count = |f: fn(&BundleAnalysis) -> bool| corpus.bundles.iter().filter(|b| f(b)).count();
    t.push(row!["author", count(|b| b.contact.author)]);
    t.push(row!["@", count(|b| b.contact.at_sign)]);
    t.push(row![".com", count(|b| b.contact.dot_com)]);
    t
}

/// Joints plus links whose name contains each term, per source and total.
pub fn name_stats(corpus: &CorpusAnalysis) -> ReportTable {
    let mut columns = vec!["source"];
    columns.extend(NAME_TERMS);
    let mut t = ReportTable::new("name_stats", &columns);
    let mut per: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    for s in &corpus.scan.sources {
        per.entry(s.name.as_str()).or_default();
    }
    for b in &corpus.bundles {
        let Ok(model) = &b.model else { continue };
        let entry = per.entry(b.record.source_name.as_str()).or_default();
        for (term, n) in name_substring_stats(model, &NAME_TERMS) {
            *entry.entry(term).or_default() += n;
        }
    }
    let mut total: BTreeMap<&str, usize> = BTreeMap::new();
    for (source, counts) in &per {
        let mut r = row![*source];
        for term in NAME_TERMS {
            let n = counts.get(term).copied().unwrap_or(0);
            *total.entry(term).or_default() += n;
            r.push(n.into());
        }
        t.push(r);
    }
    let mut r = row!["total"];
    r.extend(NAME_TERMS.iter().map(|term| Cell::from(total.get(term).copied().unwrap_or(0))));
    t.push(r);
    t
}

pub fn model_stats_table(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("model_stats", &["type", "bundles", "avg_links", "avg_joints"]);
    let parsed = corpus
        .bundles
        .iter()
        .filter_map(|b| b.model.as_ref().ok().map(|m| (&b.record, m)));
    for (ty, s) in model_stats(parsed) {
        t.push(row![ty, s.bundles, s.avg_links, s.avg_joints]);
    }
    t
}

pub fn notices(corpus: &CorpusAnalysis) -> ReportTable {
    let mut t = ReportTable::new("notices", &["path", "message"]);
    for n in &corpus.scan.notices {
        t.push(row![display_path(&n.path), n.message.as_str()]);
    }
    t
}

/// One row per file in a duplicate group; groups numbered from 1.
pub fn duplicates(corpus: &CorpusAnalysis, result: &DedupResult) -> ReportTable {
    let mut t = ReportTable::new("duplicates", &["group_id", "source", "path", "extension", "size", "digest"]);
    for (i, group) in result.groups.iter().enumerate() {
        for path in &group.members {
            t.push(row![
                i + 1,
                corpus.source_of(path).unwrap_or_default(),
                display_path(&relative(&corpus.root, path)),
                extension_of(path),
                group.size,
                group.digest.as_str(),
            ]);
        }
    }
    t
}

pub fn duplicates_by_source(corpus: &CorpusAnalysis, result: &DedupResult) -> ReportTable {
    let mut t = ReportTable::new("duplicates_by_source", &["source", "extension", "files"]);
    for (source, exts) in cross_source_counts(&result.groups, |p| corpus.source_of(p)) {
        for (ext, n) in exts {
            t.push(row![source.as_str(), ext, n]);
        }
    }
    t
}

pub fn dedup_errors(corpus: &CorpusAnalysis, result: &DedupResult) -> ReportTable {
    let mut t = ReportTable::new("dedup_errors", &["path", "message"]);
    for e in &result.errors {
        t.push(row![display_path(&relative(&corpus.root, &e.path)), e.message.as_str()]);
    }
    t
}

pub fn discrepancies(reports: &[DiscrepancyReport]) -> ReportTable {
    let mut t = ReportTable::new(
        "discrepancies",
        &[
            "robot",
            "manufacturer",
            "type",
            "sources",
            "joints",
            "links",
            "cad",
            "fk",
            "lines",
            "any",
            "any_excl_lines",
            "worst_fk_deviation",
            "notes",
        ],
    );
    for r in reports {
        let mut notes: Vec<String> = r.unparseable.iter().map(|m| format!("unparseable {m}")).collect();
        notes.extend(r.fk_notes.iter().cloned());
        t.push(row![
            r.robot_name.as_str(),
            r.manufacturer.as_str(),
            r.robot_type.as_str(),
            r.sources.join(";"),
            r.diff_joints,
            r.diff_links,
            r.diff_cad_types,
            r.diff_fk,
            r.diff_lines,
            r.any,
            r.any_excl_lines,
            r.worst_fk_deviation,
            notes.join(" | "),
        ]);
    }
    t
}

/// Robots with each feature differing, as counts and percentages.
pub fn discrepancy_summary(reports: &[DiscrepancyReport]) -> ReportTable {
    let mut t = ReportTable::new("discrepancy_summary", &["feature", "robots", "percent"]);
    let total = reports.len();
    let pct = |n: usize| if total == 0 { 0.0 } else { (1000.0 * n as f64 / total as f64).round() / 10.0 };
    type Feature = (&'static str, fn(&DiscrepancyReport) -> bool);
    let features: [Feature; 8] = [
        ("joints", |r| r.diff_joints),
        ("links", |r| r.diff_links),
        ("cad", |r| r.diff_cad_types),
        ("fk", |r| r.diff_fk.is_different()),
        ("fk_incomparable", |r| r.diff_fk == FkFlag::Incomparable),
        ("lines", |r| r.diff_lines),
        ("any", |r| r.any),
        ("any_excl_lines", |r| r.any_excl_lines),
    ];
    for (name, f) in features {
        let n = reports.iter().filter(|r| f(r)).count();
        t.push(row![name, n, pct(n)]);
    }
    t.push(row!["robots", total, Cell::Null]);
    t
}

/// Links and joints of a single model, with mesh types and joint limits.
pub fn model_info(file: &Path, model: &RobotModel) -> ReportTable {
    let mut t = ReportTable::new(
        "model_info",
        &[
            "file",
            "element",
            "name",
            "kind",
            "parent",
            "child",
            "visual_meshes",
            "collision_meshes",
            "lower",
            "upper",
        ],
    );
    let file = display_path(file);
    let types = |uris: Vec<&str>| joined(uris.into_iter().map(MeshType::from_uri).collect::<BTreeSet<_>>());
    t.push(row![
        file.as_str(),
        "robot",
        model.name.as_str(),
        format!("{} links, {} joints", model.links.len(), model.joints.len()),
        "",
        "",
        types(model.mesh_uris().filter(|(_, c)| !c).map(|(u, _)| u).collect()),
        types(model.mesh_uris().filter(|(_, c)| *c).map(|(u, _)| u).collect()),
        Cell::Null,
        Cell::Null,
    ]);
    for link in &model.links {
        let visual = link.visuals.iter().filter_map(|v| v.geometry.mesh_uri()).collect();
        let collision = link.collisions.iter().filter_map(|c| c.geometry.mesh_uri()).collect();
        t.push(row![
            file.as_str(),
            "link",
            link.name.as_str(),
            "",
            "",
            "",
            types(visual),
            types(collision),
            Cell::Null,
            Cell::Null,
        ]);
    }
    for joint in &model.joints {
        let limit = joint.limit.as_ref();
        t.push(row![
            file.as_str(),
            "joint",
            joint.name.as_str(),
            joint.kind.as_str(),
            joint.parent.as_str(),
            joint.child.as_str(),
            "",
            "",
            limit.and_then(|l| l.lower),
            limit.and_then(|l| l.upper),
        ]);
    }
    t
}

/// All tables produced by a corpus scan, in a fixed order.
pub fn scan_tables(corpus: &CorpusAnalysis, dupes: &DedupResult, reports: &[DiscrepancyReport]) -> Vec<ReportTable> {
    let mut tables = stats_tables(corpus);
    tables.splice(
        0..0,
        [
            inventory(corpus),
            notices(corpus),
            structures(corpus),
            xacro(corpus),
            parsing_errors(corpus),
            parsing_summary(corpus),
            mesh_types(corpus),
        ],
    );
    tables.extend([
        duplicates(corpus, dupes),
        duplicates_by_source(corpus, dupes),
        dedup_errors(corpus, dupes),
        discrepancies(reports),
        discrepancy_summary(reports),
    ]);
    tables
}

pub fn stats_tables(corpus: &CorpusAnalysis) -> Vec<ReportTable> {
    vec![
        model_stats_table(corpus),
        name_stats(corpus),
        contact(corpus),
        licenses(corpus),
    ]
}
