//! Dataset ingestion and per-bundle analyses.
//!
//! A dataset root holds one directory per source (marked by a
//! `source-information.json`), and each source holds bundle directories
//! described by `meta-information.json` files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;
use walkdir::WalkDir;

use crate::model::RobotModel;

pub const SOURCE_INFO_FILE: &str = "source-information.json";
pub const META_INFO_FILE: &str = "meta-information.json";

/// One URDF Bundle on disk plus its metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleRecord {
    pub id: String,
    pub robot_name: String,
    pub robot_type: String,
    pub manufacturer: String,
    pub source_name: String,
    pub source_url: String,
    /// Relative to `root_dir`.
    pub urdf_path: PathBuf,
    /// Whether the dataset authors ran xacro themselves to produce the file.
    pub xacro_generated_by_dataset: bool,
    /// Directory holding the bundle's metadata (or the URDF, for orphans).
    pub root_dir: PathBuf,
    pub variant: Option<String>,
    /// Directory of the owning source.
    pub source_dir: PathBuf,
}

impl BundleRecord {
    pub fn urdf_file(&self) -> PathBuf {
        self.root_dir.join(&self.urdf_path)
    }

    /// Directory whose layout [`classify_structure`] judges: the parent of the
    /// `urdf`/`robots` folder holding the file, else the file's own folder.
    pub fn structure_dir(&self) -> PathBuf {
        let file = self.urdf_file();
        let parent = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let folder = parent
            .file_name()
            .map(|n| n.to_string_lossy().to_ascii_lowercase());
        match folder.as_deref() {
            Some("urdf" | "robots") => parent.parent().map(Path::to_path_buf).unwrap_or(parent),
            _ => parent,
        }
    }

    pub fn has_metadata(&self) -> bool {
        !self.robot_name.is_empty() || !self.manufacturer.is_empty() || !self.robot_type.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanNotice {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceInfo {
    pub name: String,
    pub url: String,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusScan {
    pub sources: Vec<SourceInfo>,
    /// Sorted by (source, id, path).
    pub records: Vec<BundleRecord>,
    pub notices: Vec<ScanNotice>,
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("cannot read dataset root {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

// Metadata keys are matched after lower-casing and dropping everything that
// is not alphanumeric, so `urdf-location`, `urdf_location` and `urdfLocation`
// are the same key.
const NAME_KEYS: &[&str] = &["name", "robotname", "robot"];
const TYPE_KEYS: &[&str] = &["type", "robottype"];
const MANUFACTURER_KEYS: &[&str] = &["manufacturer", "maker", "vendor"];
const URDF_KEYS: &[&str] = &[
    "urdflocation",
    "relativeurdflocation",
    "urdffilelocation",
    "urdfpath",
    "urdffile",
    "urdf",
    "location",
    "path",
    "file",
];
const ID_KEYS: &[&str] = &["id", "identifier"];
const SOURCE_URL_KEYS: &[&str] = &["sourceurl", "originalurl", "url"];
const XACRO_KEYS: &[&str] = &[
    "xacrogenerated",
    "generatedwithxacro",
    "generatedbyxacro",
    "xacro",
];
const VARIANT_KEYS: &[&str] = &["variant", "urdfvariant"];
const LIST_KEYS: &[&str] = &["urdfs", "robots", "bundles", "urdffiles", "entries"];

fn normalize_key(key: &str) -> String {
    key.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn lookup<'v>(obj: &'v Map<String, Value>, aliases: &[&str]) -> Option<&'v Value> {
    aliases.iter().find_map(|alias| {
        obj.iter()
            .find(|(k, _)| normalize_key(k) == *alias)
            .map(|(_, v)| v)
    })
}

fn string_field(obj: &Map<String, Value>, aliases: &[&str]) -> Option<String> {
    match lookup(obj, aliases)? {
        Value::String(s) => Some(s.trim().to_owned()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn bool_field(obj: &Map<String, Value>, aliases: &[&str]) -> bool {
    match lookup(obj, aliases) {
        Some(Value::Bool(b)) => *b,
        Some(Value::String(s)) => matches!(s.trim().to_ascii_lowercase().as_str(), "true" | "yes" | "1"),
        Some(Value::Number(n)) => n.as_f64().is_some_and(|v| v != 0.0),
        _ => false,
    }
}

/// The bundle entries described by one metadata document.
fn metadata_entries(doc: &Value) -> Vec<&Map<String, Value>> {
    match doc {
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        Value::Object(obj) => match lookup(obj, LIST_KEYS) {
            Some(Value::Array(items)) => items.iter().filter_map(Value::as_object).collect(),
            _ => vec![obj],
        },
        _ => Vec::new(),
    }
}

fn is_urdf_file(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("urdf"))
}

fn sorted_walk(dir: &Path) -> impl Iterator<Item = walkdir::DirEntry> {
    WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read(path).map_err(|e| format!("unreadable: {e}"))?;
    let text = text.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(&text);
    serde_json::from_slice(text).map_err(|e| format!("invalid JSON: {e}"))
}

fn discover_sources(root: &Path, notices: &mut Vec<ScanNotice>) -> Vec<SourceInfo> {
    let mut sources = Vec::new();
    for entry in sorted_walk(root) {
        if entry.file_type().is_file() && entry.file_name() == SOURCE_INFO_FILE {
            let dir = entry.path().parent().unwrap_or(root).to_path_buf();
            let fallback = dir_name(&dir);
            let (name, url) = match read_json(entry.path()) {
                Ok(Value::Object(obj)) => (
                    string_field(&obj, NAME_KEYS).filter(|n| !n.is_empty()).unwrap_or(fallback),
                    string_field(&obj, &["url", "sourceurl"]).unwrap_or_default(),
                ),
                Ok(_) => (fallback, String::new()),
                Err(msg) => {
                    notices.push(ScanNotice {
                        path: relative(root, entry.path()),
                        message: msg,
                    });
                    (fallback, String::new())
                }
            };
            sources.push(SourceInfo { name, url, dir });
        }
    }
    if sources.is_empty() {
        // No source markers: every top-level directory is a source.
        if let Ok(entries) = fs::read_dir(root) {
            let mut dirs: Vec<PathBuf> = entries
                .filter_map(Result::ok)
                .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
                .map(|e| e.path())
                .collect();
            dirs.sort();
            sources = dirs
                .into_iter()
                .map(|dir| SourceInfo {
                    name: dir_name(&dir),
                    url: String::new(),
                    dir,
                })
                .collect();
        }
    }
    sources
}

fn dir_name(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn relative(root: &Path, path: &Path) -> PathBuf {
    path.strip_prefix(root).map(Path::to_path_buf).unwrap_or_else(|_| path.to_path_buf())
}

/// Forward-slash rendering of a path, for stable report output.
pub fn display_path(path: &Path) -> String {
    path.components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            Component::ParentDir => Some("..".to_owned()),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("/")
}

/// Walk a dataset tree and collect one record per described URDF, plus one
/// record (with empty metadata and a notice) per URDF nothing describes.
pub fn scan_corpus(root: impl AsRef<Path>) -> Result<CorpusScan, ScanError> {
    let root = root.as_ref();
    let meta = fs::metadata(root).map_err(|source| ScanError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(ScanError::Io {
            path: root.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotADirectory, "not a directory"),
        });
    }
    fs::read_dir(root).map_err(|source| ScanError::Io {
        path: root.to_path_buf(),
        source,
    })?;

    let mut scan = CorpusScan::default();
    scan.sources = discover_sources(root, &mut scan.notices);
    let source_dirs: HashSet<PathBuf> = scan.sources.iter().map(|s| s.dir.clone()).collect();

    for source in &scan.sources {
        let mut described: HashSet<PathBuf> = HashSet::new();
        let mut urdfs: Vec<PathBuf> = Vec::new();
        let mut metas: Vec<PathBuf> = Vec::new();
        let walker = WalkDir::new(&source.dir)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| e.path() == source.dir || !source_dirs.contains(e.path()));
        for entry in walker.filter_map(Result::ok) {
            if !entry.file_type().is_file() {
                continue;
            }
            if entry.file_name() == META_INFO_FILE {
                metas.push(entry.path().to_path_buf());
            } else if is_urdf_file(entry.path()) {
                urdfs.push(entry.path().to_path_buf());
            }
        }

        for meta_path in &metas {
            let bundle_dir = meta_path.parent().unwrap_or(&source.dir).to_path_buf();
            let doc = match read_json(meta_path) {
                Ok(doc) => doc,
                Err(msg) => {
                    scan.notices.push(ScanNotice {
                        path: relative(root, meta_path),
                        message: msg,
                    });
                    continue;
                }
            };
            for entry in metadata_entries(&doc) {
                let files: Vec<PathBuf> = match string_field(entry, URDF_KEYS) {
                    Some(loc) if !loc.is_empty() => vec![PathBuf::from(loc.trim_start_matches("./"))],
                    _ => urdfs
                        .iter()
                        .filter(|u| u.starts_with(&bundle_dir))
                        .map(|u| relative(&bundle_dir, u))
                        .collect(),
                };
                for urdf_path in files {
                    let full = bundle_dir.join(&urdf_path);
                    if !full.is_file() {
                        scan.notices.push(ScanNotice {
                            path: relative(root, meta_path),
                            message: format!("described URDF {} does not exist", display_path(&urdf_path)),
                        });
                        continue;
                    }
                    described.insert(normalize_path(&full));
                    let id = string_field(entry, ID_KEYS)
                        .filter(|s| !s.is_empty())
                        .unwrap_or_else(|| display_path(&relative(&source.dir, &full)));
                    scan.records.push(BundleRecord {
                        id,
                        robot_name: string_field(entry, NAME_KEYS).unwrap_or_default(),
                        robot_type: string_field(entry, TYPE_KEYS).unwrap_or_default(),
                        manufacturer: string_field(entry, MANUFACTURER_KEYS).unwrap_or_default(),
                        source_name: source.name.clone(),
                        source_url: string_field(entry, SOURCE_URL_KEYS).unwrap_or_default(),
                        urdf_path,
                        xacro_generated_by_dataset: bool_field(entry, XACRO_KEYS),
                        root_dir: bundle_dir.clone(),
                        variant: string_field(entry, VARIANT_KEYS).filter(|s| !s.is_empty()),
                        source_dir: source.dir.clone(),
                    });
                }
            }
        }

        for urdf in urdfs {
            if described.contains(&normalize_path(&urdf)) {
                continue;
            }
            let dir = urdf.parent().unwrap_or(&source.dir).to_path_buf();
            scan.notices.push(ScanNotice {
                path: relative(root, &urdf),
                message: format!("no {META_INFO_FILE} describes this URDF"),
            });
            scan.records.push(BundleRecord {
                id: display_path(&relative(&source.dir, &urdf)),
                robot_name: String::new(),
                robot_type: String::new(),
                manufacturer: String::new(),
                source_name: source.name.clone(),
                source_url: String::new(),
                urdf_path: PathBuf::from(urdf.file_name().unwrap_or_default()),
                xacro_generated_by_dataset: false,
                root_dir: dir,
                variant: None,
                source_dir: source.dir.clone(),
            });
        }
    }

    scan.records.sort_by(|a, b| {
        (&a.source_name, &a.id, a.urdf_file()).cmp(&(&b.source_name, &b.id, b.urdf_file()))
    });
    scan.notices.sort_by(|a, b| (&a.path, &a.message).cmp(&(&b.path, &b.message)));
    Ok(scan)
}

/// Lexically resolve `.` and `..` so equal files compare equal.
fn normalize_path(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                out.pop();
            }
            other => out.push(other),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StructureClass {
    A,
    B,
    C,
    D,
    Other,
}

impl StructureClass {
    pub const ALL: [StructureClass; 5] = [
        StructureClass::A,
        StructureClass::B,
        StructureClass::C,
        StructureClass::D,
        StructureClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StructureClass::A => "A",
            StructureClass::B => "B",
            StructureClass::C => "C",
            StructureClass::D => "D",
            StructureClass::Other => "Other",
        }
    }
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case-insensitive lookup of an immediate subdirectory.
fn subdir(dir: &Path, name: &str) -> Option<PathBuf> {
    let entries = fs::read_dir(dir).ok()?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_dir()))
        .filter(|e| e.file_name().to_string_lossy().eq_ignore_ascii_case(name))
        .map(|e| e.path())
        .collect();
    found.sort();
    found.into_iter().next()
}

fn holds_urdf(dir: &Path) -> bool {
    fs::read_dir(dir).is_ok_and(|entries| {
        entries
            .filter_map(Result::ok)
            .any(|e| e.file_type().is_ok_and(|t| t.is_file()) && is_urdf_file(&e.path()))
    })
}

/// `<manufacturer>_<robot>_support`: at least two non-empty name parts.
fn is_support_name(name: &str) -> bool {
    name.strip_suffix("_support").is_some_and(|stem| {
        let mut parts = stem.splitn(2, '_');
        matches!((parts.next(), parts.next()), (Some(m), Some(r)) if !m.is_empty() && !r.is_empty())
    })
}

/// Classify a bundle directory into folder structure A–D, or Other.
///
/// Every class needs a `meshes/` folder. Checks run from most to least
/// specific: D (`*visualization` with `urdf/`), C (`*_description` with
/// `robots/`), B (`<maker>_<robot>_support` with `urdf/`), A
/// (`*_description` with `urdf/`).
pub fn classify_structure(bundle_dir: impl AsRef<Path>) -> StructureClass {
    let dir = bundle_dir.as_ref();
    let name = dir_name(dir).to_ascii_lowercase();
    if subdir(dir, "meshes").is_none() {
        return StructureClass::Other;
    }
    let in_urdf = subdir(dir, "urdf").is_some_and(|d| holds_urdf(&d));
    let in_robots = subdir(dir, "robots").is_some_and(|d| holds_urdf(&d));
    let description = name.ends_with("_description");
    if name.ends_with("visualization") && in_urdf {
        StructureClass::D
    } else if description && in_robots {
        StructureClass::C
    } else if is_support_name(&name) && in_urdf {
        StructureClass::B
    } else if description && in_urdf {
        StructureClass::A
    } else {
        StructureClass::Other
    }
}

/// True iff a comment before the root element, starting within the first
/// ten lines, mentions xacro (the preprocessor's "autogenerated by xacro"
/// banner).
pub fn detect_xacro_generated(urdf_text: &[u8]) -> bool {
    let text = String::from_utf8_lossy(urdf_text);
    let mut rest: &str = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut line = 1usize;
    loop {
        let trimmed = rest.trim_start();
        line += rest[..rest.len() - trimmed.len()].matches('\n').count();
        rest = trimmed;
        let end = if rest.starts_with("<!--") {
            let Some(close) = rest.find("-->") else { return false };
            if line <= 10 && rest[..close].to_ascii_lowercase().contains("xacro") {
                return true;
            }
            close + 3
        } else if rest.starts_with("<?") {
            match rest.find("?>") {
                Some(close) => close + 2,
                None => return false,
            }
        } else if rest.starts_with("<!") {
            match rest.find('>') {
                Some(close) => close + 1,
                None => return false,
            }
        } else {
            return false;
        };
        line += rest[..end].matches('\n').count();
        if line > 10 {
            return false;
        }
        rest = &rest[end..];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshType {
    Stl,
    Dae,
    Obj,
    Other,
}

impl MeshType {
    pub const ALL: [MeshType; 4] = [MeshType::Stl, MeshType::Dae, MeshType::Obj, MeshType::Other];

    /// From a mesh URI or path, by lower-cased extension.
    pub fn from_uri(uri: &str) -> MeshType {
        let file = uri.rsplit(['/', '\\']).next().unwrap_or(uri);
        let ext = file.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("stl") => MeshType::Stl,
            Some("dae") => MeshType::Dae,
            Some("obj") => MeshType::Obj,
            _ => MeshType::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MeshType::Stl => "stl",
            MeshType::Dae => "dae",
            MeshType::Obj => "obj",
            MeshType::Other => "other",
        }
    }
}

impl fmt::Display for MeshType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MeshInventory {
    pub visual: BTreeMap<MeshType, usize>,
    pub collision: BTreeMap<MeshType, usize>,
}

impl MeshInventory {
    pub fn has_visual_meshes(&self) -> bool {
        !self.visual.is_empty()
    }

    pub fn has_collision_meshes(&self) -> bool {
        !self.collision.is_empty()
    }

    pub fn visual_types(&self) -> BTreeSet<MeshType> {
        self.visual.keys().copied().collect()
    }

    pub fn collision_types(&self) -> BTreeSet<MeshType> {
        self.collision.keys().copied().collect()
    }
}

pub fn mesh_inventory(model: &RobotModel) -> MeshInventory {
    let mut inv = MeshInventory::default();
    for (uri, collision) in model.mesh_uris() {
        let map = if collision { &mut inv.collision } else { &mut inv.visual };
        *map.entry(MeshType::from_uri(uri)).or_default() += 1;
    }
    inv
}

/// Where a mesh reference points on disk. `package://<pkg>/rest` resolves to
/// `bundle_root/rest`; `file://` URIs are taken literally; bare paths are
/// relative to the URDF's folder.
pub fn resolve_mesh_uri(uri: &str, bundle_root: &Path, urdf_dir: &Path) -> PathBuf {
    if let Some(rest) = uri.strip_prefix("package://") {
        let rest = rest.split_once('/').map(|(_, r)| r).unwrap_or("");
        bundle_root.join(rest)
    } else if let Some(rest) = uri.strip_prefix("file://") {
        PathBuf::from(rest)
    } else {
        urdf_dir.join(uri)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LicenseId {
    #[serde(rename = "Apache-2.0")]
    Apache2,
    #[serde(rename = "BSD-3-Clause")]
    Bsd3,
    #[serde(rename = "BSD-2-Clause")]
    Bsd2,
    #[serde(rename = "MIT")]
    Mit,
    Unknown,
}

impl LicenseId {
    pub const ALL: [LicenseId; 5] = [
        LicenseId::Apache2,
        LicenseId::Bsd3,
        LicenseId::Bsd2,
        LicenseId::Mit,
        LicenseId::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LicenseId::Apache2 => "Apache-2.0",
            LicenseId::Bsd3 => "BSD-3-Clause",
            LicenseId::Bsd2 => "BSD-2-Clause",
            LicenseId::Mit => "MIT",
            LicenseId::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for LicenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower-case and squeeze every run of punctuation/whitespace into one space
/// (dots are kept so version numbers survive).
fn squash(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut gap = false;
    for c in text.chars() {
        if c.is_alphanumeric() || c == '.' {
            if gap && !out.is_empty() {
                out.push(' ');
            }
            gap = false;
            out.extend(c.to_lowercase());
        } else {
            gap = true;
        }
    }
    out
}

/// Identify a license from its text.
pub fn fingerprint_license(text: &str) -> LicenseId {
    let t = squash(text);
    if t.contains("apache license version 2.0") {
        return LicenseId::Apache2;
    }
    if t.contains("redistribution and use in source and binary forms") {
        let clauses = [
            t.contains("redistributions of source code"),
            t.contains("redistributions in binary form"),
            t.contains("neither the name")
                || t.contains("may be used to endorse")
                || t.contains("may not be used to endorse"),
        ];
        if t.contains("all advertising materials") {
            return LicenseId::Unknown;
        }
        return match clauses.iter().filter(|&&c| c).count() {
            3 => LicenseId::Bsd3,
            2 => LicenseId::Bsd2,
            _ => LicenseId::Unknown,
        };
    }
    if t.contains("permission is hereby granted free of charge") {
        return LicenseId::Mit;
    }
    LicenseId::Unknown
}

fn is_license_file_name(name: &str) -> bool {
    let upper = name.to_ascii_uppercase();
    ["LICENSE", "LICENCE", "COPYING", "COPYRIGHT"]
        .iter()
        .any(|p| upper.starts_with(p))
}

/// License of the LICENSE/COPYING-style files directly inside `dir`; the
/// first file (by name) that fingerprints to a known license wins.
pub fn detect_license(dir: impl AsRef<Path>) -> LicenseId {
    let Ok(entries) = fs::read_dir(dir.as_ref()) else {
        return LicenseId::Unknown;
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
        .filter(|e| is_license_file_name(&e.file_name().to_string_lossy()))
        .map(|e| e.path())
        .collect();
    files.sort();
    files
        .iter()
        .filter_map(|f| fs::read(f).ok())
        .map(|bytes| fingerprint_license(&String::from_utf8_lossy(&bytes)))
        .find(|&l| l != LicenseId::Unknown)
        .unwrap_or(LicenseId::Unknown)
}

/// [`detect_license`] on `start` and each ancestor up to and including
/// `stop`; the nearest hit wins.
pub fn detect_license_upwards(start: &Path, stop: &Path) -> LicenseId {
    let mut dir = Some(start);
    while let Some(d) = dir {
        let found = detect_license(d);
        if found != LicenseId::Unknown || d == stop || !d.starts_with(stop) {
            return found;
        }
        dir = d.parent();
    }
    LicenseId::Unknown
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ContactMarkers {
    pub author: bool,
    pub at_sign: bool,
    pub dot_com: bool,
}

/// Case-insensitive presence of `author`, `@` and `.com` anywhere in a file.
pub fn contact_markers(urdf_text: &[u8]) -> ContactMarkers {
    let contains = |needle: &[u8]| {
        urdf_text
            .windows(needle.len())
            .any(|w| w.eq_ignore_ascii_case(needle))
    };
    ContactMarkers {
        author: contains(b"author"),
        at_sign: urdf_text.contains(&b'@'),
        dot_com: contains(b".com"),
    }
}

/// For each term, how many link plus joint names contain it
/// (case-insensitive).
pub fn name_substring_stats<S: AsRef<str>>(model: &RobotModel, terms: &[S]) -> BTreeMap<String, usize> {
    let names: Vec<String> = model
        .links
        .iter()
        .map(|l| l.name.to_lowercase())
        .chain(model.joints.iter().map(|j| j.name.to_lowercase()))
        .collect();
    terms
        .iter()
        .map(|term| {
            let needle = term.as_ref().to_lowercase();
            let count = names.iter().filter(|n| n.contains(&needle)).count();
            (term.as_ref().to_owned(), count)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeStats {
    pub bundles: usize,
    pub mean_links: f64,
    pub mean_joints: f64,
    /// Means rounded to the nearest integer, halves away from zero.
    pub avg_links: u64,
    pub avg_joints: u64,
}

/// Mean link and joint counts grouped by robot type. Records with no type
/// are grouped under `unknown`.
pub fn model_stats<'a, I>(records: I) -> BTreeMap<String, TypeStats>
where
    I: IntoIterator<Item = (&'a BundleRecord, &'a RobotModel)>,
{
    let mut sums: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (record, model) in records {
        let key = if record.robot_type.is_empty() {
            "unknown".to_owned()
        } else {
            record.robot_type.clone()
        };
        let entry = sums.entry(key).or_default();
        entry.0 += 1;
        entry.1 += model.links.len();
        entry.2 += model.joints.len();
    }
    sums.into_iter()
        .map(|(ty, (n, links, joints))| {
            let mean_links = links as f64 / n as f64;
            let mean_joints = joints as f64 / n as f64;
            let stats = TypeStats {
                bundles: n,
                mean_links,
                mean_joints,
                avg_links: mean_links.round() as u64,
                avg_joints: mean_joints.round() as u64,
            };
            (ty, stats)
        })
        .collect()
}
