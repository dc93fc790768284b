//! Whole-corpus analysis: scan once, analyse every bundle in parallel, and
//! keep results in (source, id, path) order.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::bundle::{
    classify_structure, contact_markers, detect_license_upwards, detect_xacro_generated, display_path,
    mesh_inventory, relative, resolve_mesh_uri, scan_corpus, BundleRecord, ContactMarkers, CorpusScan,
    LicenseId, MeshInventory, ScanError, StructureClass,
};
use crate::compare::{compare_group, find_multiply_defined, DiscrepancyReport, Member};
use crate::dedup::{find_duplicates, DedupResult};
use crate::kinematics::FkOptions;
use crate::model::{line_count, parse_urdf, ParseFailure, RobotModel};
use crate::validate::{check_model, failure_diagnostic, kinematic_sanity, sort_diagnostics, Diagnostic};

#[derive(Debug, Clone)]
pub struct BundleAnalysis {
    pub record: BundleRecord,
    /// URDF path relative to the corpus root, forward slashes.
    pub path: String,
    pub line_count: usize,
    pub model: Result<RobotModel, ParseFailure>,
    pub diagnostics: Vec<Diagnostic>,
    pub structure: StructureClass,
    pub xacro_banner: bool,
    pub license: LicenseId,
    pub contact: ContactMarkers,
    pub inventory: MeshInventory,
    /// Mesh references whose file is absent, deduplicated and sorted.
    pub missing_meshes: Vec<String>,
}

impl BundleAnalysis {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Diagnostics for a parse result: the F finding, or A–E plus warnings and
/// kinematic sanity warnings for a parsed model.
pub fn diagnose(model: &Result<RobotModel, ParseFailure>) -> Vec<Diagnostic> {
    match model {
        Err(failure) => vec![failure_diagnostic(failure)],
        Ok(model) => {
            let mut diags = check_model(model);
            diags.extend(kinematic_sanity(model));
            sort_diagnostics(&mut diags);
            diags
        }
    }
}

pub fn analyze_bundle(root: &Path, record: BundleRecord) -> BundleAnalysis {
    let file = record.urdf_file();
    let path = display_path(&relative(root, &file));
    let raw = fs::read(&file);
    let (raw, model) = match raw {
        Ok(raw) => {
            let model = parse_urdf(&raw);
            (raw, model)
        }
        Err(e) => (
            Vec::new(),
            Err(ParseFailure::io(format!("cannot read {path}: {e}"))),
        ),
    };
    let diagnostics = diagnose(&model);
    let inventory = model.as_ref().map(mesh_inventory).unwrap_or_default();
    let missing_meshes = match &model {
        Ok(m) => missing_meshes(m, &record),
        Err(_) => Vec::new(),
    };
    BundleAnalysis {
        structure: classify_structure(record.structure_dir()),
        license: detect_license_upwards(&record.root_dir, &record.source_dir),
        line_count: line_count(&raw),
        xacro_banner: detect_xacro_generated(&raw),
        contact: contact_markers(&raw),
        record,
        path,
        model,
        diagnostics,
        inventory,
        missing_meshes,
    }
}

fn missing_meshes(model: &RobotModel, record: &BundleRecord) -> Vec<String> {
    let file = record.urdf_file();
    let urdf_dir = file.parent().unwrap_or(Path::new(""));
    let bundle_root = record.structure_dir();
    let mut missing: Vec<String> = model
        .mesh_uris()
        .map(|(uri, _)| uri)
        .filter(|uri| !resolve_mesh_uri(uri, &bundle_root, urdf_dir).is_file())
        .map(str::to_owned)
        .collect();
    missing.sort();
    missing.dedup();
    missing
}

#[derive(Debug, Clone)]
pub struct CorpusAnalysis {
    pub root: PathBuf,
    pub scan: CorpusScan,
    /// Same order as `scan.records`.
    pub bundles: Vec<BundleAnalysis>,
}

pub fn analyze_corpus(root: impl AsRef<Path>) -> Result<CorpusAnalysis, ScanError> {
    let root = root.as_ref().to_path_buf();
    let scan = scan_corpus(&root)?;
    let bundles = scan
        .records
        .par_iter()
        .map(|r| analyze_bundle(&root, r.clone()))
        .collect();
    Ok(CorpusAnalysis { root, scan, bundles })
}

impl CorpusAnalysis {
    /// One report per multiply defined robot, ordered by robot key.
    pub fn discrepancies(&self, opts: &FkOptions) -> Vec<DiscrepancyReport> {
        let by_file: BTreeMap<PathBuf, &BundleAnalysis> =
            self.bundles.iter().map(|b| (b.record.urdf_file(), b)).collect();
        let groups: Vec<_> = find_multiply_defined(&self.scan.records).into_values().collect();
        groups
            .par_iter()
            .map(|group| {
                let members: Vec<Member> = group
                    .bundles
                    .iter()
                    .map(|r| {
                        let a = by_file[&r.urdf_file()];
                        Member::from_parsed(r.clone(), a.line_count, a.model.clone())
                    })
                    .collect();
                compare_group(&members, opts)
            })
            .collect()
    }

    /// Duplicate files among everything stored under the sources.
    pub fn duplicates(&self) -> DedupResult {
        let mut files = Vec::new();
        for source in &self.scan.sources {
            for entry in WalkDir::new(&source.dir).sort_by_file_name().into_iter().filter_map(Result::ok) {
                if entry.file_type().is_file() {
                    files.push(entry.into_path());
                }
            }
        }
        find_duplicates(&files)
    }

    /// Name of the source whose directory holds `path` (deepest match).
    pub fn source_of(&self, path: &Path) -> Option<String> {
        self.scan
            .sources
            .iter()
            .filter(|s| path.starts_with(&s.dir))
            .max_by_key(|s| s.dir.components().count())
            .map(|s| s.name.clone())
    }
}
