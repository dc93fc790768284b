//! Identical-file detection in the style of `fdupes`: group by size, then by
//! MD5, then confirm with a full byte comparison. Text files are normalized
//! first (spaces and tabs removed, every line break rewritten as CRLF).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use md5::{Digest, Md5};
use rayon::prelude::*;
use serde::Serialize;

const TEXT_EXTENSIONS: &[&str] = &["urdf", "xacro", "dae", "obj", "mtl", "xml", "json", "txt", "md"];

/// Remove 0x20/0x09 bytes, then rewrite LF, CR and CRLF as CRLF. Binary
/// content is returned unchanged.
pub fn normalize(content: &[u8], is_text: bool) -> Vec<u8> {
    if !is_text {
        return content.to_vec();
    }
    let stripped: Vec<u8> = content
        .iter()
        .copied()
        .filter(|&b| b != b' ' && b != b'\t')
        .collect();
    let mut out = Vec::with_capacity(stripped.len() + stripped.len() / 16);
    let mut i = 0;
    while i < stripped.len() {
        match stripped[i] {
            b'\r' => {
                out.extend_from_slice(b"\r\n");
                if stripped.get(i + 1) == Some(&b'\n') {
                    i += 1;
                }
            }
            b'\n' => out.extend_from_slice(b"\r\n"),
            b => out.push(b),
        }
        i += 1;
    }
    out
}

/// Whether `path` is compared as text. ASCII STL (starts with `solid`, no NUL
/// in the first 1024 bytes) is text; binary STL is not.
pub fn is_text_file(path: &Path, content: &[u8]) -> bool {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if ext == "stl" {
        let head = &content[..content.len().min(1024)];
        let body = head.trim_ascii_start();
        return body.starts_with(b"solid") && !head.contains(&0);
    }
    TEXT_EXTENSIONS.contains(&ext.as_str())
}

/// Read and normalize one file.
pub fn normalized_contents(path: &Path) -> io::Result<Vec<u8>> {
    let raw = fs::read(path)?;
    let text = is_text_file(path, &raw);
    Ok(normalize(&raw, text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicateGroup {
    /// Sorted, at least two.
    pub members: Vec<PathBuf>,
    /// Normalized size in bytes.
    pub size: u64,
    /// Hex MD5 of the normalized content.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DedupResult {
    /// Sorted by size descending, then first member.
    pub groups: Vec<DuplicateGroup>,
    pub errors: Vec<FileError>,
}

fn md5_hex(bytes: &[u8]) -> String {
    let digest = Md5::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn normalized_size(path: &Path) -> io::Result<u64> {
    let head = {
        use std::io::Read;
        let mut buf = Vec::with_capacity(1024);
        fs::File::open(path)?.take(1024).read_to_end(&mut buf)?;
        buf
    };
    if is_text_file(path, &head) {
        Ok(normalized_contents(path)?.len() as u64)
    } else {
        Ok(fs::metadata(path)?.len())
    }
}

/// Group byte-identical (after normalization) files. Unreadable files are
/// reported in `errors` and otherwise ignored.
pub fn find_duplicates<P: AsRef<Path> + Sync>(paths: &[P]) -> DedupResult {
    let mut unique: Vec<PathBuf> = paths.iter().map(|p| p.as_ref().to_path_buf()).collect();
    unique.sort();
    unique.dedup();

    let mut errors = Vec::new();
    let sized: Vec<(PathBuf, io::Result<u64>)> = unique
        .into_par_iter()
        .map(|p| {
            let size = normalized_size(&p);
            (p, size)
        })
        .collect();
    let mut by_size: BTreeMap<u64, Vec<PathBuf>> = BTreeMap::new();
    for (path, size) in sized {
        match size {
            Ok(size) => by_size.entry(size).or_default().push(path),
            Err(e) => errors.push(FileError { path, message: e.to_string() }),
        }
    }

    let candidates: Vec<(u64, PathBuf)> = by_size
        .into_iter()
        .filter(|(_, v)| v.len() > 1)
        .flat_map(|(size, v)| v.into_iter().map(move |p| (size, p)))
        .collect();
    let hashed: Vec<(u64, PathBuf, io::Result<String>)> = candidates
        .into_par_iter()
        .map(|(size, p)| {
            let digest = normalized_contents(&p).map(|c| md5_hex(&c));
            (size, p, digest)
        })
        .collect();
    let mut by_digest: BTreeMap<(u64, String), Vec<PathBuf>> = BTreeMap::new();
    for (size, path, digest) in hashed {
        match digest {
            Ok(d) => by_digest.entry((size, d)).or_default().push(path),
            Err(e) => errors.push(FileError { path, message: e.to_string() }),
        }
    }

    let mut groups = Vec::new();
    for ((size, digest), members) in by_digest.into_iter().filter(|(_, v)| v.len() > 1) {
        // Final byte comparison: partition into classes of equal content.
        let mut classes: Vec<(Vec<u8>, Vec<PathBuf>)> = Vec::new();
        for path in members {
            let content = match normalized_contents(&path) {
                Ok(c) => c,
                Err(e) => {
                    errors.push(FileError { path, message: e.to_string() });
                    continue;
                }
            };
            match classes.iter_mut().find(|(c, _)| *c == content) {
                Some((_, paths)) => paths.push(path),
                None => classes.push((content, vec![path])),
            }
        }
        for (_, mut paths) in classes.into_iter().filter(|(_, p)| p.len() > 1) {
            paths.sort();
            groups.push(DuplicateGroup {
                members: paths,
                size,
                digest: digest.clone(),
            });
        }
    }
    groups.sort_by(|a, b| b.size.cmp(&a.size).then_with(|| a.members[0].cmp(&b.members[0])));
    errors.sort_by(|a, b| a.path.cmp(&b.path));
    DedupResult { groups, errors }
}

/// Per source and extension, the number of files that belong to a group
/// spanning at least two sources. `source_of` maps a file to its source.
pub fn cross_source_counts<F>(groups: &[DuplicateGroup], source_of: F) -> BTreeMap<String, BTreeMap<String, usize>>
where
    F: Fn(&Path) -> Option<String>,
{
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for group in groups {
        let sources: Vec<Option<String>> = group.members.iter().map(|p| source_of(p)).collect();
        let distinct: BTreeSet<&String> = sources.iter().flatten().collect();
        if distinct.len() < 2 {
            continue;
        }
        for (path, source) in group.members.iter().zip(&sources) {
            let Some(source) = source else { continue };
            *counts
                .entry(source.clone())
                .or_default()
                .entry(extension_of(path))
                .or_default() += 1;
        }
    }
    counts
}

pub fn extension_of(path: &Path) -> String {
    path.extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default()
}
