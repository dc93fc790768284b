//! Accept/reject classification of URDF files with the error classes the ROS
//! parser produces.
//!
//! | code | meaning |
//! |------|---------|
//! | A | revolute/prismatic joint without `limit effort velocity` |
//! | B | no `link` elements |
//! | C | non-unique link name |
//! | D | robot has no name |
//! | E | joint parent or child link not found |
//! | F | XML (or model) parsing failed |
//!
//! F preempts everything else since no model exists to check. Otherwise
//! every applicable A–E finding is reported.

use std::collections::HashSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::kinematics::analyze_structure;
use crate::model::{parse_urdf, ParseFailure, RobotModel, TextPos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    A,
    B,
    C,
    D,
    E,
    F,
    UndefinedMaterial,
    Other,
}

impl Code {
    pub const ERRORS: [Code; 6] = [Code::A, Code::B, Code::C, Code::D, Code::E, Code::F];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::A => "A",
            Code::B => "B",
            Code::C => "C",
            Code::D => "D",
            Code::E => "E",
            Code::F => "F",
            Code::UndefinedMaterial => "W_UNDEFINED_MATERIAL",
            Code::Other => "W_OTHER",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::UndefinedMaterial | Code::Other => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// Element the finding is about, e.g. `joint shoulder`.
    pub subject: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, subject: impl Into<String>, pos: TextPos, message: impl Into<String>) -> Self {
        Self {
            severity: code.severity(),
            code,
            subject: subject.into(),
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    /// Present iff there is no error-severity diagnostic.
    pub model: Option<RobotModel>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Validation {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    /// Distinct error codes, sorted.
    pub fn error_codes(&self) -> Vec<Code> {
        let mut codes: Vec<Code> = self
            .diagnostics
            .iter()
            .filter(|d| d.is_error())
            .map(|d| d.code)
            .collect();
        codes.sort();
        codes.dedup();
        codes
    }
}

pub fn validate(input: impl AsRef<[u8]>) -> Validation {
    match parse_urdf(input) {
        Err(failure) => Validation {
            model: None,
            diagnostics: vec![failure_diagnostic(&failure)],
        },
        Ok(model) => {
            let diagnostics = check_model(&model);
            let ok = !diagnostics.iter().any(Diagnostic::is_error);
            Validation {
                model: ok.then_some(model),
                diagnostics,
            }
        }
    }
}

pub fn failure_diagnostic(failure: &ParseFailure) -> Diagnostic {
    Diagnostic::new(Code::F, "document", failure.pos, failure.message.clone())
}

/// Checks A–E plus the undefined-material warning on an already parsed model.
pub fn check_model(model: &RobotModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if model.name.is_empty() {
        out.push(Diagnostic::new(Code::D, "robot", model.pos, "no name given for robot"));
    }
    if model.links.is_empty() {
        out.push(Diagnostic::new(
            Code::B,
            "robot",
            model.pos,
            "no link elements found in URDF file",
        ));
    }

    let mut seen = HashSet::new();
    for link in &model.links {
        if !seen.insert(link.name.as_str()) {
            out.push(Diagnostic::new(
                Code::C,
                format!("link {}", link.name),
                link.pos,
                format!("link name `{}` is not unique", link.name),
            ));
        }
    }

    for joint in &model.joints {
        let subject = format!("joint {}", joint.name);
        if joint.kind.requires_limit() {
            let problem = match &joint.limit {
                None => Some("has no `limit` element".to_owned()),
                Some(l) => {
                    let missing: Vec<&str> = [("effort", l.effort), ("velocity", l.velocity)]
                        .into_iter()
                        .filter(|(_, v)| v.is_none())
                        .map(|(n, _)| n)
                        .collect();
                    (!missing.is_empty())
                        .then(|| format!("`limit` lacks {}", missing.join(" and ")))
                }
            };
            if let Some(problem) = problem {
                out.push(Diagnostic::new(
                    Code::A,
                    subject.clone(),
                    joint.pos,
                    format!("{} joint `{}` {problem}", joint.kind, joint.name),
                ));
            }
        }
        for (role, link) in [("parent", &joint.parent), ("child", &joint.child)] {
            if !seen.contains(link.as_str()) {
                out.push(Diagnostic::new(
                    Code::E,
                    subject.clone(),
                    joint.pos,
                    format!("{role} link `{link}` of joint `{}` not found", joint.name),
                ));
            }
        }
    }

    let defined: HashSet<&str> = model.materials.iter().map(|m| m.name.as_str()).collect();
    for link in &model.links {
        for visual in &link.visuals {
            if let Some(name) = &visual.material_name {
                if !defined.contains(name.as_str()) {
                    out.push(Diagnostic::new(
                        Code::UndefinedMaterial,
                        format!("link {}", link.name),
                        visual.pos,
                        format!("material `{name}` is undefined"),
                    ));
                }
            }
        }
    }

    sort_diagnostics(&mut out);
    out
}

/// Stable sort by source position.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| (d.line, d.column));
}

/// Tree well-formedness warnings: multiple roots, loops, unreachable links.
/// Never produces errors.
pub fn kinematic_sanity(model: &RobotModel) -> Vec<Diagnostic> {
    let report = analyze_structure(model);
    let link = |i: usize| &model.links[i];
    let mut out = Vec::new();
    if report.roots.len() > 1 {
        let names: Vec<&str> = report.roots.iter().map(|&i| link(i).name.as_str()).collect();
        out.push(Diagnostic::new(
            Code::Other,
            "robot",
            model.pos,
            format!("multiple root links: {}", names.join(", ")),
        ));
    }
    if report.roots.is_empty() && !model.links.is_empty() {
        out.push(Diagnostic::new(Code::Other, "robot", model.pos, "no root link"));
    }
    for cycle in &report.cycles {
        let names: Vec<&str> = cycle.iter().map(|&i| link(i).name.as_str()).collect();
        let first = link(cycle[0]);
        out.push(Diagnostic::new(
            Code::Other,
            format!("link {}", first.name),
            first.pos,
            format!("cycle through links: {}", names.join(" -> ")),
        ));
    }
    for &i in &report.multi_parent {
        out.push(Diagnostic::new(
            Code::Other,
            format!("link {}", link(i).name),
            link(i).pos,
            format!("link `{}` is the child of several joints", link(i).name),
        ));
    }
    let in_cycle: HashSet<usize> = report.cycles.iter().flatten().copied().collect();
    for &i in report.unreachable.iter().filter(|i| !in_cycle.contains(i)) {
        out.push(Diagnostic::new(
            Code::Other,
            format!("link {}", link(i).name),
            link(i).pos,
            format!("link `{}` is unreachable from the root", link(i).name),
        ));
    }
    sort_diagnostics(&mut out);
    out
}
