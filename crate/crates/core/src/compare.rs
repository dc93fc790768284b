//! Multiply defined robots: the same robot shipped by several sources, and
//! how their URDF Bundles disagree.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::bundle::{mesh_inventory, BundleRecord};
use crate::kinematics::{build_tree, fk_equivalent, FkCompareError, FkOptions, KinematicTree};
use crate::model::{line_count, parse_urdf, ParseFailure, RobotModel};
use crate::validate::check_model;

/// Robot identity across sources: lower-cased alphanumerics of the
/// manufacturer and robot name from metadata.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RobotKey {
    pub manufacturer: String,
    pub robot: String,
}

impl fmt::Display for RobotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.manufacturer, self.robot)
    }
}

fn squeeze(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// `None` for records without a robot name.
pub fn robot_key(record: &BundleRecord) -> Option<RobotKey> {
    let mut robot = squeeze(&record.robot_name);
    if let Some(variant) = record.variant.as_deref().map(squeeze) {
        if !variant.is_empty() && robot.len() > variant.len() && robot.ends_with(&variant) {
            robot.truncate(robot.len() - variant.len());
        }
    }
    if robot.is_empty() {
        return None;
    }
    Some(RobotKey {
        manufacturer: squeeze(&record.manufacturer),
        robot,
    })
}

fn record_order(a: &BundleRecord, b: &BundleRecord) -> Ordering {
    (&a.source_name, &a.id, a.urdf_file()).cmp(&(&b.source_name, &b.id, b.urdf_file()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplyDefined {
    pub key: RobotKey,
    /// One representative per source, ordered by source.
    pub bundles: Vec<BundleRecord>,
    /// Further bundles of the same robot within a source; not paired.
    pub variants: Vec<BundleRecord>,
}

impl MultiplyDefined {
    pub fn sources(&self) -> Vec<&str> {
        self.bundles.iter().map(|b| b.source_name.as_str()).collect()
    }
}

/// Robots described by at least two distinct sources.
pub fn find_multiply_defined(records: &[BundleRecord]) -> BTreeMap<RobotKey, MultiplyDefined> {
    let mut by_key: BTreeMap<RobotKey, Vec<&BundleRecord>> = BTreeMap::new();
    for record in records {
        if let Some(key) = robot_key(record) {
            by_key.entry(key).or_default().push(record);
        }
    }
    by_key
        .into_iter()
        .filter_map(|(key, mut group)| {
            group.sort_by(|a, b| record_order(a, b));
            let mut bundles: Vec<BundleRecord> = Vec::new();
            let mut variants = Vec::new();
            for record in group {
                if bundles.last().is_some_and(|b| b.source_name == record.source_name) {
                    variants.push(record.clone());
                } else {
                    bundles.push(record.clone());
                }
            }
            (bundles.len() >= 2).then_some((key.clone(), MultiplyDefined { key, bundles, variants }))
        })
        .collect()
}

/// One bundle prepared for comparison.
#[derive(Debug, Clone)]
pub struct Member {
    pub record: BundleRecord,
    pub line_count: usize,
    pub model: Result<RobotModel, ParseFailure>,
    /// Present when the model validated cleanly and forms a tree.
    tree: Option<KinematicTree>,
}

impl Member {
    pub fn new(record: BundleRecord, raw: &[u8]) -> Self {
        let model = parse_urdf(raw);
        Self::from_parsed(record, line_count(raw), model)
    }

    pub fn from_parsed(record: BundleRecord, line_count: usize, model: Result<RobotModel, ParseFailure>) -> Self {
        let tree = model.as_ref().ok().and_then(|m| {
            let clean = !check_model(m).iter().any(|d| d.is_error());
            clean.then(|| build_tree(m).ok()).flatten()
        });
        Self {
            record,
            line_count,
            model,
            tree,
        }
    }

    fn label(&self) -> String {
        format!("{}:{}", self.record.source_name, self.record.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FkFlag {
    Same,
    Incomparable,
    Different,
}

impl FkFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            FkFlag::Same => "false",
            FkFlag::Incomparable => "incomparable",
            FkFlag::Different => "true",
        }
    }

    pub fn is_different(self) -> bool {
        self == FkFlag::Different
    }
}

impl fmt::Display for FkFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for FkFlag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            FkFlag::Same => s.serialize_bool(false),
            FkFlag::Different => s.serialize_bool(true),
            FkFlag::Incomparable => s.serialize_str("incomparable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub robot_key: RobotKey,
    pub robot_name: String,
    pub manufacturer: String,
    pub robot_type: String,
    pub sources: Vec<String>,
    pub diff_joints: bool,
    pub diff_links: bool,
    pub diff_cad_types: bool,
    pub diff_fk: FkFlag,
    pub diff_lines: bool,
    pub any: bool,
    pub any_excl_lines: bool,
    /// Members whose file did not parse.
    pub unparseable: Vec<String>,
    /// Why some pairs could not be compared kinematically.
    pub fk_notes: Vec<String>,
    /// Largest leaf translation deviation over all comparable pairs.
    pub worst_fk_deviation: Option<f64>,
}

impl DiscrepancyReport {
    fn finish(mut self) -> Self {
        self.any_excl_lines = self.diff_joints || self.diff_links || self.diff_cad_types || self.diff_fk.is_different();
        self.any = self.any_excl_lines || self.diff_lines;
        self
    }
}

fn first_nonempty<'a>(members: &'a [&Member], field: impl Fn(&'a BundleRecord) -> &'a str) -> String {
    members
        .iter()
        .map(|m| field(&m.record))
        .find(|s| !s.is_empty())
        .unwrap_or_default()
        .to_owned()
}

/// Pairwise comparison of every member against every other; a flag is set
/// when any pair differs. The result does not depend on member order.
pub fn compare_group(members: &[Member], opts: &FkOptions) -> DiscrepancyReport {
    let mut sorted: Vec<&Member> = members.iter().collect();
    sorted.sort_by(|a, b| record_order(&a.record, &b.record));

    let key = sorted
        .iter()
        .find_map(|m| robot_key(&m.record))
        .unwrap_or(RobotKey {
            manufacturer: String::new(),
            robot: String::new(),
        });
    let sources: BTreeSet<String> = sorted.iter().map(|m| m.record.source_name.clone()).collect();
    let mut report = DiscrepancyReport {
        robot_key: key,
        robot_name: first_nonempty(&sorted, |r| &r.robot_name),
        manufacturer: first_nonempty(&sorted, |r| &r.manufacturer),
        robot_type: first_nonempty(&sorted, |r| &r.robot_type),
        sources: sources.into_iter().collect(),
        diff_joints: false,
        diff_links: false,
        diff_cad_types: false,
        diff_fk: FkFlag::Same,
        diff_lines: false,
        any: false,
        any_excl_lines: false,
        unparseable: sorted.iter().filter(|m| m.model.is_err()).map(|m| m.label()).collect(),
        fk_notes: Vec::new(),
        worst_fk_deviation: None,
    };

    let inventories: Vec<_> = sorted
        .iter()
        .map(|m| m.model.as_ref().ok().map(mesh_inventory))
        .collect();

    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (a, b) = (sorted[i], sorted[j]);
            report.diff_lines |= a.line_count != b.line_count;
            if let (Ok(ma), Ok(mb)) = (&a.model, &b.model) {
                report.diff_joints |= ma.joints.len() != mb.joints.len();
                report.diff_links |= ma.links.len() != mb.links.len();
            }
            if let (Some(ia), Some(ib)) = (&inventories[i], &inventories[j]) {
                report.diff_cad_types |=
                    ia.visual_types() != ib.visual_types() || ia.collision_types() != ib.collision_types();
            }
            let flag = match (&a.model, &a.tree, &b.model, &b.tree) {
                (Ok(ma), Some(ta), Ok(mb), Some(tb)) => match fk_equivalent(ta, ma, tb, mb, opts) {
                    Ok(cmp) => {
                        let worst = report.worst_fk_deviation.get_or_insert(0.0);
                        *worst = worst.max(cmp.worst_deviation);
                        if cmp.equal {
                            FkFlag::Same
                        } else {
                            FkFlag::Different
                        }
                    }
                    Err(e) => {
                        let reason = match e {
                            FkCompareError::Incomparable(inc) => inc.to_string(),
                            other => other.to_string(),
                        };
                        report.fk_notes.push(format!("{} vs {}: {reason}", a.label(), b.label()));
                        FkFlag::Incomparable
                    }
                },
                _ => {
                    let broken: Vec<String> = [a, b]
                        .iter()
                        .filter(|m| m.tree.is_none())
                        .map(|m| m.label())
                        .collect();
                    report.fk_notes.push(format!(
                        "{} vs {}: no valid kinematic tree for {}",
                        a.label(),
                        b.label(),
                        broken.join(", ")
                    ));
                    FkFlag::Incomparable
                }
            };
            report.diff_fk = report.diff_fk.max(flag);
        }
    }
    report.finish()
}
