//! Kinematic tree construction and forward kinematics.
//!
//! Frames compose root to leaf as
//! `child = parent * origin(joint) * motion(joint, q)`, with `origin` built
//! from fixed-axis roll/pitch/yaw (`Rz(yaw) * Ry(pitch) * Rx(roll)`).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::{JointKind, Pose, RobotModel};

/// Rigid-body transform: rotation followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_pose(pose: &Pose) -> Self {
        let [roll, pitch, yaw] = pose.rpy;
        Self {
            rotation: Rotation3::from_euler_angles(roll, pitch, yaw).into_inner(),
            translation: Vector3::from(pose.xyz),
        }
    }

    pub fn rotation_about(axis: &Unit<Vector3<f64>>, angle: f64) -> Self {
        Self {
            rotation: Rotation3::from_axis_angle(axis, angle).into_inner(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation_along(axis: &Unit<Vector3<f64>>, distance: f64) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: axis.into_inner() * distance,
        }
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Angle in radians of the relative rotation between two frames.
    pub fn rotation_angle_to(&self, other: &Transform) -> f64 {
        rotation_angle(&(self.rotation.transpose() * other.rotation))
    }

    pub fn translation_distance_to(&self, other: &Transform) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// `RᵀR = I` and `det R = +1`, both within `tol`.
    pub fn is_rigid(&self, tol: f64) -> bool {
        let r = &self.rotation;
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
        ortho <= tol && (r.determinant() - 1.0).abs() <= tol
    }
}

impl Mul for Transform {
    type Output = Transform;
    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

/// Rotation angle of `r`, computed with atan2 so that it stays accurate
/// near zero and near π.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let vee = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let sin = 0.5 * vee.norm();
    let cos = 0.5 * (r.trace() - 1.0);
    sin.atan2(cos)
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum TreeError {
    #[error("model has no links")]
    Empty,
    #[error("multiple root links: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("kinematic loop through links: {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("links or joints not connected to the root: {}", .0.join(", "))]
    Disconnected(Vec<String>),
    #[error("joint `{0}` moves about a zero-length axis")]
    ZeroAxis(String),
}

/// Connectivity facts about a model's link/joint graph, gathered without
/// assuming it is a tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureReport {
    /// Links that are never a joint child, in document order.
    pub roots: Vec<usize>,
    /// Links that are the child of more than one joint.
    pub multi_parent: Vec<usize>,
    /// Each directed cycle as link indices.
    pub cycles: Vec<Vec<usize>>,
    /// Links not reachable from any root.
    pub unreachable: Vec<usize>,
    /// Joints naming a parent or child link that does not exist.
    pub dangling_joints: Vec<usize>,
}

impl StructureReport {
    pub fn is_tree(&self) -> bool {
        self.roots.len() == 1
            && self.multi_parent.is_empty()
            && self.cycles.is_empty()
            && self.unreachable.is_empty()
            && self.dangling_joints.is_empty()
    }
}

fn link_index(model: &RobotModel) -> HashMap<&str, usize> {
    let mut index = HashMap::new();
    for (i, link) in model.links.iter().enumerate() {
        index.entry(link.name.as_str()).or_insert(i);
    }
    index
}

pub fn analyze_structure(model: &RobotModel) -> StructureReport {
    let index = link_index(model);
    let n = model.links.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut report = StructureReport::default();
    for (ji, joint) in model.joints.iter().enumerate() {
        match (index.get(joint.parent.as_str()), index.get(joint.child.as_str())) {
            (Some(&p), Some(&c)) => {
                parents[c].push(p);
                children[p].push(c);
            }
            _ => report.dangling_joints.push(ji),
        }
    }
    // Links shadowed by an earlier duplicate name are never referenced; skip
    // them so they are not mistaken for extra roots.
    let canonical = |i: usize| index.get(model.links[i].name.as_str()) == Some(&i);

    report.roots = (0..n).filter(|&i| canonical(i) && parents[i].is_empty()).collect();
    report.multi_parent = (0..n).filter(|&i| parents[i].len() > 1).collect();

    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = report.roots.iter().copied().collect();
    for &r in &report.roots {
        seen[r] = true;
    }
    while let Some(l) = queue.pop_front() {
        for &c in &children[l] {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    report.unreachable = (0..n).filter(|&i| canonical(i) && !seen[i]).collect();

    // Iterative three-colour DFS over child edges.
    let mut colour = vec![0u8; n];
    for start in 0..n {
        if colour[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        let mut path: Vec<usize> = vec![start];
        colour[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[node].get(*next) {
                *next += 1;
                match colour[c] {
                    0 => {
                        colour[c] = 1;
                        stack.push((c, 0));
                        path.push(c);
                    }
                    1 => {
                        let from = path.iter().position(|&p| p == c).unwrap_or(0);
                        report.cycles.push(path[from..].to_vec());
                    }
                    _ => {}
                }
            } else {
                colour[node] = 2;
                stack.pop();
                path.pop();
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub joint: usize,
    pub child: String,
}

/// Rooted joint tree over a [`RobotModel`]. Joint references are indices into
/// the model the tree was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicTree {
    root: String,
    children: BTreeMap<String, Vec<TreeEdge>>,
    actuated: Vec<usize>,
    /// Joints in root-to-leaf (depth-first) order.
    traversal: Vec<usize>,
    leaves: Vec<String>,
    axes: Vec<Option<Unit<Vector3<f64>>>>,
    joint_count: usize,
}

impl KinematicTree {
    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn children(&self, link: &str) -> &[TreeEdge] {
        self.children.get(link).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Non-fixed joints (model indices) in document order; this is the layout
    /// of a [`JointConfig`].
    pub fn actuated(&self) -> &[usize] {
        &self.actuated
    }

    pub fn traversal(&self) -> &[usize] {
        &self.traversal
    }

    /// Leaf links in depth-first order, children visited in document order.
    pub fn leaves(&self) -> &[String] {
        &self.leaves
    }

    /// Unit axis of joint `index`, if its kind moves along one.
    pub fn axis(&self, index: usize) -> Option<&Unit<Vector3<f64>>> {
        self.axes.get(index).and_then(Option::as_ref)
    }
}

pub fn build_tree(model: &RobotModel) -> Result<KinematicTree, TreeError> {
    if model.links.is_empty() {
        return Err(TreeError::Empty);
    }
    let report = analyze_structure(model);
    let link_names = |ids: &[usize]| -> Vec<String> {
        ids.iter().map(|&i| model.links[i].name.clone()).collect()
    };
    if let Some(cycle) = report.cycles.first() {
        return Err(TreeError::Cycle(link_names(cycle)));
    }
    if !report.multi_parent.is_empty() {
        return Err(TreeError::Cycle(link_names(&report.multi_parent)));
    }
    if report.roots.len() > 1 {
        return Err(TreeError::MultipleRoots(link_names(&report.roots)));
    }
    if !report.unreachable.is_empty() || !report.dangling_joints.is_empty() {
        let mut names = link_names(&report.unreachable);
        names.extend(
            report
                .dangling_joints
                .iter()
                .map(|&j| format!("joint {}", model.joints[j].name)),
        );
        return Err(TreeError::Disconnected(names));
    }
    let root = model.links[report.roots[0]].name.clone();

    let mut axes = Vec::with_capacity(model.joints.len());
    let mut children: BTreeMap<String, Vec<TreeEdge>> = BTreeMap::new();
    for (i, joint) in model.joints.iter().enumerate() {
        let axis = if joint.kind.uses_axis() {
            let v = Vector3::from(joint.axis);
            if v.norm() <= f64::EPSILON {
                return Err(TreeError::ZeroAxis(joint.name.clone()));
            }
            Some(Unit::new_normalize(v))
        } else {
            None
        };
        axes.push(axis);
        children.entry(joint.parent.clone()).or_default().push(TreeEdge {
            joint: i,
            child: joint.child.clone(),
        });
    }
    let actuated = model
        .joints
        .iter()
        .enumerate()
        .filter(|(_, j)| j.kind != JointKind::Fixed)
        .map(|(i, _)| i)
        .collect();

    let mut traversal = Vec::with_capacity(model.joints.len());
    let mut leaves = Vec::new();
    let mut stack = vec![root.as_str()];
    while let Some(link) = stack.pop() {
        match children.get(link) {
            Some(edges) if !edges.is_empty() => {
                traversal.extend(edges.iter().map(|e| e.joint));
                stack.extend(edges.iter().rev().map(|e| e.child.as_str()));
            }
            _ => leaves.push(link.to_owned()),
        }
    }

    Ok(KinematicTree {
        root,
        children,
        actuated,
        traversal,
        leaves,
        axes,
        joint_count: model.joints.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("configuration has {got} values, tree has {expected} actuated joints")]
    ConfigLength { expected: usize, got: usize },
    #[error("joint `{joint}` value {value} outside limits [{lower}, {upper}]")]
    OutOfLimits {
        joint: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("joint `{joint}` is {kind}; forward kinematics supports revolute, continuous, prismatic and fixed joints")]
    UnsupportedJoint { joint: String, kind: JointKind },
    #[error("tree was built from a different model")]
    ModelMismatch,
}

/// Joint values aligned with [`KinematicTree::actuated`]: radians for
/// rotational joints, meters for prismatic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig(Vec<f64>);

const LIMIT_SLACK: f64 = 1e-9;

impl JointConfig {
    /// Checks length and, for revolute/prismatic joints with both bounds,
    /// that each value lies within its limits.
    pub fn new(tree: &KinematicTree, model: &RobotModel, values: Vec<f64>) -> Result<Self, KinematicsError> {
        if values.len() != tree.actuated.len() {
            return Err(KinematicsError::ConfigLength {
                expected: tree.actuated.len(),
                got: values.len(),
            });
        }
        for (&ji, &value) in tree.actuated.iter().zip(&values) {
            let joint = &model.joints[ji];
            if !joint.kind.requires_limit() {
                continue;
            }
            if let Some((lower, upper)) = joint.limit.as_ref().and_then(|l| l.range()) {
                if value < lower - LIMIT_SLACK || value > upper + LIMIT_SLACK {
                    return Err(KinematicsError::OutOfLimits {
                        joint: joint.name.clone(),
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(Self(values))
    }

    /// The all-zero home configuration. Not checked against limits.
    pub fn zeros(tree: &KinematicTree) -> Self {
        Self(vec![0.0; tree.actuated.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Frame of every link reachable from the root, keyed by link name.
pub fn forward_kinematics(
    tree: &KinematicTree,
    model: &RobotModel,
    q: &JointConfig,
) -> Result<BTreeMap<String, Transform>, KinematicsError> {
    if model.joints.len() != tree.joint_count {
        return Err(KinematicsError::ModelMismatch);
    }
    if q.0.len() != tree.actuated.len() {
        return Err(KinematicsError::ConfigLength {
            expected: tree.actuated.len(),
            got: q.0.len(),
        });
    }
    let mut slot = vec![None; model.joints.len()];
    for (k, &ji) in tree.actuated.iter().enumerate() {
        slot[ji] = Some(q.0[k]);
    }
    let mut frames = BTreeMap::new();
    frames.insert(tree.root.clone(), Transform::identity());
    for &ji in &tree.traversal {
        let joint = &model.joints[ji];
        let value = slot[ji].unwrap_or(0.0);
        let motion = match (joint.kind, tree.axis(ji)) {
            (JointKind::Fixed, _) => Transform::identity(),
            (JointKind::Revolute | JointKind::Continuous, Some(axis)) => {
                Transform::rotation_about(axis, value)
            }
            (JointKind::Prismatic, Some(axis)) => Transform::translation_along(axis, value),
            (kind, _) => {
                return Err(KinematicsError::UnsupportedJoint {
                    joint: joint.name.clone(),
                    kind,
                })
            }
        };
        let parent = *frames.get(&joint.parent).ok_or(KinematicsError::ModelMismatch)?;
        let frame = parent * Transform::from_pose(&joint.origin) * motion;
        frames.insert(joint.child.clone(), frame);
    }
    Ok(frames)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FkOptions {
    /// Configurations to compare; the first is always the home pose.
    pub samples: usize,
    pub seed: u64,
    /// Tolerance in meters (translation) and radians (rotation).
    pub tol: f64,
}

impl Default for FkOptions {
    fn default() -> Self {
        Self {
            samples: 16,
            seed: 0,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkSample {
    pub config: Vec<f64>,
    pub translation_deviation: f64,
    pub rotation_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkComparison {
    pub equal: bool,
    /// Largest leaf translation difference over all samples, meters.
    pub worst_deviation: f64,
    /// Largest leaf rotation difference over all samples, radians.
    pub worst_rotation: f64,
    pub samples: Vec<FkSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Incomparable {
    #[error("actuated joint counts differ ({a} vs {b})")]
    JointCount { a: usize, b: usize },
    #[error("actuated joint {index} is {a} in one model and {b} in the other")]
    JointKinds {
        index: usize,
        a: JointKind,
        b: JointKind,
    },
    #[error("leaf link counts differ ({a} vs {b})")]
    LeafCount { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FkCompareError {
    #[error(transparent)]
    Incomparable(#[from] Incomparable),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
}

fn motion_class(kind: JointKind) -> u8 {
    match kind {
        JointKind::Revolute | JointKind::Continuous => 0,
        JointKind::Prismatic => 1,
        JointKind::Fixed => 2,
        JointKind::Floating => 3,
        JointKind::Planar => 4,
    }
}

/// Sampling interval for one actuated joint.
fn joint_range(model: &RobotModel, index: usize) -> (f64, f64) {
    let joint = &model.joints[index];
    let default = match joint.kind {
        JointKind::Prismatic => (-1.0, 1.0),
        _ => (-PI, PI),
    };
    if !joint.kind.requires_limit() {
        return default;
    }
    joint
        .limit
        .as_ref()
        .and_then(|l| l.range())
        .unwrap_or(default)
}

/// Intersection of the two ranges, or their hull when they are disjoint.
/// Either way the result does not depend on argument order.
fn shared_range(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo <= hi {
        (lo, hi)
    } else {
        (a.0.min(b.0), a.1.max(b.1))
    }
}

/// Compare two mechanisms by their leaf frames over sampled configurations.
///
/// Actuated joints are paired by index and leaves by depth-first position,
/// never by name. Sample 0 is the home pose (zero clamped into range); the
/// rest are drawn uniformly from each joint's range with a ChaCha8 stream
/// seeded from `opts.seed`.
pub fn fk_equivalent(
    tree_a: &KinematicTree,
    model_a: &RobotModel,
    tree_b: &KinematicTree,
    model_b: &RobotModel,
    opts: &FkOptions,
) -> Result<FkComparison, FkCompareError> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(FkCompareError::InvalidTolerance(opts.tol));
    }
    let (na, nb) = (tree_a.actuated.len(), tree_b.actuated.len());
    if na != nb {
        return Err(Incomparable::JointCount { a: na, b: nb }.into());
    }
    for (index, (&ja, &jb)) in tree_a.actuated.iter().zip(&tree_b.actuated).enumerate() {
        let (ka, kb) = (model_a.joints[ja].kind, model_b.joints[jb].kind);
        if motion_class(ka) != motion_class(kb) {
            return Err(Incomparable::JointKinds { index, a: ka, b: kb }.into());
        }
    }
    let (la, lb) = (tree_a.leaves.len(), tree_b.leaves.len());
    if la != lb {
        return Err(Incomparable::LeafCount { a: la, b: lb }.into());
    }

    let ranges: Vec<(f64, f64)> = tree_a
        .actuated
        .iter()
        .zip(&tree_b.actuated)
        .map(|(&ja, &jb)| shared_range(joint_range(model_a, ja), joint_range(model_b, jb)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = FkComparison {
        equal: true,
        worst_deviation: 0.0,
        worst_rotation: 0.0,
        samples: Vec::with_capacity(opts.samples.max(1)),
    };
    for s in 0..opts.samples.max(1) {
        let config: Vec<f64> = ranges
            .iter()
            .map(|&(lo, hi)| {
                if s == 0 {
                    0.0f64.clamp(lo, hi)
                } else if lo < hi {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        // Limits are not rechecked: with disjoint ranges the hull lies
        // outside one model's limits on purpose.
        let q = JointConfig(config);
        let fa = forward_kinematics(tree_a, model_a, &q)?;
        let fb = forward_kinematics(tree_b, model_b, &q)?;
        let (mut dt, mut dr) = (0.0f64, 0.0f64);
        for (leaf_a, leaf_b) in tree_a.leaves.iter().zip(&tree_b.leaves) {
            let (ta, tb) = (&fa[leaf_a], &fb[leaf_b]);
            dt = dt.max(ta.translation_distance_to(tb));
            dr = dr.max(ta.rotation_angle_to(tb));
        }
        out.worst_deviation = out.worst_deviation.max(dt);
        out.worst_rotation = out.worst_rotation.max(dr);
        out.samples.push(FkSample {
            config: q.0,
            translation_deviation: dt,
            rotation_deviation: dr,
        });
    }
    out.equal = out.worst_deviation <= opts.tol && out.worst_rotation <= opts.tol;
    Ok(out)
}
