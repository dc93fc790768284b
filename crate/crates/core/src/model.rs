//! Typed, immutable URDF robot model and the XML reader that builds it.
//!
//! The reader is deliberately permissive about things the ROS tooling
//! tolerates (vendor extension elements, unknown attributes) and strict about
//! things that cannot be defaulted safely (malformed numbers, missing
//! required names). Anything it refuses becomes a [`ParseFailure`], which the
//! validator reports under code F.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// 1-based line/column of an element in the source document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct TextPos {
    pub line: u32,
    pub column: u32,
}

impl TextPos {
    pub const fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for TextPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// `origin` element: translation in meters, fixed-axis roll/pitch/yaw in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Pose {
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        xyz: [0.0; 3],
        rpy: [0.0; 3],
    };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Geometry {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
    Mesh { uri: String, scale: [f64; 3] },
}

impl Geometry {
    pub fn mesh_uri(&self) -> Option<&str> {
        match self {
            Geometry::Mesh { uri, .. } => Some(uri),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Inertia {
    pub ixx: f64,
    pub ixy: f64,
    pub ixz: f64,
    pub iyy: f64,
    pub iyz: f64,
    pub izz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inertial {
    pub origin: Pose,
    pub mass: f64,
    pub inertia: Inertia,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Visual {
    pub origin: Pose,
    pub geometry: Geometry,
    /// Name of the referenced (or inline-defined) material, if any.
    pub material_name: Option<String>,
    pub pos: TextPos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Collision {
    pub origin: Pose,
    pub geometry: Geometry,
    pub pos: TextPos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub name: String,
    pub inertial: Option<Inertial>,
    pub visuals: Vec<Visual>,
    pub collisions: Vec<Collision>,
    pub pos: TextPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
    Floating,
    Planar,
}

impl JointKind {
    pub const ALL: [JointKind; 6] = [
        JointKind::Revolute,
        JointKind::Continuous,
        JointKind::Prismatic,
        JointKind::Fixed,
        JointKind::Floating,
        JointKind::Planar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Continuous => "continuous",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
            JointKind::Floating => "floating",
            JointKind::Planar => "planar",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Joints whose single axis carries motion.
    pub fn uses_axis(self) -> bool {
        matches!(
            self,
            JointKind::Revolute | JointKind::Continuous | JointKind::Prismatic
        )
    }

    /// Joints the ROS parser rejects without `limit effort=.. velocity=..`.
    pub fn requires_limit(self) -> bool {
        matches!(self, JointKind::Revolute | JointKind::Prismatic)
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `limit` element. Attributes stay optional so that the validator can see
/// which ones were omitted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct JointLimit {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub effort: Option<f64>,
    pub velocity: Option<f64>,
}

impl JointLimit {
    /// `(lower, upper)` when both bounds are given.
    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.lower?, self.upper?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    pub origin: Pose,
    pub axis: [f64; 3],
    pub limit: Option<JointLimit>,
    pub pos: TextPos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Material {
    pub name: String,
    pub color: Option<[f64; 4]>,
    pub texture: Option<String>,
    pub pos: TextPos,
}

/// Something the reader skipped rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Notice {
    pub pos: TextPos,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobotModel {
    /// Empty when the `name` attribute is missing.
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    /// Every material definition (top level or inline in a visual) carrying
    /// a color or texture, in document order.
    pub materials: Vec<Material>,
    pub notices: Vec<Notice>,
    pub source_line_count: usize,
    pub pos: TextPos,
}

impl RobotModel {
    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Every mesh URI with a flag telling whether it is used for collision.
    pub fn mesh_uris(&self) -> impl Iterator<Item = (&str, bool)> {
        self.links.iter().flat_map(|l| {
            let visual = l
                .visuals
                .iter()
                .filter_map(|v| v.geometry.mesh_uri().map(|u| (u, false)));
            let collision = l
                .collisions
                .iter()
                .filter_map(|c| c.geometry.mesh_uri().map(|u| (u, true)));
            visual.chain(collision)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailureKind {
    Encoding,
    Xml,
    RootNotRobot,
    InvalidNumber,
    WrongArity,
    MissingAttribute,
    MissingElement,
    InvalidValue,
    UnknownJointType,
    UnknownGeometry,
    /// The file could not be read at all.
    Io,
}

/// A document that could not be turned into a [`RobotModel`].
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{message}")]
pub struct ParseFailure {
    pub kind: ParseFailureKind,
    pub pos: TextPos,
    pub message: String,
}

impl ParseFailure {
    fn new(kind: ParseFailureKind, pos: TextPos, message: impl Into<String>) -> Self {
        Self {
            kind,
            pos,
            message: message.into(),
        }
    }

    /// Unreadable file; the position is 0:0.
    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ParseFailureKind::Io, TextPos { line: 0, column: 0 }, message)
    }

    pub fn code(&self) -> crate::validate::Code {
        crate::validate::Code::F
    }
}

/// Number of lines in `raw`; a trailing line without terminator still
/// counts. LF, CR and CRLF are each one terminator.
pub fn line_count(raw: &[u8]) -> usize {
    let mut lines = 0;
    let mut i = 0;
    let mut open = false;
    while i < raw.len() {
        match raw[i] {
            b'\n' => {
                lines += 1;
                open = false;
            }
            b'\r' => {
                lines += 1;
                open = false;
                if raw.get(i + 1) == Some(&b'\n') {
                    i += 1;
                }
            }
            _ => open = true,
        }
        i += 1;
    }
    lines + usize::from(open)
}

const UTF8_BOM: &[u8] = b"\xEF\xBB\xBF";

/// Strip an optional UTF-8 BOM and decode, rejecting every other encoding.
pub fn decode_text(bytes: &[u8]) -> Result<&str, ParseFailure> {
    if bytes.starts_with(b"\xFF\xFE") || bytes.starts_with(b"\xFE\xFF") {
        return Err(ParseFailure::new(
            ParseFailureKind::Encoding,
            TextPos::new(1, 1),
            "UTF-16 input is not supported; expected UTF-8",
        ));
    }
    let body = bytes.strip_prefix(UTF8_BOM).unwrap_or(bytes);
    std::str::from_utf8(body).map_err(|e| {
        let valid = &body[..e.valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        let column = valid.iter().rev().take_while(|&&b| b != b'\n').count() as u32 + 1;
        ParseFailure::new(
            ParseFailureKind::Encoding,
            TextPos::new(line, column),
            format!("invalid UTF-8 at byte {}", e.valid_up_to()),
        )
    })
}

/// Parse URDF bytes into a [`RobotModel`].
pub fn parse_urdf(input: impl AsRef<[u8]>) -> Result<RobotModel, ParseFailure> {
    let bytes = input.as_ref();
    let text = decode_text(bytes)?;
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, opts).map_err(|e| {
        let p = e.pos();
        ParseFailure::new(
            ParseFailureKind::Xml,
            TextPos::new(p.row, p.col),
            format!("XML parsing failed: {e}"),
        )
    })?;
    let mut reader = Reader {
        doc: &doc,
        notices: Vec::new(),
    };
    let mut model = reader.robot(doc.root_element())?;
    model.source_line_count = line_count(bytes);
    model.notices = reader.notices;
    Ok(model)
}

// Children of `robot` that are standard ROS extensions and carry nothing the
// model needs.
const SILENTLY_IGNORED: &[&str] = &["gazebo", "transmission", "ros2_control", "sensor"];
const JOINT_EXTRAS: &[&str] = &["dynamics", "mimic", "safety_controller", "calibration"];

type Node<'a, 'i> = roxmltree::Node<'a, 'i>;

struct Reader<'a, 'i> {
    doc: &'a roxmltree::Document<'i>,
    notices: Vec<Notice>,
}

impl<'a, 'i> Reader<'a, 'i> {
    fn pos(&self, node: Node) -> TextPos {
        let p = self.doc.text_pos_at(node.range().start);
        TextPos::new(p.row, p.col)
    }

    fn fail(&self, kind: ParseFailureKind, node: Node, msg: impl Into<String>) -> ParseFailure {
        ParseFailure::new(kind, self.pos(node), msg)
    }

    fn notice(&mut self, node: Node, message: String) {
        let pos = self.pos(node);
        self.notices.push(Notice { pos, message });
    }

    fn check_attrs(&mut self, node: Node, known: &[&str]) {
        for attr in node.attributes() {
            if attr.namespace().is_none() && !known.contains(&attr.name()) {
                let msg = format!(
                    "ignored attribute `{}` on `{}`",
                    attr.name(),
                    node.tag_name().name()
                );
                self.notice(node, msg);
            }
        }
    }

    fn unknown_child(&mut self, parent: Node, child: Node) {
        let msg = format!(
            "ignored element `{}` inside `{}`",
            child.tag_name().name(),
            parent.tag_name().name()
        );
        self.notice(child, msg);
    }

    fn required_attr(&self, node: Node<'a, 'i>, name: &str) -> Result<&'a str, ParseFailure> {
        match node.attribute(name) {
            Some(v) if !v.is_empty() => Ok(v),
            _ => Err(self.fail(
                ParseFailureKind::MissingAttribute,
                node,
                format!(
                    "`{}` element requires a non-empty `{name}` attribute",
                    node.tag_name().name()
                ),
            )),
        }
    }

    fn number(&self, node: Node, attr: &str, raw: &str) -> Result<f64, ParseFailure> {
        match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.fail(
                ParseFailureKind::InvalidNumber,
                node,
                format!(
                    "`{}` attribute `{attr}` is not a finite number: {raw:?}",
                    node.tag_name().name()
                ),
            )),
        }
    }

    fn opt_number(&self, node: Node, attr: &str) -> Result<Option<f64>, ParseFailure> {
        node.attribute(attr)
            .map(|raw| self.number(node, attr, raw))
            .transpose()
    }

    fn req_number(&self, node: Node, attr: &str) -> Result<f64, ParseFailure> {
        let raw = self.required_attr(node, attr)?;
        self.number(node, attr, raw)
    }

    fn vector<const N: usize>(&self, node: Node, attr: &str, raw: &str) -> Result<[f64; N], ParseFailure> {
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if parts.len() != N {
            return Err(self.fail(
                ParseFailureKind::WrongArity,
                node,
                format!(
                    "`{}` attribute `{attr}` needs {N} values, found {}: {raw:?}",
                    node.tag_name().name(),
                    parts.len()
                ),
            ));
        }
        let mut out = [0.0; N];
        for (slot, part) in out.iter_mut().zip(parts) {
            *slot = self.number(node, attr, part)?;
        }
        Ok(out)
    }

    fn opt_vector<const N: usize>(&self, node: Node, attr: &str) -> Result<Option<[f64; N]>, ParseFailure> {
        node.attribute(attr)
            .map(|raw| self.vector::<N>(node, attr, raw))
            .transpose()
    }

    fn positive(&self, node: Node, attr: &str, v: f64) -> Result<f64, ParseFailure> {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.fail(
                ParseFailureKind::InvalidValue,
                node,
                format!(
                    "`{}` attribute `{attr}` must be strictly positive, got {v}",
                    node.tag_name().name()
                ),
            ))
        }
    }

    fn robot(&mut self, root: Node<'a, 'i>) -> Result<RobotModel, ParseFailure> {
        if root.tag_name().name() != "robot" {
            return Err(self.fail(
                ParseFailureKind::RootNotRobot,
                root,
                format!("root element is `{}`, expected `robot`", root.tag_name().name()),
            ));
        }
        self.check_attrs(root, &["name", "version"]);
        let mut model = RobotModel {
            name: root.attribute("name").unwrap_or_default().to_owned(),
            links: Vec::new(),
            joints: Vec::new(),
            materials: Vec::new(),
            notices: Vec::new(),
            source_line_count: 0,
            pos: self.pos(root),
        };
        for child in root.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "link" => {
                    let link = self.link(child, &mut model.materials)?;
                    model.links.push(link);
                }
                "joint" => model.joints.push(self.joint(child)?),
                "material" => {
                    let name = self.required_attr(child, "name")?;
                    let material = self.material(child, name)?;
                    model.materials.push(material);
                }
                name if SILENTLY_IGNORED.contains(&name) => {}
                _ => self.unknown_child(root, child),
            }
        }
        Ok(model)
    }

    fn material(&mut self, node: Node<'a, 'i>, name: &str) -> Result<Material, ParseFailure> {
        self.check_attrs(node, &["name"]);
        let mut material = Material {
            name: name.to_owned(),
            color: None,
            texture: None,
            pos: self.pos(node),
        };
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "color" => {
                    let raw = self.required_attr(child, "rgba")?;
                    material.color = Some(self.vector::<4>(child, "rgba", raw)?);
                }
                "texture" => {
                    material.texture = child.attribute("filename").map(str::to_owned);
                }
                _ => self.unknown_child(node, child),
            }
        }
        Ok(material)
    }

    fn origin(&mut self, parent: Node<'a, 'i>) -> Result<Pose, ParseFailure> {
        let Some(node) = first_child(parent, "origin") else {
            return Ok(Pose::IDENTITY);
        };
        self.check_attrs(node, &["xyz", "rpy"]);
        Ok(Pose {
            xyz: self.opt_vector::<3>(node, "xyz")?.unwrap_or([0.0; 3]),
            rpy: self.opt_vector::<3>(node, "rpy")?.unwrap_or([0.0; 3]),
        })
    }

    fn link(&mut self, node: Node<'a, 'i>, materials: &mut Vec<Material>) -> Result<Link, ParseFailure> {
        self.check_attrs(node, &["name", "type"]);
        let name = self.required_attr(node, "name")?.to_owned();
        let mut link = Link {
            name,
            inertial: None,
            visuals: Vec::new(),
            collisions: Vec::new(),
            pos: self.pos(node),
        };
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "inertial" => {
                    if link.inertial.is_none() {
                        link.inertial = Some(self.inertial(child)?);
                    }
                }
                "visual" => {
                    let visual = self.visual(child, materials)?;
                    link.visuals.push(visual);
                }
                "collision" => {
                    self.check_attrs(child, &["name"]);
                    let collision = Collision {
                        origin: self.origin(child)?,
                        geometry: self.geometry(child)?,
                        pos: self.pos(child),
                    };
                    link.collisions.push(collision);
                }
                _ => self.unknown_child(node, child),
            }
        }
        Ok(link)
    }

    fn inertial(&mut self, node: Node<'a, 'i>) -> Result<Inertial, ParseFailure> {
        let origin = self.origin(node)?;
        let mass_node = first_child(node, "mass").ok_or_else(|| {
            self.fail(ParseFailureKind::MissingElement, node, "`inertial` requires a `mass` element")
        })?;
        let mass = self.req_number(mass_node, "value")?;
        if mass < 0.0 {
            return Err(self.fail(
                ParseFailureKind::InvalidValue,
                mass_node,
                format!("mass must be non-negative, got {mass}"),
            ));
        }
        let inode = first_child(node, "inertia").ok_or_else(|| {
            self.fail(ParseFailureKind::MissingElement, node, "`inertial` requires an `inertia` element")
        })?;
        let inertia = Inertia {
            ixx: self.req_number(inode, "ixx")?,
            ixy: self.req_number(inode, "ixy")?,
            ixz: self.req_number(inode, "ixz")?,
            iyy: self.req_number(inode, "iyy")?,
            iyz: self.req_number(inode, "iyz")?,
            izz: self.req_number(inode, "izz")?,
        };
        Ok(Inertial {
            origin,
            mass,
            inertia,
        })
    }

    fn visual(&mut self, node: Node<'a, 'i>, materials: &mut Vec<Material>) -> Result<Visual, ParseFailure> {
        self.check_attrs(node, &["name"]);
        let origin = self.origin(node)?;
        let geometry = self.geometry(node)?;
        let mut material_name = None;
        if let Some(mnode) = first_child(node, "material") {
            let name = mnode.attribute("name").filter(|n| !n.is_empty());
            let has_body = mnode.children().any(|c| c.is_element());
            if has_body {
                let m = self.material(mnode, name.unwrap_or_default())?;
                // anonymous inline materials cannot be referenced
                if !m.name.is_empty() {
                    materials.push(m);
                }
            }
            material_name = name.map(str::to_owned);
        }
        for child in node.children().filter(Node::is_element) {
            if !matches!(child.tag_name().name(), "origin" | "geometry" | "material") {
                self.unknown_child(node, child);
            }
        }
        Ok(Visual {
            origin,
            geometry,
            material_name,
            pos: self.pos(node),
        })
    }

    fn geometry(&mut self, parent: Node<'a, 'i>) -> Result<Geometry, ParseFailure> {
        let gnode = first_child(parent, "geometry").ok_or_else(|| {
            self.fail(
                ParseFailureKind::MissingElement,
                parent,
                format!("`{}` requires a `geometry` element", parent.tag_name().name()),
            )
        })?;
        let Some(shape) = gnode.children().find(Node::is_element) else {
            return Err(self.fail(ParseFailureKind::MissingElement, gnode, "`geometry` has no shape"));
        };
        match shape.tag_name().name() {
            "box" => {
                let raw = self.required_attr(shape, "size")?;
                let size = self.vector::<3>(shape, "size", raw)?;
                for v in size {
                    self.positive(shape, "size", v)?;
                }
                Ok(Geometry::Box { size })
            }
            "cylinder" => {
                let radius = self.req_number(shape, "radius")?;
                let length = self.req_number(shape, "length")?;
                Ok(Geometry::Cylinder {
                    radius: self.positive(shape, "radius", radius)?,
                    length: self.positive(shape, "length", length)?,
                })
            }
            "sphere" => {
                let radius = self.req_number(shape, "radius")?;
                Ok(Geometry::Sphere {
                    radius: self.positive(shape, "radius", radius)?,
                })
            }
            "mesh" => {
                self.check_attrs(shape, &["filename", "scale"]);
                let uri = self.required_attr(shape, "filename")?.to_owned();
                let scale = self.opt_vector::<3>(shape, "scale")?.unwrap_or([1.0; 3]);
                Ok(Geometry::Mesh { uri, scale })
            }
            other => Err(self.fail(
                ParseFailureKind::UnknownGeometry,
                shape,
                format!("unknown geometry type `{other}`"),
            )),
        }
    }

    fn joint(&mut self, node: Node<'a, 'i>) -> Result<Joint, ParseFailure> {
        self.check_attrs(node, &["name", "type"]);
        let name = self.required_attr(node, "name")?.to_owned();
        let type_name = self.required_attr(node, "type")?;
        let kind = JointKind::from_name(type_name).ok_or_else(|| {
            self.fail(
                ParseFailureKind::UnknownJointType,
                node,
                format!("joint `{name}` has unknown type `{type_name}`"),
            )
        })?;
        let link_ref = |tag: &str| -> Result<String, ParseFailure> {
            let el = first_child(node, tag).ok_or_else(|| {
                self.fail(
                    ParseFailureKind::MissingElement,
                    node,
                    format!("joint `{name}` has no `{tag}` element"),
                )
            })?;
            self.required_attr(el, "link").map(str::to_owned)
        };
        let parent = link_ref("parent")?;
        let child = link_ref("child")?;
        let origin = self.origin(node)?;
        let axis = match first_child(node, "axis") {
            Some(a) => {
                let raw = self.required_attr(a, "xyz")?;
                self.vector::<3>(a, "xyz", raw)?
            }
            None => [1.0, 0.0, 0.0],
        };
        let limit = match first_child(node, "limit") {
            Some(l) => {
                self.check_attrs(l, &["lower", "upper", "effort", "velocity"]);
                let limit = JointLimit {
                    lower: self.opt_number(l, "lower")?,
                    upper: self.opt_number(l, "upper")?,
                    effort: self.opt_number(l, "effort")?,
                    velocity: self.opt_number(l, "velocity")?,
                };
                if let Some((lo, hi)) = limit.range() {
                    if lo > hi {
                        return Err(self.fail(
                            ParseFailureKind::InvalidValue,
                            l,
                            format!("joint `{name}` limit lower {lo} exceeds upper {hi}"),
                        ));
                    }
                }
                Some(limit)
            }
            None => None,
        };
        for child in node.children().filter(Node::is_element) {
            let tag = child.tag_name().name();
            if !matches!(tag, "parent" | "child" | "origin" | "axis" | "limit")
                && !JOINT_EXTRAS.contains(&tag)
            {
                self.unknown_child(node, child);
            }
        }
        Ok(Joint {
            name,
            kind,
            parent,
            child,
            origin,
            axis,
            limit,
            pos: self.pos(node),
        })
    }
}

fn first_child<'a, 'i>(node: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == tag)
}
