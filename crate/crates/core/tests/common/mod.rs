//! Test-only oracles and fixture generators. Nothing here calls into the
//! library's kinematics or dedup code.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn rot(r: [[f64; 3]; 3], t: [f64; 3]) -> Mat4 {
    let mut m = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = r[i][j];
        }
        m[i][3] = t[i];
    }
    m
}

fn rx(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    rot([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]], [0.0; 3])
}

fn ry(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    rot([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]], [0.0; 3])
}

fn rz(a: f64) -> Mat4 {
    let (s, c) = a.sin_cos();
    rot([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], [0.0; 3])
}

pub fn translation(t: [f64; 3]) -> Mat4 {
    rot([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], t)
}

/// Translation, then fixed-axis roll about x, pitch about y, yaw about z.
pub fn origin(xyz: [f64; 3], rpy: [f64; 3]) -> Mat4 {
    let r = mul(&rz(rpy[2]), &mul(&ry(rpy[1]), &rx(rpy[0])));
    mul(&translation(xyz), &r)
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Rodrigues' formula.
pub fn axis_angle(axis: [f64; 3], angle: f64) -> Mat4 {
    let [x, y, z] = unit(axis);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    rot(
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ],
        [0.0; 3],
    )
}

pub fn slide(axis: [f64; 3], d: f64) -> Mat4 {
    let u = unit(axis);
    translation([u[0] * d, u[1] * d, u[2] * d])
}

pub fn to_mat4(t: &urdf_inspect::Transform) -> Mat4 {
    let mut m = IDENTITY;
    for (i, row) in m.iter_mut().take(3).enumerate() {
        for (j, cell) in row.iter_mut().take(3).enumerate() {
            *cell = t.rotation[(i, j)];
        }
        row[3] = t.translation[i];
    }
    m
}

pub fn translation_gap(a: &Mat4, b: &Mat4) -> f64 {
    (0..3).map(|i| (a[i][3] - b[i][3]).powi(2)).sum::<f64>().sqrt()
}

/// Rotation angle between the rotation blocks, via the Frobenius norm of
/// their difference (‖Ra − Rb‖ = 2√2 sin(θ/2)), which stays accurate for
/// small angles.
pub fn rotation_gap(a: &Mat4, b: &Mat4) -> f64 {
    let mut sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            sq += (a[i][j] - b[i][j]).powi(2);
        }
    }
    let s = (sq.sqrt() / (2.0 * 2f64.sqrt())).min(1.0);
    2.0 * s.asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Revolute => "revolute",
            Kind::Continuous => "continuous",
            Kind::Prismatic => "prismatic",
            Kind::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainJoint {
    pub kind: Kind,
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
    pub axis: [f64; 3],
    pub lower: f64,
    pub upper: f64,
}

/// A serial chain: joint `i` connects `l{i}` to `l{i+1}`.
#[derive(Debug, Clone)]
pub struct Chain {
    pub joints: Vec<ChainJoint>,
}

impl Chain {
    pub fn random(rng: &mut impl Rng, max_joints: usize, allow_continuous: bool) -> Chain {
        let n = rng.gen_range(1..=max_joints);
        let joints = (0..n)
            .map(|_| {
                let kind = match rng.gen_range(0..if allow_continuous { 4 } else { 3 }) {
                    0 => Kind::Revolute,
                    1 => Kind::Prismatic,
                    2 => Kind::Fixed,
                    _ => Kind::Continuous,
                };
                let mut v = || rng.gen_range(-1.0..1.0);
                let xyz = [v(), v(), v()];
                let mut axis = [v(), v(), v()];
                while axis.iter().map(|a| a * a).sum::<f64>() < 1e-2 {
                    axis = [v(), v(), v()];
                }
                let rpy = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
                let (lower, upper) = match kind {
                    Kind::Prismatic => (rng.gen_range(-1.0..0.0), rng.gen_range(0.0..1.0)),
                    _ => (rng.gen_range(-PI..0.0), rng.gen_range(0.0..PI)),
                };
                ChainJoint {
                    kind,
                    xyz,
                    rpy,
                    axis,
                    lower,
                    upper,
                }
            })
            .collect();
        Chain { joints }
    }

    pub fn actuated(&self) -> Vec<&ChainJoint> {
        self.joints.iter().filter(|j| j.kind != Kind::Fixed).collect()
    }

    pub fn random_config(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.actuated()
            .iter()
            .map(|j| rng.gen_range(j.lower..=j.upper))
            .collect()
    }

    pub fn urdf(&self, name: &str) -> String {
        let mut s = format!("<?xml version=\"1.0\"?>\n<robot name=\"{name}\">\n");
        for i in 0..=self.joints.len() {
            writeln!(s, "  <link name=\"l{i}\"/>").unwrap();
        }
        for (i, j) in self.joints.iter().enumerate() {
            let f = |v: [f64; 3]| format!("{:?} {:?} {:?}", v[0], v[1], v[2]);
            writeln!(s, "  <joint name=\"j{i}\" type=\"{}\">", j.kind.name()).unwrap();
            writeln!(s, "    <parent link=\"l{i}\"/>\n    <child link=\"l{}\"/>", i + 1).unwrap();
            writeln!(s, "    <origin xyz=\"{}\" rpy=\"{}\"/>", f(j.xyz), f(j.rpy)).unwrap();
            if j.kind != Kind::Fixed {
                writeln!(s, "    <axis xyz=\"{}\"/>", f(j.axis)).unwrap();
            }
            if matches!(j.kind, Kind::Revolute | Kind::Prismatic) {
                writeln!(
                    s,
                    "    <limit lower=\"{:?}\" upper=\"{:?}\" effort=\"10\" velocity=\"1\"/>",
                    j.lower, j.upper
                )
                .unwrap();
            }
            s.push_str("  </joint>\n");
        }
        s.push_str("</robot>\n");
        s
    }

    /// Frame of every link `l0..=ln` for configuration `q` (actuated order).
    pub fn oracle_frames(&self, q: &[f64]) -> Vec<Mat4> {
        let mut frames = vec![IDENTITY];
        let mut k = 0;
        for j in &self.joints {
            let motion = match j.kind {
                Kind::Fixed => IDENTITY,
                Kind::Revolute | Kind::Continuous => {
                    k += 1;
                    axis_angle(j.axis, q[k - 1])
                }
                Kind::Prismatic => {
                    k += 1;
                    slide(j.axis, q[k - 1])
                }
            };
            let last = frames.last().unwrap();
            frames.push(mul(&mul(last, &origin(j.xyz, j.rpy)), &motion));
        }
        frames
    }
}

/// Text normalization applied before comparing files, written out
/// independently: drop spaces and tabs, then turn every line break into CRLF.
pub fn oracle_normalize(path: &Path, raw: &[u8]) -> Vec<u8> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let text = match ext.as_str() {
        "urdf" | "xacro" | "dae" | "obj" | "mtl" | "xml" | "json" | "txt" | "md" => true,
        "stl" => {
            let head = &raw[..raw.len().min(1024)];
            let start = head.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(head.len());
            head[start..].starts_with(b"solid") && !head.contains(&0)
        }
        _ => false,
    };
    if !text {
        return raw.to_vec();
    }
    let s: Vec<u8> = raw.iter().copied().filter(|b| *b != b' ' && *b != b'\t').collect();
    let mut out = Vec::new();
    let mut prev_cr = false;
    for b in s {
        match b {
            b'\n' if prev_cr => {}
            b'\n' | b'\r' => out.extend_from_slice(b"\r\n"),
            other => out.push(other),
        }
        prev_cr = b == b'\r';
    }
    out
}

/// O(n²) pairwise grouping: union of all pairs with equal normalized bytes,
/// as sorted groups of ≥ 2, sorted by first member.
pub fn brute_force_groups(paths: &[PathBuf]) -> Vec<Vec<PathBuf>> {
    let contents: Vec<Vec<u8>> = paths
        .iter()
        .map(|p| oracle_normalize(p, &fs::read(p).unwrap()))
        .collect();
    let mut assigned = vec![false; paths.len()];
    let mut groups = Vec::new();
    for i in 0..paths.len() {
        if assigned[i] {
            continue;
        }
        let mut group = vec![paths[i].clone()];
        for j in i + 1..paths.len() {
            if !assigned[j] && contents[i] == contents[j] {
                assigned[j] = true;
                group.push(paths[j].clone());
            }
        }
        if group.len() > 1 {
            group.sort();
            groups.push(group);
        }
    }
    groups.sort();
    groups
}

/// Writes `content` to `root/rel`, creating parents.
pub fn put(root: &Path, rel: &str, content: impl AsRef<[u8]>) -> PathBuf {
    let path = root.join(rel);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, content).unwrap();
    path
}

pub fn fixture(name: &str) -> PathBuf {
    // Works from any crate in the workspace.
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

pub const LISTING_1: &str = "listing1.urdf";

/// Defective and clean URDF documents, one per error class. Each defective
/// document has exactly one problem.
pub fn seeded_documents() -> Vec<(String, Option<&'static str>, String)> {
    let base_links = |extra: &str| {
        format!(
            "<?xml version=\"1.0\"?>\n<robot name=\"r\">\n  <link name=\"base\"/>\n  <link name=\"tip\"/>\n{extra}</robot>\n"
        )
    };
    let joint = |kind: &str, inner: &str, parent: &str, child: &str| {
        format!(
            "  <joint name=\"j\" type=\"{kind}\">\n    <parent link=\"{parent}\"/>\n    <child link=\"{child}\"/>\n{inner}  </joint>\n"
        )
    };
    let limit = "    <limit lower=\"-1\" upper=\"1\" effort=\"5\" velocity=\"2\"/>\n";
    let mut docs: Vec<(String, Option<&'static str>, String)> = Vec::new();

    // A: limit missing or incomplete on revolute/prismatic joints.
    docs.push(("a_no_limit".into(), Some("A"), base_links(&joint("revolute", "", "base", "tip"))));
    docs.push((
        "a_no_effort".into(),
        Some("A"),
        base_links(&joint("prismatic", "    <limit lower=\"0\" upper=\"1\" velocity=\"1\"/>\n", "base", "tip")),
    ));
    docs.push((
        "a_no_velocity".into(),
        Some("A"),
        base_links(&joint("revolute", "    <limit effort=\"3\"/>\n", "base", "tip")),
    ));
    // B: no links at all.
    docs.push(("b_empty".into(), Some("B"), "<robot name=\"r\"/>\n".into()));
    docs.push(("b_materials_only".into(), Some("B"), "<robot name=\"r\">\n  <material name=\"m\"/>\n</robot>\n".into()));
    docs.push((
        "b_gazebo_only".into(),
        Some("B"),
        "<robot name=\"r\">\n  <gazebo><static>true</static></gazebo>\n</robot>\n".into(),
    ));
    // C: duplicate link names.
    docs.push((
        "c_dup".into(),
        Some("C"),
        "<robot name=\"r\">\n  <link name=\"a\"/>\n  <link name=\"a\"/>\n</robot>\n".into(),
    ));
    docs.push((
        "c_dup_with_joint".into(),
        Some("C"),
        base_links(&format!("  <link name=\"tip\"/>\n{}", joint("fixed", "", "base", "tip"))),
    ));
    docs.push((
        "c_dup_far".into(),
        Some("C"),
        "<robot name=\"r\">\n  <link name=\"x\"/>\n  <link name=\"y\"/>\n  <link name=\"z\"/>\n  <link name=\"x\"/>\n</robot>\n".into(),
    ));
    // D: no robot name.
    docs.push(("d_missing".into(), Some("D"), "<robot>\n  <link name=\"a\"/>\n</robot>\n".into()));
    docs.push(("d_empty".into(), Some("D"), "<robot name=\"\">\n  <link name=\"a\"/>\n</robot>\n".into()));
    docs.push((
        "d_with_joint".into(),
        Some("D"),
        format!(
            "<robot>\n  <link name=\"base\"/>\n  <link name=\"tip\"/>\n{}</robot>\n",
            joint("continuous", "", "base", "tip")
        ),
    ));
    // E: joint refers to an undeclared link.
    docs.push(("e_child".into(), Some("E"), base_links(&joint("fixed", "", "base", "ghost"))));
    docs.push(("e_parent".into(), Some("E"), base_links(&joint("fixed", "", "world", "tip"))));
    docs.push(("e_revolute".into(), Some("E"), base_links(&joint("revolute", limit, "base", "nowhere"))));
    // F: not a URDF document at all.
    docs.push(("f_truncated".into(), Some("F"), "<robot name=\"r\">\n  <link name=\"a\">\n".into()));
    docs.push(("f_not_xml".into(), Some("F"), "this is not xml\n".into()));
    docs.push(("f_wrong_root".into(), Some("F"), "<model name=\"r\"><link name=\"a\"/></model>\n".into()));
    docs.push((
        "f_bad_number".into(),
        Some("F"),
        "<robot name=\"r\">\n  <link name=\"a\">\n    <visual><geometry><box size=\"1 x 1\"/></geometry></visual>\n  </link>\n</robot>\n".into(),
    ));
    // Clean files.
    docs.push(("ok_single".into(), None, "<robot name=\"r\">\n  <link name=\"a\"/>\n</robot>\n".into()));
    docs.push(("ok_revolute".into(), None, base_links(&joint("revolute", limit, "base", "tip"))));
    docs.push(("ok_continuous".into(), None, base_links(&joint("continuous", "    <axis xyz=\"0 0 1\"/>\n", "base", "tip"))));
    docs.push((
        "ok_listing1".into(),
        None,
        fs::read_to_string(fixture(LISTING_1)).unwrap(),
    ));
    docs.push((
        "ok_materials".into(),
        None,
        "<robot name=\"r\">\n  <material name=\"red\"><color rgba=\"1 0 0 1\"/></material>\n  <link name=\"a\">\n    <visual><geometry><sphere radius=\"0.1\"/></geometry><material name=\"red\"/></visual>\n  </link>\n</robot>\n".into(),
    ));
    docs.push((
        "ok_xacro".into(),
        None,
        fs::read_to_string(fixture("xacro_generated.urdf")).unwrap(),
    ));
    docs
}

pub const BSD3: &str = "Copyright (c) 2020, Someone\nAll rights reserved.\n\nRedistribution and use in source and binary forms, with or without\nmodification, are permitted provided that the following conditions are met:\n\n1. Redistributions of source code must retain the above copyright notice.\n2. Redistributions in binary form must reproduce the above copyright notice.\n3. Neither the name of the copyright holder nor the names of its contributors\n   may be used to endorse or promote products derived from this software.\n";

pub const APACHE: &str = "                                 Apache License\n                           Version 2.0, January 2004\n                        http://www.apache.org/licenses/\n";

pub const MIT: &str = "MIT License\n\nPermission is hereby granted, free of charge, to any person obtaining a copy\nof this software.\n";

/// A two-joint arm whose meshes live in `package://{pkg}/meshes/...`.
pub fn arm_urdf(name: &str, pkg: &str) -> String {
    format!(
        r#"<?xml version="1.0"?>
<robot name="{name}">
  <link name="base_link">
    <visual><geometry><mesh filename="package://{pkg}/meshes/visual/base.dae"/></geometry></visual>
    <collision><geometry><mesh filename="package://{pkg}/meshes/collision/base.stl"/></geometry></collision>
  </link>
  <link name="upper_arm">
    <visual><geometry><mesh filename="package://{pkg}/meshes/visual/upper.dae"/></geometry></visual>
    <collision><geometry><mesh filename="package://{pkg}/meshes/collision/upper.stl"/></geometry></collision>
  </link>
  <link name="flange"/>
  <joint name="shoulder" type="revolute">
    <parent link="base_link"/><child link="upper_arm"/>
    <origin xyz="0 0 0.1" rpy="0 0 0"/><axis xyz="0 0 1"/>
    <limit lower="-3.14" upper="3.14" effort="150" velocity="3.15"/>
  </joint>
  <joint name="elbow" type="revolute">
    <parent link="upper_arm"/><child link="flange"/>
    <origin xyz="0 0.2 0.4" rpy="0 1.5708 0"/><axis xyz="0 1 0"/>
    <limit lower="-3.14" upper="3.14" effort="150" velocity="3.15"/>
  </joint>
</robot>
"#
    )
}

fn meta(name: &str, manufacturer: &str, location: &str, id: &str, xacro: bool) -> String {
    format!(
        "{{\n  \"name\": \"{name}\",\n  \"type\": \"robotic arm\",\n  \"manufacturer\": \"{manufacturer}\",\n  \"urdf-location\": \"{location}\",\n  \"id\": \"{id}\",\n  \"source-url\": \"https://example.org/{id}\",\n  \"xacro-generated\": {xacro}\n}}\n"
    )
}

fn meshes(root: &Path, dir: &str) {
    put(root, &format!("{dir}/meshes/visual/base.dae"), "<COLLADA>base</COLLADA>\n");
    put(root, &format!("{dir}/meshes/visual/upper.dae"), "<COLLADA>upper</COLLADA>\n");
    put(root, &format!("{dir}/meshes/collision/base.stl"), b"\x00binary base stl\x00");
    put(root, &format!("{dir}/meshes/collision/upper.stl"), "solid upper\nendsolid upper\n");
}

/// Two sources with two bundles each. The UR5e appears in both sources;
/// the copies differ only by trailing blank lines. `matlab/orphan.urdf` has
/// no metadata.
pub fn sample_corpus(root: &Path) {
    put(root, "ros-industrial/source-information.json", "{\"name\": \"ros-industrial\", \"url\": \"https://example.org/rosi\"}\n");
    put(root, "ros-industrial/LICENSE", BSD3);
    put(
        root,
        "ros-industrial/abb_irb120_description/meta-information.json",
        meta("IRB 120", "ABB", "urdf/irb120.urdf", "abb-1", false),
    );
    put(
        root,
        "ros-industrial/abb_irb120_description/urdf/irb120.urdf",
        format!(
            "<?xml version=\"1.0\"?>\n<!-- =================================================================================== -->\n<!-- |    This document was autogenerated by xacro from irb120.xacro                   | -->\n<!-- =================================================================================== -->\n{}",
            arm_urdf("abb_irb120", "abb_irb120_description").split_once('\n').unwrap().1
        ),
    );
    meshes(root, "ros-industrial/abb_irb120_description");
    put(
        root,
        "ros-industrial/ur_description/meta-information.json",
        meta("UR5e", "Universal Robots", "robots/ur5e.urdf", "ur-1", true),
    );
    put(root, "ros-industrial/ur_description/robots/ur5e.urdf", arm_urdf("ur5e", "ur_description"));
    meshes(root, "ros-industrial/ur_description");

    put(root, "matlab/source-information.json", "{\"name\": \"matlab\", \"url\": \"https://example.org/matlab\"}\n");
    put(root, "matlab/universalUR5e/LICENSE", APACHE);
    put(
        root,
        "matlab/universalUR5e/meta-information.json",
        meta("UR 5e", "universal-robots", "urdf/universalUR5e.urdf", "m-7", true),
    );
    put(
        root,
        "matlab/universalUR5e/urdf/universalUR5e.urdf",
        format!("{}\n\n", arm_urdf("ur5e", "universalUR5e")),
    );
    meshes(root, "matlab/universalUR5e");
    put(
        root,
        "matlab/orphan.urdf",
        "<robot name=\"orphan\">\n  <!-- author: jane@corp.com -->\n  <link name=\"world\"/>\n</robot>\n",
    );
}

/// A random variation of [`arm_urdf`]: optionally with an extra world link,
/// a different mesh format, a shifted elbow, trailing blank lines, or broken
/// XML.
pub fn arm_variant(rng: &mut impl Rng) -> String {
    let mut text = arm_urdf("arm", "pkg");
    if rng.gen_bool(0.25) {
        text = text.replace(
            "  <link name=\"base_link\">",
            "  <link name=\"world\"/>\n  <joint name=\"fix\" type=\"fixed\"><parent link=\"world\"/><child link=\"base_link\"/></joint>\n  <link name=\"base_link\">",
        );
    }
    if rng.gen_bool(0.25) {
        text = text.replace("upper.dae", "upper.obj");
    }
    if rng.gen_bool(0.25) {
        text = text.replace("0 0.2 0.4", "0 0.2 0.45");
    }
    if rng.gen_bool(0.1) {
        text = text.replace("</robot>", "");
    }
    for _ in 0..rng.gen_range(0..2) {
        text.push('\n');
    }
    text
}
