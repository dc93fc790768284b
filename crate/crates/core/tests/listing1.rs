mod common;

use std::f64::consts::FRAC_PI_2;
use std::fs;

use common::{axis_angle, fixture, mul, origin, rotation_gap, to_mat4, translation_gap, IDENTITY, LISTING_1};
use urdf_inspect::model::{Geometry, JointKind};
use urdf_inspect::{build_tree, forward_kinematics, parse_urdf, validate, JointConfig};

const EXACT: f64 = 1e-12;

#[test]
fn parses_two_dof_robot() {
    let raw = fs::read(fixture(LISTING_1)).unwrap();
    let model = parse_urdf(&raw).unwrap();
    assert_eq!(model.name, "2 DOF planar robot");
    assert_eq!(model.links.len(), 3);
    assert_eq!(model.joints.len(), 2);

    let base = model.link("base link").unwrap();
    let visual = &base.visuals[0];
    assert_eq!(visual.origin.xyz, [0.0, 0.0, 0.25]);
    assert_eq!(visual.origin.rpy, [0.0, 0.0, 0.0]);
    assert_eq!(visual.geometry, Geometry::Box { size: [0.5, 0.5, 0.5] });

    let j1 = model.joint("joint 1").unwrap();
    assert_eq!(j1.kind, JointKind::Continuous);
    assert_eq!((j1.parent.as_str(), j1.child.as_str()), ("base link", "link 1"));
    assert_eq!(j1.axis, [0.0, 1.0, 0.0]);
    assert_eq!(j1.origin.xyz, [0.0, 0.0, 0.5]);
    assert!(j1.limit.is_none());

    assert!(validate(&raw).diagnostics.is_empty());
}

#[test]
fn link_one_frame_at_home() {
    let model = parse_urdf(fs::read(fixture(LISTING_1)).unwrap()).unwrap();
    let tree = build_tree(&model).unwrap();
    assert_eq!(tree.root(), "base link");
    let frames = forward_kinematics(&tree, &model, &JointConfig::zeros(&tree)).unwrap();
    let link1 = &frames["link 1"];
    assert!((link1.translation - nalgebra::Vector3::new(0.0, 0.0, 0.5)).norm() <= EXACT);
    assert!((link1.rotation - nalgebra::Matrix3::identity()).norm() <= EXACT);
}

#[test]
fn bent_configuration_matches_oracle() {
    let model = parse_urdf(fs::read(fixture(LISTING_1)).unwrap()).unwrap();
    let tree = build_tree(&model).unwrap();
    let q = JointConfig::new(&tree, &model, vec![FRAC_PI_2, 0.0]).unwrap();
    let frames = forward_kinematics(&tree, &model, &q).unwrap();

    let j1 = mul(&origin([0.0, 0.0, 0.5], [0.0; 3]), &axis_angle([0.0, 1.0, 0.0], FRAC_PI_2));
    let j2 = mul(&j1, &origin([0.0, 0.0, 1.0], [0.0; 3]));
    // Rotating +90° about y tips the upper arm onto +x.
    let expected = [0.0, 0.0, 0.5];
    let t = frames["link 1"].translation;
    assert!((t - nalgebra::Vector3::from(expected)).norm() <= EXACT);
    let t2 = frames["link 2"].translation;
    assert!((t2 - nalgebra::Vector3::new(1.0, 0.0, 0.5)).norm() <= EXACT);

    for (name, oracle) in [("base link", IDENTITY), ("link 1", j1), ("link 2", j2)] {
        let m = to_mat4(&frames[name]);
        assert!(translation_gap(&m, &oracle) <= EXACT, "{name}");
        assert!(rotation_gap(&m, &oracle) <= EXACT, "{name}");
    }
}

