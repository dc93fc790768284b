mod common;

use urdf_inspect::validate::check_model;
use urdf_inspect::{parse_urdf, validate, Code, Severity};

#[test]
fn seeded_documents_yield_exactly_their_code() {
    for (name, expected, text) in common::seeded_documents() {
        let v = validate(&text);
        let codes: Vec<&str> = v.error_codes().iter().map(|c| c.as_str()).collect();
        match expected {
            Some(code) => assert_eq!(codes, vec![code], "{name}: {:?}", v.diagnostics),
            None => assert!(codes.is_empty(), "{name}: {:?}", v.diagnostics),
        }
        assert_eq!(v.model.is_some(), expected.is_none(), "{name}");
    }
}

#[test]
fn parse_failure_preempts_other_codes() {
    // No name and no links, but the document is also not well-formed.
    let v = validate("<robot><joint name=\"j\" type=\"revolute\">");
    assert_eq!(v.error_codes(), vec![Code::F]);
    assert_eq!(v.diagnostics.len(), 1);
}

#[test]
fn all_applicable_codes_are_reported_in_document_order() {
    let text = "<robot>\n  <link name=\"a\"/>\n  <link name=\"a\"/>\n  <joint name=\"j\" type=\"revolute\">\n    <parent link=\"a\"/>\n    <child link=\"b\"/>\n  </joint>\n</robot>\n";
    let v = validate(text);
    let seq: Vec<(Code, u32)> = v.diagnostics.iter().map(|d| (d.code, d.line)).collect();
    assert_eq!(seq, vec![(Code::D, 1), (Code::C, 3), (Code::A, 4), (Code::E, 4)]);
    assert!(v.diagnostics.iter().all(|d| d.severity == Severity::Error));
}

#[test]
fn undefined_material_is_only_a_warning() {
    let text = r#"<robot name="r"><link name="a"><visual>
        <geometry><box size="1 1 1"/></geometry><material name="missing"/>
      </visual></link></robot>"#;
    let v = validate(text);
    assert!(!v.has_errors());
    assert_eq!(v.diagnostics.len(), 1);
    assert_eq!(v.diagnostics[0].code, Code::UndefinedMaterial);
    assert_eq!(v.diagnostics[0].code.as_str(), "W_UNDEFINED_MATERIAL");
    assert!(v.model.is_some());
}

#[test]
fn positions_point_at_the_offending_element() {
    let text = "<robot name=\"r\">\n  <link name=\"base\"/>\n  <joint name=\"j\" type=\"fixed\">\n    <parent link=\"base\"/>\n    <child link=\"nope\"/>\n  </joint>\n</robot>";
    let d = &validate(text).diagnostics[0];
    assert_eq!((d.code, d.line, d.column), (Code::E, 3, 3));
    assert_eq!(d.subject, "joint j");
}

#[test]
fn check_model_agrees_with_validate() {
    for (name, _, text) in common::seeded_documents() {
        if let Ok(model) = parse_urdf(&text) {
            assert_eq!(check_model(&model), validate(&text).diagnostics, "{name}");
        }
    }
}
