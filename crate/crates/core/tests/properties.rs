mod common;

use proptest::prelude::*;
use urdf_inspect::bundle::{contact_markers, mesh_inventory, name_substring_stats};
use urdf_inspect::{line_count, parse_urdf, validate};

/// Lines counted by splitting on every terminator, independent of the
/// library's byte scanner.
fn oracle_lines(raw: &[u8]) -> usize {
    if raw.is_empty() {
        return 0;
    }
    let text: String = raw.iter().map(|&b| b as char).collect();
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let parts = unified.split('\n').count();
    if unified.ends_with('\n') {
        parts - 1
    } else {
        parts
    }
}

fn robot_with_links(links: &[(String, Option<String>, Option<String>)]) -> String {
    let mut s = String::from("<robot name=\"r\">\n");
    for (name, visual, collision) in links {
        s.push_str(&format!("<link name=\"{name}\">"));
        if let Some(v) = visual {
            s.push_str(&format!("<visual><geometry><mesh filename=\"{v}\"/></geometry></visual>"));
        }
        if let Some(c) = collision {
            s.push_str(&format!("<collision><geometry><mesh filename=\"{c}\"/></geometry></collision>"));
        }
        s.push_str("</link>\n");
    }
    s.push_str("</robot>\n");
    s
}

fn mesh_name() -> impl Strategy<Value = Option<String>> {
    prop::option::of(
        ("[a-z]{1,6}", prop::sample::select(vec!["stl", "STL", "dae", "obj", "ply", "Dae"]))
            .prop_map(|(stem, ext)| format!("package://p/meshes/{stem}.{ext}")),
    )
}

proptest! {
    #[test]
    fn parsing_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_urdf(&bytes);
        let _ = validate(&bytes);
    }

    #[test]
    fn parsing_never_panics_on_urdf_like_text(text in "(<robot( name=\"[a-z ]{0,4}\")?>|<link name=\"[ab]\"/>|<joint name=\"j\" type=\"(revolute|fixed|weird)\">|<parent link=\"[abc]\"/>|<child link=\"[abc]\"/>|<limit( effort=\"1\")?( velocity=\"-?[0-9.]{1,3}\")?/>|</joint>|</robot>|<origin xyz=\"[0-9 .e-]{0,8}\"/>){0,12}") {
        let v = validate(&text);
        prop_assert_eq!(v.model.is_some(), !v.has_errors());
    }

    #[test]
    fn line_count_matches_split_oracle(raw in prop::collection::vec(prop::sample::select(vec![b'a', b' ', b'\n', b'\r', b'x']), 0..64)) {
        prop_assert_eq!(line_count(&raw), oracle_lines(&raw));
    }

    #[test]
    fn contact_flags_survive_self_concatenation(text in "[a-zA-Z@. <>!-]{0,40}") {
        let once = contact_markers(text.as_bytes());
        let twice = contact_markers(format!("{text}{text}").as_bytes());
        prop_assert!(!once.author || twice.author);
        prop_assert!(!once.at_sign || twice.at_sign);
        prop_assert!(!once.dot_com || twice.dot_com);
    }

    #[test]
    fn mesh_inventory_ignores_link_order(
        links in prop::collection::vec(("[a-z]{1,5}", mesh_name(), mesh_name()), 0..8),
        seed in any::<u64>(),
    ) {
        let mut links: Vec<_> = links.into_iter().enumerate()
            .map(|(i, (n, v, c))| (format!("{n}{i}"), v, c)).collect();
        let a = mesh_inventory(&parse_urdf(robot_with_links(&links)).unwrap());
        let n = links.len().max(1);
        links.rotate_left((seed as usize) % n);
        links.reverse();
        let b = mesh_inventory(&parse_urdf(robot_with_links(&links)).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn name_stats_survive_duplicated_links(names in prop::collection::vec("[a-z_]{1,8}", 1..6)) {
        let links: Vec<_> = names.iter().enumerate().map(|(i, n)| (format!("{n}{i}"), None, None)).collect();
        let model = parse_urdf(robot_with_links(&links)).unwrap();
        let mut doubled = links.clone();
        doubled.extend(links.iter().map(|(n, v, c)| (format!("{n}_copy"), v.clone(), c.clone())));
        let model2 = parse_urdf(robot_with_links(&doubled)).unwrap();
        let terms = ["world", "flange", "_"];
        let a = name_substring_stats(&model, &terms);
        let b = name_substring_stats(&model2, &terms);
        for t in terms {
            prop_assert!(b[t] >= a[t]);
        }
    }
}

#[test]
fn line_count_examples() {
    assert_eq!(line_count(b""), 0);
    assert_eq!(line_count(b"a"), 1);
    assert_eq!(line_count(b"a\n"), 1);
    assert_eq!(line_count(b"a\r\nb"), 2);
    assert_eq!(line_count(b"a\n\n"), 2);
}
