mod common;

use codecity::agent::{
    analyze_tree, emit_snapshot_document, file_loc, parse_compilation_unit, parse_snapshot_document, read_changed_paths,
    ChangeKind, DEFAULT_GLOB,
};
use codecity::model::{ClassKind, CommitRef, LocMetrics};
use common::*;
use proptest::prelude::*;

fn loc(code: u32, comment: u32, blank: u32) -> LocMetrics {
    LocMetrics { code_lines: code, comment_lines: comment, blank_lines: blank }
}

#[test]
fn base_corpus_counts() {
    let s = analyze_fixture("base", BASE_COMMIT);
    assert_eq!(s.class_count(), 12);
    assert_eq!(s.method_count(), 30);
    assert_eq!(s.package_paths().len(), 4);
    assert!(s.warnings.is_empty(), "{:?}", s.warnings);
    assert_eq!(s.files.len(), 10);
}

#[test]
fn golden_document_is_byte_identical() {
    let mut s = analyze_fixture("base", BASE_COMMIT);
    s.analyzed_at_ms = GOLDEN_ANALYZED_AT_MS;
    let golden = std::fs::read(petclinic("base-structure.golden.json")).unwrap();
    assert_eq!(String::from_utf8(emit_snapshot_document(&s)).unwrap(), String::from_utf8(golden).unwrap());
}

#[test]
fn document_round_trips() {
    let s = analyze_fixture("target", TARGET_COMMIT);
    let bytes = emit_snapshot_document(&s);
    let back = parse_snapshot_document(&bytes).unwrap();
    assert_eq!(emit_snapshot_document(&back), bytes);
}

#[test]
fn hand_counted_loc() {
    let s = analyze_fixture("base", BASE_COMMIT);
    let f = s.files.iter().find(|f| f.path == "petclinic/visit/VisitService.java").unwrap();
    assert_eq!(f.loc, loc(28, 7, 5));
    let c = s.classes().into_iter().find(|c| c.fqn == "petclinic.visit.VisitService").unwrap();
    assert_eq!(c.loc, loc(24, 4, 3));
    assert_eq!(c.nested_classes[0].fqn, "petclinic.visit.VisitService.Reminder");
}

#[test]
fn kinds_and_supertypes() {
    let s = analyze_fixture("base", BASE_COMMIT);
    let kind = |fqn: &str| s.classes().into_iter().find(|c| c.fqn == fqn).unwrap().kind;
    assert_eq!(kind("petclinic.BaseEntity"), ClassKind::Abstract);
    assert_eq!(kind("petclinic.owner.PetType"), ClassKind::Enum);
    assert_eq!(kind("petclinic.owner.OwnerRepository"), ClassKind::Interface);
    let owner = s.classes().into_iter().find(|c| c.fqn == "petclinic.owner.Owner").unwrap();
    assert_eq!(owner.super_class.as_deref(), Some("petclinic.BaseEntity"));
}

#[test]
fn include_globs_restrict_the_scan() {
    let cref = CommitRef::new(APP, "main", BASE_COMMIT, None).unwrap();
    let a = analyze_tree(&petclinic("base"), &["petclinic/owner/**".to_string()], cref).unwrap();
    assert_eq!(a.snapshot.files.len(), 4);
    assert!(a.snapshot.classes().iter().all(|c| c.fqn.starts_with("petclinic.owner.")));
}

#[test]
fn broken_file_degrades_to_warning() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("a")).unwrap();
    std::fs::write(dir.path().join("a/Ok.java"), "package a;\npublic class Ok { void f() {} }\n").unwrap();
    std::fs::write(dir.path().join("a/Bad.java"), "package a;\npublic class Bad { void f( {\n").unwrap();
    let cref = CommitRef::new("demo", "main", "c".repeat(40), None).unwrap();
    let s = analyze_tree(dir.path(), &[DEFAULT_GLOB.to_string()], cref).unwrap().snapshot;
    assert!(s.classes().iter().any(|c| c.fqn == "a.Ok"));
    assert_eq!(s.warnings.len(), 1);
    assert_eq!(s.warnings[0].path, "a/Bad.java");
}

#[test]
fn changed_list_parses_name_status() {
    let c = read_changed_paths("M\tsrc/A.java\nA\tsrc/B.java\nD\tsrc/C.java\nR100\tsrc/D.java\tsrc/E.java\n").unwrap();
    let kinds: Vec<_> = c.iter().map(|p| p.kind).collect();
    assert_eq!(kinds[..3], [ChangeKind::Modified, ChangeKind::Added, ChangeKind::Deleted]);
    assert!(read_changed_paths("X\n").is_err());
}

fn java_class(name: &str, methods: &[(String, usize, usize)]) -> String {
    let mut s = format!("package gen.pkg;\n\n// generated\npublic class {name} {{\n");
    for (m, params, body) in methods {
        let ps: Vec<String> = (0..*params).map(|i| format!("int p{i}")).collect();
        s.push_str(&format!("    public int {m}({}) {{\n", ps.join(", ")));
        for i in 0..*body {
            s.push_str(&format!("        int x{i} = {i}; /* c */\n"));
        }
        s.push_str("        return 0;\n    }\n\n");
    }
    s.push_str("}\n");
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_classes_parse_fully(
        name in "[A-Z][a-z]{1,6}",
        methods in proptest::collection::btree_map("[a-z][a-zA-Z]{0,6}", (0usize..4, 0usize..5), 0..8),
    ) {
        let ms: Vec<(String, usize, usize)> = methods.into_iter().map(|(m, (p, b))| (m, p, b)).collect();
        let text = java_class(&name, &ms);
        let unit = parse_compilation_unit(&text, "gen/pkg/X.java");
        prop_assert!(unit.fully_analyzed(), "{:?}", unit.warnings);
        prop_assert_eq!(unit.package_path.as_str(), "gen.pkg");
        prop_assert_eq!(unit.top_level_types.len(), 1);
        let c = &unit.top_level_types[0];
        prop_assert_eq!(c.fqn.clone(), format!("gen.pkg.{name}"));
        prop_assert_eq!(c.methods.len(), ms.len());
        for ((m, p, b), d) in ms.iter().zip(&c.methods) {
            prop_assert_eq!(&d.name, m);
            prop_assert_eq!(d.param_types.len(), *p);
            prop_assert_eq!(d.loc.code_lines as usize, b + 3);
        }
        prop_assert_eq!(unit.loc, file_loc(&text));
        prop_assert_eq!(unit.loc.total() as usize, text.lines().count());
    }
}
