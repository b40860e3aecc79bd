use std::path::PathBuf;

use qdcert::files::{load_group_table, load_metric_space};
use qdcert::scenario::{ActionSpec, GroupSpec, Target};
use qdcert::{load_scenario, ScenarioError};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

#[test]
fn every_sample_scenario_parses() {
    let mut count = 0;
    for entry in std::fs::read_dir(dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "scn") {
            let (s, text) = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(!s.id.is_empty() && !text.is_empty());
            count += 1;
        }
    }
    assert!(count >= 8);
}

#[test]
fn referenced_files_resolve_next_to_the_scenario() {
    let (s, _) = load_scenario(&dir().join("s3_table.scn")).unwrap();
    let Target::Translation(GroupSpec::Table(path)) = &s.target else { panic!() };
    assert_eq!(path, &dir().join("s3.table"));
    let table = load_group_table(path).unwrap();
    assert_eq!(table.len(), 6);
    assert!(qdcert_core::FiniteGroup::from_table(&table).is_ok());

    let (s, _) = load_scenario(&dir().join("triangle.scn")).unwrap();
    let Target::Action(a) = &s.target else { panic!() };
    let ActionSpec::FiniteSpace { file } = &a.spec else { panic!() };
    let (metric, generators) = load_metric_space(file).unwrap();
    assert_eq!((metric.len(), generators.len()), (3, 2));
}

#[test]
fn file_errors_name_path_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.table");
    std::fs::write(&bad, "2\n0 1\n1 x\n").unwrap();
    let err = load_group_table(&bad).unwrap_err();
    assert!(matches!(&err, ScenarioError::Io { .. }));
    let text = err.to_string();
    assert!(text.contains("bad.table") && text.contains("line 3"), "{text}");
    assert!(matches!(load_group_table(&tmp.path().join("none")), Err(ScenarioError::Io { .. })));
}

#[test]
fn table_that_is_not_a_group_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.table"), "2\n0 1\n1 1\n").unwrap();
    let scn = tmp.path().join("bad.scn");
    std::fs::write(&scn, "[scenario]\nid = bad\ngroup = table(bad.table)\nepsilon = 0.5\n[kernel]\nkernel = delta\n[functions]\nf = const\n").unwrap();
    let (s, text) = load_scenario(&scn).unwrap();
    let report = qdcert::run(&s, &text, &qdcert::RunOptions::default());
    assert_eq!(report.errors[0].code, "not_a_group");
}
