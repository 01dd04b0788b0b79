use std::fs;
use std::path::{Path, PathBuf};

use conceptforge_core::pipeline::reverse_sql;
use conceptforge_core::{
    compile, frame_isomorphic, parse_model, serialize_model, to_schema, to_uml, validate_model,
    DiagnosticCode, Geometry, Target,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Compares against a checked-in golden file; `BLESS=1` rewrites it.
fn golden(rel: &str, actual: &str) {
    let path = fixtures().join("golden").join(rel);
    if std::env::var_os("BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {rel}");
}

#[test]
fn reference_record_document() {
    let text = read("myvar.cmx");
    let m = parse_model(&text).unwrap();
    assert_eq!(m.element_count(), 1);
    let v = &m.variables[0];
    assert_eq!(v.name, "MyVar");
    assert_eq!(m.geometry[&v.id], Geometry::new(100, 100, 100, 50));
    assert_eq!(m.description(v.id), "No Description");
    assert_eq!(serialize_model(&m), text);

    let exact = read("myvar-treeview.xml");
    assert_eq!(parse_model(&exact).unwrap(), m);
}

#[test]
fn every_fixture_is_canonical() {
    for rel in all_fixture_models() {
        let text = read(&rel);
        let m = parse_model(&text).unwrap();
        assert_eq!(serialize_model(&m), text, "{rel}");
    }
}

#[test]
fn supply_pipeline_counts() {
    let m = parse_model(&read("supply.cmx")).unwrap();
    assert_eq!(validate_model(&m), vec![]);
    let u = to_uml(&m).unwrap();
    assert_eq!(u.classifiers.len(), 4);
    let mut roles: Vec<&str> = u.associations.iter().map(|a| a.role.as_str()).collect();
    roles.sort();
    assert_eq!(roles, ["agent", "destination", "object"]);
    let s = to_schema(&u).unwrap();
    assert_eq!(s.tables.len(), 4);
    assert_eq!(s.table("supply").unwrap().foreign_keys.len(), 3);
    let total_fks: usize = s.tables.iter().map(|t| t.foreign_keys.len()).sum();
    assert_eq!(total_fks, 3);
}

#[test]
fn diagnostic_fixtures_trigger_exactly_one_code() {
    for code in DiagnosticCode::ALL {
        let rel = format!("diagnostics/{}.cmx", code.as_str().to_lowercase());
        let m = parse_model(&read(&rel)).unwrap();
        let d = validate_model(&m);
        assert_eq!(d.len(), 1, "{rel}: {d:?}");
        assert_eq!(d[0].code, code, "{rel}");
    }
}

#[test]
fn golden_outputs() {
    for name in ["supply", "staff"] {
        let m = parse_model(&read(&format!("{name}.cmx"))).unwrap();
        for target in [Target::Uml, Target::Sql, Target::Svg] {
            let out = compile(&m, target).unwrap();
            golden(&format!("{name}.{}", target.as_str()), &out);
        }
    }
}

#[test]
fn fixture_sql_reverses_to_an_isomorphic_model() {
    for name in ["supply", "staff"] {
        let m = parse_model(&read(&format!("{name}.cmx"))).unwrap();
        let sql = compile(&m, Target::Sql).unwrap();
        let back = parse_model(&reverse_sql(&sql).unwrap()).unwrap();
        assert!(frame_isomorphic(&m, &back), "{name}");
        assert_eq!(validate_model(&back), vec![], "{name}");
        // Forward again: byte-identical DDL.
        assert_eq!(compile(&back, Target::Sql).unwrap(), sql, "{name}");
    }
}

fn all_fixture_models() -> Vec<String> {
    let mut out = Vec::new();
    for dir in ["", "diagnostics/"] {
        for entry in fs::read_dir(fixtures().join(dir)).unwrap() {
            let name = entry.unwrap().file_name().into_string().unwrap();
            if name.ends_with(".cmx") {
                out.push(format!("{dir}{name}"));
            }
        }
    }
    out.sort();
    out
}
