use conceptforge_web::{compile_text, render_text, validate_text};

const SUPPLY: &str = include_str!("../../../fixtures/supply.cmx");
const MYVAR: &str = include_str!("../../../fixtures/myvar.cmx");

#[test]
fn renders_svg() {
    let svg = render_text(SUPPLY).unwrap();
    assert!(svg.starts_with("<svg "));
    assert_eq!(svg.matches("<line ").count(), 6);
}

#[test]
fn validates() {
    assert_eq!(validate_text(SUPPLY).unwrap(), "");
    assert!(validate_text(MYVAR).unwrap().starts_with("UNTYPED_VARIABLE 1"));
    assert!(validate_text("<oops").unwrap_err().starts_with("parse error at 1:"));
}

#[test]
fn compiles() {
    let sql = compile_text(SUPPLY, "sql").unwrap();
    assert_eq!(sql, include_str!("../../../fixtures/golden/supply.sql"));
    let err = compile_text(MYVAR, "uml").unwrap_err();
    assert!(err.contains("UNTYPED_VARIABLE"), "{err}");
    assert!(compile_text(SUPPLY, "png").is_err());
}

#[test]
fn page_sample_is_the_supply_model() {
    let page = include_str!("../www/index.html");
    let start = page.find("const SAMPLE = `").unwrap() + "const SAMPLE = `".len();
    let sample = &page[start..start + page[start..].find('`').unwrap()];
    assert_eq!(validate_text(sample).unwrap(), "");
    assert_eq!(compile_text(sample, "xml").unwrap(), SUPPLY.replace("Supply of a candidate to an employer", "No Description"));
}
