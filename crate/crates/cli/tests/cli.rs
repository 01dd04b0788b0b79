use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conceptforge"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture(rel: &str) -> String {
    fixtures().join(rel).to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", &fixture("supply.cmx")]);
    assert_eq!((code(&ok), stdout(&ok).as_str()), (0, ""));

    let untyped = run(&["validate", &fixture("diagnostics/untyped_variable.cmx")]);
    assert_eq!(code(&untyped), 1);
    assert_eq!(stdout(&untyped), "UNTYPED_VARIABLE 1 variable \"x\" has no type arc\n");

    let missing = run(&["validate", "/nonexistent/model.cmx"]);
    assert_eq!(code(&missing), 2);
    assert!(!missing.stderr.is_empty());
}

#[test]
fn unparseable_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.cmx");
    fs::write(&path, "<NewDataSet><Elements>").unwrap();
    let o = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.cmx:1:"));
}

#[test]
fn compile_matches_golden_files() {
    for name in ["supply", "staff"] {
        for target in ["uml", "sql", "svg"] {
            let o = run(&["compile", "--target", target, &fixture(&format!("{name}.cmx"))]);
            assert_eq!(code(&o), 0);
            let golden = fs::read_to_string(fixtures().join(format!("golden/{name}.{target}"))).unwrap();
            assert_eq!(stdout(&o), golden, "{name}.{target}");
        }
    }
    let sql = stdout(&run(&["compile", "--target", "sql", &fixture("supply.cmx")]));
    assert_eq!(sql.matches("CREATE TABLE").count(), 4);
}

#[test]
fn compile_xml_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["compile", "--target", "xml", &fixture("staff.cmx")]);
    assert_eq!(code(&first), 0);
    let path = dir.path().join("again.cmx");
    fs::write(&path, &first.stdout).unwrap();
    let second = run(&["compile", "--target", "xml", path.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn compile_invalid_model() {
    let o = run(&["compile", "--target", "uml", &fixture("myvar.cmx")]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("UNTYPED_VARIABLE 1"));
    // SVG needs only geometry.
    assert_eq!(code(&run(&["compile", "--target", "svg", &fixture("myvar.cmx")])), 0);
}

#[test]
fn empty_model_compiles_to_empty_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.cmx");
    fs::write(&path, "<?xml version=\"1.0\" standalone=\"yes\" ?>\n<NewDataSet>\n</NewDataSet>\n").unwrap();
    let o = run(&["compile", "--target", "uml", path.to_str().unwrap()]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "@startuml\n@enduml\n"));
}

#[test]
fn reverse_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sql = run(&["compile", "--target", "sql", &fixture("staff.cmx")]);
    let ddl = dir.path().join("staff.sql");
    fs::write(&ddl, &sql.stdout).unwrap();
    let rev = run(&["reverse", "--from", "sql", ddl.to_str().unwrap()]);
    assert_eq!(code(&rev), 0, "{}", String::from_utf8_lossy(&rev.stderr));
    let cmx = dir.path().join("back.cmx");
    fs::write(&cmx, &rev.stdout).unwrap();
    assert_eq!(code(&run(&["validate", cmx.to_str().unwrap()])), 0);
    let again = run(&["compile", "--target", "sql", cmx.to_str().unwrap()]);
    assert_eq!(again.stdout, sql.stdout);
}

#[test]
fn reverse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.sql");
    fs::write(&empty, "").unwrap();
    let o = run(&["reverse", "--from", "sql", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "<?xml version=\"1.0\" standalone=\"yes\" ?>\n<NewDataSet>\n</NewDataSet>\n");

    let boss = dir.path().join("boss.sql");
    fs::write(
        &boss,
        "CREATE TABLE person (\n  id INTEGER NOT NULL,\n  name VARCHAR(255) NOT NULL,\n  PRIMARY KEY (id)\n);\n\n\
         CREATE TABLE manages (\n  id INTEGER NOT NULL,\n  boss_id INTEGER NOT NULL,\n  PRIMARY KEY (id),\n  FOREIGN KEY (boss_id) REFERENCES person(id)\n);\n",
    )
    .unwrap();
    let o = run(&["reverse", "--from", "sql", boss.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("boss_id"));

    let bad = dir.path().join("bad.sql");
    fs::write(&bad, "CREATE VIEW v AS SELECT 1;").unwrap();
    let o = run(&["reverse", "--from", "sql", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:8"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&run(&[])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["compile", &fixture("supply.cmx")])), 3);
    assert_eq!(code(&run(&["compile", "--target", "png", &fixture("supply.cmx")])), 3);
    assert_eq!(code(&run(&["reverse", "--from", "xml", "x"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

fn http_get(port: u16, path: &str) -> String {
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn serve_lists_models_and_stops_on_interrupt() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("supply.cmx"), dir.path().join("supply.cmx")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_conceptforge"))
        .args(["serve", "--port", "0", dir.path().to_str().unwrap()])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stderr.take().unwrap()).lines();
    let banner = lines.next().unwrap().unwrap();
    let port: u16 = banner
        .split("127.0.0.1:")
        .nth(1)
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();

    let response = http_get(port, "/api/models");
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with(r#"[{"name":"supply","version":1}]"#), "{response}");

    // One log line per request.
    let log = lines.next().unwrap().unwrap();
    assert!(log.contains("GET /api/models 200"), "{log}");

    Command::new("kill")
        .args(["-INT", &child.id().to_string()])
        .status()
        .unwrap();
    let status = child.wait().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn serve_on_occupied_port_exits_2() {
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_conceptforge"))
        .args(["serve", "--port", &port, dir.path().to_str().unwrap()])
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    for _ in 0..100 {
        if let Some(status) = child.try_wait().unwrap() {
            assert_eq!(status.code(), Some(2));
            return;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    child.kill().unwrap();
    panic!("serve did not fail on an occupied port");
}
