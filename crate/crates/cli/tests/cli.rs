use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semtraj::aggregate::count_resm;
use semtraj::moft::Moft;
use semtraj::stops::build_sm_moft;
use semtraj::Catalog;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/paris").join(name)
}

fn semtraj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semtraj")).args(args).output().unwrap()
}

fn catalog_arg() -> String {
    fixture("catalog.json").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn query(q: &str) -> Output {
    let sm = fixture("reference_smmoft.csv").display().to_string();
    semtraj(&["--catalog", &catalog_arg(), "query", "--smmoft", &sm, q])
}

#[test]
fn validate_fixture() {
    let moft = fixture("moft.csv").display().to_string();
    let o = semtraj(&["--catalog", &catalog_arg(), "validate", "--moft", &moft]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("4 PoIs"));
}

#[test]
fn overlapping_pois_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("catalog.json"))
        .unwrap()
        .replace("[[100, 0], [110, 0], [110, 10], [100, 10]]", "[[5, 0], [15, 0], [15, 10], [5, 10]]");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text).unwrap();
    let o = semtraj(&["--catalog", path.to_str().unwrap(), "validate"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("H1") && err.contains("H2"), "{err}");
}

#[test]
fn duplicate_sample_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "oid,t,x,y\nO1,1,0,0\nO1,2,1,1\nO1,1,2,2\n").unwrap();
    let o = semtraj(&["--catalog", &catalog_arg(), "validate", "--moft", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn io_and_syntax_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = semtraj(&["--catalog", "/definitely/not/here.json", "validate"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("c.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(semtraj(&["--catalog", bad.to_str().unwrap(), "validate"]).status.code(), Some(2));
    let m = dir.path().join("m.csv");
    std::fs::write(&m, "oid,t,x,y\nO1,abc,0,0\n").unwrap();
    let o = semtraj(&["--catalog", &catalog_arg(), "validate", "--moft", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn detect_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let moft = fixture("moft.csv").display().to_string();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = semtraj(&["--catalog", &catalog_arg(), "detect", "--moft", &moft, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("oid,gid,ts,tf\nO1,H1,0,10\n"));
    assert!(!text.contains("O4"));
}

#[test]
fn graph_forms() {
    let sm = fixture("reference_smmoft.csv").display().to_string();
    let o = semtraj(&["--catalog", &catalog_arg(), "graph", "--smmoft", &sm, "O2"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    for gid in ["\"H2\"", "\"L\"", "\"E\""] {
        assert!(dot.contains(&format!("label={gid}")), "{dot}");
    }
    assert!(dot.contains("ste=\"[0,1] [120,140]\""));
    let o = semtraj(&["--catalog", &catalog_arg(), "graph", "--smmoft", &sm, "--asm", "O2"]);
    let dot = stdout(&o);
    for label in ["\"H\"", "\"M\"", "\"T\""] {
        assert!(dot.contains(&format!("label={label}")), "{dot}");
    }
    let o = semtraj(&["--catalog", &catalog_arg(), "graph", "--smmoft", &sm, "O9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn query_examples() {
    assert_eq!(stdout(&query("count(H.?.T.?.H)")), "2\n");
    assert_eq!(stdout(&query("oids(H.?.M.?.H)")), "O1\nO2\n");
    assert_eq!(stdout(&query("count(H[name='NoSuch'].?.T)")), "0\n");
    assert_eq!(stdout(&query("count(H[name='Hilton'].?.M.?.H)")), "1\n");
    assert_eq!(stdout(&query("area(H1, H2)")), "200\n");
    assert_eq!(stdout(&query("timespan_l(oid=O2)")), "140\n");
    assert_eq!(stdout(&query("avg_l(oid=O1)")), "20\n");
    assert_eq!(stdout(&query("timespan(gid=E)")), "70\n");
    let o = query("count(H.?.)");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at 4"), "{}", stderr(&o));
    assert_eq!(query("count(Q)").status.code(), Some(1));
    assert_eq!(query("median(H)").status.code(), Some(1));
}

#[test]
fn detect_then_query_equals_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sm.csv");
    let moft = fixture("moft.csv").display().to_string();
    let o = semtraj(&["--catalog", &catalog_arg(), "detect", "--moft", &moft, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let c = Catalog::from_path(fixture("catalog.json")).unwrap();
    let m = Moft::read_csv(std::fs::File::open(fixture("moft.csv")).unwrap()).unwrap();
    let sm = build_sm_moft(&m, &c.pia);
    for q in ["H.?.M.?.T", "H.?.T.?.H", "T[time(timeOfDay)=Night]", "(H.?)*.M"] {
        let o = semtraj(&["--catalog", &catalog_arg(), "query", "--smmoft", out.to_str().unwrap(), &format!("count({q})")]);
        assert_eq!(stdout(&o), format!("{}\n", count_resm(&sm, q, &c.olap).unwrap()), "{q}");
    }
}
