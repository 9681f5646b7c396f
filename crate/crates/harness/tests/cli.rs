use std::path::Path;
use std::process::{Command, Output};

fn icx(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icx"))
        .args(args)
        .env("ICX_CACHE_DIR", cache)
        .output()
        .expect("icx runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn graph_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = icx(dir.path(), &["graph", "cycle(4)"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let g = icx_core::Graph::from_json(text.trim()).unwrap();
    assert_eq!(g, icx_core::Graph::cycle(4).unwrap());
    assert_eq!(g.to_json(), text.trim());
}

#[test]
fn complex_and_homology_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = icx(dir.path(), &["complex", "path(3)"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.first(), Some(&r#"{"dim":-1,"face":[]}"#));
    assert_eq!(lines.last(), Some(&"1,3,1"));
    let o = icx(dir.path(), &["homology", "cycle(6)"]);
    assert!(stdout(&o).contains(r#"{"dim":1,"rank":2,"torsion":[]}"#));
    let o = icx(dir.path(), &["--format", "csv", "homology", "cycle(5)"]);
    assert!(stdout(&o).contains("1,1,\n"));
}

#[test]
fn reduce_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let o = icx(dir.path(), &["reduce", "--trace", "--strategy", "column-first", "strong(path(4),path(3))"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains(r#""certification":"derived""#));
    assert!(text.lines().count() > 1);
    let o = icx(dir.path(), &["reduce", "--strategy", "nope", "path(3)"]);
    assert_eq!(o.status.code(), Some(2));
    let o = icx(dir.path(), &["predict", "--family", "strong_p3", "--params", "4"]);
    assert!(stdout(&o).contains(r#""betti":"2x^2 + 3x""#), "{}", stdout(&o));
}

#[test]
fn verify_exit_codes_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let args = ["verify", "--key", "strong_p3(4)", "--key", "cat_path_path(4,6)", "--out", out.to_str().unwrap()];
    let o = icx(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 cache hits"));
    assert!(out.join("verify.jsonl").exists() && out.join("verify.csv").exists());
    let o = icx(dir.path(), &args);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2 cache hits"));
    let mut forced = args.to_vec();
    forced.push("--force");
    let o = icx(dir.path(), &forced);
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 cache hits"));

    // printed probes mismatch but are flagged, not failures
    let o = icx(dir.path(), &["verify", "--key", "genfn_g(2)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("flagged"));

    let o = icx(dir.path(), &["verify", "--graph", "cart(cart(path(2),path(2)),path(2))", "--engine", "strict"]);
    assert_eq!(o.status.code(), Some(1));
    let o = icx(dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_then_cached_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--format", "csv", "sweep", "cat(path(3),path(3))"];
    let o = icx(dir.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("graph,sampling,subgraphs"));
    assert!(stdout(&o).contains(",512,0,0,"));
    let o = icx(dir.path(), &args);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1 cache hits"));
    let o = icx(dir.path(), &["sweep", "--connectivity", "1", "cat(cycle(5),path(2))"]);
    assert_eq!(o.status.code(), Some(0));
    let o = icx(dir.path(), &["sweep", "--connectivity", "2", "cat(cycle(5),path(2))"]);
    assert_eq!(o.status.code(), Some(1));
}
