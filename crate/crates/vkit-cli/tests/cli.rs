use std::path::Path;
use std::process::{Command, Output};

fn vkit(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vkit"))
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn dims_cold_and_warm_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cold = vkit(dir.path(), &["dims", "--to", "4"]);
    assert!(cold.status.success());
    let warm = vkit(dir.path(), &["dims", "--to", "4"]);
    assert!(warm.status.success());
    assert_eq!(cold.stdout, warm.stdout);
    let text = String::from_utf8(warm.stdout).unwrap();
    assert!(text.contains("4\t3\t6"), "{text}");
}

#[test]
fn dims_reduced_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = vkit(dir.path(), &["dims", "--to", "5", "--variant", "reduced"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let col: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    assert_eq!(col, vec!["1", "0", "1", "1", "3", "4"]);
}

#[test]
fn json_output_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["dims", "--to", "3", "--json"],
        vec!["weight", "--diagram", "1 2 1 2", "--algebra", "gl", "--json"],
        vec!["hutchings", "--degree", "2", "--json"],
        vec!["weight-rank", "--to", "2", "--json"],
    ] {
        let out = vkit(dir.path(), &args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        // round-trip: parse -> serialize -> parse gives the same value
        let v2: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, v2);
    }
}

#[test]
fn weight_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = vkit(dir.path(), &["weight", "--diagram", "", "--algebra", "gl"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "N");
    let out = vkit(dir.path(), &["weight", "--diagram", "1 1", "--algebra", "gl"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "N^2");
}

#[test]
fn assoc_export_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.txt");
    let out = vkit(
        dir.path(),
        &["assoc", "--degree", "2", "--out", path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(stdout.contains("pentagon residual: 0"), "{stdout}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("1/24\tt12 t23"), "{text}");
    assert!(text.contains("-1/24\tt23 t12"), "{text}");
    // warm rerun hits the cache and produces identical output
    let warm = vkit(
        dir.path(),
        &["assoc", "--degree", "2", "--out", path.to_str().unwrap()],
    );
    assert_eq!(out.stdout, warm.stdout);
}

#[test]
fn tangle_prints_degree_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = vkit(
        dir.path(),
        &["tangle", "--events", "trefoil-13slice", "--degree", "2"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("degree 2:"), "{text}");
    assert!(text.contains("1 2 1 2"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // validation error: malformed diagram
    let out = vkit(dir.path(), &["weight", "--diagram", "1 2 3", "--algebra", "gl"]);
    assert_eq!(out.status.code(), Some(2));
    // budget error: hutchings beyond the bound
    let out = vkit(dir.path(), &["hutchings", "--degree", "9"]);
    assert_eq!(out.status.code(), Some(3));
    // unknown preset / missing file
    let out = vkit(dir.path(), &["tangle", "--events", "no-such-presentation"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cache_inspect_and_clear() {
    let dir = tempfile::tempdir().unwrap();
    vkit(dir.path(), &["dims", "--to", "2"]);
    let out = vkit(dir.path(), &["cache", "inspect"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dims"), "{text}");
    let out = vkit(dir.path(), &["cache", "clear"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("removed"));
    let out = vkit(dir.path(), &["cache", "inspect"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("0 entries"));
}

#[test]
fn thread_flag_output_identical() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let a = vkit(dir1.path(), &["--threads", "1", "dims", "--to", "4"]);
    let b = vkit(dir2.path(), &["--threads", "8", "dims", "--to", "4"]);
    assert_eq!(a.stdout, b.stdout);
}
