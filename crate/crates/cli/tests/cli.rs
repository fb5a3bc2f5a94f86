use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn strength(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strength"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn bias_of_two_block_diagonal_is_one_ninth() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "diag_r2_d2_p3.json", r#"{"kind":"multilinear","d":2,"ring":{"p":3},"coeffs":[[1,0],[0,1]]}"#);
    let o = strength(&["bias", "--form", "diag_r2_d2_p3.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("diag_r2_d2_p3,1/9,"), "{row}");
}

#[test]
fn rank_of_zero_form() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "zero.json", r#"{"kind":"multilinear","d":3,"ring":{"p":2},"coeffs":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#);
    let o = strength(&["rank", "--form", "zero.json", "--cert", "cert.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let cols: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((cols[2], cols[4]), ("0", "0"));
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["terms"].as_array().unwrap().len(), 0);
}

#[test]
fn scaling_audit_hundred_seeds() {
    let tmp = TempDir::new().unwrap();
    let o = strength(&["audit", "scaling", "--seeds", "100"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.contains(",holds,")));
}

#[test]
fn worker_count_does_not_change_reports() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "f.json",
        r#"{"kind":"multilinear","d":3,"ring":{"p":3},"coeffs":[[[1,0],[0,2]],[[0,1],[1,0]]]}"#,
    );
    let a = strength(&["bias", "--form", "f.json", "--workers", "1"], tmp.path());
    let b = strength(&["bias", "--form", "f.json", "--workers", "4"], tmp.path());
    assert_eq!(a.stdout, b.stdout);
    let a = strength(&["audit", "kernel", "--seeds", "20", "--workers", "1"], tmp.path());
    let b = strength(&["audit", "kernel", "--seeds", "20", "--workers", "3"], tmp.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn parse_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(strength(&["bias", "--form", "missing.json"], tmp.path()).status.code(), Some(2));
    write(tmp.path(), "bad.json", "{not json");
    assert_eq!(strength(&["bias", "--form", "bad.json"], tmp.path()).status.code(), Some(2));
    write(tmp.path(), "ragged.json", r#"{"kind":"multilinear","d":2,"ring":{"p":3},"coeffs":[[1,0],[0]]}"#);
    assert_eq!(strength(&["rank", "--form", "ragged.json"], tmp.path()).status.code(), Some(2));
    assert_eq!(strength(&["frobnicate"], tmp.path()).status.code(), Some(2));
    assert_eq!(strength(&["bias"], tmp.path()).status.code(), Some(2));
}

#[test]
fn cap_exceeded_exits_three() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "d.json", r#"{"kind":"multilinear","d":2,"ring":{"p":3},"coeffs":[[1,0],[0,1]]}"#);
    let o = strength(&["bias", "--form", "d.json", "--bias-cap", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn corpus_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    for dir in ["a", "b"] {
        let o = strength(&["corpus", "--profile", "random-smallfield", "--seed", "1", "--out", dir], tmp.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &str| fs::read(tmp.path().join(d).join("manifest.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    let o = strength(&["corpus", "--profile", "nonsense", "--out", "c"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ladder_corpus_ranks_match_manifest() {
    let tmp = TempDir::new().unwrap();
    let o = strength(&["corpus", "--profile", "diagonal-ladder", "--out", "lad"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("lad/manifest.json")).unwrap()).unwrap();
    for e in manifest["entries"].as_array().unwrap() {
        let file = format!("lad/{}", e["file"].as_str().unwrap());
        let out = stdout(&strength(&["rank", "--form", &file], tmp.path()));
        let cols: Vec<String> = out.lines().nth(1).unwrap().split(',').map(String::from).collect();
        let known = e["known_prk"].as_u64().unwrap().to_string();
        assert_eq!(cols[4], known, "{file}");
    }
}

#[test]
fn descent_flags_planted_prime() {
    let tmp = TempDir::new().unwrap();
    let o = strength(&["corpus", "--profile", "integer-descent", "--seed", "3", "--out", "idc"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("idc/manifest.json")).unwrap()).unwrap();
    for e in manifest["entries"].as_array().unwrap() {
        let Some(planted) = e["planted_prime"].as_u64() else { continue };
        let file = format!("idc/{}", e["file"].as_str().unwrap());
        let o = strength(&["descent", "--form", &file, "--primes", "5,7,11,13"], tmp.path());
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        let flagged: Vec<u64> = out
            .lines()
            .skip(1)
            .filter(|l| l.ends_with(",true"))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(flagged, vec![planted], "{file}");
    }
}

#[test]
fn embed_writes_verified_maps() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "src.json", r#"{"kind":"multilinear","d":2,"ring":{"p":2},"coeffs":[[1,0],[0,1]]}"#);
    write(tmp.path(), "tgt.json", r#"{"kind":"multilinear","d":2,"ring":{"p":2},"coeffs":[[1]]}"#);
    let o = strength(&["embed", "--collection", "src.json", "--targets", "tgt.json"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcome"], "found");
    assert_eq!(v["embedding"]["verified"], true);

    // x1 y1 cannot reach a rank-2 target.
    write(tmp.path(), "r1.json", r#"{"kind":"multilinear","d":2,"ring":{"p":2},"coeffs":[[1]]}"#);
    write(tmp.path(), "r2.json", r#"{"kind":"multilinear","d":2,"ring":{"p":2},"coeffs":[[1,0],[0,1]]}"#);
    let o = strength(&["embed", "--collection", "r1.json", "--targets", "r2.json"], tmp.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["outcome"], "not-found");
    assert_eq!(v["certified"], true);
}

#[test]
fn audits_write_reports_to_out() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "cubic.json",
        r#"{"kind":"homogeneous","d":3,"s":3,"ring":{"p":5},"monomials":[{"exp":[3,0,0],"c":1},{"exp":[0,3,0],"c":1},{"exp":[0,0,3],"c":1}]}"#,
    );
    for kind in ["geometry", "main"] {
        let o = strength(&["audit", kind, "--form", "cubic.json", "--out", "r.csv"], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{kind}");
        let text = fs::read_to_string(tmp.path().join("r.csv")).unwrap();
        assert!(text.lines().skip(1).all(|l| l.contains(",cubic,") && !l.contains("violation")), "{text}");
    }
    let o = strength(&["geometry", "--form", "cubic.json"], tmp.path());
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "cubic:birch,5,1,3,normal");
}

#[test]
fn constants_override_changes_threshold() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "cubic.json",
        r#"{"kind":"homogeneous","d":3,"s":2,"ring":{"p":7},"monomials":[{"exp":[2,1],"c":1}]}"#,
    );
    write(tmp.path(), "c.json", r#"{"finite_large": {"A": 1000}}"#);
    let base = stdout(&strength(&["audit", "main", "--form", "cubic.json"], tmp.path()));
    let over = stdout(&strength(&["audit", "main", "--form", "cubic.json", "--constants", "c.json"], tmp.path()));
    assert_ne!(base, over);
    assert!(over.contains("A=1000"), "{over}");
}

#[test]
fn ring_override_reduces_integer_input() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "z.json", r#"{"kind":"multilinear","d":2,"ring":"Z","coeffs":[[3,0],[0,1]]}"#);
    let o = strength(&["rank", "--form", "z.json"], tmp.path());
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').nth(4), Some("2"));
    let o = strength(&["rank", "--form", "z.json", "--ring", "F3"], tmp.path());
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').nth(4), Some("1"));
}
