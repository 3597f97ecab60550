use std::fs;
use std::path::Path;
use std::process::Command;

const FREE: &str = "lambda = 1.0\nm_max = 8\nmatch_radius = 12.0\n[grid]\nn = 64\nhalf_width = 14.0\n";

const EQUAL: &str = r#"
lambda = 1.0
h = [0.16, 0.08]
probes = [[0.0, 0.0], [0.3, 0.1]]

[potential]
family = "gaussianBump"
center = [0.1, -0.1]
width = 0.6
amplitude = 0.9

[reference]
family = "gaussianBump"
center = [0.1, -0.1]
width = 0.6
amplitude = 0.9
"#;

fn run(kind: &str, config: &str, dir: &Path, out: &str) -> std::process::Output {
    let path = dir.join(format!("{out}.toml"));
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cgoscatter"))
        .arg(kind)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join(out))
        .env("CGOSCATTER_THREADS", "1")
        .output()
        .unwrap()
}

#[test]
fn free_scattering_run_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("direct", FREE, tmp.path(), "free");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("free");
    for f in ["s_matrix.csv", "summary.csv", "config.resolved.toml", "VERSION", "potential.cgf1"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",true")), "{summary}");
    assert!(summary.contains("free_diagonal"));
}

#[test]
fn missing_lambda_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("direct", "seed = 3\n", tmp.path(), "bad");
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("bad").exists());
}

#[test]
fn unknown_kind_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("inverse", FREE, tmp.path(), "nope");
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("nope").exists());
}

#[test]
fn numerical_failure_exits_1_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    // Matching circle inside the support of a wide well.
    let cfg = "lambda = 1.0\nmatch_radius = 1.0\n[grid]\nn = 64\nhalf_width = 6.0\n[potential]\nfamily = \"radialWell\"\ndepth = 2.0\nradius = 3.0\n";
    let out = run("direct", cfg, tmp.path(), "fail");
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("fail/diagnostics.txt").exists());
}

#[test]
fn equal_potentials_give_a_zero_probe_map() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run("identify", EQUAL, tmp.path(), "equal");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let probes = fs::read_to_string(tmp.path().join("equal/probes.csv")).unwrap();
    for line in probes.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(&cols[2..], &[0.0, 0.0, 0.0, 0.0]);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    run("identify", EQUAL, tmp.path(), "a");
    run("identify", EQUAL, tmp.path(), "b");
    for f in ["probes.csv", "summary.csv"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
}
