use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qtml(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtml"))
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(qtml(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(qtml(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(qtml(dir.path(), &["--weight", "13", "coeffs"]).status.code(), Some(2));
    assert_eq!(qtml(dir.path(), &["--weight", "24", "constants"]).status.code(), Some(2));
    let o = qtml(dir.path(), &["--x-grid", "", "moment"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty X grid"));
    assert_eq!(qtml(dir.path(), &["--ell", "4", "moment"]).status.code(), Some(2));
    assert_eq!(qtml(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn coeffs_cache_hit_and_corruption() {
    let dir = TempDir::new().unwrap();
    let a = qtml(dir.path(), &["coeffs", "--n-max", "5000"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("(built)"));
    let b = qtml(dir.path(), &["coeffs", "--n-max", "5000"]);
    assert!(stdout(&b).contains("(cache hit)"));
    let sum = |o: &Output| stdout(o).split("checksum").nth(1).unwrap().split_whitespace().next().unwrap().to_string();
    assert_eq!(sum(&a), sum(&b));
    // a longer cached table serves a shorter request
    assert!(stdout(&qtml(dir.path(), &["coeffs", "--n-max", "100"])).contains("(cache hit)"));

    let file = fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let mut bytes = fs::read(&file).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    fs::write(&file, &bytes).unwrap();
    let c = qtml(dir.path(), &["coeffs", "--n-max", "5000"]);
    assert_eq!(c.status.code(), Some(3), "{}", String::from_utf8_lossy(&c.stderr));
}

#[test]
fn moment_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let out = |name: &str| dir.path().join(name);
    let run = |name: &str, workers: &str| {
        let o = qtml(
            dir.path(),
            &["--x-grid", "100,200,300", "--workers", workers, "--out", out(name).to_str().unwrap(), "moment"],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out(&format!("{name}.csv"))).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# qtml v1"));
    assert_eq!(lines.next(), Some("X,M,MT,R,R_norm"));
    assert_eq!(lines.count(), 3);
    let json = fs::read_to_string(out("a.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["report"]["rows"].as_array().unwrap().len(), 3);
    assert!(v["config"].as_str().unwrap().contains("x_grid = 100,200,300"));
}

#[test]
fn derivative_routing() {
    let dir = TempDir::new().unwrap();
    // weight 12 has even sign: no derivative moment
    assert_eq!(qtml(dir.path(), &["--derivative", "moment"]).status.code(), Some(2));
    let out = dir.path().join("d");
    let o = qtml(
        dir.path(),
        &["--weight", "18", "--derivative", "--x-grid", "100", "--out", out.to_str().unwrap(), "moment"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row[0], 100.0);
    assert!(row[1] > 0.0 && row[2] > 0.0);
}

#[test]
fn config_file_and_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nweight = 16\nx_grid = 100,150,200\n").unwrap();
    let out = dir.path().join("m");
    let o = qtml(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "--x-grid", "100,200,300", "--out", out.to_str().unwrap(), "moment"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["meta"]["kappa"], 16);
    assert!(v["config"].as_str().unwrap().contains("x_grid = 100,200,300"));
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(qtml(dir.path(), &["--config", cfg.to_str().unwrap(), "constants"]).status.code(), Some(2));
}

#[test]
fn constants_and_quick_suites() {
    let dir = TempDir::new().unwrap();
    let o = qtml(dir.path(), &["constants"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("0.810569469139"), "{s}");
    assert!(s.contains("psi(6)"));
    for suite in ["poisson", "complic", "local"] {
        let o = qtml(dir.path(), &["verify", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}", stdout(&o));
        assert!(stdout(&o).contains("all cases passed"));
    }
}
