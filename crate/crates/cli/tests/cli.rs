use std::path::Path;
use std::process::{Command, Output};

fn vbott(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbott"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn zero_kdv_preset_writes_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbott(
        &["kdv", "--set", "kdv.preset=zero", "--set", "kdv.n=256", "--set", "kdv.samples=8"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("kdv.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert_eq!(lines.next(), Some("t,l2_error_vs_soliton,momentum_drift,speed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!(r.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{r}");
    }
}

#[test]
fn front_preset_follows_characteristics() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbott(
        &[
            "kdv",
            "--set",
            "kdv.preset=front",
            "--set",
            "kdv.a=0",
            "--set",
            "kdv.half_width=20",
            "--set",
            "kdv.n=1024",
            "--set",
            "kdv.t_final=0.5",
        ],
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout.contains("PASS l2_error"));
}

#[test]
fn front_preset_requires_zero_dispersion() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbott(&["kdv", "--set", "kdv.preset=front"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_suite_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check-identities", "--set", "identities.n=2048", "--set", "identities.instances=2"];
    let ok = vbott(&args, dir.path());
    assert!(ok.status.success());
    let mut bad = args.to_vec();
    bad.extend(["--set", "identities.corrupt=true"]);
    let o = vbott(&bad, dir.path());
    assert_eq!(o.status.code(), Some(1));
    let csv = read(&dir.path().join("identities.csv"));
    assert!(csv.lines().any(|l| l.starts_with("adjoint_duality,") && l.ends_with(",false")));
}

#[test]
fn seed_variation_still_passes() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let o = vbott(
            &["check-identities", "--seed", seed, "--set", "identities.n=2048", "--set", "identities.instances=2"],
            dir.path(),
        );
        assert!(o.status.success());
    }
}

#[test]
fn env_and_config_file_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[center]\ntargets = [0.0]\n").unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_vbott"))
        .arg("center")
        .env("VBOTT_CONFIG", &cfg)
        .env("VBOTT_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("center.csv"));
    let row: Vec<f64> = csv
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    // target, achieved, drift, energy, length, eps0, eps1, ...
    assert_eq!(row[0], 0.0);
    assert_eq!(row[6], 0.0);
    assert!(row[3] <= 0.05);
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn identity_target_gives_zero_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbott(
        &["distance", "--set", "distance.a=0", "--set", "distance.g.kind=zero", "--set", "distance.n=801"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = read(&dir.path().join("distance.csv"));
    for row in csv.lines().skip(2) {
        let length: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(length, 0.0);
    }
}

#[test]
fn bad_override_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbott(&["center", "--set", "center.nope=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
