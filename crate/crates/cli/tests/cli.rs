use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn figure(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../figures").join(name)
}

fn run(args: &[&str], scenario: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fermi-lattice"));
    cmd.args(args).arg("--scenario").arg(scenario).arg("--out").arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const CHAIN3: &str = r#""system": {"kind": "chain", "chain": {"n_sites": 3, "length": 1.0, "pinning_frequency": 1.0, "speed": 1.0}}"#;

fn scenario_block(eps: f64) -> String {
    format!(
        r#""scenario": {{"site_a": 0, "site_b": 1, "omega_a": 2.0, "omega_b": 2.0, "epsilon": {eps},
            "opening_a": {{"type": "constant"}}, "opening_b": {{"type": "constant"}}, "duration": 0.5}}"#
    )
}

#[test]
fn bare_run_writes_csv_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig3.csv");
    let o = run(&["bare"], &figure("fig3.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("nominal causal time"), "{stderr}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("commutator_ratio"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,a0_re,a0_im,ac_re,ac_im,total_re,total_im,abs_a0,abs_ac,probability\n"));
    assert_eq!(csv.lines().count(), 502);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig3.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bare");
    assert_eq!(manifest["scenario_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["outputs"][0], out.display().to_string());
}

#[test]
fn quiet_silences_stdout_only() {
    let dir = TempDir::new().unwrap();
    let o = run(&["bare", "--quiet"], &figure("fig3.json"), &dir.path().join("x.csv"), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&["causality"], &figure("fig1.json"), &a, &[("FERMI_LATTICE_THREADS", "1")]).status.code(), Some(0));
    assert_eq!(run(&["causality"], &figure("fig1.json"), &b, &[]).status.code(), Some(0));
    for n in [100, 200, 500, 1000] {
        let x = std::fs::read(dir.path().join(format!("a_N{n}.csv"))).unwrap();
        let y = std::fs::read(dir.path().join(format!("b_N{n}.csv"))).unwrap();
        assert_eq!(x, y, "N = {n}");
    }
    let bad = run(&["causality"], &figure("fig1.json"), &a, &[("FERMI_LATTICE_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_and_schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.csv");
    assert_eq!(run(&["bare"], &dir.path().join("missing.json"), &out, &[]).status.code(), Some(2));
    assert_eq!(run(&["teleport"], &figure("fig3.json"), &out, &[]).status.code(), Some(2));

    let empty_grid = write(&dir, "e.json", &format!(r#"{{{CHAIN3}, {}, "run": {{"causality": {{"taus": []}}}}}}"#, scenario_block(0.1)));
    let o = run(&["causality"], &empty_grid, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let scheme = write(&dir, "s.json", &format!(r#"{{{CHAIN3}, {}, "run": {{"dressed": {{"schemes": ["sigma_z"]}}}}}}"#, scenario_block(0.1)));
    let o = run(&["dressed"], &scheme, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let cutoff = write(&dir, "c.json", r#"{"system": {"kind": "trap", "trap": {"n_ions": 2, "omega0": 1.0}}, "run": {"ion2": {"schmidt_cutoff": -3}}}"#);
    assert_eq!(run(&["ion2"], &cutoff, &out, &[]).status.code(), Some(2));

    let huge = write(
        &dir,
        "h.json",
        &format!(
            r#"{{"system": {{"kind": "chain", "chain": {{"n_sites": 40, "length": 1.0, "pinning_frequency": 1.0, "speed": 1.0}}}}, {}, "run": {{"oracle": {{"start_cutoff": 6, "max_cutoff": 8}}}}}}"#,
            scenario_block(0.01)
        ),
    );
    let o = run(&["oracle-check"], &huge, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the limit"));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "n.json", &format!(r#"{{{CHAIN3}, {}, "run": {{"oracle": {{"start_cutoff": 2, "max_cutoff": 2}}}}}}"#, scenario_block(0.1)));
    let o = run(&["oracle-check"], &f, &dir.path().join("o.csv"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_at_zero_coupling() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "z.json", &format!(r#"{{{CHAIN3}, {}}}"#, scenario_block(0.0)));
    let out = dir.path().join("z.csv");
    assert_eq!(run(&["oracle-check"], &f, &out, &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn cloud_single_snapshot_and_empty_bare_start() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "c.json",
        &format!(r#"{{{CHAIN3}, {}, "run": {{"cloud": {{"times": [0.0], "scheme": "bare", "component": "split"}}}}}}"#, scenario_block(0.1)),
    );
    let out = dir.path().join("c.csv");
    assert_eq!(run(&["cloud"], &f, &out, &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,n,d_up,d_down,d_n");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        assert!(l.split(',').skip(2).all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
    let manifest = std::fs::read_to_string(dir.path().join("c.csv.manifest.json")).unwrap();
    assert!(manifest.contains("not a local observable"));
}

#[test]
fn ion2_defaults() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "i.json", r#"{"system": {"kind": "trap", "trap": {"n_ions": 2, "omega0": 1.0}}}"#);
    let out = dir.path().join("i.csv");
    let o = run(&["ion2"], &f, &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("p=0.0100819"), "{stdout}");
    let three = write(&dir, "t.json", r#"{"system": {"kind": "trap", "trap": {"n_ions": 3, "omega0": 1.0}}}"#);
    assert_eq!(run(&["ion2"], &three, &out, &[]).status.code(), Some(2));
}
