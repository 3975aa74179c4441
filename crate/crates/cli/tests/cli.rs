//! End-to-end tests of the `hardrods` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hardrods_cli::manifest::{sha256_hex, RunManifest};

fn hardrods(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardrods"))
        .arg("--output-root")
        .arg(root)
        .args(args)
        .env_remove("HARDRODS_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn manifest_for(dir: &Path) -> RunManifest {
    RunManifest::load(&dir.join("manifest.json")).unwrap()
}

/// Every artifact must be listed with a digest that matches the bytes on
/// disk.
fn assert_manifest_complete(dir: &Path) {
    let manifest = manifest_for(dir);
    assert!(!manifest.artifacts.is_empty());
    let mut listed: Vec<String> = manifest.artifacts.iter().map(|a| a.path.clone()).collect();
    for artifact in &manifest.artifacts {
        let bytes = fs::read(dir.join(&artifact.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), artifact.sha256, "digest mismatch for {}", artifact.path);
    }
    listed.push("manifest.json".into());
    listed.sort();
    let mut on_disk: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn master_evolve_writes_trace_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hardrods(
        tmp.path(),
        &["master-evolve", "--sites", "20", "--lambda", "2", "--t-max", "1.0", "--samples", "5"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("master-evolve");
    assert_manifest_complete(&dir);
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("omega_t,n,density,p_n\n"));
    // 5 sample times x 7 columns for (L=20, lambda=2)
    assert_eq!(trace.lines().count(), 1 + 5 * 7);
    let obs = fs::read_to_string(dir.join("observables.csv")).unwrap();
    assert!(obs.starts_with("omega_t,mean_density,q_ratio\n"));
    assert!(dir.join("plot_snapshots.py").exists());
}

#[test]
fn quantum_evolve_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "quantum-evolve",
        "--sites",
        "8",
        "--lambda",
        "1",
        "--n0",
        "2",
        "--seed",
        "5",
        "--t-max",
        "3.0",
        "--samples",
        "7",
    ];
    let run = |name: &str| {
        let mut a = args.to_vec();
        a.extend(["--output-dir", name]);
        let out = hardrods(tmp.path(), &a);
        assert!(out.status.success(), "{}", stderr(&out));
        tmp.path().join(name)
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["trace.csv", "observables.csv", "steady_state.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let (ma, mb) = (manifest_for(&a), manifest_for(&b));
    for (x, y) in ma.artifacts.iter().zip(&mb.artifacts) {
        assert_eq!(x, y);
    }
    let obs = fs::read_to_string(a.join("observables.csv")).unwrap();
    assert!(obs.starts_with("omega_t,mean_density,q_ratio,energy\n"));
}

#[test]
fn histogram_requires_seed_and_runs_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = hardrods(
        tmp.path(),
        &["histogram", "--sites", "6", "--lambda", "1", "--count", "3"],
    );
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("base_seed"), "{}", stderr(&missing));

    let out = hardrods(
        tmp.path(),
        &[
            "histogram",
            "--sites",
            "6",
            "--lambda",
            "1",
            "--count",
            "3",
            "--base-seed",
            "7",
            "--window",
            "2",
            "10",
            "--samples",
            "51",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("histogram");
    assert_manifest_complete(&dir);
    let hist = fs::read_to_string(dir.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 4);
    assert!(hist.starts_with("n0,seed,D\n"));
    for line in hist.lines().skip(1) {
        let d: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&d), "{line}");
    }
}

#[test]
fn validation_reports_every_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(
        &cfg,
        "experiment = \"quantum-evolve\"\nomega = -2.0\n[geometry]\nl_over_rc = 10.5\nlambda = 3\n",
    )
    .unwrap();
    let out = hardrods(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("omega"), "{err}");
    assert!(err.contains("non-integer"), "{err}");
}

#[test]
fn validate_accepts_good_config_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "experiment = \"master-evolve\"\n\
         [geometry]\nl_over_rc = 10.0\nlambda = 3\n\
         [time]\nt_max = 1.0\nsamples = 3\n",
    )
    .unwrap();
    let out = hardrods(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("configuration valid"));

    // flag overrides the file's geometry
    let out = hardrods(
        tmp.path(),
        &["master-evolve", "--config", cfg.to_str().unwrap(), "--l-over-rc", "9.0", "--lambda", "4"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = manifest_for(&tmp.path().join("master-evolve"));
    assert_eq!(manifest.config.geometry.l_over_rc, Some(9.0));
    // L = 36 gives 8 columns
    let trace = fs::read_to_string(tmp.path().join("master-evolve/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 3 * 8);
}

#[test]
fn export_network_matches_known_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hardrods(tmp.path(), &["export-network", "--sites", "10", "--lambda", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("export-network");
    let edges = fs::read_to_string(dir.join("edges.txt")).unwrap();
    let columns = fs::read_to_string(dir.join("columns.txt")).unwrap();
    assert_eq!(columns.lines().count(), 123);
    assert_eq!(edges.lines().count(), 340);
    assert_manifest_complete(&dir);
}

#[test]
fn table1_emits_analytic_and_empirical_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hardrods(tmp.path(), &["table1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("table1/table1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 9);
    // the L=12 rows carry empirical columns, the L=300 rows do not
    let l12: Vec<&str> = lines[1].split(',').collect();
    assert!(!l12[6].is_empty());
    let l300: Vec<&str> = lines[3].split(',').collect();
    assert!(l300[6].is_empty());
}

#[test]
fn compare_writes_overlap_when_window_is_covered() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hardrods(
        tmp.path(),
        &[
            "compare",
            "--sites",
            "8",
            "--lambda",
            "1",
            "--n0",
            "2",
            "--count",
            "2",
            "--base-seed",
            "1",
            "--t-max",
            "12",
            "--samples",
            "61",
            "--window",
            "4",
            "12",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = tmp.path().join("compare");
    assert_manifest_complete(&dir);
    assert!(dir.join("quantum_obs_seed1.csv").exists());
    assert!(dir.join("quantum_obs_seed2.csv").exists());
    assert!(dir.join("master_observables.csv").exists());
    let overlap = fs::read_to_string(dir.join("overlap.csv")).unwrap();
    assert_eq!(overlap.lines().count(), 3);
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("typo.toml");
    fs::write(&cfg, "experiment = \"table1\"\nomeg = 1.0\n").unwrap();
    let out = hardrods(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
