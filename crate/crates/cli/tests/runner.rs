use std::path::{Path, PathBuf};
use std::process::Command;

use cqnls_cli::config::{ExperimentConfig, GridConfig, InitialData};
use cqnls_cli::experiments::sweep::run_sweep;
use cqnls_cli::{output_dir, run, Overrides};
use proptest::prelude::*;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cqnls"));
    c.env_remove("CQNLS_OUT");
    c
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn exit_code(args: &[&str], cwd: &Path) -> i32 {
    bin().args(args).current_dir(cwd).output().unwrap().status.code().unwrap()
}

#[test]
fn selftest_exits_clean_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("st");
    let o = bin().args(["selftest", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "selftest");
    let cfg = ExperimentConfig::load(&out.join("config.toml")).unwrap();
    assert_eq!(manifest["config_sha256"], cfg.hash());
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(exit_code(&["no-such-experiment"], d), 1);
    let bad = write_config(d, "experiment = \"selftest\"\nbogus = 3\n");
    assert_eq!(exit_code(&["--config", bad.to_str().unwrap()], d), 1);
    let bad_grid = write_config(d, "[grid]\nr_max = -1.0\n");
    assert_eq!(exit_code(&["--config", bad_grid.to_str().unwrap()], d), 1);
    assert_eq!(exit_code(&["--config", "missing.toml"], d), 1);
}

#[test]
fn numerical_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = \"classify\"\n[grid]\nr_max = 8.0\nn = 255\n\
         [initial]\nfamily = \"bubble\"\n[initial.params]\ncutoff = 20.0\n",
    );
    assert_eq!(exit_code(&["--config", cfg.to_str().unwrap()], dir.path()), 2);
}

#[test]
fn failed_invariants_exit_three() {
    // a small box reflects the dispersing wave, so the decay fit fails
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "experiment = \"free-decay\"\n[free_decay.grid]\nr_max = 32.0\nn = 511\n",
    );
    assert_eq!(exit_code(&["--config", cfg.to_str().unwrap()], dir.path()), 3);
}

#[test]
fn output_directory_precedence() {
    let mut cfg = ExperimentConfig { experiment: "evolve".into(), ..Default::default() };
    let cli = Path::new("/a");
    let env = Path::new("/b");
    assert_eq!(output_dir(&cfg, None, None), PathBuf::from("cqnls-out/evolve"));
    assert_eq!(output_dir(&cfg, None, Some(env)), PathBuf::from("/b/evolve"));
    cfg.out_dir = Some("/c".into());
    assert_eq!(output_dir(&cfg, None, Some(env)), PathBuf::from("/c"));
    assert_eq!(output_dir(&cfg, Some(cli), Some(env)), PathBuf::from("/a"));
}

#[test]
fn env_var_sets_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("selftest").current_dir(dir.path()).env("CQNLS_OUT", dir.path().join("root")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("root/selftest/manifest.json").exists());
}

#[test]
fn positional_experiment_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { experiment: "no-such-experiment".into(), ..Default::default() };
    let ov = Overrides { experiment: Some("selftest".into()), out: Some(dir.path().join("x")), workers: None };
    let o = run(cfg, &ov).unwrap();
    assert_eq!(o.manifest.experiment, "selftest");
    assert_eq!(o.exit_code(), 0);
}

fn tiny_sweep() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.grid = GridConfig::new(16.0, 255);
    cfg.initial = InitialData::gaussian(0.1, 1.0);
    cfg.stepper.dt = 1e-2;
    cfg.stepper.t_end = 0.5;
    cfg.sweep.start = 0.2;
    cfg.sweep.stop = 1.0;
    cfg.sweep.step = 0.2;
    cfg.sweep.kminus.enabled = false;
    cfg
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let cfg = tiny_sweep();
    let a = run_sweep(&cfg, 1).unwrap();
    let b = run_sweep(&cfg, 3).unwrap();
    assert_eq!(a.rows.len(), 5);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn rerun_reproduces_artifacts_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_sweep();
    cfg.experiment = "evolve".into();
    cfg.stepper.snapshot_stride = 10;
    let read = |sub: &str, f: &str| std::fs::read(dir.path().join(sub).join(f)).unwrap();
    for sub in ["a", "b"] {
        let ov = Overrides { out: Some(dir.path().join(sub)), ..Default::default() };
        run(cfg.clone(), &ov).unwrap();
    }
    for f in ["series.csv", "snapshot_00002.csv", "outcome.json", "config.toml"] {
        assert_eq!(read("a", f), read("b", f), "{f}");
    }
}

#[test]
fn oversized_seed_is_a_config_error() {
    let cfg = ExperimentConfig { seed: u64::MAX, ..Default::default() };
    assert!(matches!(cfg.validate(), Err(cqnls_cli::error::CliError::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn config_round_trips_through_toml(
        r_max in 1.0f64..500.0,
        k in 4u32..16,
        dt in 1e-5f64..1e-1,
        amp in 0.0f64..3.0,
        seed in 0..=i64::MAX as u64,
        sponge in any::<bool>(),
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.grid = GridConfig::new(r_max, (1usize << k) - 1);
        cfg.stepper.dt = dt;
        cfg.stepper.sponge = sponge;
        cfg.seed = seed;
        cfg.initial = InitialData::gaussian(amp, 1.0);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.hash(), cfg.hash());
    }
}

#[test]
fn presets_load_and_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap();
        let stem = path.file_stem().unwrap().to_str().unwrap();
        assert!(stem.starts_with(&cfg.experiment), "{stem} runs {}", cfg.experiment);
        n += 1;
    }
    assert!(n >= 6);
}
