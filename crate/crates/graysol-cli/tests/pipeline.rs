use std::path::Path;
use std::process::Command;

use graysol_cli::config::{ExperimentConfig, ExperimentKind};
use graysol_cli::pipeline::{dry_run, run, run_soliton_shift, sweep_points};
use graysol_cli::record::COLUMNS;

fn shift_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        betas: vec![-0.5],
        k_values: vec![1.4],
        epsilons: vec![0.1],
        out_dir: dir.to_path_buf(),
        record_timings: false,
        ..ExperimentConfig::soliton_shift()
    }
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn empty_wavenumber_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        k_values: vec![],
        ..shift_config(dir.path())
    };
    assert_eq!(run(&cfg).unwrap(), (0, 0));
    assert_eq!(
        lines(&dir.path().join("results.csv")),
        vec![COLUMNS.join(",")]
    );
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metadata.json")).unwrap())
            .unwrap();
    assert_eq!(meta["n_records"], 0);
}

#[test]
fn single_point_gives_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shift_config(dir.path());
    let result = run_soliton_shift(&cfg).unwrap();
    assert_eq!(result.records.len(), 1);
    assert!(result.failures.is_empty());
    let r = &result.records[0];
    assert_eq!(r.experiment, "soliton-shift");
    assert_eq!(r.runtime_s, 0.0);
    let measured = r.dx_measured.unwrap();
    assert!(
        (measured / r.dx_pred - 1.0).abs() < 0.03,
        "{measured} vs {}",
        r.dx_pred
    );
    assert!(r.n_drift < 1e-10 && r.p_drift < 1e-9);
    assert_eq!(lines(&dir.path().join("results.csv")).len(), 2);
    for f in [
        "panel_a_points.dat",
        "panel_a_mean.dat",
        "panel_a_pred.dat",
        "panel_a_pred_without_n2.dat",
        "metadata.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ExperimentConfig {
        epsilons: vec![0.2, 0.1],
        ..shift_config(a.path())
    };
    run(&ExperimentConfig {
        threads: 1,
        ..base.clone()
    })
    .unwrap();
    run(&ExperimentConfig {
        threads: 2,
        out_dir: b.path().to_path_buf(),
        ..base
    })
    .unwrap();
    for f in ["results.csv", "panel_a_points.dat", "panel_a_mean.dat"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let rows = lines(&a.path().join("results.csv"));
    assert!(rows[1].contains(",0.2,") && rows[2].contains(",0.1,"));
}

#[test]
fn dry_run_snaps_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("never");
    for kind in [
        ExperimentKind::PacketAdvance,
        ExperimentKind::SolitonShift,
        ExperimentKind::Custom,
    ] {
        let cfg = ExperimentConfig {
            out_dir: target.clone(),
            ..ExperimentConfig::preset(kind)
        };
        let entries = dry_run(&cfg).unwrap();
        assert_eq!(entries.len(), sweep_points(&cfg).len());
        for e in &entries {
            let spacing = std::f64::consts::PI / e.half_length;
            assert!((e.k_snapped - e.point.k).abs() <= spacing, "{kind:?}");
            assert!(e.n_points.is_power_of_two() && e.duration > 0.0);
        }
    }
    assert!(!target.exists());
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        ExperimentConfig {
            betas: vec![1.2],
            ..shift_config(dir.path())
        },
        ExperimentConfig {
            epsilons: vec![0.0],
            ..shift_config(dir.path())
        },
        ExperimentConfig {
            k_values: vec![0.1],
            ..shift_config(dir.path())
        },
        ExperimentConfig {
            lambda: 2.0,
            ..shift_config(dir.path())
        },
    ];
    for cfg in bad {
        assert!(run(&cfg).is_err());
    }
}

#[test]
fn binary_dry_run_prints_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_graysol"))
        .args(["--experiment", "soliton-shift", "--dry-run"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let entries: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(entries.as_array().unwrap().len(), 64);
}

#[test]
fn binary_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"experiment": "soliton-shift", "betaz": [0.5]}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_graysol"))
        .arg("--config")
        .arg(&path)
        .arg("--dry-run")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
