//! End-to-end checks of the binary: exit statuses, file contracts,
//! full-precision CSV round-trips, and bit-identical manifest replays.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use subwave_core::bie::Resolution;
use subwave_core::capacitance;
use subwave_core::geometry::Scene;

fn subwave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subwave"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn truth_scene() -> Scene {
    Scene::chain(1.0 / 3.0, 1e-3).with_defect([3.0, 0.0, 0.0], 1e-2)
}

fn write_scene(dir: &Path, scene: &Scene) -> String {
    let path = dir.join("scene.json");
    fs::write(&path, scene.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_scene_file_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = subwave(
        &["capmat", "--scene", "no-such-scene.json", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("no-such-scene.json"),
        "stderr names the file: {stderr}"
    );
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = subwave(&["capmat"], dir.path());
    assert_eq!(out.status.code(), Some(2), "missing required --scene");

    let scene = write_scene(dir.path(), &truth_scene());
    let out = subwave(
        &["sweep", "--scene", &scene, "--out", "o", "--radii", "0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "a zero radius is rejected");
}

#[test]
fn expand_needs_a_defect() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path(), &Scene::chain(1.0 / 3.0, 1e-3));
    let out = subwave(&["expand", "--scene", &scene, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

fn parse_labeled_matrix(text: &str) -> DMatrix<f64> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|line| {
            line.split(',')
                .skip(1)
                .map(|f| f.parse().unwrap())
                .collect()
        })
        .collect();
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn capmat_output_round_trips_the_library_matrix_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let scene = truth_scene();
    let scene_path = write_scene(dir.path(), &scene);
    let out = subwave(
        &["capmat", "--scene", &scene_path, "--out", "run", "--degree", "3"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(dir.path().join("run/capacitance.csv")).unwrap();
    let parsed = parse_labeled_matrix(&text);
    let bodies: Vec<([f64; 3], f64)> = scene
        .resonators
        .iter()
        .map(|r| (r.center, r.radius))
        .collect();
    let direct = capacitance::capacitance(&bodies, Resolution::new(3)).unwrap();
    assert_eq!(parsed.nrows(), 3);
    for i in 0..3 {
        for j in 0..3 {
            // 18 printed significant digits reproduce every bit.
            assert_eq!(parsed[(i, j)].to_bits(), direct[(i, j)].to_bits());
        }
    }

    let perturbed = fs::read_to_string(dir.path().join("run/capacitance_perturbed.csv")).unwrap();
    assert_eq!(parse_labeled_matrix(&perturbed).nrows(), 4);
}

#[test]
fn manifest_replay_reproduces_every_byte() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = write_scene(dir.path(), &truth_scene());
    let out = subwave(
        &[
            "loss-map",
            "--scene",
            &scene_path,
            "--out",
            "first",
            "--grid",
            "2.8:3.2:4,0:0.3:2",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = subwave(
        &[
            "--from-manifest",
            "first/manifest.json",
            "--out",
            "second",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    for name in ["loss_map.csv", "loss_map_summary.json", "manifest.json"] {
        let a = fs::read(dir.path().join("first").join(name)).unwrap();
        let b = fs::read(dir.path().join("second").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs under replay");
    }
}

#[test]
fn seeded_noise_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = write_scene(dir.path(), &truth_scene());
    let args = |out: &str| {
        vec![
            "sense".to_string(),
            "--scene".to_string(),
            scene_path.clone(),
            "--out".to_string(),
            out.to_string(),
            "--noise".to_string(),
            "1e-3".to_string(),
            "--draws".to_string(),
            "2".to_string(),
            "--seed".to_string(),
            "99".to_string(),
            "--grid".to_string(),
            "2.9:3.1:2,0:0:1".to_string(),
        ]
    };
    for out in ["a", "b"] {
        let owned = args(out);
        let argv: Vec<&str> = owned.iter().map(String::as_str).collect();
        let r = subwave(&argv, dir.path());
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for name in ["draws.csv", "traces.csv", "sense_summary.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identically seeded runs");
    }
}

#[test]
fn spectrum_finds_the_tuned_point_and_writes_a_usable_scene() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = write_scene(dir.path(), &Scene::chain(1.0 / 3.0, 1e-3));
    let out = subwave(
        &["spectrum", "--scene", &scene_path, "--out", "o", "--find-ep"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/ep_report.json")).unwrap())
            .unwrap();
    let gap = report["gap"].as_f64().unwrap();
    let detuning = report["detuning"].as_f64().unwrap();
    assert!(gap < 1e-6, "residual gap {gap}");
    assert!((0.2..0.35).contains(&detuning), "detuning {detuning}");

    let tuned =
        Scene::from_json(&fs::read_to_string(dir.path().join("o/ep_scene.json")).unwrap())
            .unwrap();
    assert!(tuned.resonators[0].delta.im > 0.0);
    assert!(tuned.resonators[2].delta.im < 0.0);
    assert_eq!(tuned.resonators[1].delta.im, 0.0);
}
