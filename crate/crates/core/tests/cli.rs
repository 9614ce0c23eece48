//! End-to-end runs of the `pcrseg` binary.

use std::path::Path;
use std::process::Command;

use pcrseg::oracle::verify::example_break_instance;
use pcrseg::{PcrImage, Raster, Rect};
use serde_json::Value;

fn pcrseg(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pcrseg")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example_file(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("example.pcr");
    example_break_instance(1).unwrap().f.write(&path).unwrap();
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn denoise_reproduces_example_values() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    let out = dir.path().join("out");
    let (code, _, err) = pcrseg(&["denoise", "--input", s(&input), "--out", s(&out), "--lambda", "16"]);
    assert_eq!(code, 0, "{err}");
    let ex = example_break_instance(1).unwrap();
    let w = PcrImage::read(&out.join("denoised.pcr")).unwrap();
    let k1 = ex.a1.cells().next().unwrap();
    let k2 = ex.a2.cells().next().unwrap();
    assert!((w.value(k1) - 0.75).abs() < 1e-12);
    assert!((w.value(k2) - 0.5).abs() < 1e-12);
    assert!((w.value(0) - 9.0 / 94.0).abs() < 1e-12);
    assert_eq!(json(&out.join("report.json"))["solver"], "exact");
}

#[test]
fn segment_writes_labels_sidecar_overlay_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    let out = dir.path().join("seg");
    let mu = (384.0f64 / 47.0).to_string();
    let (code, _, err) = pcrseg(&["segment", "--input", s(&input), "--out", s(&out), "--mu", &mu]);
    assert_eq!(code, 0, "{err}");
    for name in ["labels.pcr", "labels.json", "overlay.png", "report.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let rep = json(&out.join("report.json"));
    // A1 and A1 + A2 tie at 4.5, the minimum.
    assert!((rep["energy"].as_f64().unwrap() - 4.5).abs() < 1e-9);
    assert_eq!(rep["phases"], 2);
    let side = json(&out.join("labels.json"));
    assert_eq!(side["phases"][0]["gray"], 255);
    assert_eq!(side["phases"][1]["gray"], 0);
}

#[test]
fn trof_first_iterate_has_three_bands() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    let out = dir.path().join("trof");
    let args = [
        "trof", "--input", s(&input), "--out", s(&out), "--lambda", "16", "--phases", "3", "--max-iters", "1",
    ];
    let (code, _, err) = pcrseg(&args);
    assert_eq!(code, 0, "{err}");
    let ex = example_break_instance(1).unwrap();
    let labels = PcrImage::read(&out.join("labels.pcr")).unwrap();
    let rest = ex.a1.union(&ex.a2).unwrap().complement();
    for (set, v) in [(&ex.a1, 1.0), (&ex.a2, 128.0 / 255.0), (&rest, 0.0)] {
        assert!(set.cells().all(|k| labels.value(k) == v));
    }
    assert_eq!(json(&out.join("report.json"))["tau_update"], "midpoint");
}

#[test]
fn nonpositive_lambda_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    let out = dir.path().join("x");
    assert_eq!(pcrseg(&["denoise", "--input", s(&input), "--out", s(&out), "--lambda", "0"]).0, 1);
    assert_eq!(pcrseg(&["trof", "--input", s(&input), "--out", s(&out), "--lambda", "-2"]).0, 1);
    assert_eq!(pcrseg(&["segment", "--input", s(&input), "--out", s(&out)]).0, 1);
}

#[test]
fn constant_image_collapses() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.pgm");
    Raster::constant(8, 8, 0.5).unwrap().write(&input).unwrap();
    let (code, _, err) = pcrseg(&["segment", "--input", s(&input), "--out", s(&dir.path().join("o")), "--mu", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("phase collapsed"), "{err}");
}

#[test]
fn raster_input_round_trips_through_segment() {
    let dir = tempfile::tempdir().unwrap();
    let domain = Rect::new(0.0, 32.0, 0.0, 24.0).unwrap();
    let f = PcrImage::from_rects(domain, 0.2, &[(Rect::new(8.0, 20.0, 6.0, 18.0).unwrap(), 0.8)]).unwrap();
    let input = dir.path().join("in.png");
    Raster::rasterize(&f, 32, 24).unwrap().write(&input).unwrap();
    let out = dir.path().join("o");
    let (code, _, err) = pcrseg(&["segment", "--input", s(&input), "--out", s(&out), "--mu", "2"]);
    assert_eq!(code, 0, "{err}");
    let labels = Raster::read(&out.join("labels.png")).unwrap();
    assert_eq!((labels.width(), labels.height()), (32, 24));
    let inside = labels.pixels().iter().filter(|&&v| v > 0.5).count();
    assert_eq!(inside, 12 * 12);
}

#[test]
fn verify_without_trials_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = pcrseg(&["verify", "--trials", "0", "--out", s(dir.path())]);
    assert_eq!(code, 0, "{stdout}");
    let rep = json(&dir.path().join("verify_report.json"));
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["examples"].as_array().unwrap().len(), 2);
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = ["trof", "--input", s(&input), "--out", s(&out), "--lambda", "16", "--phases", "3", "--seed", "5"];
        assert_eq!(pcrseg(&args).0, 0);
        std::fs::read_to_string(out.join("report.json")).unwrap().replace(name, "")
    };
    assert_eq!(run("first_run"), run("second_run"));
    let v = |name: &str| {
        let out = dir.path().join(name);
        assert_eq!(pcrseg(&["verify", "--trials", "2", "--seed", "3", "--out", s(&out)]).0, 0);
        std::fs::read_to_string(out.join("verify_report.json")).unwrap()
    };
    assert_eq!(v("v1"), v("v2"));
}

#[test]
fn off_grid_labels_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let input = example_file(dir.path());
    // A label square shifted off the datum's lines: [-0.25, 0.75] x [-0.5, 0.5].
    let ex = example_break_instance(1).unwrap();
    let labels = PcrImage::from_rects(
        ex.f.grid().domain(),
        0.0,
        &[(Rect::new(-0.25, 0.75, -0.5, 0.5).unwrap(), 1.0)],
    )
    .unwrap();
    let lpath = dir.path().join("labels.pcr");
    labels.write(&lpath).unwrap();
    let out = dir.path().join("v");
    let args = ["verify", "--trials", "0", "--input", s(&input), "--labels", s(&lpath), "--out", s(&out)];
    assert_eq!(pcrseg(&args).0, 0);
    let fit = json(&out.join("verify_report.json"))["grid_fit"]["fit"]["fraction"].as_f64().unwrap();
    assert!(fit < 1.0 && fit > 0.0, "{fit}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(pcrseg(&["--help"]).0, 0);
    assert_eq!(pcrseg(&["--version"]).0, 0);
    assert_eq!(pcrseg(&["frobnicate"]).0, 1);
}
