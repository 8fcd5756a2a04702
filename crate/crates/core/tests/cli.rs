//! End-to-end runs of the `tfscope` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tfscope::signal::{write_wav, AudioSignal};
use tfscope::tf::read_tfm;

fn tfscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfscope"))
        .args(args)
        .env_remove("TFSCOPE_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = tfscope(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tone_wav(dir: &Path, name: &str, seconds: f64) -> PathBuf {
    let n = (seconds * 16_000.0) as usize;
    let samples = (0..n).map(|i| 0.3 * (2.0 * std::f64::consts::PI * 1_000.0 * i as f64 / 16_000.0).sin()).collect();
    let path = dir.join(name);
    write_wav(&AudioSignal::new(samples, 16_000).unwrap(), &path).unwrap();
    path
}

#[test]
fn transform_ten_second_file_to_513_by_313() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), "ten.wav", 10.0);
    let tfm = dir.path().join("ten.tfm");
    ok(&["transform", "--kind", "spectrogram", "--n", "1024", "--hop", "512", s(&wav), "--out", s(&tfm)]);
    let (m, sidecar) = read_tfm(&tfm).unwrap();
    assert_eq!(m.shape(), (513, 313));
    assert_eq!(sidecar.row_coords.len(), 513);

    let png = dir.path().join("ten.png");
    ok(&["render", s(&tfm), "--out", s(&png), "--width", "40", "--height", "30"]);
    let img = tfscope::render::HeatmapImage::read_png(&png).unwrap();
    assert_eq!((img.width(), img.height()), (40, 30));
}

#[test]
fn scalogram_transform_has_128_rows() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), "short.wav", 0.05);
    ok(&["transform", "--kind", "scalogram", s(&wav)]);
    let (m, _) = read_tfm(dir.path().join("short.tfm")).unwrap();
    assert_eq!(m.shape(), (128, 800));
}

#[test]
fn normalize_round_trip_and_silence() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), "tone.wav", 0.1);
    let out = dir.path().join("norm.wav");
    ok(&["normalize", s(&wav), s(&out)]);
    let peak = tfscope::signal::load_wav(&out).unwrap().peak();
    assert!((peak - 1.0).abs() < 1e-3, "{peak}");

    let silent = dir.path().join("silent.wav");
    write_wav(&AudioSignal::new(vec![0.0; 100], 16_000).unwrap(), &silent).unwrap();
    let res = tfscope(&["normalize", s(&silent), s(&dir.path().join("x.wav"))]);
    assert_eq!(res.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("max |y| = 0"), "{msg}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(tfscope(&["transform", "--bogus"]).status.code(), Some(2));
    assert_eq!(tfscope(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tfscope(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_input_exits_1() {
    let res = tfscope(&["transform", "--kind", "spectrogram", "/nonexistent/x.wav"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn synth_split_train_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--family", "impulsive", "--n-per-class", "5", "--snr-db", "6", "--duration-s", "0.3", "--seed", "3", "--out", s(&data)]);
    let manifest = data.join("manifest.jsonl");
    assert_eq!(std::fs::read_to_string(&manifest).unwrap().lines().count(), 10);
    assert!(data.join("abnormal/00009.wav").is_file());

    let splits = dir.path().join("splits");
    ok(&["split", "--manifest", s(&manifest), "--val-fraction", "0.2", "--out-dir", s(&splits)]);
    let count = |p: &str| std::fs::read_to_string(splits.join(p)).unwrap().lines().count();
    assert_eq!((count("train.jsonl"), count("val.jsonl")), (8, 2));

    // the split manifests hold paths relative to the data directory
    let train_m = data.join("train.jsonl");
    let val_m = data.join("val.jsonl");
    std::fs::copy(splits.join("train.jsonl"), &train_m).unwrap();
    std::fs::copy(splits.join("val.jsonl"), &val_m).unwrap();
    let weights = dir.path().join("model.tfw");
    let small = ["--width", "24", "--height", "24", "--epochs", "2", "--batch-size", "4"];
    let mut args = vec!["train", "--manifest", s(&train_m), "--val-manifest", s(&val_m), "--kind", "scalogram", "--out", s(&weights)];
    args.extend(small);
    ok(&args);
    let (model, header) = tfscope::cnn::load_weights(&weights).unwrap();
    assert_eq!(model.config().input_height, 24);
    assert_eq!(header.num_params, model.num_params());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.report.json")).unwrap()).unwrap();
    assert_eq!(report["epochs"].as_array().unwrap().len(), 2);

    let summary_path = dir.path().join("summary.json");
    let mut args = vec!["evaluate", "--manifest", s(&manifest), "--kind", "spectrogram", "--runs", "2", "--out", s(&summary_path)];
    args.extend(small);
    ok(&args);
    let summary: tfscope::metrics::EvalSummary =
        serde_json::from_str(&std::fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary.per_run_auc.len(), 2);
    assert_eq!(summary.run_seeds.len(), 2);
}

#[test]
fn bench_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let wav = tone_wav(dir.path(), "b.wav", 0.25);
    let config = dir.path().join("pipeline.json");
    std::fs::write(&config, r#"{"cwt": {"scale_min": 2, "scale_max": 9, "translation_step": 1, "wavelet": "analytic_morlet", "omega0": 6.0, "support_radius": 4.0}}"#).unwrap();
    let out = dir.path().join("bench");
    ok(&["--config", s(&config), "bench", "--signal", s(&wav), "--repeats", "3", "--steps", "1,8", "--out", s(&out)]);
    let report: tfscope::bench::BenchReport =
        serde_json::from_str(&std::fs::read_to_string(out.join("bench.json")).unwrap()).unwrap();
    assert_eq!(report.results.len(), 3);
    assert_eq!(report.results[1].label, "scalogram[scales=2-9,step=1]");
    assert_eq!(report.ratios.len(), 2);
    assert_eq!(std::fs::read_to_string(out.join("bench.csv")).unwrap().lines().count(), 6);
}

#[test]
fn demo_resolution_writes_images_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["demo-resolution", "--out", s(dir.path())]);
    for f in ["signal.png", "spectrogram_short.png", "spectrogram_long.png", "scalogram.png"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["pass"], true);
}

#[test]
fn compare_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "compare", "--family", "stationary", "--n-per-class", "4", "--duration-s", "0.25", "--runs", "2",
            "--epochs", "2", "--width", "24", "--height", "24", "--seed", "5", "--jobs", "2", "--out", s(&out),
        ]);
        out
    };
    let (a, b) = (run("a"), run("b"));
    let files = [
        "manifest.jsonl",
        "comparison.csv",
        "compare.json",
        "spectrogram/run_00.tfw",
        "spectrogram/run_01.tfw",
        "scalogram/run_01.tfw",
        "scalogram/run_01.report.json",
        "scalogram/summary.json",
    ];
    for f in files {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
