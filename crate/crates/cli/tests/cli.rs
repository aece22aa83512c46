use std::path::Path;
use std::process::{Command, Output};

use speakerid_core::frontend::{write_wav, SampleBuffer};

fn speakerid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speakerid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn synth(dir: &Path) -> String {
    let cfg = dir.join("synth.json");
    std::fs::write(
        &cfg,
        r#"{"n_speakers": 4, "p": 6, "separation": 0.5, "cov_spread": 0.3, "frames_per_speaker": 2600}"#,
    )
    .unwrap();
    let out = dir.join("corpus");
    let o = speakerid(&[
        "synth-corpus",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("manifest.json").to_str().unwrap().to_string()
}

#[test]
fn duration_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let a = speakerid(&["eval-duration", "--manifest", &manifest]);
    let b = speakerid(&["eval-duration", "--manifest", &manifest]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    assert!(csv.starts_with("train_s,test_s,measure,"));
    assert_eq!(csv.lines().count(), 1 + 75);

    let md = speakerid(&[
        "eval-duration",
        "--manifest",
        &manifest,
        "--measure",
        "mu_sc",
        "--sc-convention",
        "as-printed",
        "--format",
        "markdown",
    ]);
    assert_eq!(md.status.code(), Some(0));
    let md = stdout(&md);
    assert_eq!(md.lines().count(), 2 + 25);
    assert!(md.lines().skip(2).all(|l| l.contains("μ_Sc")));
}

#[test]
fn phonetic_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let out = dir.path().join("phonetic.csv");
    let o = speakerid(&["eval-phonetic", "--manifest", &manifest, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("selector,measure,"));
    assert_eq!(csv.lines().count(), 1 + 30);
}

#[test]
fn train_then_identify() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path());
    let models = dir.path().join("models.json");
    let o = speakerid(&[
        "train",
        "--manifest",
        &manifest,
        "--train-seconds",
        "15",
        "--out",
        models.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let test = dir.path().join("corpus/spk002/spk002_s008.csv");
    let o = speakerid(&[
        "identify",
        "--models",
        models.to_str().unwrap(),
        "--measure",
        "mu_gc",
        test.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let sheet = stdout(&o);
    let mut lines = sheet.lines();
    assert_eq!(lines.next(), Some("test_id,decision,spk000,spk001,spk002,spk003"));
    assert!(lines.next().unwrap().starts_with("spk002_s008,"));
}

#[test]
fn extract_writes_feature_csv() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("tone.wav");
    let samples = (0..16000).map(|t| ((t as f64 * 0.3).sin() * 5000.0) as i16).collect();
    write_wav(&wav, &SampleBuffer::new(samples, 16000)).unwrap();
    let o = speakerid(&["extract", wav.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 97);
    assert!(csv.lines().all(|l| l.split(',').count() == 24));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(speakerid(&["--help"]).status.code(), Some(0));
    assert_eq!(speakerid(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(speakerid(&["eval-duration"]).status.code(), Some(1));
    assert_eq!(
        speakerid(&["eval-duration", "--manifest", "m.json", "--measure", "mu_x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        speakerid(&["eval-duration", "--manifest", "m.json", "--format", "xml"])
            .status
            .code(),
        Some(1)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        speakerid(&["eval-duration", "--manifest", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let manifest = synth(dir.path());
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, r#"{"selectors": ["Diphthongs"]}"#).unwrap();
    let o = speakerid(&[
        "eval-phonetic",
        "--manifest",
        &manifest,
        "--config",
        bad_cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    std::fs::write(&bad_cfg, "{not json").unwrap();
    let o = speakerid(&[
        "eval-duration",
        "--manifest",
        &manifest,
        "--config",
        bad_cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let long = dir.path().join("long.json");
    std::fs::write(&long, r#"{"train_seconds": [60]}"#).unwrap();
    let o = speakerid(&[
        "eval-duration",
        "--manifest",
        &manifest,
        "--config",
        long.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient material"));

    let wav = dir.path().join("stereo.wav");
    std::fs::write(&wav, b"RIFF").unwrap();
    assert_eq!(speakerid(&["extract", wav.to_str().unwrap()]).status.code(), Some(2));
}
