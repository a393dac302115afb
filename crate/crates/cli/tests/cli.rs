use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gazekit::{FeatureMode, ForestModel, GrayImage};
use gazekit_cli::dataset::{
    parse_pgm, read_dataset, write_pgm, FrameLine, FRAMES_FILE, MANIFEST_FILE,
};
use gazekit_cli::model_file::{decode, encode, read_model};
use gazekit_cli::{
    cmd_classify, cmd_evaluate, cmd_synth, cmd_train, ErrorKind, RunArgs, RunConfig,
};
use tempfile::TempDir;

fn gzk(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gzk"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn synth_args(out: &Path, subjects: usize, fpr: usize) -> RunArgs {
    RunArgs {
        out: Some(out.to_path_buf()),
        subjects: Some(subjects),
        frames_per_region: Some(fpr),
        seed: Some(7),
        ..RunArgs::default()
    }
}

fn synth(dir: &Path, subjects: usize, fpr: usize, extra: impl FnOnce(&mut RunArgs)) -> PathBuf {
    let data = dir.join("data");
    let mut args = synth_args(&data, subjects, fpr);
    extra(&mut args);
    cmd_synth(&RunConfig::resolve(&args, "both").unwrap()).unwrap();
    data
}

fn run_args(out: &Path, data: &Path) -> RunArgs {
    RunArgs {
        out: Some(out.to_path_buf()),
        data: Some(data.to_path_buf()),
        trees: Some(15),
        repetitions: Some(1),
        min_frames_per_region: Some(5),
        seed: Some(3),
        ..RunArgs::default()
    }
}

#[test]
fn synth_writes_every_frame_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg = |out: &Path| RunConfig::resolve(&synth_args(out, 3, 4), "both").unwrap();
    let ma = cmd_synth(&cfg(&a)).unwrap();
    let mb = cmd_synth(&cfg(&b)).unwrap();
    assert_eq!(ma.frames, 3 * 6 * 4);
    assert_eq!(ma.sha256, mb.sha256);
    assert_eq!(
        fs::read(a.join(FRAMES_FILE)).unwrap(),
        fs::read(b.join(FRAMES_FILE)).unwrap()
    );
    assert_eq!(
        fs::read(a.join(MANIFEST_FILE)).unwrap(),
        fs::read(b.join(MANIFEST_FILE)).unwrap()
    );
    assert_eq!(read_dataset(&a).unwrap().len(), 72);
}

#[test]
fn binary_synth_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d");
    let o = out.to_str().unwrap();
    let (code, _) = gzk(&[
        "synth",
        "--out",
        o,
        "--subjects",
        "2",
        "--frames-per-region",
        "2",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    let first = fs::read(out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(
        gzk(&[
            "synth",
            "--out",
            o,
            "--subjects",
            "2",
            "--frames-per-region",
            "2",
            "--seed",
            "7"
        ])
        .0,
        0
    );
    assert_eq!(first, fs::read(out.join(MANIFEST_FILE)).unwrap());

    let (code, err) = gzk(&["synth", "--subjects", "2"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("--out"));
    assert_eq!(gzk(&["train", "--out", o, "--mode", "sideways"]).0, 2);
    assert_eq!(gzk(&["frobnicate"]).0, 2);
    let missing = dir.path().join("nope");
    assert_eq!(
        gzk(&["evaluate", "--out", o, "--data", missing.to_str().unwrap()]).0,
        3
    );
    let status = Command::new(env!("CARGO_BIN_EXE_gzk"))
        .args(["synth", "--out", o])
        .env("GZK_THREADS", "zero")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn pgm_and_jsonl_roundtrip() {
    let dir = TempDir::new().unwrap();
    let img = GrayImage::from_fn(7, 3, |x, y| (x * 30 + y) as u8).unwrap();
    let path = dir.path().join("x.pgm");
    write_pgm(&path, &img).unwrap();
    assert_eq!(parse_pgm(&fs::read(&path).unwrap()).unwrap(), img);
    let commented = b"P5\n# crop\n2 1\n255\n\x05\x06";
    assert_eq!(parse_pgm(commented).unwrap().data(), &[5, 6]);
    assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
    assert!(parse_pgm(b"P5\n3 3\n255\n\x00").is_err());

    let line = FrameLine {
        subject_id: "S001".into(),
        frame_index: 4,
        label: gazekit::GazeRegion::RearviewMirror,
        landmarks: None,
        eye_crop: None,
        eye_polygon: None,
    };
    let text = serde_json::to_string(&line).unwrap();
    assert_eq!(serde_json::from_str::<FrameLine>(&text).unwrap(), line);
}

fn train_mode(dir: &Path, data: &Path, mode: &str) -> (ForestModel, PathBuf) {
    let out = dir.join(mode);
    let mut args = run_args(&out, data);
    args.mode = Some(mode.into());
    let model = cmd_train(&RunConfig::resolve(&args, "head-eye").unwrap()).unwrap();
    (model, out.join("model.gzkf"))
}

#[test]
fn model_files_roundtrip_and_reject_corruption() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 3, 8, |_| {});
    let (eye, eye_path) = train_mode(dir.path(), &data, "head-eye");
    let (head, head_path) = train_mode(dir.path(), &data, "head-only");
    assert_eq!(eye.feature_dim(), 138);
    assert_eq!(head.feature_dim(), 136);
    let loaded: ForestModel = read_model(&eye_path).unwrap();
    assert_eq!(loaded, eye);
    assert_eq!(read_model::<f64>(&head_path).unwrap(), head);

    let bytes = fs::read(&eye_path).unwrap();
    assert_eq!(encode(&decode::<f64>(&bytes).unwrap()).unwrap(), bytes);
    let f32_model: gazekit::f32::ForestModel = decode(&bytes).unwrap();
    assert_eq!(f32_model.feature_dim(), 138);

    let mut bad_magic = bytes.clone();
    bad_magic[0] = b'X';
    let mut bad_tag = bytes.clone();
    // first node tag follows the fixed header and the digest
    let tag_at = 4 + 2 + 4 * 4 + 1 + 8 + 1 + 6 + 4 + 6 * 8 + 8 + 4;
    bad_tag[tag_at] = 9;
    let mut trailing = bytes.clone();
    trailing.push(0);
    for broken in [
        &bytes[..bytes.len() - 3],
        &bad_magic[..],
        &bad_tag[..],
        &trailing[..],
        &[][..],
    ] {
        let err = decode::<f64>(broken).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Data, "{err}");
    }
}

#[test]
fn classify_reports_every_frame() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 3, 16, |a| {
        a.face_fail = Some(0.1);
        a.pupil_fail = Some(0.1);
    });
    let (_, model) = train_mode(dir.path(), &data, "head-eye");

    // break the landmarks of the first usable line
    let jsonl = fs::read_to_string(data.join(FRAMES_FILE)).unwrap();
    let mut lines: Vec<String> = jsonl.lines().map(str::to_string).collect();
    let k = lines
        .iter()
        .position(|l| !l.contains("\"landmarks\":null"))
        .unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&lines[k]).unwrap();
    v["landmarks"] = serde_json::json!([1.0, "x"]);
    lines[k] = v.to_string();
    let broken = data.join("broken.jsonl");
    fs::write(&broken, lines.join("\n") + "\n").unwrap();

    let classify = |threshold: f64| {
        let out = dir.path().join(format!("classify_{threshold}"));
        let mut args = run_args(&out, &broken);
        args.model = Some(model.clone());
        args.confidence_threshold = Some(threshold);
        let ledger = cmd_classify(&RunConfig::resolve(&args, "both").unwrap()).unwrap();
        let text = fs::read_to_string(out.join("decisions.jsonl")).unwrap();
        let records: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        (ledger, records)
    };

    let (ledger, records) = classify(10.0);
    assert_eq!(records.len(), lines.len());
    assert_eq!(ledger.total_frames as usize, lines.len());
    assert!(ledger.is_consistent());
    assert_eq!(records[k]["drop_reason"], "NoFace");
    assert!(records.iter().filter(|r| r["accepted"] == true).count() <= records.len());

    let (inf, records) = classify(f64::INFINITY);
    assert_eq!(inf.confident_decisions, 0);
    assert!(records.iter().all(|r| r["accepted"] == false));

    // threshold 1 accepts everything except exact ties between the top two
    let (one, records) = classify(1.0);
    let ties = records.iter().filter(|r| r["confidence"] == 1.0).count() as u64;
    assert_eq!(one.confident_decisions + ties, one.pupils_detected);

    let mut args = run_args(&dir.path().join("mismatch"), &broken);
    args.model = Some(model.clone());
    args.mode = Some("head-only".into());
    let err = cmd_classify(&RunConfig::resolve(&args, "both").unwrap()).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Data);
}

#[test]
fn thin_region_is_reported_by_subject_and_region() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 2, 120, |a| a.sigma_image = Some(4.0));
    let jsonl = fs::read_to_string(data.join(FRAMES_FILE)).unwrap();
    let mut left = 0;
    let kept: Vec<&str> = jsonl
        .lines()
        .filter(|l| {
            if l.contains("\"S002\"") && l.contains("\"Left\"") {
                left += 1;
                left <= 80
            } else {
                true
            }
        })
        .collect();
    fs::write(data.join(FRAMES_FILE), kept.join("\n") + "\n").unwrap();
    let mut args = run_args(&dir.path().join("m"), &data);
    args.min_frames_per_region = None;
    let err = cmd_train(&RunConfig::resolve(&args, "head-eye").unwrap()).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Data);
    assert!(
        err.message.contains("S002") && err.message.contains("Left"),
        "{}",
        err.message
    );
}

#[test]
fn evaluation_reports_are_complete_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path(), 3, 8, |a| a.face_fail = Some(0.05));
    let run = |name: &str, threshold: f64| {
        let out = dir.path().join(name);
        let mut args = run_args(&out, &data);
        args.confidence_threshold = Some(threshold);
        args.plots = true;
        (
            cmd_evaluate(&RunConfig::resolve(&args, "both").unwrap()).unwrap(),
            out,
        )
    };
    let (report, out) = run("a", 10.0);
    let per_region = fs::read_to_string(out.join("per_region.csv")).unwrap();
    for r in gazekit::GazeRegion::ALL {
        assert!(
            per_region.lines().any(|l| l.starts_with(&format!("{r},"))),
            "{r}"
        );
    }
    for (_, l) in &report.ledgers {
        assert!(l.is_consistent());
    }
    for u in &report.users {
        let (a, b) = (
            u.mode(FeatureMode::HeadOnly).unwrap(),
            u.mode(FeatureMode::HeadAndEye).unwrap(),
        );
        assert_eq!(a.evaluated, b.evaluated);
    }
    assert!(report.delta.is_some());
    assert!(!out.join("INCOMPLETE").exists());
    assert!(out.join("per_user_accuracy.svg").exists());

    let (_, again) = run("b", 10.0);
    for name in [
        "report.json",
        "per_user.csv",
        "per_region.csv",
        "sweep.csv",
        "ledger.csv",
        "owlness.csv",
    ] {
        // the output directory is recorded in report.json
        let strip = |p: PathBuf| {
            let text = fs::read_to_string(p).unwrap();
            text.replace(dir.path().join("b").to_str().unwrap(), "")
                .replace(dir.path().join("a").to_str().unwrap(), "")
        };
        assert_eq!(strip(out.join(name)), strip(again.join(name)), "{name}");
    }

    let (one, _) = run("c", 1.0);
    for (_, l) in &one.ledgers {
        assert!(l.confident_decisions <= l.pupils_detected);
        assert!(l.confident_decisions as f64 >= 0.95 * l.pupils_detected as f64);
    }
}
