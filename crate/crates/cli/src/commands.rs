use std::fs;
use std::path::PathBuf;

use gazekit::analysis::{
    accuracy_delta_report, check_sufficiency, evaluate_all, group_by_subject, subject_owlness,
    LabelledFrame, SubjectFrames,
};
use gazekit::forest::{subsample_balance, train};
use gazekit::pipeline::{extract, Classifier, Extraction};
use gazekit::synth::{generate_population, SynthConfig};
use gazekit::{
    seed, AttritionLedger, DetectorConfig, EvalConfig, FeatureMode, ForestConfig, ForestModel,
    Outcome, PipelineConfig, TrainingSet,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::dataset::{read_dataset, write_dataset, LoadedFrame, Manifest};
use crate::error::{CliError, CliResult};
use crate::model_file::{encode, read_model};
use crate::report::{write_evaluation, EvaluationReport};

pub const MODEL_FILE: &str = "model.gzkf";
pub const TRAINING_FILE: &str = "training.json";
pub const DECISIONS_FILE: &str = "decisions.jsonl";

fn create_out(cfg: &RunConfig) -> CliResult<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::data(format!("{}: {e}", cfg.out.display())))
}

fn write_json(path: PathBuf, value: &Value) -> CliResult<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::internal(e.to_string()))? + "\n";
    fs::write(&path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn detector(cfg: &RunConfig) -> DetectorConfig {
    DetectorConfig {
        grid: cfg.pupil_grid(),
        ..DetectorConfig::default()
    }
}

fn single_mode(cfg: &RunConfig) -> CliResult<FeatureMode> {
    match cfg.modes.as_slice() {
        [m] => Ok(*m),
        _ => Err(CliError::usage(
            "invalid configuration `mode`: this command takes head-only or head-eye",
        )),
    }
}

pub fn synth_config(cfg: &RunConfig) -> SynthConfig {
    SynthConfig {
        n_subjects: cfg.subjects,
        frames_per_region: cfg.frames_per_region,
        alpha: cfg.alpha_schedule(),
        sigma_landmark: cfg.sigma_landmark,
        sigma_image: cfg.sigma_image,
        head_rest_sigma: cfg.head_rest_sigma,
        gaze_jitter: cfg.gaze_jitter,
        pupil_jitter: cfg.pupil_jitter,
        head_sway: cfg.head_sway,
        p_face_fail: cfg.face_fail,
        p_pupil_fail: cfg.pupil_fail,
        seed: cfg.seed,
        ..SynthConfig::default()
    }
}

/// Generates a synthetic population and writes it in the ingestion format.
pub fn cmd_synth(cfg: &RunConfig) -> CliResult<Manifest> {
    let pop = generate_population(&synth_config(cfg))?;
    write_dataset(&cfg.out, &pop, cfg.frames_per_region, cfg.seed)
}

/// Per-frame pupil detection and normalization, in dataset order.
struct Extracted {
    frames: Vec<(LoadedFrame, Extraction<f64>)>,
}

impl Extracted {
    fn run(frames: Vec<LoadedFrame>, det: &DetectorConfig) -> Self {
        let outcomes: Vec<Extraction<f64>> = frames
            .par_iter()
            .map(|f| extract(f.record.as_ref(), det))
            .collect();
        Extracted {
            frames: frames.into_iter().zip(outcomes).collect(),
        }
    }

    /// Face and pupil counts; confident decisions are filled in later.
    fn ledger(&self) -> AttritionLedger {
        let mut l = AttritionLedger::default();
        for (_, e) in &self.frames {
            l.total_frames += 1;
            match e {
                Extraction::NoFace => {}
                Extraction::PupilFailed(_) => l.faces_detected += 1,
                Extraction::Ready(_) => {
                    l.faces_detected += 1;
                    l.pupils_detected += 1;
                }
            }
        }
        l
    }

    fn subjects(&self) -> Vec<SubjectFrames<f64>> {
        group_by_subject(self.frames.iter().filter_map(|(f, e)| {
            match (e, &f.subject_id, f.label) {
                (Extraction::Ready(features), Some(subject), Some(label)) => Some((
                    subject.clone(),
                    LabelledFrame {
                        label,
                        features: features.clone(),
                    },
                )),
                _ => None,
            }
        }))
    }
}

fn training_rows(frames: &[&LabelledFrame<f64>], mode: FeatureMode) -> CliResult<TrainingSet> {
    let mut data = Vec::with_capacity(frames.len() * mode.dim());
    for f in frames {
        data.extend(f.features.vector(mode));
    }
    Ok(TrainingSet::new(
        mode.dim(),
        data,
        frames.iter().map(|f| f.label).collect(),
    )?)
}

/// Trains one model on every subject except `--holdout`.
pub fn cmd_train(cfg: &RunConfig) -> CliResult<ForestModel> {
    let mode = single_mode(cfg)?;
    let frames = read_dataset(cfg.require_data()?)?;
    let extracted = Extracted::run(frames, &detector(cfg));
    let mut subjects = extracted.subjects();
    if let Some(h) = &cfg.holdout {
        if !subjects.iter().any(|s| &s.subject_id == h) {
            return Err(CliError::data(format!(
                "holdout subject `{h}` is not in the dataset"
            )));
        }
        subjects.retain(|s| &s.subject_id != h);
    }
    if subjects.is_empty() {
        return Err(CliError::data("no usable frames"));
    }
    check_sufficiency(&subjects, cfg.min_frames_per_region)?;
    let pool: Vec<&LabelledFrame<f64>> = subjects.iter().flat_map(|s| s.frames.iter()).collect();
    let balanced = subsample_balance(&pool, |f| f.label, seed::derive(cfg.seed, 1))?;
    let forest = ForestConfig {
        n_trees: cfg.trees,
        max_depth: cfg.depth,
        rng_seed: cfg.seed,
        ..ForestConfig::default()
    };
    let model = train(&training_rows(&balanced, mode)?, &forest)?;

    create_out(cfg)?;
    let bytes = encode(&model)?;
    let path = cfg.out.join(MODEL_FILE);
    fs::write(&path, &bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let digest = model.digest();
    write_json(
        cfg.out.join(TRAINING_FILE),
        &json!({
            "mode": mode.flag_name(),
            "feature_dim": model.feature_dim(),
            "subjects": subjects.iter().map(|s| s.subject_id.as_str()).collect::<Vec<_>>(),
            "class_counts": digest.class_counts,
            "n_samples": digest.n_samples,
            "model_sha256": hex::encode(Sha256::digest(&bytes)),
            "config": serde_json::to_value(cfg).map_err(|e| CliError::internal(e.to_string()))?,
        }),
    )?;
    Ok(model)
}

/// Leave-one-subject-out evaluation in every configured mode.
pub fn cmd_evaluate(cfg: &RunConfig) -> CliResult<EvaluationReport> {
    let frames = read_dataset(cfg.require_data()?)?;
    let extracted = Extracted::run(frames, &detector(cfg));
    let subjects = extracted.subjects();
    if subjects.len() < 2 {
        return Err(CliError::data(
            "leave-one-subject-out needs at least two subjects",
        ));
    }
    check_sufficiency(&subjects, cfg.min_frames_per_region)?;
    let owlness = subject_owlness(&subjects, &cfg.owl_thresholds())?;
    let eval_cfg = EvalConfig {
        forest: ForestConfig {
            n_trees: cfg.trees,
            max_depth: cfg.depth,
            ..ForestConfig::default()
        },
        confidence_threshold: cfg.confidence_threshold,
        repetitions: cfg.repetitions,
        min_frames_per_region: cfg.min_frames_per_region,
        seed: cfg.seed,
        modes: cfg.modes.clone(),
        ..EvalConfig::default()
    };
    let users = evaluate_all(&subjects, &eval_cfg)?;
    let base = extracted.ledger();
    let ledgers = cfg
        .modes
        .iter()
        .map(|&m| {
            let confident = users
                .iter()
                .filter_map(|u| u.mode(m))
                .map(|e| e.raw_accepted)
                .sum();
            (
                m,
                AttritionLedger {
                    confident_decisions: confident,
                    ..base
                },
            )
        })
        .collect::<Vec<_>>();
    if ledgers.iter().any(|(_, l)| !l.is_consistent()) {
        return Err(CliError::internal("attrition ledger is not monotone"));
    }
    let delta = if cfg.modes.len() == 2 {
        Some(accuracy_delta_report(&users, &owlness)?)
    } else {
        None
    };
    let report = EvaluationReport {
        config: cfg.clone(),
        ledgers,
        owlness,
        users,
        delta,
    };
    write_evaluation(&report)?;
    Ok(report)
}

fn real(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else {
        Value::from(v.to_string())
    }
}

fn decision_line(f: &LoadedFrame, outcome: &Outcome) -> Value {
    let mut v = json!({
        "line": f.line,
        "subject_id": f.subject_id,
        "frame_index": f.frame_index,
    });
    let fields = match outcome {
        Outcome::NoFace => json!({"accepted": false, "drop_reason": "NoFace"}),
        Outcome::PupilFailed(status) => {
            json!({"accepted": false, "drop_reason": "PupilFailed", "pupil_status": format!("{status:?}")})
        }
        Outcome::Decided(d) => json!({
            "accepted": d.accepted,
            "drop_reason": if d.accepted { Value::Null } else { Value::from("LowConfidence") },
            "region": d.region.name(),
            "confidence": real(d.confidence),
            "probabilities": d.probabilities.to_vec(),
        }),
    };
    for (k, x) in fields.as_object().expect("object").clone() {
        v[k] = x;
    }
    v
}

/// One output record per input frame: a decision or a drop reason.
pub fn cmd_classify(cfg: &RunConfig) -> CliResult<AttritionLedger> {
    let model: ForestModel = read_model(cfg.require_model()?)?;
    let mode = FeatureMode::from_dim(model.feature_dim()).ok_or_else(|| {
        CliError::data(format!(
            "model has unsupported feature dimension {}",
            model.feature_dim()
        ))
    })?;
    if cfg.modes.len() == 1 && cfg.modes[0] != mode {
        return Err(gazekit::Error::ModeMismatch(format!(
            "--mode {} requested but the model was trained for {}",
            cfg.modes[0].flag_name(),
            mode.flag_name()
        ))
        .into());
    }
    let pipeline = PipelineConfig {
        mode,
        confidence_threshold: cfg.confidence_threshold,
        detector: detector(cfg),
        forest: *model.config(),
    };
    let classifier = Classifier::new(&model, pipeline)?;
    let frames = read_dataset(cfg.require_data()?)?;
    let outcomes: Vec<Outcome> = frames
        .par_iter()
        .map(|f| classifier.classify(f.record.as_ref()))
        .collect();

    create_out(cfg)?;
    let mut ledger = AttritionLedger::default();
    let mut out = Vec::new();
    for (f, o) in frames.iter().zip(&outcomes) {
        ledger.record(o);
        serde_json::to_writer(&mut out, &decision_line(f, o))
            .map_err(|e| CliError::internal(e.to_string()))?;
        out.push(b'\n');
    }
    let path = cfg.out.join(DECISIONS_FILE);
    fs::write(&path, out).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let rates = ledger.decision_rates(cfg.fps).ok();
    write_json(
        cfg.out.join("ledger.json"),
        &json!({
            "mode": mode.flag_name(),
            "total_frames": ledger.total_frames,
            "faces_detected": ledger.faces_detected,
            "pupils_detected": ledger.pupils_detected,
            "confident_decisions": ledger.confident_decisions,
            "decisions_per_second_of_pupil_frames": rates.map(|r| r.0),
            "decisions_per_second_of_video": rates.map(|r| r.1),
        }),
    )?;
    Ok(ledger)
}
