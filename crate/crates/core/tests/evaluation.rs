mod common;

use gazekit::analysis::{
    accuracy_delta_report, check_sufficiency, evaluate_all, evaluate_user, subject_owlness,
    LabelledFrame, StrategyThresholds, SubjectFrames,
};
use gazekit::pipeline::FrameFeatures;
use gazekit::synth::{AlphaSchedule, SynthConfig};
use gazekit::{Error, EvalConfig, FeatureMode, ForestConfig, GazeRegion, Point};

/// Head block encodes the region, pupil is constant.
fn separable_subject(id: &str, per_region: usize, offset: f64) -> SubjectFrames<f64> {
    let mut frames = Vec::new();
    for r in GazeRegion::ALL {
        for k in 0..per_region {
            let mut head = vec![offset; 136];
            head[0] = r.index() as f64 * 10.0 + k as f64 * 0.01;
            frames.push(LabelledFrame {
                label: r,
                features: FrameFeatures {
                    head,
                    pupil: Point::new(0.5, 0.5),
                    pupil_center: Point::new(20.0, 12.0),
                },
            });
        }
    }
    SubjectFrames {
        subject_id: id.to_string(),
        frames,
    }
}

fn quick(threshold: f64, min_frames: usize) -> EvalConfig {
    EvalConfig {
        forest: ForestConfig {
            n_trees: 20,
            ..ForestConfig::default()
        },
        confidence_threshold: threshold,
        repetitions: 2,
        min_frames_per_region: min_frames,
        seed: 5,
        ..EvalConfig::default()
    }
}

#[test]
fn separable_world_is_perfect_in_both_modes() {
    let subjects = vec![
        separable_subject("A", 12, 0.0),
        separable_subject("B", 15, 0.3),
    ];
    let users = evaluate_all(&subjects, &quick(10.0, 10)).unwrap();
    for u in &users {
        for m in &u.modes {
            assert_eq!(
                m.mean_accuracy(),
                Some(1.0),
                "{} {:?}",
                u.subject_id,
                m.mode
            );
            let per_region = if u.subject_id == "A" { 12 } else { 15 };
            assert_eq!(m.evaluated, 2 * 6 * per_region);
        }
    }
    // identical outcomes in both modes: zero deltas, undefined correlation
    let owl = subject_owlness(&subjects, &StrategyThresholds::default()).unwrap();
    let report = accuracy_delta_report(&users, &owl).unwrap();
    assert!(report.users.iter().all(|u| u.delta == Some(0.0)));
    assert!(!report.correlation_defined && report.owlness_correlation.is_nan());
}

#[test]
fn evaluation_is_deterministic() {
    let subjects = vec![
        separable_subject("A", 12, 0.0),
        separable_subject("B", 12, 0.3),
    ];
    let cfg = quick(1.0, 10);
    assert_eq!(
        evaluate_user("A", &subjects, &cfg).unwrap(),
        evaluate_user("A", &subjects, &cfg).unwrap()
    );
}

#[test]
fn thin_region_is_named() {
    let mut thin = separable_subject("B", 12, 0.3);
    let mut seen = 0;
    thin.frames.retain(|f| {
        if f.label != GazeRegion::Left {
            return true;
        }
        seen += 1;
        seen <= 8
    });
    let subjects = vec![separable_subject("A", 12, 0.0), thin];
    match check_sufficiency(&subjects, 10) {
        Err(Error::InsufficientData {
            subject,
            region,
            found,
            ..
        }) => {
            assert_eq!(
                (subject.as_str(), region, found),
                ("B", GazeRegion::Left, 8)
            );
        }
        other => panic!("expected InsufficientData, got {other:?}"),
    }
}

/// Mean head+eye minus head-only accuracy over a population of identical
/// strategy.
fn mean_delta(alpha: f64) -> f64 {
    let cfg = SynthConfig {
        n_subjects: 6,
        frames_per_region: 30,
        alpha: AlphaSchedule::Fixed(alpha),
        seed: 12,
        ..SynthConfig::default()
    }
    .with_behavioral_noise();
    let (_, subjects) = common::population(&cfg);
    let users = evaluate_all(&subjects, &quick(1.0, 20)).unwrap();
    let deltas: Vec<f64> = users
        .iter()
        .map(|u| {
            let acc = |m| u.mode(m).unwrap().mean_accuracy().unwrap();
            acc(FeatureMode::HeadAndEye) - acc(FeatureMode::HeadOnly)
        })
        .collect();
    deltas.iter().sum::<f64>() / deltas.len() as f64
}

#[test]
fn eye_features_help_eye_movers() {
    let d = mean_delta(0.1);
    assert!(d > 0.0, "lizard delta {d}");
}

#[test]
fn eye_features_barely_matter_for_head_movers() {
    let d = mean_delta(0.9);
    assert!(d.abs() < 0.05, "owl delta {d}");
}
