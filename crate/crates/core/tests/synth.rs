mod common;

use gazekit::analysis::{stats, subject_owlness, StrategyThresholds};
use gazekit::features::{normalize_landmarks, normalize_pupil, normalized_nose_tip};
use gazekit::pupil::detect_pupil;
use gazekit::synth::{
    generate_frame, generate_population, AlphaSchedule, RegionTargets, SubjectProfile, SynthConfig,
};
use gazekit::{DetectorConfig, GazeRegion, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Normalized nose tip and detected, normalized pupil of one ideal frame.
fn observe(profile: &SubjectProfile, region: GazeRegion, seed: u64) -> (Vec<f64>, Point, Point) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = generate_frame(profile, &RegionTargets::default(), region, 0, &mut rng).unwrap();
    let rec = frame.record.unwrap();
    let head = normalize_landmarks(rec.landmarks()).unwrap();
    let found = detect_pupil(
        rec.eye_crop(),
        rec.eye_polygon(),
        &DetectorConfig::default(),
    );
    let pupil = normalize_pupil(found.center.unwrap(), rec.eye_polygon()).unwrap();
    (head.clone(), normalized_nose_tip(&head), pupil)
}

#[test]
fn pure_head_mover() {
    let owl = SubjectProfile::ideal("S001", 1.0);
    let g = RegionTargets::default().get(GazeRegion::Left);
    let (_, road_tip, _) = observe(&owl, GazeRegion::Road, 1);
    let (_, tip, pupil) = observe(&owl, GazeRegion::Left, 2);
    let shift = tip - road_tip;
    assert!(
        (shift.x - g.x).abs() < 1e-9 && (shift.y - g.y).abs() < 1e-9,
        "{shift:?}"
    );
    // detection resolves the pupil to within a pixel or so of the box center
    assert!(pupil.distance(Point::new(0.5, 0.5)) < 0.06, "{pupil:?}");
}

#[test]
fn pure_eye_mover() {
    let lizard = SubjectProfile::ideal("S001", 0.0);
    let g = RegionTargets::default().get(GazeRegion::Left);
    let (road_head, _, road_pupil) = observe(&lizard, GazeRegion::Road, 3);
    let (head, _, pupil) = observe(&lizard, GazeRegion::Left, 4);
    for (a, b) in road_head.iter().zip(&head) {
        assert!((a - b).abs() < 1e-9);
    }
    let shift = pupil - road_pupil;
    assert!(shift.distance(g) < 0.06, "{shift:?} vs {g:?}");
}

#[test]
fn frame_count_and_determinism() {
    let cfg = SynthConfig {
        n_subjects: 3,
        frames_per_region: 5,
        p_face_fail: 0.2,
        p_pupil_fail: 0.2,
        seed: 7,
        ..SynthConfig::default()
    };
    let a = generate_population(&cfg).unwrap();
    assert_eq!(a.frames.len(), 3 * 6 * 5);
    assert_eq!(a, generate_population(&cfg).unwrap());
    let b = generate_population(&SynthConfig { seed: 8, ..cfg }).unwrap();
    assert_ne!(a.frames, b.frames);
    for r in GazeRegion::ALL {
        assert_eq!(a.frames.iter().filter(|f| f.label == r).count(), 15);
    }
}

#[test]
fn uniform_population_spans_the_spectrum() {
    let cfg = SynthConfig {
        n_subjects: 40,
        frames_per_region: 10,
        alpha: AlphaSchedule::Uniform,
        seed: 3,
        ..SynthConfig::default()
    };
    let (pop, subjects) = common::population(&cfg);
    let reports = subject_owlness(&subjects, &StrategyThresholds::default()).unwrap();
    let m: Vec<f64> = reports.iter().map(|r| r.owlness).collect();
    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo <= 0.15 && hi >= 0.85, "M spans [{lo}, {hi}]");
    let alpha: Vec<f64> = pop.profiles.iter().map(|p| p.head_gain).collect();
    assert!(stats::spearman(&alpha, &m).unwrap() > 0.9);
}
