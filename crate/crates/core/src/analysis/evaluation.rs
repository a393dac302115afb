//! Leave-one-subject-out evaluation.
//!
//! For each held-out subject and repetition: the other subjects' frames are
//! balanced by sub-sampling and used to train a forest; the held-out
//! subject's frames are balanced by super-sampling and classified with
//! confidence pruning. Accuracy is measured over accepted decisions only.
//! Both feature modes see the same balanced samples and the same forest seed.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::confusion::ConfusionMatrix;
use super::owlness::{owlness_subject, BackgroundModel, OwlnessReport, StrategyThresholds};
use super::stats;
use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::features::{normalized_nose_tip, FeatureMode};
use crate::forest::{subsample_balance, supersample_balance, train, ForestConfig, TrainingSet};
use crate::pipeline::{FrameFeatures, LabelledDecision};
use crate::region::{GazeRegion, NUM_REGIONS};
use crate::scalar::Scalar;
use crate::seed;

/// Minimum usable frames per subject and region.
pub const MIN_FRAMES_PER_REGION: usize = 120;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    pub forest: ForestConfig,
    pub confidence_threshold: T,
    pub repetitions: usize,
    pub min_frames_per_region: usize,
    pub seed: u64,
    pub modes: Vec<FeatureMode>,
    /// Keep every held-out decision.
    pub keep_decisions: bool,
    /// Thresholds at which accepted and correct counts are also tallied.
    pub sweep_thresholds: Vec<T>,
}

impl<T: Scalar> Default for EvalConfig<T> {
    fn default() -> Self {
        EvalConfig {
            forest: ForestConfig::default(),
            confidence_threshold: T::lit(10.0),
            repetitions: 100,
            min_frames_per_region: MIN_FRAMES_PER_REGION,
            seed: 0,
            modes: FeatureMode::BOTH.to_vec(),
            keep_decisions: false,
            sweep_thresholds: [1.0, 2.0, 5.0, 10.0, 20.0].map(T::lit).to_vec(),
        }
    }
}

impl<T: Scalar> EvalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be >= 1"));
        }
        if !(self.confidence_threshold >= T::one()) {
            return Err(Error::config("confidence_threshold", "must be >= 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::config(
                "mode",
                "at least one feature mode is required",
            ));
        }
        Ok(())
    }
}

/// A frame that passed face and pupil detection.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledFrame<T> {
    pub label: GazeRegion,
    pub features: FrameFeatures<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFrames<T> {
    pub subject_id: String,
    pub frames: Vec<LabelledFrame<T>>,
}

impl<T: Scalar> SubjectFrames<T> {
    pub fn region_counts(&self) -> [usize; NUM_REGIONS] {
        let mut counts = [0; NUM_REGIONS];
        for f in &self.frames {
            counts[f.label.index()] += 1;
        }
        counts
    }
}

/// Groups `(subject, frame)` pairs by subject, ordered by subject id.
pub fn group_by_subject<T: Scalar>(
    frames: impl IntoIterator<Item = (String, LabelledFrame<T>)>,
) -> Vec<SubjectFrames<T>> {
    let mut map: BTreeMap<String, Vec<LabelledFrame<T>>> = BTreeMap::new();
    for (subject, frame) in frames {
        map.entry(subject).or_default().push(frame);
    }
    map.into_iter()
        .map(|(subject_id, frames)| SubjectFrames { subject_id, frames })
        .collect()
}

/// Every subject must have `min` usable frames in every region.
pub fn check_sufficiency<T: Scalar>(subjects: &[SubjectFrames<T>], min: usize) -> Result<()> {
    for s in subjects {
        let counts = s.region_counts();
        for region in GazeRegion::ALL {
            if counts[region.index()] < min {
                return Err(Error::InsufficientData {
                    subject: s.subject_id.clone(),
                    region,
                    found: counts[region.index()],
                    required: min,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeEvaluation<T> {
    pub mode: FeatureMode,
    /// Accuracy over accepted decisions per repetition; `None` when a
    /// repetition accepted nothing.
    pub accuracies: Vec<Option<f64>>,
    pub confusion: ConfusionMatrix,
    pub evaluated: u64,
    pub accepted: u64,
    pub decisions: Vec<LabelledDecision<T>>,
    /// Tallies at each sweep threshold over the same decisions.
    pub sweep: Vec<SweepPoint>,
    /// First-repetition decisions on the subject's own, unbalanced frames.
    pub raw_evaluated: u64,
    pub raw_accepted: u64,
}

impl<T: Scalar> ModeEvaluation<T> {
    fn defined(&self) -> Vec<f64> {
        self.accuracies.iter().flatten().copied().collect()
    }

    pub fn mean_accuracy(&self) -> Option<f64> {
        stats::mean(&self.defined())
    }

    pub fn std_accuracy(&self) -> Option<f64> {
        stats::std_dev(&self.defined())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserEvaluation<T> {
    pub subject_id: String,
    pub modes: Vec<ModeEvaluation<T>>,
}

impl<T: Scalar> UserEvaluation<T> {
    pub fn mode(&self, mode: FeatureMode) -> Option<&ModeEvaluation<T>> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

/// Stable 64-bit FNV-1a hash of a subject id, used to derive seeds.
fn subject_key(subject: &str) -> u64 {
    subject.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn training_set<T: Scalar>(
    frames: &[&LabelledFrame<T>],
    mode: FeatureMode,
) -> Result<TrainingSet<T>> {
    let dim = mode.dim();
    let mut data = Vec::with_capacity(dim * frames.len());
    for f in frames {
        data.extend_from_slice(&f.features.head);
        if mode == FeatureMode::HeadAndEye {
            data.push(f.features.pupil.x);
            data.push(f.features.pupil.y);
        }
    }
    TrainingSet::new(dim, data, frames.iter().map(|f| f.label).collect())
}

/// Evaluates one held-out subject in every configured mode.
pub fn evaluate_user<T: Scalar>(
    held_out: &str,
    subjects: &[SubjectFrames<T>],
    cfg: &EvalConfig<T>,
) -> Result<UserEvaluation<T>> {
    cfg.validate()?;
    if subjects.len() < 2 {
        return Err(Error::config(
            "subjects",
            "leave-one-out needs at least two subjects",
        ));
    }
    check_sufficiency(subjects, cfg.min_frames_per_region)?;
    let test = subjects
        .iter()
        .find(|s| s.subject_id == held_out)
        .ok_or_else(|| Error::DataFormat(format!("unknown subject `{held_out}`")))?;
    let pool: Vec<&LabelledFrame<T>> = subjects
        .iter()
        .filter(|s| s.subject_id != held_out)
        .flat_map(|s| s.frames.iter())
        .collect();
    let test_frames: Vec<&LabelledFrame<T>> = test.frames.iter().collect();

    let mut modes: Vec<ModeEvaluation<T>> = cfg
        .modes
        .iter()
        .map(|&mode| ModeEvaluation {
            mode,
            accuracies: Vec::with_capacity(cfg.repetitions),
            confusion: ConfusionMatrix::default(),
            evaluated: 0,
            accepted: 0,
            decisions: Vec::new(),
            sweep: cfg
                .sweep_thresholds
                .iter()
                .map(|t| SweepPoint {
                    threshold: t.as_f64(),
                    accepted: 0,
                    correct: 0,
                })
                .collect(),
            raw_evaluated: 0,
            raw_accepted: 0,
        })
        .collect();

    let key = subject_key(held_out);
    for rep in 0..cfg.repetitions {
        let rep_seed = seed::derive_all(cfg.seed, &[key, rep as u64]);
        let train_frames = subsample_balance(&pool, |f| f.label, seed::derive(rep_seed, 1))?;
        let balanced_test =
            supersample_balance(&test_frames, |f| f.label, seed::derive(rep_seed, 2))?;
        let forest_cfg = ForestConfig {
            rng_seed: seed::derive(rep_seed, 3),
            ..cfg.forest
        };
        for eval in &mut modes {
            let model = train(&training_set(&train_frames, eval.mode)?, &forest_cfg)?;
            if rep == 0 {
                for f in &test_frames {
                    let p = model.predict_proba(&f.features.vector(eval.mode))?;
                    eval.raw_evaluated += 1;
                    eval.raw_accepted += u64::from(
                        Decision::from_probabilities(p, cfg.confidence_threshold).accepted,
                    );
                }
            }
            let mut confusion = ConfusionMatrix::default();
            for f in &balanced_test {
                let p = model.predict_proba(&f.features.vector(eval.mode))?;
                let decision = Decision::from_probabilities(p, cfg.confidence_threshold);
                eval.evaluated += 1;
                if decision.accepted {
                    confusion.add(f.label, decision.region);
                }
                for (point, t) in eval.sweep.iter_mut().zip(&cfg.sweep_thresholds) {
                    if decision.confidence > *t {
                        point.accepted += 1;
                        point.correct += u64::from(decision.region == f.label);
                    }
                }
                if cfg.keep_decisions {
                    eval.decisions.push(LabelledDecision {
                        truth: f.label,
                        decision,
                    });
                }
            }
            eval.accepted += confusion.total();
            eval.accuracies.push(confusion.accuracy());
            eval.confusion.merge(&confusion);
        }
    }
    Ok(UserEvaluation {
        subject_id: held_out.to_string(),
        modes,
    })
}

/// Leave-one-subject-out over every subject, in subject order.
pub fn evaluate_all<T: Scalar>(
    subjects: &[SubjectFrames<T>],
    cfg: &EvalConfig<T>,
) -> Result<Vec<UserEvaluation<T>>> {
    cfg.validate()?;
    check_sufficiency(subjects, cfg.min_frames_per_region)?;
    subjects
        .par_iter()
        .map(|s| evaluate_user(&s.subject_id, subjects, cfg))
        .collect()
}

/// Owlness of every subject from its usable frames.
pub fn subject_owlness<T: Scalar>(
    subjects: &[SubjectFrames<T>],
    thresholds: &StrategyThresholds,
) -> Result<Vec<OwlnessReport>> {
    subjects
        .iter()
        .map(|s| {
            let obs: Vec<_> = s
                .frames
                .iter()
                .map(|f| (normalized_nose_tip(&f.features.head), f.features.pupil))
                .collect();
            let bg = BackgroundModel::from_observations(
                obs.iter().map(|&(n, p)| (s.subject_id.as_str(), n, p)),
            );
            owlness_subject(&s.subject_id, &obs, &bg, thresholds)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub accepted: u64,
    pub correct: u64,
}

impl SweepPoint {
    pub fn accuracy(&self) -> Option<f64> {
        (self.accepted > 0).then(|| self.correct as f64 / self.accepted as f64)
    }
}

/// Re-prunes a fixed set of decisions at each threshold.
pub fn threshold_sweep<T: Scalar>(
    decisions: &[LabelledDecision<T>],
    thresholds: &[T],
) -> Vec<SweepPoint> {
    thresholds
        .iter()
        .map(|&t| {
            let mut point = SweepPoint {
                threshold: t.as_f64(),
                accepted: 0,
                correct: 0,
            };
            for d in decisions {
                if d.decision.confidence > t {
                    point.accepted += 1;
                    point.correct += u64::from(d.decision.region == d.truth);
                }
            }
            point
        })
        .collect()
}
