//! Owlness, confusion matrices, leave-one-subject-out evaluation and
//! head-versus-eye accuracy deltas.

pub mod confusion;
pub mod delta;
pub mod evaluation;
pub mod owlness;
pub mod stats;

pub use confusion::ConfusionMatrix;
pub use delta::{accuracy_delta_report, DeltaReport, RegionDelta, UserDelta};
pub use evaluation::{
    check_sufficiency, evaluate_all, evaluate_user, group_by_subject, subject_owlness,
    threshold_sweep, EvalConfig, LabelledFrame, ModeEvaluation, SubjectFrames, SweepPoint,
    UserEvaluation, MIN_FRAMES_PER_REGION,
};
pub use owlness::{
    owlness_frame, owlness_from_positions, owlness_subject, BackgroundEntry, BackgroundModel,
    OwlnessReport, OwlnessSample, Strategy, StrategyThresholds,
};
