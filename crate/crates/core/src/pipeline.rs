//! Frame-level orchestration: pupil detection, feature extraction,
//! classification and confidence pruning, with stage-by-stage attrition
//! accounting.
//!
//! Pupil detection runs in both feature modes and frames without a pupil are
//! dropped in both, so head-only and head+eye results always cover the same
//! frames.

use std::ops::AddAssign;

use crate::decision::Decision;
use crate::error::{Error, Result};
use crate::features::{normalize_landmarks, normalize_pupil, FeatureMode};
use crate::forest::{ForestConfig, ForestModel};
use crate::frame::FrameRecord;
use crate::geometry::Point;
use crate::pupil::{detect_pupil, DetectorConfig, PupilStatus};
use crate::region::GazeRegion;
use crate::scalar::Scalar;

pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig<T> {
    pub mode: FeatureMode,
    /// Decisions are accepted when `confidence > confidence_threshold`.
    pub confidence_threshold: T,
    pub detector: DetectorConfig<T>,
    pub forest: ForestConfig,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        PipelineConfig {
            mode: FeatureMode::HeadAndEye,
            confidence_threshold: T::lit(DEFAULT_CONFIDENCE_THRESHOLD),
            detector: DetectorConfig::default(),
            forest: ForestConfig::default(),
        }
    }
}

impl<T: Scalar> PipelineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence_threshold >= T::one()) {
            return Err(Error::config("confidence_threshold", "must be >= 1"));
        }
        self.forest.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropReason {
    NoFace,
    PupilFailed,
    LowConfidence,
}

impl DropReason {
    pub fn name(self) -> &'static str {
        match self {
            DropReason::NoFace => "NoFace",
            DropReason::PupilFailed => "PupilFailed",
            DropReason::LowConfidence => "LowConfidence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    NoFace,
    PupilFailed(PupilStatus),
    Decided(Decision<T>),
}

impl<T: Scalar> Outcome<T> {
    pub fn decision(&self) -> Option<&Decision<T>> {
        match self {
            Outcome::Decided(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.decision().is_some_and(|d| d.accepted)
    }

    pub fn drop_reason(&self) -> Option<DropReason> {
        match self {
            Outcome::NoFace => Some(DropReason::NoFace),
            Outcome::PupilFailed(_) => Some(DropReason::PupilFailed),
            Outcome::Decided(d) if !d.accepted => Some(DropReason::LowConfidence),
            Outcome::Decided(_) => None,
        }
    }
}

/// Normalized features of a frame that passed face and pupil detection.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures<T> {
    /// 136 normalized landmark coordinates.
    pub head: Vec<T>,
    /// Normalized pupil position.
    pub pupil: Point<T>,
    /// Detected pupil center in eye-crop pixels.
    pub pupil_center: Point<T>,
}

impl<T: Scalar> FrameFeatures<T> {
    pub fn vector(&self, mode: FeatureMode) -> Vec<T> {
        let mut v = Vec::with_capacity(mode.dim());
        v.extend_from_slice(&self.head);
        if mode == FeatureMode::HeadAndEye {
            v.push(self.pupil.x);
            v.push(self.pupil.y);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extraction<T> {
    NoFace,
    PupilFailed(PupilStatus),
    Ready(FrameFeatures<T>),
}

/// Pupil detection and normalization for one frame. A missing record or a
/// degenerate landmark box counts as a face-detection failure.
pub fn extract<T: Scalar>(
    frame: Option<&FrameRecord<T>>,
    detector: &DetectorConfig<T>,
) -> Extraction<T> {
    let Some(frame) = frame else {
        return Extraction::NoFace;
    };
    let Ok(head) = normalize_landmarks(frame.landmarks()) else {
        return Extraction::NoFace;
    };
    let pupil = detect_pupil(frame.eye_crop(), frame.eye_polygon(), detector);
    let Some(center) = pupil.center.filter(|_| pupil.is_detected()) else {
        return Extraction::PupilFailed(pupil.status);
    };
    match normalize_pupil(center, frame.eye_polygon()) {
        Ok(normalized) => Extraction::Ready(FrameFeatures {
            head,
            pupil: normalized,
            pupil_center: center,
        }),
        Err(_) => Extraction::PupilFailed(PupilStatus::NoBlob),
    }
}

/// A trained model bound to a compatible pipeline configuration.
#[derive(Debug, Clone, Copy)]
pub struct Classifier<'m, T> {
    model: &'m ForestModel<T>,
    cfg: PipelineConfig<T>,
}

impl<'m, T: Scalar> Classifier<'m, T> {
    pub fn new(model: &'m ForestModel<T>, cfg: PipelineConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if model.feature_dim() != cfg.mode.dim() {
            return Err(Error::ModeMismatch(format!(
                "model expects {} features but mode {} produces {}",
                model.feature_dim(),
                cfg.mode.flag_name(),
                cfg.mode.dim()
            )));
        }
        Ok(Classifier { model, cfg })
    }

    pub fn config(&self) -> &PipelineConfig<T> {
        &self.cfg
    }

    pub fn decide(&self, features: &FrameFeatures<T>) -> Decision<T> {
        let p = self
            .model
            .predict_proba(&features.vector(self.cfg.mode))
            .expect("dimension checked at construction");
        Decision::from_probabilities(p, self.cfg.confidence_threshold)
    }

    pub fn classify(&self, frame: Option<&FrameRecord<T>>) -> Outcome<T> {
        match extract(frame, &self.cfg.detector) {
            Extraction::NoFace => Outcome::NoFace,
            Extraction::PupilFailed(status) => Outcome::PupilFailed(status),
            Extraction::Ready(features) => Outcome::Decided(self.decide(&features)),
        }
    }
}

/// One-shot classification of a frame; `None` stands for a frame whose
/// landmark record is missing or unparseable.
pub fn classify_frame<T: Scalar>(
    frame: Option<&FrameRecord<T>>,
    model: &ForestModel<T>,
    cfg: &PipelineConfig<T>,
) -> Result<Outcome<T>> {
    Ok(Classifier::new(model, *cfg)?.classify(frame))
}

/// Frame counts surviving each pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AttritionLedger {
    pub total_frames: u64,
    pub faces_detected: u64,
    pub pupils_detected: u64,
    pub confident_decisions: u64,
}

impl AttritionLedger {
    pub fn record<T: Scalar>(&mut self, outcome: &Outcome<T>) {
        self.total_frames += 1;
        match outcome {
            Outcome::NoFace => {}
            Outcome::PupilFailed(_) => self.faces_detected += 1,
            Outcome::Decided(d) => {
                self.faces_detected += 1;
                self.pupils_detected += 1;
                self.confident_decisions += u64::from(d.accepted);
            }
        }
    }

    /// `total >= faces >= pupils >= confident`.
    pub fn is_consistent(&self) -> bool {
        self.total_frames >= self.faces_detected
            && self.faces_detected >= self.pupils_detected
            && self.pupils_detected >= self.confident_decisions
    }

    pub fn fraction_of_total(&self, count: u64) -> f64 {
        count as f64 / self.total_frames as f64
    }

    /// `(confident_rate, effective_rate)` in Hz at `fps` frames per second:
    /// confident decisions per second among pupil-passing frames, and among
    /// all raw frames.
    pub fn decision_rates(&self, fps: f64) -> Result<(f64, f64)> {
        decision_rates(self, fps)
    }
}

impl AddAssign for AttritionLedger {
    fn add_assign(&mut self, rhs: Self) {
        self.total_frames += rhs.total_frames;
        self.faces_detected += rhs.faces_detected;
        self.pupils_detected += rhs.pupils_detected;
        self.confident_decisions += rhs.confident_decisions;
    }
}

impl std::iter::Sum for AttritionLedger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(AttritionLedger::default(), |mut a, b| {
            a += b;
            a
        })
    }
}

pub fn decision_rates(ledger: &AttritionLedger, fps: f64) -> Result<(f64, f64)> {
    if !(fps > 0.0) {
        return Err(Error::config("fps", "must be positive"));
    }
    if !ledger.is_consistent() {
        return Err(Error::DataFormat("ledger counts are not monotone".into()));
    }
    if ledger.pupils_detected == 0 {
        return Err(Error::DivisionByZero("no pupil-passing frames"));
    }
    if ledger.total_frames == 0 {
        return Err(Error::DivisionByZero("no frames"));
    }
    let confident = ledger.confident_decisions as f64;
    Ok((
        fps * confident / ledger.pupils_detected as f64,
        fps * confident / ledger.total_frames as f64,
    ))
}

/// Ground truth and decision for one evaluated frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelledDecision<T> {
    pub truth: GazeRegion,
    pub decision: Decision<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_counts_by_stage() {
        let mut ledger = AttritionLedger::default();
        ledger.record(&Outcome::<f64>::NoFace);
        ledger.record(&Outcome::<f64>::PupilFailed(PupilStatus::EyeClosed));
        let low = Decision::from_probabilities([0.55, 0.05, 0.1, 0.1, 0.1, 0.1], 10.0);
        let high = Decision::from_probabilities([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 10.0);
        ledger.record(&Outcome::Decided(low));
        ledger.record(&Outcome::Decided(high));
        assert_eq!(
            ledger,
            AttritionLedger {
                total_frames: 4,
                faces_detected: 3,
                pupils_detected: 2,
                confident_decisions: 1
            }
        );
        assert!(ledger.is_consistent());
        let doubled: AttritionLedger = [ledger, ledger].into_iter().sum();
        assert_eq!(doubled.total_frames, 8);
    }

    #[test]
    fn drop_reasons() {
        let low = Decision::from_probabilities([0.55, 0.05, 0.1, 0.1, 0.1, 0.1], 10.0);
        assert_eq!(
            Outcome::Decided(low).drop_reason(),
            Some(DropReason::LowConfidence)
        );
        assert_eq!(
            Outcome::<f64>::NoFace.drop_reason(),
            Some(DropReason::NoFace)
        );
        assert_eq!(
            Outcome::<f64>::PupilFailed(PupilStatus::NoBlob).drop_reason(),
            Some(DropReason::PupilFailed)
        );
    }

    #[test]
    fn rates() {
        let pupils = 833_049u64;
        let ledger = AttritionLedger {
            total_frames: 1_351_864,
            faces_detected: 1_073_380,
            pupils_detected: pupils,
            confident_decisions: (0.071 * pupils as f64).floor() as u64,
        };
        let (confident, effective) = decision_rates(&ledger, 30.0).unwrap();
        assert!((confident - 2.13).abs() < 0.01, "{confident}");
        assert!((effective - 1.31).abs() < 0.01, "{effective}");

        let full = AttritionLedger {
            total_frames: 10,
            faces_detected: 10,
            pupils_detected: 10,
            confident_decisions: 10,
        };
        assert_eq!(decision_rates(&full, 30.0).unwrap(), (30.0, 30.0));
        let none = AttritionLedger {
            confident_decisions: 0,
            ..full
        };
        assert_eq!(decision_rates(&none, 30.0).unwrap(), (0.0, 0.0));
        let empty = AttritionLedger::default();
        assert!(matches!(
            decision_rates(&empty, 30.0),
            Err(Error::DivisionByZero(_))
        ));
        assert!(decision_rates(&full, 0.0).is_err());
    }

    #[test]
    fn threshold_must_be_at_least_one() {
        let cfg = PipelineConfig::<f64> {
            confidence_threshold: 0.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let inf = PipelineConfig::<f64> {
            confidence_threshold: f64::INFINITY,
            ..Default::default()
        };
        assert!(inf.validate().is_ok());
    }
}
