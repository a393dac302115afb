//! Owlness: how much of a driver's gaze shifting is carried by the head
//! rather than the eyes.
//!
//! For one frame, `d_h` is the distance of the normalized nose tip from the
//! subject's mean nose tip and `d_p` the distance of the normalized pupil
//! from the subject's mean pupil; `M = d_h / (d_h + d_p)`. Both positions
//! live in unit squares, so each distance is at most `sqrt(2)`. A subject's
//! owlness is the mean of per-frame values.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::features::{normalize_landmarks, normalize_pupil, normalized_nose_tip};
use crate::frame::FrameRecord;
use crate::geometry::Point;
use crate::pupil::PupilResult;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundEntry<T> {
    pub mean_nose_tip: Point<T>,
    pub mean_pupil: Point<T>,
    pub frame_count: usize,
}

/// Per-subject mean normalized nose-tip and pupil positions over the frames
/// that passed pupil detection.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BackgroundModel<T> {
    entries: BTreeMap<String, BackgroundEntry<T>>,
}

impl<T: Scalar> BackgroundModel<T> {
    /// Builds from `(subject, normalized nose tip, normalized pupil)`.
    pub fn from_observations<'a, I>(observations: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, Point<T>, Point<T>)>,
    {
        let mut sums: BTreeMap<String, (Point<T>, Point<T>, usize)> = BTreeMap::new();
        for (subject, nose, pupil) in observations {
            let e =
                sums.entry(subject.to_string())
                    .or_insert((Point::default(), Point::default(), 0));
            e.0 = e.0 + nose;
            e.1 = e.1 + pupil;
            e.2 += 1;
        }
        let entries = sums
            .into_iter()
            .map(|(subject, (nose, pupil, n))| {
                let k = T::one() / T::from_count(n);
                (
                    subject,
                    BackgroundEntry {
                        mean_nose_tip: nose.scale(k),
                        mean_pupil: pupil.scale(k),
                        frame_count: n,
                    },
                )
            })
            .collect();
        BackgroundModel { entries }
    }

    pub fn get(&self, subject: &str) -> Result<&BackgroundEntry<T>> {
        self.entries
            .get(subject)
            .ok_or_else(|| Error::MissingBackground(subject.to_string()))
    }

    pub fn subjects(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwlnessSample<T> {
    pub owlness: T,
    pub head_distance: T,
    pub pupil_distance: T,
}

/// A motionless frame (`d_h + d_p == 0`) scores 0.5.
pub fn owlness_from_positions<T: Scalar>(
    nose_tip: Point<T>,
    pupil: Point<T>,
    background: &BackgroundEntry<T>,
) -> OwlnessSample<T> {
    let d_h = nose_tip.distance(background.mean_nose_tip);
    let d_p = pupil.distance(background.mean_pupil);
    let sum = d_h + d_p;
    let owlness = if sum > T::zero() {
        d_h / sum
    } else {
        T::lit(0.5)
    };
    OwlnessSample {
        owlness,
        head_distance: d_h,
        pupil_distance: d_p,
    }
}

/// Owlness of one frame with a detected pupil.
pub fn owlness_frame<T: Scalar>(
    frame: &FrameRecord<T>,
    pupil: &PupilResult<T>,
    background: &BackgroundModel<T>,
) -> Result<T> {
    let center = pupil
        .center
        .filter(|_| pupil.is_detected())
        .ok_or(Error::MissingPupil)?;
    let entry = background.get(frame.subject_id())?;
    let head = normalize_landmarks(frame.landmarks())?;
    let pupil = normalize_pupil(center, frame.eye_polygon())?;
    Ok(owlness_from_positions(normalized_nose_tip(&head), pupil, entry).owlness)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Lizard,
    Mixed,
    Owl,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Lizard => "Lizard",
            Strategy::Mixed => "Mixed",
            Strategy::Owl => "Owl",
        }
    }
}

/// `M < low` is a lizard, `M > high` an owl, anything else mixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for StrategyThresholds {
    fn default() -> Self {
        StrategyThresholds {
            low: 0.45,
            high: 0.55,
        }
    }
}

impl StrategyThresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
            return Err(Error::config(
                "owl_thresholds",
                format!("need 0 <= low <= high <= 1, got {low},{high}"),
            ));
        }
        Ok(StrategyThresholds { low, high })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [low, high] = parts.as_slice() else {
            return Err(Error::config("owl_thresholds", "expected `low,high`"));
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::config("owl_thresholds", format!("`{v}` is not a number")))
        };
        Self::new(num(low)?, num(high)?)
    }

    pub fn classify(&self, owlness: f64) -> Strategy {
        if owlness < self.low {
            Strategy::Lizard
        } else if owlness > self.high {
            Strategy::Owl
        } else {
            Strategy::Mixed
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OwlnessReport {
    pub subject_id: String,
    /// Mean per-frame owlness.
    pub owlness: f64,
    pub mean_head_distance: f64,
    pub mean_pupil_distance: f64,
    pub frame_count: usize,
    pub strategy: Strategy,
}

/// Averages per-frame owlness over `(normalized nose tip, normalized pupil)`
/// observations of one subject.
pub fn owlness_subject<T: Scalar>(
    subject_id: &str,
    observations: &[(Point<T>, Point<T>)],
    background: &BackgroundModel<T>,
    thresholds: &StrategyThresholds,
) -> Result<OwlnessReport> {
    let entry = background.get(subject_id)?;
    if observations.is_empty() {
        return Err(Error::NoQualifyingFrames(subject_id.to_string()));
    }
    let (mut m, mut dh, mut dp) = (0.0, 0.0, 0.0);
    for &(nose, pupil) in observations {
        let s = owlness_from_positions(nose, pupil, entry);
        m += s.owlness.as_f64();
        dh += s.head_distance.as_f64();
        dp += s.pupil_distance.as_f64();
    }
    let n = observations.len() as f64;
    let owlness = m / n;
    Ok(OwlnessReport {
        subject_id: subject_id.to_string(),
        owlness,
        mean_head_distance: dh / n,
        mean_pupil_distance: dp / n,
        frame_count: observations.len(),
        strategy: thresholds.classify(owlness),
    })
}
