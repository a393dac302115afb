//! Calibration-free feature vectors.
//!
//! Head features are all 68 landmarks mapped by the per-axis affine transform
//! that sends the bounding box of the nose and eye landmarks to the unit
//! square. Eye features are the pupil center expressed in the bounding box
//! of the eye polygon after rotating the eye so its corners lie on a
//! horizontal line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::geometry::{
    BoundingBox, EyePolygon, Landmarks, Point, EYES_AND_NOSE, LANDMARK_COUNT, NOSE_TIP,
};
use crate::pupil::PupilResult;
use crate::scalar::Scalar;

pub const HEAD_DIM: usize = 2 * LANDMARK_COUNT;
pub const EYE_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureMode {
    HeadOnly,
    HeadAndEye,
}

impl FeatureMode {
    pub const BOTH: [FeatureMode; 2] = [FeatureMode::HeadOnly, FeatureMode::HeadAndEye];

    pub fn dim(self) -> usize {
        match self {
            FeatureMode::HeadOnly => HEAD_DIM,
            FeatureMode::HeadAndEye => HEAD_DIM + EYE_DIM,
        }
    }

    pub fn from_dim(dim: usize) -> Option<Self> {
        Self::BOTH.into_iter().find(|m| m.dim() == dim)
    }

    /// Command-line spelling.
    pub fn flag_name(self) -> &'static str {
        match self {
            FeatureMode::HeadOnly => "head-only",
            FeatureMode::HeadAndEye => "head-eye",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    head: Vec<T>,
    eye: Option<[T; EYE_DIM]>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn head_only(head: Vec<T>) -> Result<Self> {
        if head.len() != HEAD_DIM {
            return Err(Error::DimensionMismatch {
                expected: HEAD_DIM,
                found: head.len(),
            });
        }
        Ok(FeatureVector { head, eye: None })
    }

    pub fn with_eye(head: Vec<T>, pupil: Point<T>) -> Result<Self> {
        let mut v = Self::head_only(head)?;
        v.eye = Some([pupil.x, pupil.y]);
        Ok(v)
    }

    pub fn mode(&self) -> FeatureMode {
        if self.eye.is_some() {
            FeatureMode::HeadAndEye
        } else {
            FeatureMode::HeadOnly
        }
    }

    pub fn head(&self) -> &[T] {
        &self.head
    }

    pub fn eye(&self) -> Option<[T; EYE_DIM]> {
        self.eye
    }

    pub fn len(&self) -> usize {
        self.mode().dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Head block followed by the eye block, if any.
    pub fn to_vec(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.head);
        if let Some(eye) = self.eye {
            out.extend_from_slice(&eye);
        }
        out
    }
}

/// Bounding box of landmarks 27–47.
pub fn eyes_and_nose_box<T: Scalar>(lm: &Landmarks<T>) -> Result<BoundingBox<T>> {
    let bb = BoundingBox::enclosing(EYES_AND_NOSE.map(|i| lm.get(i))).expect("non-empty range");
    if bb.width() <= T::zero() || bb.height() <= T::zero() {
        return Err(Error::DegenerateBox);
    }
    Ok(bb)
}

/// Flat `[x0, y0, ..., x67, y67]` in the eyes-and-nose unit frame. Landmarks
/// outside the box are not clamped.
pub fn normalize_landmarks<T: Scalar>(lm: &Landmarks<T>) -> Result<Vec<T>> {
    let bb = eyes_and_nose_box(lm)?;
    Ok(lm
        .points()
        .iter()
        .flat_map(|&p| {
            let q = bb.to_unit(p);
            [q.x, q.y]
        })
        .collect())
}

/// Nose tip read back out of a normalized head block.
pub fn normalized_nose_tip<T: Scalar>(head: &[T]) -> Point<T> {
    Point::new(head[2 * NOSE_TIP], head[2 * NOSE_TIP + 1])
}

/// Pupil position in the corner-aligned eye box, clamped to `[0, 1]²`.
pub fn normalize_pupil<T: Scalar>(center: Point<T>, polygon: &EyePolygon<T>) -> Result<Point<T>> {
    let origin = polygon.outer_corner();
    let axis = polygon.inner_corner() - origin;
    let len = axis.norm();
    if !(len > T::zero()) {
        return Err(Error::DegenerateEye);
    }
    let along = axis.scale(T::one() / len);
    let across = Point::new(-along.y, along.x);
    let rotate = |p: Point<T>| {
        let d = p - origin;
        Point::new(d.dot(along), d.dot(across))
    };
    let bb =
        BoundingBox::enclosing(polygon.points().iter().map(|&p| rotate(p))).expect("six points");
    if !(bb.width() > T::zero() && bb.height() > T::zero()) {
        return Err(Error::DegenerateEye);
    }
    let q = bb.to_unit(rotate(center));
    let unit = |v: T| v.max(T::zero()).min(T::one());
    Ok(Point::new(unit(q.x), unit(q.y)))
}

/// Head block, plus the eye block in `HeadAndEye` mode.
pub fn build_feature<T: Scalar>(
    frame: &FrameRecord<T>,
    pupil: &PupilResult<T>,
    mode: FeatureMode,
) -> Result<FeatureVector<T>> {
    let head = normalize_landmarks(frame.landmarks())?;
    match mode {
        FeatureMode::HeadOnly => FeatureVector::head_only(head),
        FeatureMode::HeadAndEye => {
            let center = pupil
                .center
                .filter(|_| pupil.is_detected())
                .ok_or(Error::MissingPupil)?;
            FeatureVector::with_eye(head, normalize_pupil(center, frame.eye_polygon())?)
        }
    }
}
