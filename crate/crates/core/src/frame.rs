use crate::error::{Error, Result};
use crate::geometry::{EyePolygon, Landmarks};
use crate::image::GrayImage;
use crate::region::GazeRegion;
use crate::scalar::Scalar;

/// One annotated video frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord<T> {
    subject_id: String,
    frame_index: u64,
    landmarks: Landmarks<T>,
    eye_crop: GrayImage,
    eye_polygon: EyePolygon<T>,
    label: GazeRegion,
}

impl<T: Scalar> FrameRecord<T> {
    /// Fails when any eye polygon vertex falls outside the crop's pixel grid.
    pub fn new(
        subject_id: impl Into<String>,
        frame_index: u64,
        landmarks: Landmarks<T>,
        eye_crop: GrayImage,
        eye_polygon: EyePolygon<T>,
        label: GazeRegion,
    ) -> Result<Self> {
        let max_x = T::from_count(eye_crop.width() - 1);
        let max_y = T::from_count(eye_crop.height() - 1);
        for (i, p) in eye_polygon.points().iter().enumerate() {
            if p.x < T::zero() || p.y < T::zero() || p.x > max_x || p.y > max_y {
                return Err(Error::InvalidPolygon(format!(
                    "vertex {i} ({}, {}) lies outside the {}x{} eye crop",
                    p.x,
                    p.y,
                    eye_crop.width(),
                    eye_crop.height()
                )));
            }
        }
        Ok(FrameRecord {
            subject_id: subject_id.into(),
            frame_index,
            landmarks,
            eye_crop,
            eye_polygon,
            label,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn landmarks(&self) -> &Landmarks<T> {
        &self.landmarks
    }

    pub fn eye_crop(&self) -> &GrayImage {
        &self.eye_crop
    }

    pub fn eye_polygon(&self) -> &EyePolygon<T> {
        &self.eye_polygon
    }

    pub fn label(&self) -> GazeRegion {
        self.label
    }
}
