//! Driver gaze-region classification from facial landmarks and eye crops.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The root
//! aliases fix the scalar to `f64`; [`f32`](mod@f32) has the single-precision
//! counterparts.

pub mod analysis;
pub mod blob;
pub mod decision;
pub mod error;
pub mod features;
pub mod forest;
pub mod frame;
pub mod geometry;
pub mod image;
pub mod morphology;
pub mod pipeline;
pub mod pupil;
pub mod region;
pub mod scalar;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use features::FeatureMode;
pub use forest::ForestConfig;
pub use image::{BinaryImage, GrayImage};
pub use pipeline::{AttritionLedger, DropReason};
pub use pupil::PupilStatus;
pub use region::{GazeRegion, NUM_REGIONS};
pub use scalar::Scalar;

pub type Point = geometry::Point<f64>;
pub type BoundingBox = geometry::BoundingBox<f64>;
pub type Landmarks = geometry::Landmarks<f64>;
pub type EyePolygon = geometry::EyePolygon<f64>;
pub type FrameRecord = frame::FrameRecord<f64>;
pub type Decision = decision::Decision<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type DetectorConfig = pupil::DetectorConfig<f64>;
pub type PupilResult = pupil::PupilResult<f64>;
pub type ForestModel = forest::ForestModel<f64>;
pub type TrainingSet = forest::TrainingSet<f64>;
pub type PipelineConfig = pipeline::PipelineConfig<f64>;
pub type Outcome = pipeline::Outcome<f64>;
pub type EvalConfig = analysis::EvalConfig<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type Point = crate::geometry::Point<f32>;
    pub type Landmarks = crate::geometry::Landmarks<f32>;
    pub type EyePolygon = crate::geometry::EyePolygon<f32>;
    pub type FrameRecord = crate::frame::FrameRecord<f32>;
    pub type Decision = crate::decision::Decision<f32>;
    pub type DetectorConfig = crate::pupil::DetectorConfig<f32>;
    pub type ForestModel = crate::forest::ForestModel<f32>;
    pub type PipelineConfig = crate::pipeline::PipelineConfig<f32>;
}
