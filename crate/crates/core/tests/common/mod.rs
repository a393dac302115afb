#![allow(dead_code)]

use gazekit::analysis::{group_by_subject, LabelledFrame, SubjectFrames};
use gazekit::pipeline::{extract, Extraction};
use gazekit::synth::{generate_population, Population, SynthConfig};
use gazekit::DetectorConfig;

/// Runs pupil detection over a population and keeps the usable frames.
pub fn usable_frames(pop: &Population) -> Vec<SubjectFrames<f64>> {
    let det = DetectorConfig::default();
    group_by_subject(
        pop.frames
            .iter()
            .filter_map(|f| match extract(f.record.as_ref(), &det) {
                Extraction::Ready(features) => Some((
                    f.subject_id.clone(),
                    LabelledFrame {
                        label: f.label,
                        features,
                    },
                )),
                _ => None,
            }),
    )
}

pub fn population(cfg: &SynthConfig) -> (Population, Vec<SubjectFrames<f64>>) {
    let pop = generate_population(cfg).unwrap();
    let subjects = usable_frames(&pop);
    (pop, subjects)
}
