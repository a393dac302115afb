//! Head-only versus head+eye accuracy comparison, per region and per user,
//! and the correlation of per-user gains with owlness.

use std::collections::BTreeMap;

use super::confusion::ConfusionMatrix;
use super::evaluation::UserEvaluation;
use super::owlness::{OwlnessReport, Strategy};
use super::stats;
use crate::error::{Error, Result};
use crate::features::FeatureMode;
use crate::region::GazeRegion;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionDelta {
    pub region: GazeRegion,
    pub head_only: Option<f64>,
    pub head_eye: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserDelta {
    pub subject_id: String,
    pub owlness: Option<f64>,
    pub strategy: Option<Strategy>,
    pub head_only: Option<f64>,
    pub head_eye: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub head_only_confusion: ConfusionMatrix,
    pub head_eye_confusion: ConfusionMatrix,
    pub overall_head_only: Option<f64>,
    pub overall_head_eye: Option<f64>,
    pub overall_delta: Option<f64>,
    pub regions: Vec<RegionDelta>,
    pub users: Vec<UserDelta>,
    /// Pearson r between owlness and per-user delta; NaN when undefined.
    pub owlness_correlation: f64,
    pub correlation_defined: bool,
}

impl DeltaReport {
    /// Mean per-user delta of the users in one strategy group.
    pub fn strategy_mean_delta(&self, strategy: Strategy) -> Option<f64> {
        let deltas: Vec<f64> = self
            .users
            .iter()
            .filter(|u| u.strategy == Some(strategy))
            .filter_map(|u| u.delta)
            .collect();
        stats::mean(&deltas)
    }
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

/// Requires both modes for every user, evaluated on the same number of
/// frames.
pub fn accuracy_delta_report<T: Scalar>(
    evaluations: &[UserEvaluation<T>],
    owlness: &[OwlnessReport],
) -> Result<DeltaReport> {
    let owl_by_subject: BTreeMap<&str, &OwlnessReport> =
        owlness.iter().map(|r| (r.subject_id.as_str(), r)).collect();
    let mut head_only_confusion = ConfusionMatrix::default();
    let mut head_eye_confusion = ConfusionMatrix::default();
    let mut users = Vec::with_capacity(evaluations.len());

    for eval in evaluations {
        let (Some(ho), Some(he)) = (
            eval.mode(FeatureMode::HeadOnly),
            eval.mode(FeatureMode::HeadAndEye),
        ) else {
            return Err(Error::ModeMismatch(format!(
                "subject `{}` lacks one of the two feature modes",
                eval.subject_id
            )));
        };
        if ho.evaluated != he.evaluated || ho.accuracies.len() != he.accuracies.len() {
            return Err(Error::ModeMismatch(format!(
                "subject `{}` evaluated {} head-only and {} head+eye frames",
                eval.subject_id, ho.evaluated, he.evaluated
            )));
        }
        head_only_confusion.merge(&ho.confusion);
        head_eye_confusion.merge(&he.confusion);
        let owl = owl_by_subject.get(eval.subject_id.as_str());
        let (a, b) = (ho.mean_accuracy(), he.mean_accuracy());
        users.push(UserDelta {
            subject_id: eval.subject_id.clone(),
            owlness: owl.map(|o| o.owlness),
            strategy: owl.map(|o| o.strategy),
            head_only: a,
            head_eye: b,
            delta: diff(a, b),
        });
    }

    let regions = GazeRegion::ALL
        .iter()
        .map(|&region| {
            let (a, b) = (
                head_only_confusion.region_accuracy(region),
                head_eye_confusion.region_accuracy(region),
            );
            RegionDelta {
                region,
                head_only: a,
                head_eye: b,
                delta: diff(a, b),
            }
        })
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = users
        .iter()
        .filter_map(|u| Some((u.owlness?, u.delta?)))
        .unzip();
    let r = stats::pearson(&xs, &ys);
    let (overall_head_only, overall_head_eye) = (
        head_only_confusion.accuracy(),
        head_eye_confusion.accuracy(),
    );

    Ok(DeltaReport {
        head_only_confusion,
        head_eye_confusion,
        overall_head_only,
        overall_head_eye,
        overall_delta: diff(overall_head_only, overall_head_eye),
        regions,
        users,
        owlness_correlation: r.unwrap_or(f64::NAN),
        correlation_defined: r.is_some(),
    })
}
