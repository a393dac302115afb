use crate::region::{GazeRegion, NUM_REGIONS};
use crate::scalar::Scalar;

/// A classified frame: predicted region, class probabilities, and the
/// confidence ratio of the top two probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T> {
    pub region: GazeRegion,
    pub probabilities: [T; NUM_REGIONS],
    /// `p_max / p_second`, or `+inf` when `p_second == 0`.
    pub confidence: T,
    pub accepted: bool,
}

impl<T: Scalar> Decision<T> {
    /// Argmax ties resolve to the lowest region index. A decision is accepted
    /// only when its confidence is strictly greater than `threshold`.
    pub fn from_probabilities(probabilities: [T; NUM_REGIONS], threshold: T) -> Self {
        let (best, confidence) = argmax_confidence(&probabilities);
        Decision {
            region: GazeRegion::ALL[best],
            probabilities,
            confidence,
            accepted: confidence > threshold,
        }
    }

    /// Re-applies pruning with a different threshold.
    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.accepted = self.confidence > threshold;
        self
    }
}

/// Returns the argmax (lowest index on ties) and the confidence ratio.
pub fn argmax_confidence<T: Scalar>(p: &[T; NUM_REGIONS]) -> (usize, T) {
    let mut best = 0;
    for i in 1..NUM_REGIONS {
        if p[i] > p[best] {
            best = i;
        }
    }
    let second = (0..NUM_REGIONS)
        .filter(|&i| i != best)
        .map(|i| p[i])
        .fold(T::neg_infinity(), T::max);
    let confidence = if second <= T::zero() {
        T::infinity()
    } else {
        p[best] / second
    };
    (best, confidence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_confidence_is_rejected() {
        let d = Decision::<f64>::from_probabilities([0.55, 0.05, 0.1, 0.1, 0.1, 0.1], 10.0);
        assert_eq!(d.region, GazeRegion::Road);
        assert!((d.confidence - 5.5).abs() < 1e-12);
        assert!(!d.accepted);
    }

    #[test]
    fn zero_runner_up_is_infinitely_confident() {
        let d = Decision::<f64>::from_probabilities([0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1e300);
        assert_eq!(d.region, GazeRegion::InstrumentCluster);
        assert!(d.confidence.is_infinite());
        assert!(d.accepted);
        assert!(!d.with_threshold(f64::INFINITY).accepted);
    }

    #[test]
    fn ties_pick_lowest_index_and_fail_threshold_one() {
        let d = Decision::from_probabilities([0.0, 0.5, 0.0, 0.0, 0.5, 0.0], 1.0);
        assert_eq!(d.region, GazeRegion::CenterStack);
        assert_eq!(d.confidence, 1.0);
        assert!(!d.accepted);
    }
}
