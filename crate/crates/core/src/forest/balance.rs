//! Class balancing by random sub-sampling (training) and super-sampling
//! (testing).

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::region::{GazeRegion, NUM_REGIONS};

pub fn class_counts<S>(samples: &[S], label: impl Fn(&S) -> GazeRegion) -> [usize; NUM_REGIONS] {
    let mut counts = [0; NUM_REGIONS];
    for s in samples {
        counts[label(s).index()] += 1;
    }
    counts
}

fn group<S>(samples: &[S], label: &impl Fn(&S) -> GazeRegion) -> Result<[Vec<usize>; NUM_REGIONS]> {
    let mut groups: [Vec<usize>; NUM_REGIONS] = Default::default();
    for (i, s) in samples.iter().enumerate() {
        groups[label(s).index()].push(i);
    }
    if let Some(empty) = groups.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(GazeRegion::ALL[empty]));
    }
    Ok(groups)
}

/// Reduces every class to the minority-class count by uniform sampling
/// without replacement. Output is grouped by class in region order.
pub fn subsample_balance<S: Clone>(
    samples: &[S],
    label: impl Fn(&S) -> GazeRegion,
    seed: u64,
) -> Result<Vec<S>> {
    let groups = group(samples, &label)?;
    let target = groups.iter().map(Vec::len).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(target * NUM_REGIONS);
    for members in &groups {
        for pick in index::sample(&mut rng, members.len(), target) {
            out.push(samples[members[pick]].clone());
        }
    }
    Ok(out)
}

/// Raises every class to the majority-class count: each class keeps all of
/// its samples and is topped up with uniform draws with replacement.
pub fn supersample_balance<S: Clone>(
    samples: &[S],
    label: impl Fn(&S) -> GazeRegion,
    seed: u64,
) -> Result<Vec<S>> {
    let groups = group(samples, &label)?;
    let target = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(target * NUM_REGIONS);
    for members in &groups {
        out.extend(members.iter().map(|&i| samples[i].clone()));
        for _ in members.len()..target {
            let pick = rng.random_range(0..members.len());
            out.push(samples[members[pick]].clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn skewed() -> Vec<(usize, GazeRegion)> {
        let mut v = Vec::new();
        for (k, r) in GazeRegion::ALL.iter().enumerate() {
            let n = if k == 0 { 100 } else { 20 };
            v.extend((0..n).map(|i| (k * 1000 + i, *r)));
        }
        v
    }

    #[test]
    fn subsample_counts() {
        let out = subsample_balance(&skewed(), |s| s.1, 1).unwrap();
        assert_eq!(out.len(), 120);
        assert_eq!(class_counts(&out, |s| s.1), [20; 6]);
        let mut ids: Vec<usize> = out.iter().map(|s| s.0).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 120, "sampling without replacement");
    }

    #[test]
    fn supersample_counts() {
        let out = supersample_balance(&skewed(), |s| s.1, 1).unwrap();
        assert_eq!(out.len(), 600);
        assert_eq!(class_counts(&out, |s| s.1), [100; 6]);
    }

    #[test]
    fn balanced_input_is_permuted() {
        let input: Vec<(usize, GazeRegion)> =
            (0..60).map(|i| (i, GazeRegion::ALL[i % 6])).collect();
        let mut out: Vec<usize> = subsample_balance(&input, |s| s.1, 9)
            .unwrap()
            .iter()
            .map(|s| s.0)
            .collect();
        out.sort_unstable();
        assert_eq!(out, (0..60).collect::<Vec<_>>());
    }

    #[test]
    fn missing_class_is_an_error() {
        let input = vec![(0, GazeRegion::Road), (1, GazeRegion::Left)];
        assert!(matches!(
            subsample_balance(&input, |s| s.1, 0),
            Err(Error::EmptyClass(GazeRegion::CenterStack))
        ));
        assert!(supersample_balance(&input, |s| s.1, 0).is_err());
    }

    #[test]
    fn seeded_determinism() {
        let a = subsample_balance(&skewed(), |s| s.1, 5).unwrap();
        let b = subsample_balance(&skewed(), |s| s.1, 5).unwrap();
        assert_eq!(a, b);
        let c = subsample_balance(&skewed(), |s| s.1, 6).unwrap();
        assert_ne!(a, c);
    }
}
