//! Random forest classifier over the six gaze regions.
//!
//! Each tree is grown on a bootstrap resample with its own random stream
//! derived from `(rng_seed, tree_index)`, so a model is fully determined by
//! its training samples and configuration regardless of thread count.
//! Predicted probabilities are the mean of the reached leaves' class
//! fractions.

mod balance;
mod tree;

pub use balance::{class_counts, subsample_balance, supersample_balance};
pub use tree::{Node, Tree};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::region::{GazeRegion, NUM_REGIONS};
use crate::scalar::Scalar;
use crate::seed;
use tree::{GrowthParams, Presorted, ScanPolicy, TreeBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// `None` means `floor(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub min_samples_leaf: usize,
    /// Grow each tree on an n-draw bootstrap resample; otherwise on the
    /// training set itself.
    pub bootstrap: bool,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 2000,
            max_depth: 25,
            features_per_split: None,
            min_samples_leaf: 1,
            bootstrap: true,
            rng_seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::config("trees", "must be >= 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::config("depth", "must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::config("min_samples_leaf", "must be >= 1"));
        }
        if self.features_per_split == Some(0) {
            return Err(Error::config("features_per_split", "must be >= 1"));
        }
        Ok(())
    }

    pub fn features_for(&self, dim: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (dim as f64).sqrt().floor() as usize)
            .clamp(1, dim.max(1))
    }
}

/// Provenance of a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingDigest {
    pub class_counts: [u64; NUM_REGIONS],
    pub n_samples: u64,
    pub seed: u64,
}

/// Dense row-major training matrix with labels.
#[derive(Debug, Clone)]
pub struct TrainingSet<T> {
    dim: usize,
    data: Vec<T>,
    labels: Vec<GazeRegion>,
}

impl<T: Scalar> TrainingSet<T> {
    pub fn new(dim: usize, data: Vec<T>, labels: Vec<GazeRegion>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if dim == 0 || data.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::DataFormat("training features must be finite".into()));
        }
        Ok(TrainingSet { dim, data, labels })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R], labels: &[GazeRegion]) -> Result<Self> {
        let dim = rows.first().ok_or(Error::EmptyTrainingSet)?.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data, labels.to_vec())
    }

    pub fn from_samples(samples: &[(FeatureVector<T>, GazeRegion)]) -> Result<Self> {
        let rows: Vec<Vec<T>> = samples.iter().map(|(v, _)| v.to_vec()).collect();
        let labels: Vec<GazeRegion> = samples.iter().map(|(_, r)| *r).collect();
        Self::from_rows(&rows, &labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[GazeRegion] {
        &self.labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T> {
    config: ForestConfig,
    trees: Vec<Tree<T>>,
    feature_dim: usize,
    digest: TrainingDigest,
}

impl<T: Scalar> ForestModel<T> {
    /// Assembles a model from already-built trees.
    pub fn from_parts(
        config: ForestConfig,
        trees: Vec<Tree<T>>,
        feature_dim: usize,
        digest: TrainingDigest,
    ) -> Result<Self> {
        if trees.is_empty() || trees.len() != config.n_trees {
            return Err(Error::ModelFormat(format!(
                "expected {} trees, found {}",
                config.n_trees,
                trees.len()
            )));
        }
        for tree in &trees {
            // re-run structural validation against this feature_dim
            Tree::from_nodes(tree.nodes().to_vec(), feature_dim)?;
        }
        Ok(ForestModel {
            config,
            trees,
            feature_dim,
            digest,
        })
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[Tree<T>] {
        &self.trees
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn class_order(&self) -> [GazeRegion; NUM_REGIONS] {
        GazeRegion::ALL
    }

    pub fn digest(&self) -> &TrainingDigest {
        &self.digest
    }

    /// Mean leaf distribution over all trees.
    pub fn predict_proba(&self, x: &[T]) -> Result<[T; NUM_REGIONS]> {
        if x.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                found: x.len(),
            });
        }
        let mut sum = [T::zero(); NUM_REGIONS];
        for tree in &self.trees {
            for (s, &p) in sum.iter_mut().zip(tree.leaf(x)) {
                *s = *s + p;
            }
        }
        let n = T::from_count(self.trees.len());
        Ok(sum.map(|s| s / n))
    }

    pub fn predict_vector(&self, x: &FeatureVector<T>) -> Result<[T; NUM_REGIONS]> {
        self.predict_proba(&x.to_vec())
    }
}

/// Trains a forest on `set`.
pub fn train<T: Scalar>(set: &TrainingSet<T>, cfg: &ForestConfig) -> Result<ForestModel<T>> {
    cfg.validate()?;
    let labels: Vec<u8> = set.labels.iter().map(|r| r.index() as u8).collect();
    let mut class_counts = [0u64; NUM_REGIONS];
    for &l in &labels {
        class_counts[l as usize] += 1;
    }
    let present = class_counts.iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::TooFewClasses(present));
    }

    let params = GrowthParams {
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        features_per_split: cfg.features_for(set.dim),
    };
    let n = set.len();
    let presorted = Presorted::new(&set.data, set.dim);
    let trees: Vec<Tree<T>> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(cfg.rng_seed, i as u64));
            let mut samples: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            TreeBuilder::new(&presorted, set.dim, &labels, params, ScanPolicy::Auto, rng)
                .build(&mut samples)
        })
        .collect();

    Ok(ForestModel {
        config: *cfg,
        trees,
        feature_dim: set.dim,
        digest: TrainingDigest {
            class_counts,
            n_samples: n as u64,
            seed: cfg.rng_seed,
        },
    })
}

/// Convenience wrapper over [`train`] for labelled feature vectors.
pub fn train_samples<T: Scalar>(
    samples: &[(FeatureVector<T>, GazeRegion)],
    cfg: &ForestConfig,
) -> Result<ForestModel<T>> {
    train(&TrainingSet::from_samples(samples)?, cfg)
}
