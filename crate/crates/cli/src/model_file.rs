//! Portable forest encoding.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic      b"GZKF"
//! version    u16
//! n_trees u32, max_depth u32, features_per_split u32 (0 = sqrt rule),
//! min_samples_leaf u32, bootstrap u8, rng_seed u64
//! n_classes u8, class order: n_classes x u8 region index
//! feature_dim u32
//! digest: n_classes x u64 class counts, n_samples u64
//! per tree: node_count u32, then nodes in preorder:
//!   0u8 leaf,  n_classes x f64 class fractions
//!   1u8 split, feature u32, threshold f64   (left subtree follows directly)
//! ```
//!
//! Reals are always stored as f64.

use std::fs;
use std::path::Path;

use gazekit::forest::{ForestModel, Node, TrainingDigest, Tree};
use gazekit::{ForestConfig, GazeRegion, Scalar, NUM_REGIONS};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"GZKF";
pub const VERSION: u16 = 1;

const LEAF: u8 = 0;
const SPLIT: u8 = 1;

fn put_u32(out: &mut Vec<u8>, v: usize) -> CliResult<()> {
    let v = u32::try_from(v)
        .map_err(|_| CliError::internal(format!("{v} does not fit the model format")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

pub fn encode<T: Scalar>(model: &ForestModel<T>) -> CliResult<Vec<u8>> {
    let cfg = model.config();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    put_u32(&mut out, cfg.n_trees)?;
    put_u32(&mut out, cfg.max_depth)?;
    put_u32(&mut out, cfg.features_per_split.unwrap_or(0))?;
    put_u32(&mut out, cfg.min_samples_leaf)?;
    out.push(u8::from(cfg.bootstrap));
    out.extend_from_slice(&cfg.rng_seed.to_le_bytes());
    out.push(NUM_REGIONS as u8);
    out.extend(model.class_order().iter().map(|r| r.index() as u8));
    put_u32(&mut out, model.feature_dim())?;
    let digest = model.digest();
    for c in digest.class_counts {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&digest.n_samples.to_le_bytes());
    for tree in model.trees() {
        put_u32(&mut out, tree.node_count())?;
        write_subtree(tree.nodes(), 0, &mut out)?;
    }
    Ok(out)
}

fn write_subtree<T: Scalar>(nodes: &[Node<T>], at: usize, out: &mut Vec<u8>) -> CliResult<()> {
    match &nodes[at] {
        Node::Leaf { fractions } => {
            out.push(LEAF);
            for f in fractions {
                out.extend_from_slice(&f.as_f64().to_le_bytes());
            }
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            out.push(SPLIT);
            out.extend_from_slice(&feature.to_le_bytes());
            out.extend_from_slice(&threshold.as_f64().to_le_bytes());
            write_subtree(nodes, *left as usize, out)?;
            write_subtree(nodes, *right as usize, out)?;
        }
    }
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::from(gazekit::Error::ModelFormat(msg.into()))
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> CliResult<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| malformed(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> CliResult<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn u32(&mut self) -> CliResult<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn subtree<T: Scalar>(
        &mut self,
        nodes: &mut Vec<Node<T>>,
        budget: usize,
        depth: usize,
    ) -> CliResult<u32> {
        if nodes.len() >= budget {
            return Err(malformed("tree has more nodes than declared"));
        }
        // a preorder stream of `budget` nodes cannot nest deeper than that
        if depth > budget {
            return Err(malformed("tree nesting exceeds node count"));
        }
        let id = nodes.len() as u32;
        match self.u8()? {
            LEAF => {
                let mut fractions = [T::zero(); NUM_REGIONS];
                for f in &mut fractions {
                    *f = T::lit(self.f64()?);
                }
                nodes.push(Node::Leaf { fractions });
            }
            SPLIT => {
                let feature = self.u32()? as u32;
                let threshold = T::lit(self.f64()?);
                nodes.push(Node::Leaf {
                    fractions: [T::zero(); NUM_REGIONS],
                });
                let left = self.subtree(nodes, budget, depth + 1)?;
                let right = self.subtree(nodes, budget, depth + 1)?;
                nodes[id as usize] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
            tag => return Err(malformed(format!("unknown node tag {tag}"))),
        }
        Ok(id)
    }
}

pub fn decode<T: Scalar>(bytes: &[u8]) -> CliResult<ForestModel<T>> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(malformed("bad magic bytes"));
    }
    let version = u16::from_le_bytes(r.take()?);
    if version != VERSION {
        return Err(malformed(format!("unsupported format version {version}")));
    }
    let n_trees = r.u32()?;
    let max_depth = r.u32()?;
    let fps = r.u32()?;
    let min_samples_leaf = r.u32()?;
    let bootstrap = match r.u8()? {
        0 => false,
        1 => true,
        b => return Err(malformed(format!("bad bootstrap flag {b}"))),
    };
    let rng_seed = r.u64()?;
    let config = ForestConfig {
        n_trees,
        max_depth,
        features_per_split: (fps > 0).then_some(fps),
        min_samples_leaf,
        bootstrap,
        rng_seed,
    };
    let n_classes = r.u8()? as usize;
    if n_classes != NUM_REGIONS {
        return Err(malformed(format!(
            "expected {NUM_REGIONS} classes, found {n_classes}"
        )));
    }
    for region in GazeRegion::ALL {
        if r.u8()? as usize != region.index() {
            return Err(malformed("unsupported class order"));
        }
    }
    let feature_dim = r.u32()?;
    let mut class_counts = [0u64; NUM_REGIONS];
    for c in &mut class_counts {
        *c = r.u64()?;
    }
    let digest = TrainingDigest {
        class_counts,
        n_samples: r.u64()?,
        seed: rng_seed,
    };
    let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
    for _ in 0..n_trees {
        let count = r.u32()?;
        let mut nodes = Vec::with_capacity(count.min(1 << 20));
        r.subtree(&mut nodes, count, 0)?;
        if nodes.len() != count {
            return Err(malformed(format!(
                "tree declares {count} nodes, stream has {}",
                nodes.len()
            )));
        }
        trees.push(Tree::from_nodes(nodes, feature_dim)?);
    }
    if r.pos != bytes.len() {
        return Err(malformed(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(ForestModel::from_parts(config, trees, feature_dim, digest)?)
}

pub fn write_model<T: Scalar>(path: &Path, model: &ForestModel<T>) -> CliResult<()> {
    fs::write(path, encode(model)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn read_model<T: Scalar>(path: &Path) -> CliResult<ForestModel<T>> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}
