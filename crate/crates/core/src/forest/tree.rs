//! CART classification trees grown with the Gini criterion.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::region::NUM_REGIONS;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    /// `x[feature] <= threshold` descends left.
    Split {
        feature: u32,
        threshold: T,
        left: u32,
        right: u32,
    },
    Leaf {
        fractions: [T; NUM_REGIONS],
    },
}

/// Nodes stored in preorder; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    /// Validates child links, feature indices and leaf distributions.
    pub fn from_nodes(nodes: Vec<Node<T>>, feature_dim: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ModelFormat("tree has no nodes".into()));
        }
        let n = nodes.len() as u32;
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature as usize >= feature_dim {
                        return Err(Error::ModelFormat(format!(
                            "node {i} splits on feature {feature} of {feature_dim}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::ModelFormat(format!(
                            "node {i} has a non-finite threshold"
                        )));
                    }
                    // preorder: children come strictly after their parent
                    if *left <= i as u32 || *right <= i as u32 || *left >= n || *right >= n {
                        return Err(Error::ModelFormat(format!("node {i} has invalid children")));
                    }
                }
                Node::Leaf { fractions } => {
                    let sum = fractions.iter().fold(T::zero(), |a, &b| a + b);
                    if fractions.iter().any(|f| !(*f >= T::zero()))
                        || (sum - T::one()).abs() > T::lit(1e-6)
                    {
                        return Err(Error::ModelFormat(format!(
                            "leaf {i} is not a distribution"
                        )));
                    }
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Class distribution of the leaf reached by `x`.
    #[inline]
    pub fn leaf(&self, x: &[T]) -> &[T; NUM_REGIONS] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { fractions } => return fractions,
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut max = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                depth[*left as usize] = depth[i] + 1;
                depth[*right as usize] = depth[i] + 1;
                max = max.max(depth[i] + 1);
            }
        }
        max
    }
}

/// Growth limits for one tree.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowthParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Number of non-constant candidate features examined per node.
    pub features_per_split: usize,
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    // maximize num / den, which is sum_k c_lk^2 / n_l + sum_k c_rk^2 / n_r
    num: u128,
    den: u128,
    feature: usize,
    threshold: T,
}

impl<T: Scalar> Candidate<T> {
    /// Lower weighted Gini, then lower feature index, then lower threshold.
    fn beats(&self, other: &Candidate<T>) -> bool {
        let lhs = self.num * other.den;
        let rhs = other.num * self.den;
        if lhs != rhs {
            return lhs > rhs;
        }
        (self.feature, self.threshold) < (other.feature, other.threshold)
    }
}

/// Best split of one feature, between the distinct values ranked `a < b`.
struct RankSplit {
    num: u128,
    den: u128,
    a: u32,
    b: u32,
}

/// Training matrix laid out for split search. For every feature: the
/// values, each row's rank among the distinct values, the distinct values'
/// order keys, and the rows in ascending value order.
pub(crate) struct Presorted<T> {
    n_rows: usize,
    /// Feature `f` of row `r` is `columns[f * n_rows + r]`.
    columns: Vec<T>,
    ranks: Vec<u32>,
    sorted_rows: Vec<u32>,
    /// Distinct order keys of feature `f` start at `distinct_start[f]`.
    distinct: Vec<u64>,
    distinct_start: Vec<usize>,
}

/// Labels occupy the low bits of packed sort keys.
const LABEL_BITS: u32 = 3;

/// Sorts keys below `2^key_bits`: two LSD radix passes when that pays off,
/// otherwise a comparison sort.
fn sort_keys(keys: &mut [u32], buf: &mut Vec<u32>, key_bits: u32) {
    let digit = key_bits.div_ceil(2);
    let bins = 1usize << digit;
    if key_bits > 24 || keys.len() < 2 * bins {
        keys.sort_unstable();
        return;
    }
    buf.clear();
    buf.resize(keys.len(), 0);
    let mask = bins as u32 - 1;
    let mut counts = vec![0usize; 2 * bins];
    for &k in keys.iter() {
        counts[(k & mask) as usize] += 1;
        counts[bins + (k >> digit) as usize] += 1;
    }
    for half in counts.chunks_mut(bins) {
        let mut total = 0;
        for c in half {
            let v = *c;
            *c = total;
            total += v;
        }
    }
    let (low, high) = counts.split_at_mut(bins);
    for &k in keys.iter() {
        let slot = &mut low[(k & mask) as usize];
        buf[*slot] = k;
        *slot += 1;
    }
    for &k in buf.iter() {
        let slot = &mut high[(k >> digit) as usize];
        keys[*slot] = k;
        *slot += 1;
    }
}

impl<T: Scalar> Presorted<T> {
    /// `data` is row-major with `dim` columns.
    pub fn new(data: &[T], dim: usize) -> Self {
        let n = if dim == 0 { 0 } else { data.len() / dim };
        assert!(n < 1 << (32 - LABEL_BITS), "training set too large");
        let mut columns = Vec::with_capacity(data.len());
        let mut ranks = vec![0u32; data.len()];
        let mut sorted_rows = Vec::with_capacity(data.len());
        let mut distinct = Vec::new();
        let mut distinct_start = Vec::with_capacity(dim);
        let mut pairs: Vec<(u64, u32)> = Vec::with_capacity(n);
        for f in 0..dim {
            columns.extend((0..n).map(|i| data[i * dim + f]));
            pairs.clear();
            pairs.extend((0..n).map(|i| (data[i * dim + f].order_key(), i as u32)));
            pairs.sort_unstable();
            distinct_start.push(distinct.len());
            let base = distinct.len();
            for &(key, row) in &pairs {
                if distinct.last() != Some(&key) || distinct.len() == base {
                    distinct.push(key);
                }
                ranks[f * n + row as usize] = (distinct.len() - base - 1) as u32;
                sorted_rows.push(row);
            }
        }
        Presorted {
            n_rows: n,
            columns,
            ranks,
            sorted_rows,
            distinct,
            distinct_start,
        }
    }

    fn column(&self, f: usize) -> &[T] {
        &self.columns[f * self.n_rows..(f + 1) * self.n_rows]
    }

    fn key(&self, f: usize, rank: u32) -> u64 {
        self.distinct[self.distinct_start[f] + rank as usize]
    }
}

/// How a node's candidate thresholds are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ScanPolicy {
    /// Sort small nodes, sweep the presorted order for large ones.
    Auto,
    #[cfg(test)]
    SortOnly,
    #[cfg(test)]
    SweepOnly,
}

pub(crate) struct TreeBuilder<'a, T> {
    data: &'a Presorted<T>,
    dim: usize,
    labels: &'a [u8],
    params: GrowthParams,
    policy: ScanPolicy,
    rng: ChaCha8Rng,
    feature_order: Vec<usize>,
    scratch: Vec<u32>,
    radix: Vec<u32>,
    /// Multiplicity of each row in the tree's (bootstrap) sample.
    weight: Vec<u32>,
    /// Rows of the node being split carry the current tag.
    tag: Vec<u32>,
    current_tag: u32,
    nodes: Vec<Node<T>>,
}

/// Running class counts on both sides of a sweep, with the sums of squares
/// the Gini score needs.
struct SweepState {
    left: [u64; NUM_REGIONS],
    right: [u64; NUM_REGIONS],
    sq_left: u64,
    sq_right: u64,
    n_left: usize,
}

impl SweepState {
    fn new(counts: [u64; NUM_REGIONS]) -> Self {
        SweepState {
            left: [0; NUM_REGIONS],
            right: counts,
            sq_left: 0,
            sq_right: counts.iter().map(|c| c * c).sum(),
            n_left: 0,
        }
    }

    /// Moves `w` samples of class `c` from right to left.
    #[inline]
    fn shift(&mut self, c: usize, w: u64) {
        self.sq_left += 2 * self.left[c] * w + w * w;
        self.left[c] += w;
        self.sq_right -= 2 * self.right[c] * w - w * w;
        self.right[c] -= w;
        self.n_left += w as usize;
    }
}

impl<'a, T: Scalar> TreeBuilder<'a, T> {
    pub fn new(
        data: &'a Presorted<T>,
        dim: usize,
        labels: &'a [u8],
        params: GrowthParams,
        policy: ScanPolicy,
        rng: ChaCha8Rng,
    ) -> Self {
        TreeBuilder {
            data,
            dim,
            labels,
            params,
            policy,
            rng,
            feature_order: (0..dim).collect(),
            scratch: Vec::new(),
            radix: Vec::new(),
            weight: vec![0; labels.len()],
            tag: vec![0; labels.len()],
            current_tag: 0,
            nodes: Vec::new(),
        }
    }

    /// Grows a tree on `samples` (row indices, repeats allowed).
    pub fn build(mut self, samples: &mut [u32]) -> Tree<T> {
        for &s in samples.iter() {
            self.weight[s as usize] += 1;
        }
        self.grow(samples, 0);
        Tree { nodes: self.nodes }
    }

    fn grow(&mut self, samples: &mut [u32], depth: usize) -> u32 {
        let mut counts = [0u64; NUM_REGIONS];
        for &s in samples.iter() {
            counts[self.labels[s as usize] as usize] += 1;
        }
        let n = samples.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let id = self.nodes.len() as u32;

        let split =
            if pure || depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf {
                None
            } else {
                self.best_split(samples, counts)
            };

        let Some(split) = split else {
            let total = T::from_count(n);
            let fractions = counts.map(|c| T::from_count(c as usize) / total);
            self.nodes.push(Node::Leaf { fractions });
            return id;
        };

        self.nodes.push(Node::Leaf {
            fractions: [T::zero(); NUM_REGIONS],
        });
        let col = self.data.column(split.feature);
        let mut mid = 0;
        for i in 0..n {
            if col[samples[i] as usize] <= split.threshold {
                samples.swap(i, mid);
                mid += 1;
            }
        }
        let (left_samples, right_samples) = samples.split_at_mut(mid);
        let left = self.grow(left_samples, depth + 1);
        let right = self.grow(right_samples, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn use_sweep(&self, m: usize) -> bool {
        match self.policy {
            // sorting costs about m log m, a sweep about n
            ScanPolicy::Auto => {
                m * (usize::BITS - m.leading_zeros()) as usize >= 2 * self.data.n_rows
            }
            #[cfg(test)]
            ScanPolicy::SortOnly => false,
            #[cfg(test)]
            ScanPolicy::SweepOnly => true,
        }
    }

    fn best_split(&mut self, samples: &[u32], counts: [u64; NUM_REGIONS]) -> Option<Candidate<T>> {
        let sweep = self.use_sweep(samples.len());
        if sweep {
            self.current_tag += 1;
            for &s in samples {
                self.tag[s as usize] = self.current_tag;
            }
        }
        let mut best: Option<Candidate<T>> = None;
        let consider = |this: &mut Self, f: usize, best: &mut Option<Candidate<T>>| {
            if sweep {
                this.consider_sweep(counts, f, best)
            } else {
                this.consider_sorted(samples, counts, f, best)
            }
        };
        if self.params.features_per_split >= self.dim {
            for f in 0..self.dim {
                consider(self, f, &mut best);
            }
            return best;
        }
        // Lazily drawn random permutation; constant features don't count
        // towards the quota.
        let mut examined = 0;
        for j in 0..self.dim {
            if examined == self.params.features_per_split {
                break;
            }
            let r = self.rng.random_range(j..self.dim);
            self.feature_order.swap(j, r);
            let f = self.feature_order[j];
            if consider(self, f, &mut best) {
                examined += 1;
            }
        }
        best
    }

    /// Scores the split between adjacent distinct values of ranks `a < b`,
    /// keeping the earliest (lowest threshold) among equal scores.
    #[inline]
    fn offer(&self, st: &SweepState, n: usize, a: u32, b: u32, best: &mut Option<RankSplit>) {
        let msl = self.params.min_samples_leaf;
        let i = st.n_left;
        if i < msl || n - i < msl {
            return;
        }
        let (nl, nr) = (i as u128, (n - i) as u128);
        let num = st.sq_left as u128 * nr + st.sq_right as u128 * nl;
        let den = nl * nr;
        if best.as_ref().is_none_or(|b| num * b.den > b.num * den) {
            *best = Some(RankSplit { num, den, a, b });
        }
    }

    /// Turns the best split of feature `f` into a candidate and keeps the
    /// better of it and `best`.
    fn settle(&self, f: usize, split: Option<RankSplit>, best: &mut Option<Candidate<T>>) {
        let Some(s) = split else { return };
        let (a, b) = (
            T::from_order_key(self.data.key(f, s.a)),
            T::from_order_key(self.data.key(f, s.b)),
        );
        let mut threshold = a + (b - a) / T::lit(2.0);
        if threshold >= b {
            threshold = a;
        }
        let cand = Candidate {
            num: s.num,
            den: s.den,
            feature: f,
            threshold,
        };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            *best = Some(cand);
        }
    }

    /// Sorts the node's values of feature `f` and scans every threshold;
    /// returns false when the feature is constant over the node.
    fn consider_sorted(
        &mut self,
        samples: &[u32],
        counts: [u64; NUM_REGIONS],
        f: usize,
        best: &mut Option<Candidate<T>>,
    ) -> bool {
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.clear();
        let ranks = &self.data.ranks[f * self.data.n_rows..(f + 1) * self.data.n_rows];
        scratch.extend(
            samples
                .iter()
                .map(|&s| ranks[s as usize] << LABEL_BITS | u32::from(self.labels[s as usize])),
        );
        let key_bits = usize::BITS - self.data.n_rows.leading_zeros() + LABEL_BITS;
        sort_keys(&mut scratch, &mut self.radix, key_bits);
        let n = scratch.len();
        let constant = scratch[0] >> LABEL_BITS == scratch[n - 1] >> LABEL_BITS;
        if !constant {
            let mut st = SweepState::new(counts);
            let mut split = None;
            let mask = (1 << LABEL_BITS) - 1;
            for i in 1..n {
                let (a, b) = (scratch[i - 1], scratch[i]);
                st.shift((a & mask) as usize, 1);
                if a >> LABEL_BITS != b >> LABEL_BITS {
                    self.offer(&st, n, a >> LABEL_BITS, b >> LABEL_BITS, &mut split);
                }
            }
            self.settle(f, split, best);
        }
        self.scratch = scratch;
        !constant
    }

    /// Same as [`Self::consider_sorted`], but walks the presorted order of
    /// all rows and keeps those tagged as belonging to the node.
    fn consider_sweep(
        &mut self,
        counts: [u64; NUM_REGIONS],
        f: usize,
        best: &mut Option<Candidate<T>>,
    ) -> bool {
        let n: u64 = counts.iter().sum();
        let range = f * self.data.n_rows..(f + 1) * self.data.n_rows;
        let rows = &self.data.sorted_rows[range.clone()];
        let ranks = &self.data.ranks[range];
        let mut st = SweepState::new(counts);
        let mut prev: Option<u32> = None;
        let mut distinct = false;
        let mut split = None;
        for &row in rows {
            let r = row as usize;
            if self.tag[r] != self.current_tag {
                continue;
            }
            let rank = ranks[r];
            if let Some(p) = prev {
                if p != rank {
                    distinct = true;
                    self.offer(&st, n as usize, p, rank, &mut split);
                }
            }
            st.shift(self.labels[r] as usize, u64::from(self.weight[r]));
            prev = Some(rank);
        }
        self.settle(f, split, best);
        distinct
    }
}
