use crate::region::{GazeRegion, NUM_REGIONS};

/// Rows are ground truth, columns are predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    counts: [[u64; NUM_REGIONS]; NUM_REGIONS],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: GazeRegion, predicted: GazeRegion) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn counts(&self) -> &[[u64; NUM_REGIONS]; NUM_REGIONS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_REGIONS).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }

    pub fn row_total(&self, truth: GazeRegion) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    /// Recall of one region.
    pub fn region_accuracy(&self, truth: GazeRegion) -> Option<f64> {
        let row = self.row_total(truth);
        (row > 0).then(|| self.counts[truth.index()][truth.index()] as f64 / row as f64)
    }

    /// Each row scaled to percentages; empty rows stay zero.
    pub fn row_percentages(&self) -> [[f64; NUM_REGIONS]; NUM_REGIONS] {
        let mut out = [[0.0; NUM_REGIONS]; NUM_REGIONS];
        for (i, row) in self.counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > 0 {
                for (j, &c) in row.iter().enumerate() {
                    out[i][j] = 100.0 * c as f64 / total as f64;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates() {
        let mut m = ConfusionMatrix::default();
        assert_eq!(m.accuracy(), None);
        m.add(GazeRegion::Road, GazeRegion::Road);
        m.add(GazeRegion::Left, GazeRegion::Road);
        m.add(GazeRegion::Left, GazeRegion::Left);
        m.add(GazeRegion::Left, GazeRegion::Left);
        assert_eq!(m.total(), 4);
        assert_eq!(m.accuracy(), Some(0.75));
        assert_eq!(m.region_accuracy(GazeRegion::Left), Some(2.0 / 3.0));
        assert_eq!(m.region_accuracy(GazeRegion::Right), None);
        let pct = m.row_percentages();
        let row: f64 = pct[GazeRegion::Left.index()].iter().sum();
        assert!((row - 100.0).abs() < 1e-9);
        let mut twice = m;
        twice.merge(&m);
        assert_eq!(twice.total(), 8);
    }
}
