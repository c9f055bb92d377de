use serde::{Deserialize, Serialize};

use super::TrainingData;
use crate::error::{Error, Result};

/// Brute-force k-nearest-neighbor classifier under Euclidean distance.
///
/// Neighbors are ranked by `(distance, label)`, so among equidistant training
/// points the smaller label wins; the vote over the `k` nearest also breaks
/// ties toward the smaller label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub classes: Vec<usize>,
    pub dim: usize,
    pub k: usize,
    /// Training rows, row-major.
    pub points: Vec<f64>,
    /// Index into `classes` for each training row.
    pub point_classes: Vec<usize>,
}

impl KnnModel {
    pub(crate) fn fit(data: &TrainingData<'_>, k: usize) -> Result<Self> {
        if k == 0 || k > data.rows.len() {
            return Err(Error::Training(format!(
                "k = {k} must be in 1..={}",
                data.rows.len()
            )));
        }
        Ok(KnnModel {
            classes: data.classes.clone(),
            dim: data.dim,
            k,
            points: data.rows.iter().flat_map(|r| r.iter().copied()).collect(),
            point_classes: data.class_of_row.clone(),
        })
    }

    /// The `k` nearest `(squared distance, class index)` pairs, nearest first.
    fn nearest(&self, x: &[f64]) -> Vec<(f64, usize)> {
        let p = self.dim;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        let mut bound = f64::INFINITY;
        for (row, &class) in self.points.chunks_exact(p).zip(&self.point_classes) {
            // Partial sums only grow, so a row can be dropped as soon as it
            // is strictly farther than the current k-th neighbor.
            let mut d2 = 0.0;
            let mut pruned = false;
            for (chunk_r, chunk_x) in row.chunks(9).zip(x.chunks(9)) {
                for (a, b) in chunk_r.iter().zip(chunk_x) {
                    let t = a - b;
                    d2 += t * t;
                }
                if d2 > bound {
                    pruned = true;
                    break;
                }
            }
            if pruned {
                continue;
            }
            let cand = (d2, class);
            if best.len() == self.k && !lex_less(cand, best[self.k - 1]) {
                continue;
            }
            let pos = best.partition_point(|&b| lex_less(b, cand) || b == cand);
            best.insert(pos, cand);
            best.truncate(self.k);
            if best.len() == self.k {
                bound = best[self.k - 1].0;
            }
        }
        best
    }

    pub(crate) fn predict(&self, x: &[f64]) -> usize {
        let neighbors = self.nearest(x);
        let mut votes = vec![0usize; self.classes.len()];
        for &(_, c) in &neighbors {
            votes[c] += 1;
        }
        // max_by_key keeps the last maximum; scan in reverse for the first.
        let winner = (0..votes.len())
            .rev()
            .max_by_key(|&c| votes[c])
            .expect("at least one class");
        self.classes[winner]
    }
}

fn lex_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}
