//! Depth-bounded, axis-aligned regression trees grown greedily.
//!
//! Continuous features split at midpoints between consecutive distinct
//! values; a `{0,1}` column therefore has the single threshold 0.5, which is
//! the same partition as testing equality to 1. Ties between equally good
//! splits go to the lowest feature index, then the smallest threshold.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeLoss {
    /// Summed squared error, mean leaves.
    Mse,
    /// Summed absolute error (total variation), coordinate-wise median leaves.
    Tv,
}

impl TreeLoss {
    /// Leaf prediction and its cost over `rows`.
    pub fn leaf(self, targets: &DMatrix<f64>, rows: &[usize]) -> (Vec<f64>, f64) {
        let q = targets.ncols();
        let n = rows.len() as f64;
        let mut value = vec![0.0; q];
        let mut cost = 0.0;
        match self {
            TreeLoss::Mse => {
                for (c, v) in value.iter_mut().enumerate() {
                    let mean = rows.iter().map(|&r| targets[(r, c)]).sum::<f64>() / n;
                    *v = mean;
                    cost += rows.iter().map(|&r| (targets[(r, c)] - mean).powi(2)).sum::<f64>();
                }
            }
            TreeLoss::Tv => {
                let mut col: Vec<f64> = Vec::with_capacity(rows.len());
                for (c, v) in value.iter_mut().enumerate() {
                    col.clear();
                    col.extend(rows.iter().map(|&r| targets[(r, c)]));
                    let med = median(&mut col);
                    *v = med;
                    cost += col.iter().map(|x| (x - med).abs()).sum::<f64>();
                }
            }
        }
        (value, cost)
    }
}

/// Median of `values` (mean of the two middle elements for even lengths).
/// Reorders the slice.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "node")]
pub enum TreeNode {
    Leaf { value: Vec<f64> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub loss: TreeLoss,
}

/// Candidate split of one node.
#[derive(Debug, Clone)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub cost: f64,
}

/// Every axis-aligned split of `rows`, in tie-break order, with the summed
/// leaf cost of its two children.
pub fn candidate_splits(
    features: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    rows: &[usize],
    loss: TreeLoss,
) -> Vec<SplitCandidate> {
    let mut out = Vec::new();
    let mut sorted = rows.to_vec();
    for feature in 0..features.ncols() {
        sorted.sort_by(|&a, &b| features[(a, feature)].total_cmp(&features[(b, feature)]));
        let prefix = (loss == TreeLoss::Mse).then(|| PrefixSums::new(targets, &sorted));
        for k in 1..sorted.len() {
            let lo = features[(sorted[k - 1], feature)];
            let hi = features[(sorted[k], feature)];
            if lo == hi {
                continue;
            }
            let cost = match &prefix {
                Some(p) => p.split_cost(k),
                None => loss.leaf(targets, &sorted[..k]).1 + loss.leaf(targets, &sorted[k..]).1,
            };
            out.push(SplitCandidate { feature, threshold: 0.5 * (lo + hi), cost });
        }
    }
    out
}

/// Running sums for O(Q) squared-error split costs along one sort order.
struct PrefixSums {
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
    n: usize,
}

impl PrefixSums {
    fn new(targets: &DMatrix<f64>, order: &[usize]) -> Self {
        let q = targets.ncols();
        let mut sum = vec![vec![0.0; q]; order.len() + 1];
        let mut sum_sq = vec![vec![0.0; q]; order.len() + 1];
        for (k, &r) in order.iter().enumerate() {
            for c in 0..q {
                let v = targets[(r, c)];
                sum[k + 1][c] = sum[k][c] + v;
                sum_sq[k + 1][c] = sum_sq[k][c] + v * v;
            }
        }
        Self { sum, sum_sq, n: order.len() }
    }

    fn split_cost(&self, k: usize) -> f64 {
        let (nl, nr) = (k as f64, (self.n - k) as f64);
        let total = &self.sum[self.n];
        let total_sq = &self.sum_sq[self.n];
        let mut cost = 0.0;
        for c in 0..total.len() {
            let (sl, ql) = (self.sum[k][c], self.sum_sq[k][c]);
            let (sr, qr) = (total[c] - sl, total_sq[c] - ql);
            cost += (ql - sl * sl / nl).max(0.0) + (qr - sr * sr / nr).max(0.0);
        }
        cost
    }
}

impl Tree {
    pub fn fit(features: &DMatrix<f64>, targets: &DMatrix<f64>, max_depth: usize, loss: TreeLoss) -> Result<Self> {
        if features.nrows() != targets.nrows() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} target rows",
                features.nrows(),
                targets.nrows()
            )));
        }
        if targets.nrows() == 0 {
            return Err(Error::InvalidInput("tree fit needs m >= 1".into()));
        }
        if max_depth == 0 {
            return Err(Error::InvalidInput("tree max_depth must be >= 1".into()));
        }
        let mut tree = Tree { nodes: Vec::new(), loss };
        let rows: Vec<usize> = (0..targets.nrows()).collect();
        tree.grow(features, targets, rows, max_depth);
        Ok(tree)
    }

    fn grow(&mut self, features: &DMatrix<f64>, targets: &DMatrix<f64>, rows: Vec<usize>, depth_left: usize) -> usize {
        let (value, cost) = self.loss.leaf(targets, &rows);
        let idx = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value });
        if depth_left == 0 || rows.len() < 2 {
            return idx;
        }
        let tol = 1e-12 * (1.0 + cost);
        let mut best: Option<SplitCandidate> = None;
        for cand in candidate_splits(features, targets, &rows, self.loss) {
            let bar = best.as_ref().map_or(cost, |b| b.cost);
            if cand.cost < bar - tol {
                best = Some(cand);
            }
        }
        let Some(best) = best else { return idx };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| features[(r, best.feature)] <= best.threshold);
        let left = self.grow(features, targets, left_rows, depth_left - 1);
        let right = self.grow(features, targets, right_rows, depth_left - 1);
        self.nodes[idx] = TreeNode::Split { feature: best.feature, threshold: best.threshold, left, right };
        idx
    }

    pub fn predict_row(&self, row: &[f64]) -> &[f64] {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split { feature, threshold, left, right } => {
                    idx = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        let q = self.output_width();
        let mut out = DMatrix::zeros(features.nrows(), q);
        let mut row = vec![0.0; features.ncols()];
        for r in 0..features.nrows() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = features[(r, c)];
            }
            for (c, v) in self.predict_row(&row).iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        out
    }

    pub fn output_width(&self) -> usize {
        self.nodes
            .iter()
            .find_map(|n| match n {
                TreeNode::Leaf { value } => Some(value.len()),
                TreeNode::Split { .. } => None,
            })
            .unwrap_or(0)
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], idx: usize) -> usize {
            match &nodes[idx] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf { value } => Some(value.as_slice()),
            TreeNode::Split { .. } => None,
        })
    }

    /// Leaf values clamped from below on the columns `from..`.
    pub(crate) fn clamp_leaves(&mut self, from: usize, floor: f64) {
        for node in &mut self.nodes {
            if let TreeNode::Leaf { value } = node {
                for v in value.iter_mut().skip(from) {
                    *v = v.max(floor);
                }
            }
        }
    }

    /// Node-order flattening: `[feature, threshold]` per split, leaf values per leaf.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for n in &self.nodes {
            match n {
                TreeNode::Leaf { value } => out.extend(value),
                TreeNode::Split { feature, threshold, .. } => {
                    out.push(*feature as f64);
                    out.push(*threshold);
                }
            }
        }
        out
    }
}

/// `max{⌈log₂ m⌉ − 1 + offset, 1}`: the per-neighborhood depth bound.
pub fn depth_rule(m: usize, offset: i64) -> usize {
    let ceil_log2 = if m <= 1 { 0 } else { (usize::BITS - (m - 1).leading_zeros()) as i64 };
    (ceil_log2 - 1 + offset).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn constant_targets_give_single_leaf() {
        let t = Tree::fit(&col(&[1.0, 2.0, 3.0]), &col(&[4.0, 4.0, 4.0]), 3, TreeLoss::Mse).unwrap();
        assert_eq!(t.nodes.len(), 1);
        let t = Tree::fit(&col(&[1.0, 2.0, 3.0]), &col(&[4.0, 4.0, 4.0]), 3, TreeLoss::Tv).unwrap();
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn stump_finds_the_obvious_split() {
        let t = Tree::fit(&col(&[1.0, 2.0, 3.0, 4.0]), &col(&[0.0, 0.0, 1.0, 1.0]), 1, TreeLoss::Mse).unwrap();
        match &t.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.predict(&col(&[1.0, 2.0, 3.0, 4.0])), col(&[0.0, 0.0, 1.0, 1.0]));
    }

    #[test]
    fn tie_break_prefers_smallest_threshold() {
        // (0,1,0): splits at 1.5 and 2.5 both leave SSE 0.5.
        let t = Tree::fit(&col(&[1.0, 2.0, 3.0]), &col(&[0.0, 1.0, 0.0]), 1, TreeLoss::Mse).unwrap();
        match &t.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn tie_break_prefers_lowest_feature() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let t = Tree::fit(&x, &col(&[0.0, 1.0]), 1, TreeLoss::Mse).unwrap();
        match &t.nodes[0] {
            TreeNode::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn median_leaf_minimizes_l1() {
        let (value, cost) = TreeLoss::Tv.leaf(&col(&[0.0, 0.0, 10.0]), &[0, 1, 2]);
        assert_eq!(value, vec![0.0]);
        assert_eq!(cost, 10.0);
        // The mean (10/3) would cost 10/3 + 10/3 + 20/3 = 40/3.
        let mean_cost: f64 = [0.0, 0.0, 10.0].iter().map(|v: &f64| (v - 10.0 / 3.0).abs()).sum();
        assert!(mean_cost > cost);
    }

    #[test]
    fn depth_rule_values() {
        assert_eq!(depth_rule(59, 0), 5);
        assert_eq!(depth_rule(300, 0), 8);
        assert_eq!(depth_rule(2, 0), 1);
        assert_eq!(depth_rule(1, 0), 1);
        assert_eq!(depth_rule(64, 0), 5);
        assert_eq!(depth_rule(65, 0), 6);
        assert_eq!(depth_rule(59, -3), 2);
        assert_eq!(depth_rule(4, -3), 1);
    }

    #[test]
    fn depth_bound_respected() {
        let x = col(&(0..32).map(|v| v as f64).collect::<Vec<_>>());
        let y = col(&(0..32).map(|v| ((v * 7) % 11) as f64).collect::<Vec<_>>());
        for k in 1..5 {
            let t = Tree::fit(&x, &y, k, TreeLoss::Mse).unwrap();
            assert!(t.depth() <= k);
            assert!(t.leaves().count() <= 1 << k);
        }
    }
}
