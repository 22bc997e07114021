//! Neighborhood systems `B(x_i)` and the assumption checks the equilibrium
//! results rely on.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum NeighborhoodKind {
    Window { radius: usize },
    Ball { radius: f64 },
    Explicit,
}

/// One index list per anchor. Every list is non-empty, duplicate-free and
/// only holds valid anchor indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSystem {
    neighborhoods: Vec<Vec<usize>>,
    kind: NeighborhoodKind,
}

impl NeighborhoodSystem {
    /// Temporal windows `{i-ε, …, i+ε}` clipped at both ends of `0..n`.
    pub fn window(n: usize, radius: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("window system needs N >= 1".into()));
        }
        let neighborhoods = (0..n)
            .map(|i| (i.saturating_sub(radius)..=(i + radius).min(n - 1)).collect())
            .collect();
        Ok(Self { neighborhoods, kind: NeighborhoodKind::Window { radius } })
    }

    /// Euclidean balls: `j ∈ B(i)` iff `‖x_i − x_j‖₂ ≤ radius`. Always contains `i`.
    pub fn ball(inputs: &DMatrix<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
        }
        if inputs.nrows() == 0 {
            return Err(Error::InvalidInput("ball system needs N >= 1".into()));
        }
        let n = inputs.nrows();
        let r2 = radius * radius;
        let neighborhoods = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        j == i || {
                            let d2: f64 = inputs
                                .row(i)
                                .iter()
                                .zip(inputs.row(j).iter())
                                .map(|(a, b)| (a - b) * (a - b))
                                .sum();
                            d2 <= r2
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { neighborhoods, kind: NeighborhoodKind::Ball { radius } })
    }

    /// Arbitrary index lists, validated.
    pub fn explicit(neighborhoods: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighborhoods.len();
        if n == 0 {
            return Err(Error::InvalidInput("neighborhood system needs N >= 1".into()));
        }
        for (i, list) in neighborhoods.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::InvalidInput(format!("neighborhood of anchor {i} is empty")));
            }
            let mut seen = vec![false; n];
            for &j in list {
                if j >= n {
                    return Err(Error::InvalidInput(format!("anchor {i} lists index {j} >= N={n}")));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidInput(format!("anchor {i} lists index {j} twice")));
                }
            }
        }
        Ok(Self { neighborhoods, kind: NeighborhoodKind::Explicit })
    }

    /// Wrap-around windows of size `2ε+1` (requires `2ε+1 ≤ n`). Every anchor
    /// gets the same size, so A3–A5 all hold.
    pub fn circular(n: usize, radius: usize) -> Result<Self> {
        if 2 * radius + 1 > n {
            return Err(Error::InvalidInput(format!("circular window 2*{radius}+1 exceeds N={n}")));
        }
        let lists = (0..n)
            .map(|i| (0..=2 * radius).map(|k| (i + n + k - radius) % n).collect())
            .collect();
        Self::explicit(lists)
    }

    /// Clipped windows applied independently inside consecutive segments of
    /// the given lengths (one segment per sequence).
    pub fn segmented_windows(segment_lengths: &[usize], radius: usize) -> Result<Self> {
        let mut lists = Vec::new();
        let mut offset = 0;
        for &len in segment_lengths {
            if len == 0 {
                continue;
            }
            let local = Self::window(len, radius)?;
            lists.extend(local.neighborhoods.into_iter().map(|l| l.into_iter().map(|j| j + offset).collect()));
            offset += len;
        }
        Self::explicit(lists)
    }

    /// Every anchor sees the full index set.
    pub fn full(n: usize) -> Result<Self> {
        Self::explicit(vec![(0..n).collect(); n])
    }

    pub fn len(&self) -> usize {
        self.neighborhoods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighborhoods.is_empty()
    }

    pub fn kind(&self) -> NeighborhoodKind {
        self.kind
    }

    pub fn get(&self, anchor: usize) -> &[usize] {
        &self.neighborhoods[anchor]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.neighborhoods.iter().map(Vec::as_slice)
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.neighborhoods.iter().map(Vec::len).collect()
    }

    /// Position of `member` inside `B(anchor)`, if present.
    pub fn position(&self, anchor: usize, member: usize) -> Option<usize> {
        self.neighborhoods[anchor].iter().position(|&j| j == member)
    }

    /// For every point `j`, the anchors `i` with `j ∈ B(i)` together with the
    /// position of `j` inside `B(i)`.
    pub fn memberships(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.len()];
        for (i, list) in self.neighborhoods.iter().enumerate() {
            for (pos, &j) in list.iter().enumerate() {
                out[j].push((i, pos));
            }
        }
        out
    }
}

/// Flags for the assumptions (A1)–(A5). A1 (unconstrained predictor) and A2
/// (squared loss and deviation) depend on the training setup and are echoed
/// from the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub a1: bool,
    pub a2: bool,
    /// All neighborhoods share one size.
    pub a3: bool,
    /// Membership is symmetric.
    pub a4: bool,
    /// The neighborhoods cover every anchor.
    pub a5: bool,
    pub common_size: Option<usize>,
}

pub fn verify_assumptions(ns: &NeighborhoodSystem, a1: bool, a2: bool) -> AssumptionReport {
    let n = ns.len();
    let sizes = ns.sizes();
    let common_size = sizes.first().copied().filter(|&m| sizes.iter().all(|&s| s == m));

    let mut member = vec![vec![false; n]; n];
    for (i, list) in ns.iter().enumerate() {
        for &j in list {
            member[i][j] = true;
        }
    }
    let a4 = (0..n).all(|i| (0..n).all(|j| !member[i][j] || member[j][i]));
    let mut covered = vec![false; n];
    for list in ns.iter() {
        for &j in list {
            covered[j] = true;
        }
    }
    let a5 = covered.iter().all(|&c| c);

    AssumptionReport { a1, a2, a3: common_size.is_some(), a4, a5, common_size }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn window_zero_radius_is_singletons() {
        let ns = NeighborhoodSystem::window(5, 0).unwrap();
        for i in 0..5 {
            assert_eq!(ns.get(i), &[i]);
        }
    }

    #[test]
    fn window_clips_at_boundaries() {
        let ns = NeighborhoodSystem::window(5, 1).unwrap();
        assert_eq!(ns.get(0), &[0, 1]);
        assert_eq!(ns.get(2), &[1, 2, 3]);
        assert_eq!(ns.get(4), &[3, 4]);
    }

    #[test]
    fn window_sizes_for_radius_nine() {
        let ns = NeighborhoodSystem::window(100, 9).unwrap();
        let sizes = ns.sizes();
        // Enumerated: anchor i has min(i,9) + 1 + min(99-i,9) members.
        for (i, &s) in sizes.iter().enumerate() {
            assert_eq!(s, i.min(9) + 1 + (99 - i).min(9));
        }
        assert_eq!(sizes.iter().filter(|&&s| s < 19).count(), 18);
        assert!(sizes[..9].iter().all(|&s| s < 19));
        assert!(sizes[9..91].iter().all(|&s| s == 19));
    }

    #[test]
    fn ball_examples() {
        let x = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        let tiny = NeighborhoodSystem::ball(&x, 0.5).unwrap();
        assert!(tiny.iter().enumerate().all(|(i, l)| l == [i]));
        let huge = NeighborhoodSystem::ball(&x, 10.0).unwrap();
        assert!(huge.iter().all(|l| l == [0, 1, 2]));
        let unit = NeighborhoodSystem::ball(&x, 1.0).unwrap();
        assert_eq!(unit.get(0), &[0, 1]);
        assert_eq!(unit.get(1), &[0, 1, 2]);
        assert_eq!(unit.get(2), &[1, 2]);
        assert!(NeighborhoodSystem::ball(&x, 0.0).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(NeighborhoodSystem::explicit(vec![vec![0], vec![]]).is_err());
        assert!(NeighborhoodSystem::explicit(vec![vec![0, 2], vec![1]]).is_err());
        assert!(NeighborhoodSystem::explicit(vec![vec![0, 0], vec![1]]).is_err());
    }

    #[test]
    fn assumptions_full_set() {
        let ns = NeighborhoodSystem::full(4).unwrap();
        let r = verify_assumptions(&ns, true, true);
        assert!(r.a3 && r.a4 && r.a5);
        assert_eq!(r.common_size, Some(4));
    }

    #[test]
    fn assumptions_clipped_window() {
        let ns = NeighborhoodSystem::window(10, 2).unwrap();
        let r = verify_assumptions(&ns, false, false);
        assert!(!r.a3 && r.a4 && r.a5);
    }

    #[test]
    fn assumptions_asymmetric_explicit() {
        let ns = NeighborhoodSystem::explicit(vec![vec![0, 1], vec![1]]).unwrap();
        let r = verify_assumptions(&ns, false, false);
        assert!(!r.a4);
        assert!(r.a5);
    }

    #[test]
    fn circular_satisfies_a3_to_a5() {
        let ns = NeighborhoodSystem::circular(7, 2).unwrap();
        let r = verify_assumptions(&ns, true, true);
        assert!(r.a3 && r.a4 && r.a5);
        assert_eq!(r.common_size, Some(5));
    }

    proptest! {
        #[test]
        fn window_always_symmetric_and_covering(n in 1usize..40, eps in 0usize..12) {
            let ns = NeighborhoodSystem::window(n, eps).unwrap();
            let r = verify_assumptions(&ns, false, false);
            prop_assert!(r.a4 && r.a5);
            prop_assert_eq!(r.a3, eps == 0 || n <= eps + 1);
        }

        #[test]
        fn ball_always_symmetric_and_covering(
            pts in proptest::collection::vec(-5.0f64..5.0, 2..30),
            radius in 0.01f64..4.0,
        ) {
            let x = DMatrix::from_column_slice(pts.len(), 1, &pts);
            let ns = NeighborhoodSystem::ball(&x, radius).unwrap();
            let r = verify_assumptions(&ns, false, false);
            prop_assert!(r.a4 && r.a5);
        }
    }
}
