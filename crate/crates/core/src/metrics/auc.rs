//! Pairwise order agreement between a reference and a prediction.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::select_rows;
use crate::neighborhood::NeighborhoodSystem;
use crate::witness::WitnessFit;

fn check(refs: &[f64], preds: &[f64]) -> Result<()> {
    if refs.len() != preds.len() {
        return Err(Error::Shape(format!("{} references, {} predictions", refs.len(), preds.len())));
    }
    if refs.iter().chain(preds).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("AUC inputs"));
    }
    Ok(())
}

fn ratio(num: u64, den: u64) -> Result<f64> {
    if den == 0 {
        return Err(Error::Undefined("generalized AUC: all reference values are equal".into()));
    }
    Ok(num as f64 / den as f64)
}

/// `Σ_ij I(y_i > y_j) I(y'_i > y'_j) / Σ_ij I(y_i > y_j)` by direct pair counting.
pub fn generalized_auc_brute(refs: &[f64], preds: &[f64]) -> Result<f64> {
    check(refs, preds)?;
    let (mut num, mut den) = (0u64, 0u64);
    for i in 0..refs.len() {
        for j in 0..refs.len() {
            if refs[i] > refs[j] {
                den += 1;
                if preds[i] > preds[j] {
                    num += 1;
                }
            }
        }
    }
    ratio(num, den)
}

struct Fenwick(Vec<u64>);

impl Fenwick {
    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks `< i`.
    fn prefix(&self, mut i: usize) -> u64 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Same ratio as [`generalized_auc_brute`] in `O(N log N)`: sweep the
/// references in increasing order and count earlier, strictly smaller
/// predictions with a Fenwick tree over prediction ranks. Ties in either
/// coordinate never count.
pub fn generalized_auc(refs: &[f64], preds: &[f64]) -> Result<f64> {
    check(refs, preds)?;
    let n = refs.len();
    let mut sorted_preds: Vec<f64> = preds.to_vec();
    sorted_preds.sort_by(f64::total_cmp);
    sorted_preds.dedup();
    let rank = |v: f64| sorted_preds.partition_point(|&p| p < v);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| refs[a].total_cmp(&refs[b]));
    let mut tree = Fenwick(vec![0; sorted_preds.len() + 1]);
    let (mut num, mut den, mut inserted) = (0u64, 0u64, 0u64);
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end < n && refs[order[end]] == refs[order[start]] {
            end += 1;
        }
        for &i in &order[start..end] {
            den += inserted;
            num += tree.prefix(rank(preds[i]));
        }
        for &i in &order[start..end] {
            tree.add(rank(preds[i]));
            inserted += 1;
        }
        start = end;
    }
    ratio(num, den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucLocal {
    pub mean: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

pub(crate) fn auc_local_values(witness_vals: &[DMatrix<f64>], f_vals: &DMatrix<f64>, ns: &NeighborhoodSystem) -> Result<AucLocal> {
    if witness_vals.len() != ns.len() {
        return Err(Error::Shape(format!("{} witnesses for {} neighborhoods", witness_vals.len(), ns.len())));
    }
    let (mut sum, mut evaluated, mut skipped) = (0.0, 0, 0);
    for (i, g) in witness_vals.iter().enumerate() {
        let f = select_rows(f_vals, ns.get(i));
        if f.shape() != g.shape() {
            return Err(Error::Shape(format!("neighborhood {i}: witness values {:?} vs {:?}", g.shape(), f.shape())));
        }
        for q in 0..f.ncols() {
            let fr: Vec<f64> = f.column(q).iter().copied().collect();
            let gr: Vec<f64> = g.column(q).iter().copied().collect();
            match generalized_auc(&fr, &gr) {
                Ok(v) => {
                    sum += v;
                    evaluated += 1;
                }
                Err(Error::Undefined(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::Undefined("every neighborhood has a constant reference".into()));
    }
    Ok(AucLocal { mean: sum / evaluated as f64, evaluated, skipped })
}

/// Mean over neighborhoods (and output columns) of the generalized AUC of the
/// witness against the predictor; constant-reference neighborhoods are skipped
/// and counted.
pub fn auc_local(witnesses: &[WitnessFit], f_vals: &DMatrix<f64>, ns: &NeighborhoodSystem) -> Result<AucLocal> {
    let vals: Vec<DMatrix<f64>> = witnesses.iter().map(|w| w.fitted_values.clone()).collect();
    auc_local_values(&vals, f_vals, ns)
}
