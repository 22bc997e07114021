//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Singular values below `PINV_RELATIVE_CUTOFF * σ_max` are treated as zero.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

/// Minimum-norm least-squares solution `X⁺ B` via a thin SVD.
pub fn pinv_solve(x: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(x.nrows(), b.nrows(), "pinv_solve: row mismatch");
    let (m, d) = x.shape();
    if m == 0 || d == 0 {
        return DMatrix::zeros(d, b.ncols());
    }
    let svd = x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let v_t = svd.v_t.as_ref().expect("svd v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = PINV_RELATIVE_CUTOFF * sigma_max;
    // Uᵀ B, scaled by 1/σ where σ is kept.
    let mut ut_b = u.transpose() * b;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let scale = if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 };
        ut_b.row_mut(k).scale_mut(scale);
    }
    v_t.transpose() * ut_b
}

/// The pseudo-inverse `X⁺` itself.
pub fn pinv(x: &DMatrix<f64>) -> DMatrix<f64> {
    pinv_solve(x, &DMatrix::identity(x.nrows(), x.nrows()))
}

/// Solves `(w XᵀX + αI) θ = w Xᵀ B` by Cholesky. Requires `alpha > 0`.
pub fn ridge_solve(x: &DMatrix<f64>, b: &DMatrix<f64>, alpha: f64, weight: f64) -> DMatrix<f64> {
    let d = x.ncols();
    let mut gram = x.transpose() * x;
    gram.scale_mut(weight);
    for k in 0..d {
        gram[(k, k)] += alpha;
    }
    let rhs = (x.transpose() * b) * weight;
    match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        // Only reachable through extreme scaling; LU is a fine fallback.
        None => gram.lu().solve(&rhs).expect("ridge system is positive definite"),
    }
}

/// Gathers the listed rows of `m` into a new matrix.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)])
}

/// Column means of `m` (zero vector when `m` has no rows).
pub fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    if n == 0 {
        return DVector::zeros(m.ncols());
    }
    DVector::from_fn(m.ncols(), |c, _| m.column(c).sum() / n as f64)
}

pub fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Max absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
