use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::DecompositionError;
use crate::linalg::svd;
use crate::transforms::DiscreteOperator;

/// `Σ_i w_i u_i v_i`: the bilinear pairing of node samples under complex weights `w`.
pub fn weighted_pairing(u: &[C64], v: &[C64], w: &[C64]) -> C64 {
    u.iter().zip(v).zip(w).map(|((a, b), c)| a * b * c).sum()
}

/// `S_N = W^{-1} K_N^T W`, so that `<K_N ψ, g>_w = <ψ, S_N g>_w` exactly.
pub fn discrete_adjoint(op: &DiscreteOperator) -> Result<DiscreteOperator, DecompositionError> {
    let n = op.ncols();
    if op.nrows() != n || op.col_weights.len() != n {
        return Err(DecompositionError::ShapeMismatch(format!("{}x{} operator with {} weights", op.nrows(), n, op.col_weights.len())));
    }
    let w = &op.col_weights;
    if let Some(i) = w.iter().position(|v| v.norm() == 0.0) {
        return Err(DecompositionError::ShapeMismatch(format!("zero weight at node {i}")));
    }
    let matrix = DMatrix::from_fn(n, n, |i, j| op.matrix[(j, i)] * w[j] / w[i]);
    Ok(DiscreteOperator { matrix, row_points: op.col_points.clone(), col_points: op.col_points.clone(), col_weights: w.clone() })
}

/// Truncated SVD keeping every singular value above `eps`; the spectral-norm
/// error is the first dropped singular value.
pub fn low_rank_approx(op: &DiscreteOperator, eps: f64) -> (DiscreteOperator, usize) {
    let s = svd(&op.matrix);
    let rank = s.sigma.iter().filter(|v| **v > eps).count();
    let mut matrix = DMatrix::zeros(op.nrows(), op.ncols());
    for i in 0..rank {
        matrix += s.u.column(i) * C64::new(s.sigma[i], 0.0) * s.v_t.row(i);
    }
    (DiscreteOperator { matrix, row_points: op.row_points.clone(), col_points: op.col_points.clone(), col_weights: op.col_weights.clone() }, rank)
}

/// Least-squares fit `ln σ_j ≈ ln c + j ln ρ`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GeometricFit {
    pub c: f64,
    pub rho: f64,
    /// Root mean square of the natural-log residuals.
    pub rms_log_residual: f64,
    /// `c` raised by the largest residual, so that `σ_j ≤ c_bound ρ^j` on the fitted range.
    pub c_bound: f64,
    /// Number of singular values fitted.
    pub used: usize,
}

/// Fit the leading singular values (at most `max_index + 1` of them) that lie
/// above `floor` times the largest one. `None` when fewer than two qualify.
pub fn geometric_fit(sigma: &[f64], max_index: usize, floor: f64) -> Option<GeometricFit> {
    let top = *sigma.first()?;
    let pts: Vec<(f64, f64)> = sigma.iter().take(max_index + 1).enumerate().filter(|(_, s)| **s > floor * top && **s > 0.0).map(|(j, s)| (j as f64, s.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = pts.iter().map(|(x, y)| y - intercept - slope * x).collect();
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / m).sqrt();
    let worst = res.iter().copied().fold(0.0, f64::max);
    Some(GeometricFit { c: intercept.exp(), rho: slope.exp(), rms_log_residual: rms, c_bound: (intercept + worst).exp(), used: pts.len() })
}
