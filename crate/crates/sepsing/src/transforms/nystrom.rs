//! Dense Nyström matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;


use super::TransformError;

/// Matrix with its target points (rows) and source nodes and weights (columns).
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub matrix: DMatrix<C64>,
    pub row_points: Vec<C64>,
    pub col_points: Vec<C64>,
    pub col_weights: Vec<C64>,
}


impl DiscreteOperator {
    pub fn zeros(rows: Vec<C64>, cols: Vec<C64>, weights: Vec<C64>) -> Self {
        DiscreteOperator { matrix: DMatrix::zeros(rows.len(), cols.len()), row_points: rows, col_points: cols, col_weights: weights }
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).iter().copied().collect()
    }

    pub fn check_finite(&self) -> Result<(), TransformError> {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                let v = self.matrix[(i, j)];
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(TransformError::NonFiniteEntry(i, j));
                }
            }
        }
        Ok(())
    }

    /// Row-major CSV with `re,im` pairs.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols()).map(|j| format!("{:.16e},{:.16e}", self.matrix[(i, j)].re, self.matrix[(i, j)].im)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// `M[i][j] = kernel(ζ_j, z_i) w_j`.
pub fn nystrom_matrix<K>(kernel: K, sources: &[C64], weights: &[C64], targets: &[C64]) -> Result<DiscreteOperator, TransformError>
where
    K: Fn(C64, C64) -> C64 + Sync,
{
    assert_eq!(sources.len(), weights.len());
    let n = sources.len();
    let rows: Vec<Vec<C64>> = targets
        .par_iter()
        .map(|&z| (0..n).map(|j| kernel(sources[j], z) * weights[j]).collect())
        .collect();
    let matrix = DMatrix::from_fn(targets.len(), n, |i, j| rows[i][j]);
    let op = DiscreteOperator { matrix, row_points: targets.to_vec(), col_points: sources.to_vec(), col_weights: weights.to_vec() };
    op.check_finite()?;
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AnalyticArc, AnalyticMap, JordanBoundary};
    use crate::transforms::cauchy::{cauchy_transform, modified_cauchy_transform};
    use crate::transforms::quadrature::build_quadrature;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn unit_kernel_rows_are_weights() {
        let arcs: Vec<AnalyticArc> = (0..4)
            .map(|k| AnalyticArc::circular(C64::new(0.0, 0.0), 1.0, k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0).unwrap())
            .collect();
        let q = build_quadrature(&JordanBoundary::new(arcs).unwrap(), 8, 0).unwrap();
        let op = nystrom_matrix(|_, _| C64::new(1.0, 0.0), &q.points(), &q.weights(), &[C64::new(0.1, 0.0), C64::new(0.0, 0.3)]).unwrap();
        for i in 0..2 {
            let s: C64 = op.matrix.row(i).iter().sum();
            assert!(s.norm() < 1e-13);
            for j in 0..q.len() {
                assert_eq!(op.matrix[(i, j)], q.nodes[j].w);
            }
        }
    }

    #[test]
    fn kernel_matrix_matches_transform_difference() {
        // right half of the unit circle
        let arcs: Vec<AnalyticArc> = vec![
            AnalyticArc::circular(C64::new(0.0, 0.0), 1.0, -PI / 2.0, PI / 2.0).unwrap(),
            AnalyticArc::segment(C64::new(0.0, 1.0), C64::new(0.0, -1.0)).unwrap(),
        ];
        let b = JordanBoundary::new(arcs.clone()).unwrap();
        let q = build_quadrature(&b, 16, 0).unwrap();
        let right: Vec<usize> = (0..q.panels.len()).filter(|&p| q.panels[p].arc == 0).collect();
        let idx: Vec<usize> = right.iter().flat_map(|&p| q.panel_range(p)).collect();
        let src: Vec<C64> = idx.iter().map(|&i| q.nodes[i].z).collect();
        let w: Vec<C64> = idx.iter().map(|&i| q.nodes[i].w).collect();
        let phi = Arc::new(AnalyticMap::parse("z^2").unwrap());
        let targets: Vec<C64> = (0..5).map(|j| C64::new(0.1 + 0.15 * j as f64, 0.1 * j as f64 - 0.2)).collect();
        let p2 = phi.clone();
        let op = nystrom_matrix(move |zeta, z| p2.kernel_g(zeta, z).unwrap(), &src, &w, &targets).unwrap();
        let psi_sub: Vec<C64> = src.iter().map(|z| (z * 1.3).cos()).collect();
        let psi: Vec<C64> = q.nodes.iter().map(|n| (n.z * 1.3).cos()).collect();
        let mv = op.apply(&psi_sub);
        let arcs = Arc::new(arcs);
        for (i, &z) in targets.iter().enumerate() {
            let a = modified_cauchy_transform(&arcs, &q, &right, &psi, &phi, phi.eval(z)).unwrap();
            let c = cauchy_transform(&arcs, &q, &right, &psi, z).unwrap();
            assert!((mv[i] - (a - c)).norm() < 1e-9, "{}", (mv[i] - (a - c)).norm());
        }
    }

    #[test]
    fn nan_detected() {
        let r = nystrom_matrix(|_, _| C64::new(f64::NAN, 0.0), &[C64::new(0.0, 0.0)], &[C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0)]);
        assert!(matches!(r, Err(TransformError::NonFiniteEntry(0, 0))));
    }
}
