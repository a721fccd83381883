use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::ExtensionError;
use crate::linalg::{sup_norm, svd, SortedSvd};

const GAP: f64 = 10.0;

/// Truncated-SVD solver for `(I - K) g = f`.
pub struct FredholmSolver {
    n: usize,
    tau: f64,
    a: Option<DMatrix<C64>>,
    svd: Option<SortedSvd>,
    kept: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FredholmSolution {
    pub g: Vec<C64>,
    /// Left singular vectors of `I - K` with `σ < τ`.
    #[serde(skip)]
    pub cokernel_basis: Vec<DVector<C64>>,
    /// `‖(I - K) g - (f - Π f)‖∞`.
    pub residual: f64,
    /// `‖Π f‖∞`, the part of `f` outside the range.
    pub obstruction: f64,
    /// `‖(I - K) g - f‖∞`.
    pub full_residual: f64,
    pub sigma: Vec<f64>,
    pub tau: f64,
    pub cokernel_dim: usize,
}

impl FredholmSolver {
    pub fn new(k: &DMatrix<C64>, tau: f64) -> Result<Self, ExtensionError> {
        if k.nrows() != k.ncols() {
            return Err(ExtensionError::ShapeMismatch(format!("kernel matrix is {}x{}", k.nrows(), k.ncols())));
        }
        let n = k.nrows();
        if k.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            return Ok(FredholmSolver { n, tau, a: None, svd: None, kept: n });
        }
        let a = DMatrix::<C64>::identity(n, n) - k;
        let s = svd(&a);
        let kept = s.sigma.iter().take_while(|&&v| v >= tau).count();
        if kept > 0 && kept < n {
            let (lo, hi) = (s.sigma[kept - 1], s.sigma[kept]);
            if lo < GAP * hi {
                return Err(ExtensionError::IllConditioned { kept: lo, dropped: hi });
            }
        }
        Ok(FredholmSolver { n, tau, a: Some(a), svd: Some(s), kept })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cokernel_dim(&self) -> usize {
        self.n - self.kept
    }

    pub fn sigma(&self) -> Vec<f64> {
        match &self.svd {
            Some(s) => s.sigma.clone(),
            None => vec![1.0; self.n],
        }
    }

    pub fn solve(&self, f: &[C64]) -> Result<FredholmSolution, ExtensionError> {
        if f.len() != self.n {
            return Err(ExtensionError::ShapeMismatch(format!("density has {} samples, expected {}", f.len(), self.n)));
        }
        let (Some(a), Some(s)) = (&self.a, &self.svd) else {
            return Ok(FredholmSolution {
                g: f.to_vec(),
                cokernel_basis: Vec::new(),
                residual: 0.0,
                obstruction: 0.0,
                full_residual: 0.0,
                sigma: self.sigma(),
                tau: self.tau,
                cokernel_dim: 0,
            });
        };
        let fv = DVector::from_column_slice(f);
        let mut g = DVector::<C64>::zeros(self.n);
        for i in 0..self.kept {
            let c = (s.u.column(i).adjoint() * &fv)[(0, 0)] / s.sigma[i];
            g += s.v_t.row(i).adjoint() * c;
        }
        let cokernel_basis: Vec<DVector<C64>> = (self.kept..self.n).map(|i| s.u.column(i).into_owned()).collect();
        let mut proj = DVector::<C64>::zeros(self.n);
        for u in &cokernel_basis {
            proj += u * (u.adjoint() * &fv)[(0, 0)];
        }
        let ag = a * &g;
        let residual = sup_norm(&(&ag - (&fv - &proj)));
        let full_residual = sup_norm(&(&ag - &fv));
        Ok(FredholmSolution {
            g: g.iter().copied().collect(),
            cokernel_dim: cokernel_basis.len(),
            cokernel_basis,
            residual,
            obstruction: sup_norm(&proj),
            full_residual,
            sigma: s.sigma.clone(),
            tau: self.tau,
        })
    }
}

pub fn fredholm_solve(k: &DMatrix<C64>, f: &[C64], tau: f64) -> Result<FredholmSolution, ExtensionError> {
    FredholmSolver::new(k, tau)?.solve(f)
}
