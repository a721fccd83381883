//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Thin SVD with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<C64>,
    pub sigma: Vec<f64>,
    pub v_t: DMatrix<C64>,
}

pub fn svd(m: &DMatrix<C64>) -> SortedSvd {
    let s = m.clone().svd(true, true);
    let u = s.u.expect("left vectors requested");
    let v_t = s.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..s.singular_values.len()).collect();
    order.sort_by(|&a, &b| s.singular_values[b].total_cmp(&s.singular_values[a]));
    let sigma = order.iter().map(|&i| s.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |i, j| v_t[(order[i], j)]);
    SortedSvd { u, sigma, v_t }
}

pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of `{x : m x = 0}`, keeping singular values below
/// `tol * max(1, sigma_max)`.
pub fn null_space(m: &DMatrix<C64>, tol: f64) -> Vec<DVector<C64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    if m.nrows() == 0 {
        return (0..n).map(|i| DVector::from_fn(n, |j, _| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })).collect();
    }
    // pad to at least square so the right factor is complete
    let rows = m.nrows().max(n);
    let padded = DMatrix::from_fn(rows, n, |i, j| if i < m.nrows() { m[(i, j)] } else { C64::new(0.0, 0.0) });
    let s = svd(&padded);
    let cut = tol * s.sigma.first().copied().unwrap_or(0.0).max(1.0);
    (0..s.sigma.len())
        .filter(|&i| s.sigma[i] <= cut)
        .map(|i| s.v_t.row(i).adjoint().into_owned())
        .collect()
}

/// Least-squares solution of `a x = b` through Householder QR.
/// Needs full column rank; returns `None` otherwise.
pub fn least_squares(a: &DMatrix<C64>, b: &DVector<C64>) -> Option<DVector<C64>> {
    if a.nrows() < a.ncols() {
        return None;
    }
    let qr = a.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let scale = (0..r.nrows()).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..r.nrows()).any(|i| r[(i, i)].norm() <= 1e-14 * scale) {
        return None;
    }
    r.solve_upper_triangular(&(q.adjoint() * b))
}

/// Minimum-norm solution of an underdetermined (or square) system.
pub fn min_norm_solve(a: &DMatrix<C64>, b: &DVector<C64>, tol: f64) -> DVector<C64> {
    let s = svd(a);
    let cut = tol * s.sigma.first().copied().unwrap_or(0.0);
    let mut x = DVector::zeros(a.ncols());
    for (i, &sv) in s.sigma.iter().enumerate() {
        if sv > cut && sv > 0.0 {
            let coef = (s.u.column(i).adjoint() * b)[(0, 0)] / sv;
            x += s.v_t.row(i).adjoint() * coef;
        }
    }
    x
}

/// Largest singular value by power iteration on `m^H m`.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut x = DVector::from_fn(n, |i, _| C64::new(1.0 + 0.01 * i as f64, 0.3 * ((i * 7 % 11) as f64)));
    x /= C64::new(x.norm(), 0.0);
    let mut est = 0.0;
    for _ in 0..500 {
        let y = m * &x;
        let z = m.adjoint() * &y;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        let next = y.norm();
        x = z / C64::new(nz, 0.0);
        if (next - est).abs() <= 1e-13 * next {
            return next;
        }
        est = next;
    }
    est
}

/// Largest modulus of the entries.
pub fn sup_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sorted_svd_reconstructs() {
        let m = DMatrix::from_fn(5, 3, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64).sin()));
        let s = svd(&m);
        assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        let sig = DMatrix::from_diagonal(&DVector::from_iterator(3, s.sigma.iter().map(|v| c(*v, 0.0))));
        let back = &s.u * sig * &s.v_t;
        assert!((back - m).norm() < 1e-13);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&m * v).norm() < 1e-14);
        }
    }

    #[test]
    fn qr_least_squares_line_fit() {
        let a = DMatrix::from_fn(4, 2, |i, j| if j == 0 { c(1.0, 0.0) } else { c(i as f64, 0.0) });
        let b = DVector::from_fn(4, |i, _| c(2.0 + 3.0 * i as f64, 1.0));
        let x = least_squares(&a, &b).unwrap();
        assert!((x[0] - c(2.0, 1.0)).norm() < 1e-13 && (x[1] - c(3.0, 0.0)).norm() < 1e-13);
        let rank_deficient = DMatrix::from_element(3, 2, c(1.0, 0.0));
        assert!(least_squares(&rank_deficient, &DVector::zeros(3)).is_none());
    }

    #[test]
    fn power_iteration_matches_svd() {
        let m = DMatrix::from_fn(6, 6, |i, j| c(1.0 / (1.0 + i as f64 + j as f64), 0.1 * (i as f64 - j as f64)));
        let s = singular_values(&m);
        assert!((spectral_norm(&m) - s[0]).abs() < 1e-10 * s[0]);
    }

    #[test]
    fn min_norm_two_constraints() {
        let a = DMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let b = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let x = min_norm_solve(&a, &b, 1e-12);
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14 && x[1].norm() < 1e-14 && x[2].norm() < 1e-14);
    }
}
