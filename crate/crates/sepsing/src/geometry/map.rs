//! Analytic maps given by closed-form expressions in `z`.

use num_complex::Complex64 as C64;

use super::GeometryError;
use crate::expr::{Expr, ExprError, Jet, Taylor};

/// Below this separation (relative to `scale`) the kernel switches to its
/// series form.
pub const SERIES_SWITCH: f64 = 1e-2;
const SERIES_LEN: usize = 16;

#[derive(Clone, Debug)]
pub struct AnalyticMap {
    expr: Expr,
    affine: bool,
    scale: f64,
    domain: String,
}

impl AnalyticMap {
    pub fn new(expr: Expr) -> Self {
        let affine = expr.is_affine_in_z();
        AnalyticMap { expr, affine, scale: 1.0, domain: String::new() }
    }

    pub fn parse(src: &str) -> Result<Self, ExprError> {
        Ok(Self::new(Expr::parse(src)?))
    }

    pub fn with_domain(mut self, description: impl Into<String>) -> Self {
        self.domain = description.into();
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn identity() -> Self {
        Self::parse("z").expect("identity parses")
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.expr.eval(z)
    }

    /// (phi, phi', phi'') at `z`.
    pub fn jet(&self, z: C64) -> (C64, C64, C64) {
        let j = self.expr.eval(Jet::variable(z));
        (j.0[0], j.0[1], j.0[2] * 2.0)
    }

    pub fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        let j = self.expr.eval(Taylor::<2>::variable(z));
        (j.0[0], j.0[1])
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.value_and_derivative(z).1
    }

    /// Taylor coefficients of phi at `z`.
    pub fn series<const N: usize>(&self, z: C64) -> Taylor<N> {
        self.expr.eval(Taylor::<N>::variable(z))
    }

    /// `phi'(zeta) / (phi(zeta) - phi(z)) - 1 / (zeta - z)`, with the removable
    /// singularity at `zeta = z` filled in.
    pub fn kernel_g(&self, zeta: C64, z: C64) -> Result<C64, GeometryError> {
        if self.affine {
            return Ok(C64::new(0.0, 0.0));
        }
        let h = zeta - z;
        if h.norm() > SERIES_SWITCH * self.scale {
            let (pz, dz) = self.value_and_derivative(zeta);
            return self.kernel_from_values(zeta, pz, dz, z, self.eval(z));
        }
        // with a_j the Taylor coefficients of phi at z:
        // G = sum_{j>=2} (j-1) a_j h^{j-2} / sum_{j>=1} a_j h^{j-1}
        let a = self.series::<SERIES_LEN>(z);
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for j in (1..SERIES_LEN).rev() {
            den = den * h + a.0[j];
            if j >= 2 {
                num = num * h + a.0[j] * (j - 1) as f64;
            }
        }
        if den.norm() == 0.0 {
            return Err(GeometryError::MapCollision { zeta, z });
        }
        Ok(num / den)
    }

    /// Literal kernel from precomputed `phi(zeta)`, `phi'(zeta)` and `phi(z)`;
    /// falls back to [`Self::kernel_g`] when `zeta` is close to `z`.
    pub fn kernel_from_values(&self, zeta: C64, pz: C64, dz: C64, z: C64, pw: C64) -> Result<C64, GeometryError> {
        if self.affine {
            return Ok(C64::new(0.0, 0.0));
        }
        let h = zeta - z;
        if h.norm() <= SERIES_SWITCH * self.scale {
            return self.kernel_g(zeta, z);
        }
        let den = pz - pw;
        let g = dz / den - 1.0 / h;
        if den.norm() == 0.0 || !g.re.is_finite() || !g.im.is_finite() || den.norm() < 1e-14 * h.norm() * dz.norm() {
            return Err(GeometryError::MapCollision { zeta, z });
        }
        Ok(g)
    }

    /// Fourth-order central differences of phi along the real direction:
    /// returns the largest relative mismatch of (phi', phi'') at `z`, with
    /// `phi''` measured against `max(|phi''|, |phi'| / scale)`.
    pub fn finite_difference_mismatch(&self, z: C64) -> f64 {
        let (_, d1, d2) = self.jet(z);
        let h = 1e-3 * self.scale;
        let f = |k: f64| self.eval(z + C64::new(k * h, 0.0));
        let (fm2, fm1, f0, fp1, fp2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
        let fd1 = (fm2 - fp2 + (fp1 - fm1) * 8.0) / (12.0 * h);
        let fd2 = (-fm2 - fp2 + (fp1 + fm1) * 16.0 - f0 * 30.0) / (12.0 * h * h);
        let e1 = (fd1 - d1).norm() / d1.norm().max(1e-300);
        let e2 = (fd2 - d2).norm() / d2.norm().max(d1.norm() / self.scale).max(1e-300);
        e1.max(e2)
    }
}

/// Newton's method for `phi(z) = target` from `z0`.
pub fn solve_map(phi: &AnalyticMap, target: C64, z0: C64) -> Option<C64> {
    let mut z = z0;
    for _ in 0..60 {
        let (v, d) = phi.value_and_derivative(z);
        let step = (v - target) / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let r = phi.eval(z) - target;
    (r.norm() < 1e-12).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_kernel_vanishes() {
        let m = AnalyticMap::identity();
        assert!(m.is_affine());
        assert_eq!(m.kernel_g(c(0.5, 0.1), c(0.2, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn square_kernel_oracle() {
        // 2 zeta / (zeta^2 - z^2) - 1 / (zeta - z) = 1 / (zeta + z)
        let m = AnalyticMap::parse("z^2").unwrap();
        let g = m.kernel_g(c(0.5, 0.0), c(0.3, 0.0)).unwrap();
        assert!((g - c(1.25, 0.0)).norm() < 1e-14);
        let g = m.kernel_g(c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-15);
        // across the switch the two branches agree with the closed form
        for h in [1e-1, 2e-2, 1.01e-2, 0.99e-2, 1e-4, 1e-9, 1e-13] {
            let zeta = c(0.5, 0.2);
            let z = zeta - c(h, 0.3 * h);
            let g = m.kernel_g(zeta, z).unwrap();
            assert!((g - 1.0 / (zeta + z)).norm() < 1e-12, "h={h}");
        }
    }

    #[test]
    fn kernel_series_for_exp_map() {
        let m = AnalyticMap::parse("exp(z) + z^3").unwrap();
        let zeta = c(0.3, -0.4);
        // high-precision reference through a moderate separation and the
        // literal formula, compared with the series branch just inside
        let lit = |z: C64| {
            let (p, d) = m.value_and_derivative(zeta);
            d / (p - m.eval(z)) - 1.0 / (zeta - z)
        };
        let z1 = zeta - c(0.011, 0.0);
        let z2 = zeta - c(0.009, 0.0);
        let g1 = m.kernel_g(zeta, z1).unwrap();
        let g2 = m.kernel_g(zeta, z2).unwrap();
        assert!((g1 - lit(z1)).norm() < 1e-12);
        assert!((g2 - lit(z2)).norm() < 1e-11);
        let (_, d1, d2) = m.jet(zeta);
        assert!((m.kernel_g(zeta, zeta).unwrap() - d2 / (2.0 * d1)).norm() < 1e-14);
    }

    #[test]
    fn collision_detected() {
        let m = AnalyticMap::parse("z^2").unwrap();
        assert!(matches!(m.kernel_g(c(0.5, 0.0), c(-0.5, 0.0)), Err(GeometryError::MapCollision { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for s in ["(z+0.5)/1.2", "((z-0.5)/1.2)^2", "blaschke2(0.3i, mobius(1, 0.1, 0, 1.3, z))", "exp(sin(z))/(z-3)"] {
            let m = AnalyticMap::parse(s).unwrap();
            for z in [c(0.1, 0.2), c(-0.4, 0.3), c(0.0, -0.5)] {
                assert!(m.finite_difference_mismatch(z) < 1e-8, "{s} at {z}");
            }
        }
    }

    #[test]
    fn newton_inverse() {
        let m = AnalyticMap::parse("(z+0.5)/1.2").unwrap();
        let z = solve_map(&m, c(0.3, 0.1), c(0.0, 0.0)).unwrap();
        assert!((m.eval(z) - c(0.3, 0.1)).norm() < 1e-15);
    }
}
