//! Plain and modified Cauchy integrals with stored densities.
//!
//! A term evaluates `w -> sign * ∫_Γ m'(ξ) ψ(ξ) / (m(ξ) - w) dξ` where `Γ` is a
//! set of boundary panels, optionally moved by a rigid motion, and `m` is the
//! identity or an analytic map. No `1 / (2 pi i)` factor is applied.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::gauss::{gl16, gl16_bary, interp_row, ORDER};
use super::quadrature::{panel_nodes, Panel, QuadratureRule};
use super::TransformError;
use crate::geometry::{AnalyticArc, AnalyticMap};

pub const MAX_REFINE: usize = 20;
const CONTOUR_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct CauchyTerm {
    arcs: Arc<Vec<AnalyticArc>>,
    panels: Vec<Panel>,
    density: Vec<C64>,
    rot: C64,
    shift: C64,
    map: Option<Arc<AnalyticMap>>,
    sign: f64,
    images: Vec<C64>,
    charges: Vec<C64>,
    image_lengths: Vec<f64>,
}

impl CauchyTerm {
    /// `density` holds `ORDER` samples per panel, at the panel's Gauss nodes.
    pub fn new(
        arcs: Arc<Vec<AnalyticArc>>,
        panels: Vec<Panel>,
        density: Vec<C64>,
        motion: (C64, C64),
        map: Option<Arc<AnalyticMap>>,
        sign: f64,
    ) -> Self {
        assert_eq!(density.len(), panels.len() * ORDER, "density length must match panels");
        let (rot, shift) = motion;
        let mut images = Vec::with_capacity(density.len());
        let mut charges = Vec::with_capacity(density.len());
        let mut image_lengths = Vec::with_capacity(panels.len());
        for (p, pan) in panels.iter().enumerate() {
            let mut len = 0.0;
            for (j, (_, z, w)) in panel_nodes(&arcs[pan.arc], pan.t0, pan.t1).into_iter().enumerate() {
                let xi = rot * z + shift;
                let dxi = rot * w;
                let (m, dm) = match &map {
                    Some(phi) => phi.value_and_derivative(xi),
                    None => (xi, C64::new(1.0, 0.0)),
                };
                len += (dm * dxi).norm();
                images.push(m);
                charges.push(dm * dxi * density[p * ORDER + j] * sign);
            }
            image_lengths.push(len);
        }
        CauchyTerm { arcs, panels, density, rot, shift, map, sign, images, charges, image_lengths }
    }

    /// Term over the listed panels of `rule` with node samples `psi` (full rule length).
    pub fn from_rule(
        arcs: Arc<Vec<AnalyticArc>>,
        rule: &QuadratureRule,
        panel_ids: &[usize],
        psi: &[C64],
        motion: (C64, C64),
        map: Option<Arc<AnalyticMap>>,
        sign: f64,
    ) -> Self {
        let panels = panel_ids.iter().map(|&p| rule.panels[p]).collect();
        let density = panel_ids.iter().flat_map(|&p| rule.panel_range(p).map(|i| psi[i])).collect();
        Self::new(arcs, panels, density, motion, map, sign)
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    /// Density samples, `ORDER` per panel.
    pub fn density(&self) -> &[C64] {
        &self.density
    }

    /// (rotation factor, shift) applied to the source panels.
    pub fn motion(&self) -> (C64, C64) {
        (self.rot, self.shift)
    }

    pub fn map(&self) -> Option<&AnalyticMap> {
        self.map.as_deref()
    }

    /// Images `m(ξ_j)` of the source nodes.
    pub fn image_nodes(&self) -> &[C64] {
        &self.images
    }

    fn contour_error(&self, d: f64) -> TransformError {
        if self.map.is_some() {
            TransformError::OnImageContour(d)
        } else {
            TransformError::OnContour(d)
        }
    }

    pub fn eval(&self, w: C64) -> Result<C64, TransformError> {
        let mut total = C64::new(0.0, 0.0);
        for p in 0..self.panels.len() {
            let r = p * ORDER..(p + 1) * ORDER;
            let d = self.images[r.clone()].iter().map(|m| (m - w).norm()).fold(f64::INFINITY, f64::min);
            if d < CONTOUR_TOL {
                return Err(self.contour_error(d));
            }
            if d >= self.image_lengths[p] {
                for j in r {
                    total += self.charges[j] / (self.images[j] - w);
                }
            } else {
                let pan = self.panels[p];
                let mid = 0.5 * (pan.t0 + pan.t1);
                total += self.refine(p, pan.t0, mid, w, 1)? + self.refine(p, mid, pan.t1, w, 1)?;
            }
        }
        Ok(total)
    }

    fn refine(&self, p: usize, a: f64, b: f64, w: C64, depth: usize) -> Result<C64, TransformError> {
        let pan = self.panels[p];
        let arc = &self.arcs[pan.arc];
        let (x, _) = gl16();
        let bw = gl16_bary();
        let dens = &self.density[p * ORDER..(p + 1) * ORDER];
        let mut row = [0.0; ORDER];
        let mut imgs = [C64::new(0.0, 0.0); ORDER];
        let mut charges = [C64::new(0.0, 0.0); ORDER];
        let mut len = 0.0;
        let mut d = f64::INFINITY;
        for (j, (t, z, wt)) in panel_nodes(arc, a, b).into_iter().enumerate() {
            let xi = self.rot * z + self.shift;
            let dxi = self.rot * wt;
            let (m, dm) = match &self.map {
                Some(phi) => phi.value_and_derivative(xi),
                None => (xi, C64::new(1.0, 0.0)),
            };
            let s = 2.0 * (t - pan.t0) / (pan.t1 - pan.t0) - 1.0;
            interp_row(x, bw, s, &mut row);
            let psi: C64 = row.iter().zip(dens).map(|(r, v)| v * *r).sum();
            len += (dm * dxi).norm();
            d = d.min((m - w).norm());
            imgs[j] = m;
            charges[j] = dm * dxi * psi * self.sign;
        }
        if d < CONTOUR_TOL {
            return Err(self.contour_error(d));
        }
        if d < len {
            if depth >= MAX_REFINE {
                return Err(TransformError::AdaptiveDepthExceeded(w));
            }
            let mid = 0.5 * (a + b);
            return Ok(self.refine(p, a, mid, w, depth + 1)? + self.refine(p, mid, b, w, depth + 1)?);
        }
        Ok(imgs.iter().zip(&charges).map(|(m, q)| q / (m - w)).sum())
    }
}

/// Signed sum of Cauchy terms; a function of one complex variable.
#[derive(Clone, Debug, Default)]
pub struct CauchySum {
    pub terms: Vec<CauchyTerm>,
}

impl CauchySum {
    pub fn new(terms: Vec<CauchyTerm>) -> Self {
        CauchySum { terms }
    }

    pub fn eval(&self, w: C64) -> Result<C64, TransformError> {
        let mut s = C64::new(0.0, 0.0);
        for t in &self.terms {
            s += t.eval(w)?;
        }
        Ok(s)
    }

    pub fn eval_many(&self, ws: &[C64]) -> Result<Vec<C64>, TransformError> {
        ws.par_iter().map(|w| self.eval(*w)).collect()
    }

    /// Mean of the function over the circle `|w - center| = radius` (64-point trapezoid).
    pub fn circle_mean(&self, center: C64, radius: f64) -> Result<C64, TransformError> {
        let m = 64;
        let pts: Vec<C64> = (0..m).map(|j| center + C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / m as f64)).collect();
        Ok(self.eval_many(&pts)?.into_iter().sum::<C64>() / m as f64)
    }

    /// Derivative at `w` by the Cauchy formula on a circle of radius `radius`.
    pub fn derivative(&self, w: C64, radius: f64) -> Result<C64, TransformError> {
        let m = 64;
        let mut s = C64::new(0.0, 0.0);
        for j in 0..m {
            let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            s += self.eval(w + e * radius)? / (e * radius);
        }
        Ok(s / m as f64)
    }
}

/// `∫ ψ(ζ) / (ζ - z) dζ` over the listed panels.
pub fn cauchy_transform(
    arcs: &Arc<Vec<AnalyticArc>>,
    rule: &QuadratureRule,
    panel_ids: &[usize],
    psi: &[C64],
    z: C64,
) -> Result<C64, TransformError> {
    CauchyTerm::from_rule(arcs.clone(), rule, panel_ids, psi, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), None, 1.0).eval(z)
}

/// `∫ φ'(ζ) ψ(ζ) / (φ(ζ) - z) dζ` over the listed panels.
pub fn modified_cauchy_transform(
    arcs: &Arc<Vec<AnalyticArc>>,
    rule: &QuadratureRule,
    panel_ids: &[usize],
    psi: &[C64],
    phi: &Arc<AnalyticMap>,
    z: C64,
) -> Result<C64, TransformError> {
    CauchyTerm::from_rule(arcs.clone(), rule, panel_ids, psi, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), Some(phi.clone()), 1.0).eval(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::JordanBoundary;
    use crate::transforms::quadrature::build_quadrature;
    use std::f64::consts::PI;

    fn circle_setup(panels: usize) -> (Arc<Vec<AnalyticArc>>, QuadratureRule) {
        let arcs: Vec<AnalyticArc> = (0..4)
            .map(|k| AnalyticArc::circular(C64::new(0.0, 0.0), 1.0, k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0).unwrap())
            .collect();
        let b = JordanBoundary::new(arcs.clone()).unwrap();
        let q = build_quadrature(&b, panels, 0).unwrap();
        (Arc::new(arcs), q)
    }

    fn all(q: &QuadratureRule) -> Vec<usize> {
        (0..q.panels.len()).collect()
    }

    #[test]
    fn cauchy_formula_oracles() {
        let (arcs, q) = circle_setup(16);
        let ones = vec![C64::new(1.0, 0.0); q.len()];
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        assert!((cauchy_transform(&arcs, &q, &all(&q), &ones, C64::new(0.0, 0.0)).unwrap() - two_pi_i).norm() < 1e-13);
        assert!(cauchy_transform(&arcs, &q, &all(&q), &ones, C64::new(3.0, 0.0)).unwrap().norm() < 1e-13);
        let psi: Vec<C64> = q.nodes.iter().map(|n| 1.0 / (n.z - 2.0)).collect();
        let z = C64::new(0.4, 0.0);
        let v = cauchy_transform(&arcs, &q, &all(&q), &psi, z).unwrap();
        assert!((v - two_pi_i / (z - 2.0)).norm() < 1e-12);
    }

    #[test]
    fn near_boundary_targets_refine() {
        let (arcs, q) = circle_setup(8);
        let psi: Vec<C64> = q.nodes.iter().map(|n| n.z * n.z).collect();
        let two_pi_i = C64::new(0.0, 2.0 * PI);
        for d in [1e-2, 1e-4, 1e-6] {
            let z = C64::from_polar(1.0 - d, 0.3);
            let v = cauchy_transform(&arcs, &q, &all(&q), &psi, z).unwrap();
            assert!((v - two_pi_i * z * z).norm() < 1e-10 * (2.0 * PI), "d={d}: {}", (v - two_pi_i * z * z).norm());
        }
        let on = q.nodes[5].z;
        assert!(matches!(cauchy_transform(&arcs, &q, &all(&q), &psi, on), Err(TransformError::OnContour(_))));
    }

    #[test]
    fn modified_with_square_map() {
        let (arcs, q) = circle_setup(16);
        let ones = vec![C64::new(1.0, 0.0); q.len()];
        let sq = Arc::new(AnalyticMap::parse("z^2").unwrap());
        let v = modified_cauchy_transform(&arcs, &q, &all(&q), &ones, &sq, C64::new(0.25, 0.0)).unwrap();
        assert!((v - C64::new(0.0, 4.0 * PI)).norm() < 1e-12);
        let id = Arc::new(AnalyticMap::identity());
        let psi: Vec<C64> = q.nodes.iter().map(|n| (n.z * 0.7).exp()).collect();
        for z in [C64::new(0.2, 0.1), C64::new(1.5, -0.3), C64::new(-0.99, 0.0)] {
            let a = modified_cauchy_transform(&arcs, &q, &all(&q), &psi, &id, z).unwrap();
            let b = cauchy_transform(&arcs, &q, &all(&q), &psi, z).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
        let on = sq.eval(q.nodes[3].z);
        assert!(matches!(modified_cauchy_transform(&arcs, &q, &all(&q), &ones, &sq, on), Err(TransformError::OnImageContour(_))));
    }

    #[test]
    fn mean_value_property() {
        let (arcs, q) = circle_setup(16);
        let psi: Vec<C64> = q.nodes.iter().map(|n| n.z.conj() + n.z * n.z).collect();
        let h = CauchySum::new(vec![CauchyTerm::from_rule(arcs, &q, &all(&q), &psi, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)), None, 1.0)]);
        let c = C64::new(0.2, -0.3);
        let m = h.circle_mean(c, 0.3).unwrap();
        assert!((m - h.eval(c).unwrap()).norm() < 1e-8);
        let d = h.derivative(c, 0.2).unwrap();
        let fd = (h.eval(c + 1e-5).unwrap() - h.eval(c - 1e-5).unwrap()) / 2e-5;
        assert!((d - fd).norm() < 1e-7);
    }
}
