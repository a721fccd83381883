//! Closed piecewise-analytic Jordan curves.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{AnalyticArc, GeometryError};
use crate::transforms::gauss::gl16;

const CHAIN_TOL: f64 = 1e-12;
const SMOOTH_TOL: f64 = 1e-8;
const POLY_PER_ARC: usize = 1024;

#[derive(Clone, Debug)]
pub struct JordanBoundary {
    arcs: Vec<AnalyticArc>,
    /// Interior angle at the end of arc `i` (junction with arc `i + 1`).
    corner_angles: Vec<f64>,
    polyline: Vec<C64>,
    /// Per polyline vertex: (arc index, parameter).
    poly_params: Vec<(usize, f64)>,
}

fn unit(z: C64) -> C64 {
    z / z.norm()
}

fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

impl JordanBoundary {
    pub fn new(arcs: Vec<AnalyticArc>) -> Result<Self, GeometryError> {
        if arcs.is_empty() {
            return Err(GeometryError::Empty);
        }
        let n = arcs.len();
        let scale = arcs.iter().map(|a| a.length()).sum::<f64>().max(1.0);
        let mut corner_angles = Vec::with_capacity(n);
        for i in 0..n {
            let next = &arcs[(i + 1) % n];
            let gap = (arcs[i].end() - next.start()).norm();
            if gap > CHAIN_TOL * scale {
                return Err(GeometryError::ChainBroken { arc: i, gap });
            }
            let d_in = -unit(arcs[i].derivative(1.0));
            let d_out = unit(next.derivative(0.0));
            let mut a = (d_in / d_out).arg();
            if a < 0.0 {
                a += 2.0 * PI;
            }
            if (a - PI).abs() < SMOOTH_TOL {
                a = PI;
            }
            if !(a > 0.0 && a <= PI) {
                return Err(GeometryError::AngleOutOfRange { corner: i, angle: a });
            }
            corner_angles.push(a);
        }

        let mut polyline = Vec::with_capacity(n * POLY_PER_ARC);
        let mut poly_params = Vec::with_capacity(n * POLY_PER_ARC);
        for (i, a) in arcs.iter().enumerate() {
            for j in 0..POLY_PER_ARC {
                let t = j as f64 / POLY_PER_ARC as f64;
                polyline.push(a.point(t));
                poly_params.push((i, t));
            }
        }
        let b = JordanBoundary { arcs, corner_angles, polyline, poly_params };
        b.check_simple()?;
        let w = b.tangent_turning();
        if (w - 2.0 * PI).abs() > 1e-6 {
            return Err(GeometryError::NotPositivelyOriented(w));
        }
        Ok(b)
    }

    fn check_simple(&self) -> Result<(), GeometryError> {
        // coarse polyline, 128 segments per arc
        let step = POLY_PER_ARC / 128;
        let pts: Vec<C64> = self.polyline.iter().step_by(step).copied().collect();
        let m = pts.len();
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            for j in i + 2..m {
                if (j + 1) % m == i {
                    continue;
                }
                if segments_cross(a, b, pts[j], pts[(j + 1) % m]) {
                    return Err(GeometryError::SelfIntersection(a));
                }
            }
        }
        Ok(())
    }

    /// Total turning of the tangent: smooth rotation plus exterior angles.
    pub fn tangent_turning(&self) -> f64 {
        let mut total = 0.0;
        for (i, a) in self.arcs.iter().enumerate() {
            let m = 512;
            let mut prev = a.derivative(0.0);
            for j in 1..=m {
                let d = a.derivative(j as f64 / m as f64);
                total += (d / prev).arg();
                prev = d;
            }
            total += PI - self.corner_angles[i];
        }
        total
    }

    pub fn arcs(&self) -> &[AnalyticArc] {
        &self.arcs
    }

    pub fn corner_angles(&self) -> &[f64] {
        &self.corner_angles
    }

    pub fn is_smooth_junction(&self, i: usize) -> bool {
        self.corner_angles[i] == PI
    }

    /// Indices of arcs whose end is a genuine corner.
    pub fn corner_indices(&self) -> Vec<usize> {
        (0..self.arcs.len()).filter(|&i| !self.is_smooth_junction(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length()).sum()
    }

    /// Nearest boundary point: (arc, parameter, distance).
    pub fn nearest(&self, z: C64) -> (usize, f64, f64) {
        let mut best = (0usize, 0.0f64, f64::INFINITY);
        for (k, p) in self.polyline.iter().enumerate() {
            let d = (p - z).norm();
            if d < best.2 {
                best = (self.poly_params[k].0, self.poly_params[k].1, d);
            }
        }
        // refine on the arc carrying the closest vertex and its neighbours
        let n = self.arcs.len();
        let mut out = best;
        out.2 = f64::INFINITY;
        for i in [best.0, (best.0 + 1) % n, (best.0 + n - 1) % n] {
            let (t, d) = self.arcs[i].nearest(z);
            if d < out.2 {
                out = (i, t, d);
            }
        }
        out
    }

    pub fn distance(&self, z: C64) -> f64 {
        self.nearest(z).2
    }

    /// Point-in-domain test (closed domain excluded within `1e-14`).
    pub fn contains(&self, z: C64) -> bool {
        let (i, t, d) = self.nearest(z);
        if d < 1e-3 {
            // local side test against the tangent at the nearest point
            if d < 1e-14 {
                return false;
            }
            let arc = &self.arcs[i];
            let p = arc.point(t);
            let at_end = t <= 0.0 || t >= 1.0;
            if !at_end {
                let tan = arc.derivative(t);
                let v = z - p;
                return tan.re * v.im - tan.im * v.re > 0.0;
            }
        }
        // crossing number on the dense polyline
        let m = self.polyline.len();
        let mut inside = false;
        for k in 0..m {
            let a = self.polyline[k];
            let b = self.polyline[(k + 1) % m];
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Winding number of the boundary about `z`, by adaptive quadrature of
    /// the Cauchy integral of 1.
    pub fn winding_number(&self, z: C64) -> Result<i64, GeometryError> {
        let d = self.distance(z);
        if d <= 1e-12 {
            return Err(GeometryError::TooCloseToBoundary(d));
        }
        let mut total = C64::new(0.0, 0.0);
        for a in &self.arcs {
            total += adaptive_cauchy_one(a, z, 0.0, 1.0, 0)?;
        }
        let w = total / C64::new(0.0, 2.0 * PI);
        Ok(w.re.round() as i64)
    }

    /// A polyline approximation with `per_arc` points per arc.
    pub fn sample(&self, per_arc: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(per_arc * self.arcs.len());
        for a in &self.arcs {
            for j in 0..per_arc {
                out.push(a.point(j as f64 / per_arc as f64));
            }
        }
        out
    }

    /// Axis-aligned bounding box (xmin, xmax, ymin, ymax).
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bb = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.polyline {
            bb.0 = bb.0.min(p.re);
            bb.1 = bb.1.max(p.re);
            bb.2 = bb.2.min(p.im);
            bb.3 = bb.3.max(p.im);
        }
        bb
    }
}

fn panel_cauchy_one(a: &AnalyticArc, z: C64, t0: f64, t1: f64) -> C64 {
    let (x, w) = gl16();
    let h = 0.5 * (t1 - t0);
    let mut s = C64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let t = t0 + h * (xi + 1.0);
        s += a.derivative(t) * (wi * h) / (a.point(t) - z);
    }
    s
}

fn adaptive_cauchy_one(a: &AnalyticArc, z: C64, t0: f64, t1: f64, depth: usize) -> Result<C64, GeometryError> {
    let len = a.length_between(t0, t1);
    let mid = a.point(0.5 * (t0 + t1));
    let near = (mid - z).norm() < 1.5 * len || (a.point(t0) - z).norm() < len || (a.point(t1) - z).norm() < len;
    if !near {
        return Ok(panel_cauchy_one(a, z, t0, t1));
    }
    if depth > 60 {
        return Err(GeometryError::TooCloseToBoundary((mid - z).norm()));
    }
    let tm = 0.5 * (t0 + t1);
    Ok(adaptive_cauchy_one(a, z, t0, tm, depth + 1)? + adaptive_cauchy_one(a, z, tm, t1, depth + 1)?)
}
