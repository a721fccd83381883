use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::ExtensionError;
use crate::geometry::AdmissibleSystem;

const CRITICAL_TOL: f64 = 1e-8;
const GLUE_TOL: f64 = 1e-10;
const MIN_SEPARATION: f64 = 1e-3;
const MIN_GRID: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Critical,
    Glued,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExceptionalPoint {
    pub z: C64,
    pub kind: PointKind,
    pub partner: Option<C64>,
    pub order: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExceptionalSet {
    pub points: Vec<ExceptionalPoint>,
    pub warning: Option<String>,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn with_order(&self, order: usize) -> Self {
        let mut s = self.clone();
        for p in &mut s.points {
            p.order = order;
        }
        s
    }

    /// Every point at which jets are prescribed (both ends of glued pairs).
    pub fn jet_points(&self) -> Vec<(C64, usize)> {
        let mut out = Vec::new();
        for p in &self.points {
            out.push((p.z, p.order));
            if let Some(q) = p.partner {
                out.push((q, p.order));
            }
        }
        out
    }
}

fn interior_grid(system: &AdmissibleSystem, g: usize) -> (Vec<Option<C64>>, f64) {
    let (x0, x1, y0, y1) = system.boundary().bounding_box();
    let h = ((x1 - x0) / g as f64).max((y1 - y0) / g as f64);
    let cells: Vec<Option<C64>> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / g, idx % g);
            let z = C64::new(x0 + (x1 - x0) * (i as f64 + 0.5) / g as f64, y0 + (y1 - y0) * (j as f64 + 0.5) / g as f64);
            (system.boundary().contains(z) && system.boundary().distance(z) > 0.25 * h).then_some(z)
        })
        .collect();
    (cells, h)
}

fn max_derivative(system: &AdmissibleSystem, z: C64) -> f64 {
    system.maps().iter().map(|m| m.derivative(z).norm()).fold(0.0, f64::max)
}

/// Gauss-Newton for a common zero of all `φ_k'`.
fn refine_critical(system: &AdmissibleSystem, seed: C64) -> Option<C64> {
    let mut z = seed;
    for _ in 0..60 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for m in system.maps() {
            let (_, d1, d2) = m.jet(z);
            num += d2.conj() * d1;
            den += d2.norm_sqr();
        }
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        let step = num / den;
        z -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    let inside = system.boundary().contains(z) && system.boundary().distance(z) > 1e-8;
    (inside && max_derivative(system, z) < CRITICAL_TOL).then_some(z)
}

/// Gauss-Newton on `Φ(p) = Φ(q)`.
fn refine_glued(system: &AdmissibleSystem, p0: C64, q0: C64) -> Option<(C64, C64)> {
    let (mut p, mut q) = (p0, q0);
    let maps = system.maps();
    for _ in 0..80 {
        // normal equations of the n x 2 complex system [Φ'(p), -Φ'(q)] d = -r
        let (mut a11, mut a12, mut a22) = (0.0, C64::new(0.0, 0.0), 0.0);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for m in maps {
            let (vp, dp) = m.value_and_derivative(p);
            let (vq, dq) = m.value_and_derivative(q);
            let r = vp - vq;
            let (c1, c2) = (dp, -dq);
            a11 += c1.norm_sqr();
            a12 += c1.conj() * c2;
            a22 += c2.norm_sqr();
            b1 -= c1.conj() * r;
            b2 -= c2.conj() * r;
        }
        let det = a11 * a22 - a12.norm_sqr();
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let dp = (b1 * a22 - a12 * b2) / det;
        let dq = (b2 * a11 - a12.conj() * b1) / det;
        p += dp;
        q += dq;
        if dp.norm() + dq.norm() < 1e-15 {
            break;
        }
    }
    let r = maps.iter().map(|m| (m.eval(p) - m.eval(q)).norm()).fold(0.0, f64::max);
    let b = system.boundary();
    let inside = |z: C64| b.contains(z) && b.distance(z) > 1e-8;
    (r < GLUE_TOL && (p - q).norm() > MIN_SEPARATION && inside(p) && inside(q)).then_some((p, q))
}

/// Critical points of `Φ` and glued pairs, seeded on a `grid x grid` box grid.
pub fn detect_exceptional(system: &AdmissibleSystem, grid: usize) -> Result<ExceptionalSet, ExtensionError> {
    if grid < MIN_GRID {
        return Ok(ExceptionalSet { points: Vec::new(), warning: Some(format!("grid {grid} is too coarse to seed Newton; nothing searched")) });
    }
    let g = grid;
    let (cells, h) = interior_grid(system, g);
    let at = |i: isize, j: isize| -> Option<C64> {
        if i < 0 || j < 0 || i >= g as isize || j >= g as isize {
            None
        } else {
            cells[i as usize * g + j as usize]
        }
    };
    let dvals: Vec<Option<f64>> = cells.par_iter().map(|c| c.map(|z| max_derivative(system, z))).collect();
    let dval = |i: isize, j: isize| -> Option<f64> {
        if i < 0 || j < 0 || i >= g as isize || j >= g as isize {
            None
        } else {
            dvals[i as usize * g + j as usize]
        }
    };

    // strict local minima of max_k |φ_k'|
    let mut seeds = Vec::new();
    for i in 0..g as isize {
        for j in 0..g as isize {
            let (Some(z), Some(v)) = (at(i, j), dval(i, j)) else { continue };
            let mut is_min = true;
            for (di, dj) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                if let Some(u) = dval(i + di, j + dj) {
                    if u <= v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(z);
            }
        }
    }
    let mut points: Vec<ExceptionalPoint> = Vec::new();
    for z in seeds.into_iter().filter_map(|s| refine_critical(system, s)) {
        if points.iter().all(|p| (p.z - z).norm() > 1e-7) {
            points.push(ExceptionalPoint { z, kind: PointKind::Critical, partner: None, order: 2 });
        }
    }

    // glued pairs: far-apart grid points with nearby images
    let pts: Vec<C64> = cells.iter().flatten().copied().collect();
    let images: Vec<Vec<C64>> = pts.par_iter().map(|z| system.maps().iter().map(|m| m.eval(*z)).collect()).collect();
    let lip = dvals.iter().flatten().fold(0.0f64, |a, b| a.max(*b));
    let mut cands: Vec<(f64, usize, usize)> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let pts = &pts;
            let images = &images;
            (a + 1..pts.len()).filter_map(move |b| {
                if (pts[a] - pts[b]).norm() <= 4.0 * h {
                    return None;
                }
                let d = images[a].iter().zip(&images[b]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                (d < 2.0 * h * lip).then_some((d, a, b))
            })
        })
        .collect();
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    cands.truncate(200);
    for (_, a, b) in cands {
        if let Some((p, q)) = refine_glued(system, pts[a], pts[b]) {
            let known = points.iter().any(|e| {
                e.kind == PointKind::Glued
                    && e.partner.is_some_and(|r| ((e.z - p).norm() < 1e-7 && (r - q).norm() < 1e-7) || ((e.z - q).norm() < 1e-7 && (r - p).norm() < 1e-7))
            });
            if !known {
                points.push(ExceptionalPoint { z: p, kind: PointKind::Glued, partner: Some(q), order: 2 });
            }
        }
    }

    let set = ExceptionalSet { points, warning: None };
    let all: Vec<C64> = set.jet_points().into_iter().map(|p| p.0).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let d = (all[i] - all[j]).norm();
            if d > 1e-7 && d < MIN_SEPARATION {
                return Err(ExtensionError::ClusterAmbiguity(all[i], all[j]));
            }
        }
    }
    Ok(set)
}
