//! Composite Gauss-Legendre rules on piecewise-analytic boundaries.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::gauss::{gl16, ORDER};
use super::TransformError;
use crate::geometry::{AnalyticArc, JordanBoundary};

pub const MAX_GRADING_DEPTH: usize = 30;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Panel {
    pub arc: usize,
    pub t0: f64,
    pub t1: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadNode {
    pub arc: usize,
    pub panel: usize,
    pub t: f64,
    pub z: C64,
    /// Complex weight, including d gamma / dt.
    pub w: C64,
}

/// Panels in boundary order, `ORDER` nodes each.
#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub panels: Vec<Panel>,
    pub nodes: Vec<QuadNode>,
}

/// Gauss nodes of `[t0, t1]` on `arc`: (t, point, weight).
pub fn panel_nodes(arc: &AnalyticArc, t0: f64, t1: f64) -> [(f64, C64, C64); ORDER] {
    let (x, w) = gl16();
    let h = 0.5 * (t1 - t0);
    std::array::from_fn(|j| {
        let t = t0 + h * (x[j] + 1.0);
        (t, arc.point(t), arc.derivative(t) * (w[j] * h))
    })
}

impl QuadratureRule {
    pub fn from_panels(arcs: &[AnalyticArc], panels: Vec<Panel>) -> Self {
        let mut nodes = Vec::with_capacity(panels.len() * ORDER);
        for (p, pan) in panels.iter().enumerate() {
            for (t, z, w) in panel_nodes(&arcs[pan.arc], pan.t0, pan.t1) {
                nodes.push(QuadNode { arc: pan.arc, panel: p, t, z, w });
            }
        }
        QuadratureRule { panels, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn points(&self) -> Vec<C64> {
        self.nodes.iter().map(|n| n.z).collect()
    }

    pub fn weights(&self) -> Vec<C64> {
        self.nodes.iter().map(|n| n.w).collect()
    }

    /// Node indices of panel `p`.
    pub fn panel_range(&self, p: usize) -> std::ops::Range<usize> {
        p * ORDER..(p + 1) * ORDER
    }

    /// Sum of weights times samples.
    pub fn integrate(&self, values: &[C64]) -> C64 {
        self.nodes.iter().zip(values).map(|(n, v)| n.w * v).sum()
    }

    /// Smallest panel length (arc length).
    pub fn min_panel_length(&self, arcs: &[AnalyticArc]) -> f64 {
        self.panels.iter().map(|p| arcs[p.arc].length_between(p.t0, p.t1)).fold(f64::INFINITY, f64::min)
    }

    /// Panels whose parameter range lies inside `[t0, t1]` on `arc`.
    pub fn panels_within(&self, arc: usize, t0: f64, t1: f64) -> Vec<usize> {
        let tol = 1e-14;
        (0..self.panels.len())
            .filter(|&p| {
                let q = self.panels[p];
                q.arc == arc && q.t0 >= t0 - tol && q.t1 <= t1 + tol
            })
            .collect()
    }
}

/// Composite rule with `base_panels` panels in total (shared among arcs by
/// length, at least two each), graded dyadically towards every corner until
/// the corner panel spans at most `2^-depth` of its arc's parameter range.
pub fn build_quadrature(boundary: &JordanBoundary, base_panels: usize, depth: usize) -> Result<QuadratureRule, TransformError> {
    build_quadrature_with_breaks(boundary, base_panels, depth, &[])
}

/// As [`build_quadrature`], also splitting panels at the given `(arc, t)` breakpoints.
pub fn build_quadrature_with_breaks(
    boundary: &JordanBoundary,
    base_panels: usize,
    depth: usize,
    breaks: &[(usize, f64)],
) -> Result<QuadratureRule, TransformError> {
    if depth > MAX_GRADING_DEPTH {
        return Err(TransformError::GradingTooDeep(depth));
    }
    let arcs = boundary.arcs();
    let m = arcs.len();
    if base_panels < 2 * m {
        return Err(TransformError::TooFewPanels(base_panels, m));
    }
    let lengths: Vec<f64> = arcs.iter().map(|a| a.length()).collect();
    let total: f64 = lengths.iter().sum();
    let mut counts: Vec<usize> = lengths.iter().map(|l| ((base_panels as f64 * l / total).round() as usize).max(2)).collect();
    // keep the requested total where rounding drifted
    while counts.iter().sum::<usize>() > base_panels && counts.iter().any(|&c| c > 2) {
        let i = (0..m).filter(|&i| counts[i] > 2).max_by(|&a, &b| counts[a].cmp(&counts[b])).unwrap();
        counts[i] -= 1;
    }
    while counts.iter().sum::<usize>() < base_panels {
        let i = (0..m).max_by(|&a, &b| (lengths[a] / counts[a] as f64).total_cmp(&(lengths[b] / counts[b] as f64))).unwrap();
        counts[i] += 1;
    }

    let mut panels = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        let corner_start = !boundary.is_smooth_junction((i + m - 1) % m);
        let corner_end = !boundary.is_smooth_junction(i);
        let mut edges: Vec<f64> = (0..=c).map(|j| j as f64 / c as f64).collect();
        let fine = 0.5f64.powi(depth as i32);
        if corner_start {
            let mut e = edges[1];
            while e > fine * (1.0 + 1e-12) {
                e *= 0.5;
                edges.push(e);
            }
        }
        if corner_end {
            let mut e = 1.0 - edges[c - 1];
            while e > fine * (1.0 + 1e-12) {
                e *= 0.5;
                edges.push(1.0 - e);
            }
        }
        for &(a, t) in breaks {
            if a == i && t > 0.0 && t < 1.0 {
                edges.push(t);
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        for w in edges.windows(2) {
            panels.push(Panel { arc: i, t0: w[0], t1: w[1] });
        }
    }
    Ok(QuadratureRule::from_panels(arcs, panels))
}
