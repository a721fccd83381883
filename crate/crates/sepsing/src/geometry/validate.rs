//! Grid checks of the admissibility conditions.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::AdmissibleSystem;
use crate::transforms::holder::holder_seminorm;

/// Margins under this are treated as failures.
pub const MARGIN_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConditionCheck>,
    /// Angular length of each `phi_k(J_k)` (radians).
    pub image_arc_lengths: Vec<f64>,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Grid points of `J_k`: (point, arc, t), endpoints excluded.
fn piece_grid(system: &AdmissibleSystem, k: usize, per_arc: usize) -> Vec<(C64, usize, f64)> {
    let arcs = system.boundary().arcs();
    let mut out = Vec::new();
    for a in system.assignment()[k].clone() {
        for j in 1..per_arc {
            let t = j as f64 / per_arc as f64;
            out.push((arcs[a].point(t), a, t));
        }
    }
    out
}

/// Interior points of the closed domain on a `g x g` box grid plus the boundary.
pub fn closure_grid(system: &AdmissibleSystem, g: usize) -> Vec<C64> {
    let (x0, x1, y0, y1) = system.boundary().bounding_box();
    let cand: Vec<C64> = (0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| C64::new(x0 + (x1 - x0) * (i as f64 + 0.5) / g as f64, y0 + (y1 - y0) * (j as f64 + 0.5) / g as f64))
        .collect();
    let mut pts: Vec<C64> = cand.into_par_iter().filter(|z| system.boundary().contains(*z)).collect();
    pts.extend(system.boundary().sample(g));
    pts
}

/// Points just outside `J_k`, offset along the outward normal.
fn exterior_offsets(system: &AdmissibleSystem, k: usize, per_arc: usize) -> Vec<C64> {
    let arcs = system.boundary().arcs();
    let margin = system.margins()[k];
    let mut out = Vec::new();
    for (p, a, t) in piece_grid(system, k, per_arc) {
        let d = arcs[a].derivative(t);
        let outward = -C64::new(0.0, 1.0) * d / d.norm();
        for f in [0.25, 0.5, 1.0] {
            let q = p + outward * (f * margin);
            if !system.boundary().contains(q) && system.boundary().distance(q) > 0.2 * f * margin {
                out.push(q);
            }
        }
    }
    out
}

pub fn validate_admissible(system: &AdmissibleSystem, grid_density: usize) -> AdmissibilityReport {
    let g = grid_density.max(64);
    let n = system.n();
    let boundary = system.boundary();
    let mut checks = Vec::new();

    // (a) arc cover and corner angles
    let min_angle = (0..system.num_corners()).map(|k| system.corner_angle(k)).fold(PI, f64::min);
    checks.push(ConditionCheck {
        name: "a".into(),
        passed: min_angle > MARGIN_FLOOR && min_angle <= PI,
        margin: min_angle,
        detail: format!("{} pieces over {} arcs; smallest corner angle {:.6}", n, boundary.arcs().len(), min_angle),
    });

    // (b) unimodular on J_k
    let mut worst_b = 0.0f64;
    for k in 0..n {
        for (p, _, _) in piece_grid(system, k, g) {
            worst_b = worst_b.max((system.map(k).eval(p).norm() - 1.0).abs());
        }
    }
    checks.push(ConditionCheck {
        name: "b".into(),
        passed: worst_b < 1e-10,
        margin: worst_b,
        detail: format!("max | |phi_k| - 1 | on J_k = {worst_b:.3e}"),
    });

    // (c) C^{1+alpha} continuation: derivatives consistent and Holder on J_k and beyond
    let closure = closure_grid(system, g.min(96));
    let mut fd_worst = 0.0f64;
    let mut holder_worst = 0.0f64;
    let mut finite = true;
    for k in 0..n {
        let phi = system.map(k);
        for z in closure.iter().step_by((closure.len() / 10).max(1)) {
            fd_worst = fd_worst.max(phi.finite_difference_mismatch(*z));
        }
        let mut pts: Vec<C64> = piece_grid(system, k, g / 2).into_iter().map(|p| p.0).collect();
        pts.extend(exterior_offsets(system, k, g / 8));
        let vals: Vec<C64> = pts.iter().map(|z| phi.derivative(*z)).collect();
        finite &= vals.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        holder_worst = holder_worst.max(holder_seminorm(&pts, &vals, system.alpha()));
    }
    let min_margin = system.margins().iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(ConditionCheck {
        name: "c".into(),
        passed: finite && fd_worst < 1e-8 && holder_worst.is_finite() && min_margin > MARGIN_FLOOR,
        margin: min_margin,
        detail: format!(
            "derivative/finite-difference mismatch {fd_worst:.2e}; discrete C^alpha seminorm of phi' {holder_worst:.4}; continuation margin {min_margin}"
        ),
    });

    // (d) sectors and rotations
    let (d_pass, d_margin, d_detail) = if system.num_corners() == 0 {
        (true, f64::INFINITY, "no corners".to_string())
    } else if system.corners().len() != system.num_corners() {
        (false, 0.0, "rotations not built".to_string())
    } else {
        let m = system.corners().iter().map(|c| c.clearance).fold(f64::INFINITY, f64::min);
        (m > MARGIN_FLOOR, m, format!("min relative clearance of rotated arcs {m:.4}"))
    };
    checks.push(ConditionCheck { name: "d".into(), passed: d_pass, margin: d_margin, detail: d_detail });

    // (e) derivative lower bound on J_k
    let mut min_deriv = f64::INFINITY;
    for k in 0..n {
        for (p, _, _) in piece_grid(system, k, g) {
            min_deriv = min_deriv.min(system.map(k).derivative(p).norm());
        }
    }
    checks.push(ConditionCheck {
        name: "e".into(),
        passed: min_deriv > MARGIN_FLOOR,
        margin: min_deriv,
        detail: format!("min |phi_k'| on J_k = {min_deriv:.6}"),
    });

    // (f) injectivity on J_k, separation from the images of the other arcs
    let corners: Vec<C64> = (0..system.num_corners()).map(|k| system.corner_point(k)).collect();
    let mut f_margin = f64::INFINITY;
    let mut image_arc_lengths = Vec::with_capacity(n);
    for k in 0..n {
        let phi = system.map(k);
        let grid = piece_grid(system, k, g);
        let pts: Vec<C64> = grid.iter().map(|p| p.0).collect();
        let imgs: Vec<C64> = pts.iter().map(|z| phi.eval(*z)).collect();
        let closed: Vec<C64> = system.assignment()[k]
            .clone()
            .flat_map(|a| (0..=g).map(move |j| (a, j as f64 / g as f64)))
            .map(|(a, t)| phi.eval(system.boundary().arcs()[a].point(t)))
            .collect();
        let mut var = 0.0;
        for w in closed.windows(2) {
            var += (w[1] / w[0]).arg();
        }
        image_arc_lengths.push(var.abs());
        let ratio = (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let mut m = f64::INFINITY;
                for j in i + 2..pts.len() {
                    m = m.min((imgs[i] - imgs[j]).norm() / (pts[i] - pts[j]).norm());
                }
                m
            })
            .reduce(|| f64::INFINITY, f64::min);
        f_margin = f_margin.min(ratio);
        for other in 0..n {
            if other == k {
                continue;
            }
            for (p, _, _) in piece_grid(system, other, g) {
                let dc = corners.iter().map(|c| (p - c).norm()).fold(f64::INFINITY, f64::min);
                f_margin = f_margin.min((1.0 - phi.eval(p).norm()) / dc);
            }
        }
    }
    checks.push(ConditionCheck {
        name: "f".into(),
        passed: f_margin > MARGIN_FLOOR,
        margin: f_margin,
        detail: format!(
            "injectivity/separation margin {f_margin:.4e}; image arc lengths {:?}",
            image_arc_lengths.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()
        ),
    });

    // |phi_k| <= 1 on the closed domain, > 1 just outside J_k
    let mut inside_max = 0.0f64;
    let mut outside_min = f64::INFINITY;
    for k in 0..n {
        let phi = system.map(k);
        for z in &closure {
            inside_max = inside_max.max(phi.eval(*z).norm());
        }
        for z in exterior_offsets(system, k, g / 4) {
            outside_min = outside_min.min(phi.eval(z).norm());
        }
    }
    checks.push(ConditionCheck {
        name: "normalization".into(),
        passed: inside_max <= 1.0 + 1e-10 && outside_min > 1.0,
        margin: (outside_min - 1.0).min(1.0 + 1e-10 - inside_max),
        detail: format!("max |phi_k| on closure {inside_max:.12}; min |phi_k| just outside J_k {outside_min:.6}"),
    });

    AdmissibilityReport { checks, image_arc_lengths }
}
