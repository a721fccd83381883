use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::{detect_exceptional, jet_correction, CurveFunction, ExceptionalSet, ExtensionError, FredholmSolver, JetPolynomial};
use crate::decomposition::{apply_fk, assemble_remainder, DecompositionPlan};
use crate::geometry::AdmissibleSystem;
use crate::transforms::{CauchySum, Panel};

const SAFETY: f64 = 1.01;
const MIN_NORM_GRID: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionOptions {
    pub tau: f64,
    /// Relative bound on `‖(I - K) g - f‖∞`.
    pub tolerance: f64,
    pub jet_correction: bool,
    pub orders: Vec<usize>,
    /// Seed grid for exceptional-point detection.
    pub grid: usize,
    /// Grid for the norm certificate.
    pub norm_grid: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions { tau: 1e-8, tolerance: 1e-7, jet_correction: true, orders: vec![2, 4, 8], grid: 64, norm_grid: 256 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttemptRecord {
    pub order: usize,
    pub residual: f64,
    pub obstruction: f64,
    pub cokernel_dim: usize,
    pub correction_degree: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionDiagnostics {
    pub target: String,
    pub nodes: usize,
    pub tau: f64,
    pub sigma: Vec<f64>,
    pub cokernel_dim: usize,
    pub order: usize,
    pub residual: f64,
    pub obstruction: f64,
    pub history: Vec<AttemptRecord>,
    pub exceptional: ExceptionalSet,
}

#[derive(Clone, Debug)]
pub struct PolydiskExtension {
    /// `F_k` without the `1 / (2 pi i)` factor.
    pub terms: Vec<CauchySum>,
    pub correction: JetPolynomial,
    pub norm_bound: f64,
    pub diagnostics: ExtensionDiagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermExport {
    pub sign: f64,
    pub motion: [C64; 2],
    pub panels: Vec<Panel>,
    pub density: Vec<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionExport {
    pub terms: Vec<Vec<TermExport>>,
    pub polynomial: JetPolynomial,
    pub norm_bound: f64,
    pub diagnostics: ExtensionDiagnostics,
}

impl PolydiskExtension {
    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn export(&self) -> ExtensionExport {
        let terms = self
            .terms
            .iter()
            .map(|s| {
                s.terms
                    .iter()
                    .map(|t| {
                        let (rot, shift) = t.motion();
                        TermExport { sign: t.sign(), motion: [rot, shift], panels: t.panels().to_vec(), density: t.density().to_vec() }
                    })
                    .collect()
            })
            .collect();
        ExtensionExport { terms, polynomial: self.correction.clone(), norm_bound: self.norm_bound, diagnostics: self.diagnostics.clone() }
    }
}

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

/// Extension of `target` given a prepared solver for `I - K` and the
/// exceptional set of the plan's system.
pub fn build_extension_with(
    plan: &DecompositionPlan,
    solver: &FredholmSolver,
    target: &CurveFunction,
    opts: &ExtensionOptions,
    exceptional: &ExceptionalSet,
) -> Result<PolydiskExtension, ExtensionError> {
    let system = &plan.system;
    let points = plan.points();
    let values: Vec<C64> = points.par_iter().map(|z| target.pullback(system, *z)).collect();
    let orders: Vec<usize> = if opts.jet_correction && !exceptional.is_empty() { opts.orders.clone() } else { vec![0] };
    let mut history = Vec::new();
    let mut last = None;
    for &order in &orders {
        let correction = if order == 0 { JetPolynomial::zero(system.n()) } else { jet_correction(target, &exceptional.with_order(order), system)? };
        let rhs: Vec<C64> = points
            .iter()
            .zip(&values)
            .map(|(z, v)| {
                let w: Vec<C64> = system.maps().iter().map(|m| m.eval(*z)).collect();
                v - correction.eval(&w)
            })
            .collect();
        let scale = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let sol = solver.solve(&rhs)?;
        history.push(AttemptRecord {
            order,
            residual: sol.full_residual,
            obstruction: sol.obstruction,
            cokernel_dim: sol.cokernel_dim,
            correction_degree: correction.degree(),
        });
        let ok = sol.full_residual <= opts.tolerance * scale;
        last = Some((order, sol, correction));
        if ok {
            break;
        }
    }
    let (order, sol, correction) = last.expect("at least one attempt");
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    if sol.full_residual > opts.tolerance * scale {
        return Err(ExtensionError::NoConvergence { residual: sol.full_residual, cokernel_dim: sol.cokernel_dim, order });
    }
    let terms = (0..plan.n()).map(|k| apply_fk(plan, &sol.g, k)).collect::<Result<Vec<_>, _>>()?;
    let diagnostics = ExtensionDiagnostics {
        target: target.source().to_string(),
        nodes: plan.len(),
        tau: sol.tau,
        sigma: sol.sigma.clone(),
        cokernel_dim: sol.cokernel_dim,
        order,
        residual: sol.full_residual,
        obstruction: sol.obstruction,
        history,
        exceptional: exceptional.clone(),
    };
    let mut ext = PolydiskExtension { terms, correction, norm_bound: 0.0, diagnostics };
    ext.norm_bound = certify_norm_bound(&ext, opts.norm_grid)?;
    Ok(ext)
}

/// Detect exceptional points, solve and assemble with default options.
pub fn build_extension(plan: &DecompositionPlan, target: &CurveFunction, tau: f64) -> Result<PolydiskExtension, ExtensionError> {
    let opts = ExtensionOptions { tau, ..ExtensionOptions::default() };
    let k = assemble_remainder(plan)?;
    let solver = FredholmSolver::new(&k.matrix, tau)?;
    let exceptional = detect_exceptional(&plan.system, opts.grid)?;
    build_extension_with(plan, &solver, target, &opts, &exceptional)
}

/// `(2 pi i)^{-1} Σ F_k(z_k) + P(z)` for `z` in the open polydisk.
pub fn evaluate_extension(ext: &PolydiskExtension, z: &[C64]) -> Result<C64, ExtensionError> {
    if z.len() != ext.n() {
        return Err(ExtensionError::ShapeMismatch(format!("point has {} coordinates, extension has {}", z.len(), ext.n())));
    }
    if let Some((k, r)) = z.iter().map(|v| v.norm()).enumerate().find(|(_, r)| !(*r < 1.0)) {
        return Err(ExtensionError::OutsidePolydisk(k, r));
    }
    let mut s = C64::new(0.0, 0.0);
    for (t, zk) in ext.terms.iter().zip(z) {
        s += t.eval(*zk)?;
    }
    Ok(s / two_pi_i() + ext.correction.eval(z))
}

/// `Σ_k 1.01 max |F_k / (2 pi i)|` over `16 grid` points on the circle of
/// radius `1 - 1/grid`, plus the coefficient norm of the correction.
pub fn certify_norm_bound(ext: &PolydiskExtension, grid: usize) -> Result<f64, ExtensionError> {
    let grid = grid.max(MIN_NORM_GRID);
    let r = 1.0 - 1.0 / grid as f64;
    let m = 16 * grid;
    let pts: Vec<C64> = (0..m).map(|j| C64::from_polar(r, 2.0 * PI * j as f64 / m as f64)).collect();
    let mut total = ext.correction.l1_norm();
    for t in &ext.terms {
        if t.terms.is_empty() {
            continue;
        }
        let sup = t.eval_many(&pts)?.into_iter().map(|v| v.norm()).fold(0.0, f64::max) / (2.0 * PI);
        total += SAFETY * sup;
    }
    Ok(total)
}

/// Interior sample points of the system's domain, kept away from the boundary.
pub fn interior_samples(system: &AdmissibleSystem, count: usize) -> Vec<C64> {
    let b = system.boundary();
    let (x0, x1, y0, y1) = b.bounding_box();
    let diam = (x1 - x0).max(y1 - y0);
    let g = 40;
    let pts: Vec<C64> = (0..g * g)
        .map(|idx| C64::new(x0 + (x1 - x0) * ((idx / g) as f64 + 0.5) / g as f64, y0 + (y1 - y0) * ((idx % g) as f64 + 0.5) / g as f64))
        .filter(|z| b.contains(*z) && b.distance(*z) > 0.02 * diam)
        .collect();
    if pts.len() <= count {
        return pts;
    }
    (0..count).map(|i| pts[i * pts.len() / count]).collect()
}

/// `(max_j |F(Φ(z_j)) - f(Φ(z_j))|, max_j |f(Φ(z_j))|)` over `count` interior points.
pub fn interpolation_error(ext: &PolydiskExtension, system: &AdmissibleSystem, target: &CurveFunction, count: usize) -> Result<(f64, f64), ExtensionError> {
    let pts = interior_samples(system, count);
    let rows: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|z| {
            let w: Vec<C64> = system.maps().iter().map(|m| m.eval(*z)).collect();
            let f = target.pullback(system, *z);
            Ok(((evaluate_extension(ext, &w)? - f).norm(), f.norm()))
        })
        .collect::<Result<_, ExtensionError>>()?;
    Ok(rows.into_iter().fold((0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
}
