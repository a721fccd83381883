use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DecompositionError, DecompositionPlan};
use crate::transforms::{CauchySum, CauchyTerm, DiscreteOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

const IDENTITY_MOTION: (C64, C64) = (C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 });

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

fn check_density(plan: &DecompositionPlan, f: &[C64]) -> Result<(), DecompositionError> {
    if f.len() != plan.len() {
        return Err(DecompositionError::DensityLength(f.len(), plan.len()));
    }
    Ok(())
}

fn check_piece(plan: &DecompositionPlan, k: usize) -> Result<(), DecompositionError> {
    if k >= plan.n() {
        return Err(DecompositionError::IndexOutOfRange(k, plan.n()));
    }
    Ok(())
}

fn weighted(f: &[C64], nu: &[f64]) -> Vec<C64> {
    f.iter().zip(nu).map(|(v, s)| v * *s).collect()
}

/// `F_k(f)`, without the `1 / (2 pi i)` factor.
pub fn apply_fk(plan: &DecompositionPlan, f: &[C64], k: usize) -> Result<CauchySum, DecompositionError> {
    check_density(plan, f)?;
    check_piece(plan, k)?;
    let q = &plan.quadrature;
    let map = Some(plan.maps[k].clone());
    let mut terms = vec![CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.piece_panels[k], f, IDENTITY_MOTION, map.clone(), 1.0)];
    let nc = plan.num_corners();
    if nc > 0 {
        let out = k;
        let inc = (k + nc - 1) % nc;
        let psi = weighted(f, &plan.nu[out]);
        terms.push(CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.plus_panels[out], &psi, plan.motions[out], map.clone(), -1.0));
        let psi = weighted(f, &plan.nu[inc]);
        terms.push(CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.plus_panels[inc], &psi, plan.motions[inc], map, 1.0));
    }
    Ok(CauchySum::new(terms))
}

/// `G_k^+(f)` (in the variable of `φ_k`) or `G_k^-(f)` (in the variable of
/// `φ_{k+1}`) for corner `k`.
pub fn apply_gk(plan: &DecompositionPlan, f: &[C64], k: usize, side: Side) -> Result<CauchySum, DecompositionError> {
    check_density(plan, f)?;
    if k >= plan.num_corners() {
        return Err(DecompositionError::IndexOutOfRange(k, plan.num_corners()));
    }
    let q = &plan.quadrature;
    let psi = weighted(f, &plan.nu[k]);
    let terms = match side {
        Side::Plus => {
            let map = Some(plan.maps[k].clone());
            vec![
                CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.plus_panels[k], &psi, IDENTITY_MOTION, map.clone(), 1.0),
                CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.plus_panels[k], &psi, plan.motions[k], map, -1.0),
            ]
        }
        Side::Minus => {
            let map = Some(plan.maps[(k + 1) % plan.n()].clone());
            vec![
                CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.minus_panels[k], &psi, IDENTITY_MOTION, map.clone(), 1.0),
                CauchyTerm::from_rule(plan.arcs.clone(), q, &plan.plus_panels[k], &psi, plan.motions[k], map, 1.0),
            ]
        }
    };
    Ok(CauchySum::new(terms))
}

/// The plain Cauchy integral of `f` over the whole boundary (no normalization).
pub fn cauchy_sum(plan: &DecompositionPlan, f: &[C64]) -> Result<CauchySum, DecompositionError> {
    check_density(plan, f)?;
    let all: Vec<usize> = (0..plan.quadrature.panels.len()).collect();
    Ok(CauchySum::new(vec![CauchyTerm::from_rule(plan.arcs.clone(), &plan.quadrature, &all, f, IDENTITY_MOTION, None, 1.0)]))
}

/// `(2 pi i)^{-1} Σ F_k(φ_k(z))`.
pub fn reconstruct(plan: &DecompositionPlan, fk: &[CauchySum], z: C64) -> Result<C64, DecompositionError> {
    let mut s = C64::new(0.0, 0.0);
    for (k, term) in fk.iter().enumerate() {
        s += term.eval(plan.maps[k].eval(z))?;
    }
    Ok(s / two_pi_i())
}

/// Rows of the remainder operator at arbitrary targets in the closed domain.
///
/// With `G_k` the kernel of `φ_k`, row `z` applied to `f` gives
/// `(2 pi i)^{-1} ( -Σ_k ∫_{J_k} G_k(ζ, z) f dζ
///   + Σ_k ∫_{R_k J_k^+} (G_k - G_{k+1})(ξ, z) (ν_k f)(R_k^{-1} ξ) dξ )`,
/// which equals `C f(z) - L f(z)` for the plain Cauchy integral `C`.
pub fn remainder_rows(plan: &DecompositionPlan, targets: &[C64]) -> Result<DiscreteOperator, DecompositionError> {
    let q = &plan.quadrature;
    let n = plan.n();
    let nodes = &q.nodes;
    let m = nodes.len();
    let maps = &plan.maps;

    // map values at sources, rotated sources and targets
    let src: Vec<(C64, C64)> = (0..m).into_par_iter().map(|j| maps[plan.node_piece[j]].value_and_derivative(nodes[j].z)).collect();
    let mut rotated: Vec<(usize, usize, C64, C64, [(C64, C64); 2])> = Vec::new();
    for c in 0..plan.num_corners() {
        let (rot, shift) = plan.motions[c];
        for j in plan.plus_nodes(c) {
            let nuv = plan.nu[c][j];
            if nuv == 0.0 {
                continue;
            }
            let xi = rot * nodes[j].z + shift;
            let vals = [maps[c].value_and_derivative(xi), maps[(c + 1) % n].value_and_derivative(xi)];
            rotated.push((c, j, xi, rot * nodes[j].w * nuv, vals));
        }
    }
    let tgt: Vec<Vec<C64>> = targets.par_iter().map(|z| maps.iter().map(|p| p.eval(*z)).collect()).collect();

    let rows: Result<Vec<Vec<C64>>, DecompositionError> = (0..targets.len())
        .into_par_iter()
        .map(|i| {
            let z = targets[i];
            let mut row = vec![C64::new(0.0, 0.0); m];
            for j in 0..m {
                let k = plan.node_piece[j];
                let (pz, dz) = src[j];
                let g = maps[k].kernel_from_values(nodes[j].z, pz, dz, z, tgt[i][k])?;
                row[j] -= g * nodes[j].w;
            }
            for (c, j, xi, wt, vals) in &rotated {
                let c1 = (c + 1) % n;
                let ga = maps[*c].kernel_from_values(*xi, vals[0].0, vals[0].1, z, tgt[i][*c])?;
                let gb = maps[c1].kernel_from_values(*xi, vals[1].0, vals[1].1, z, tgt[i][c1])?;
                row[*j] += (ga - gb) * wt;
            }
            let s = two_pi_i();
            Ok(row.into_iter().map(|v| v / s).collect())
        })
        .collect();
    let rows = rows?;
    let matrix = DMatrix::from_fn(targets.len(), m, |i, j| rows[i][j]);
    let op = DiscreteOperator { matrix, row_points: targets.to_vec(), col_points: q.points(), col_weights: q.weights() };
    op.check_finite()?;
    Ok(op)
}

/// The remainder matrix `K_N` on the boundary nodes.
pub fn assemble_remainder(plan: &DecompositionPlan) -> Result<DiscreteOperator, DecompositionError> {
    remainder_rows(plan, &plan.points())
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub fk: Vec<CauchySum>,
    pub residual_points: Vec<C64>,
    /// `C f - (2 pi i)^{-1} Σ F_k(f)∘φ_k` at `residual_points`.
    pub residual_samples: Vec<C64>,
    pub sup_residual: f64,
}

/// Apply every `F_k` to `f` and sample the residual at `points` inside the domain.
pub fn decompose(plan: &DecompositionPlan, f: &[C64], points: &[C64]) -> Result<DecompositionResult, DecompositionError> {
    let fk = (0..plan.n()).map(|k| apply_fk(plan, f, k)).collect::<Result<Vec<_>, _>>()?;
    let cf = cauchy_sum(plan, f)?;
    let residual_samples = points
        .par_iter()
        .map(|z| Ok(cf.eval(*z)? / two_pi_i() - reconstruct(plan, &fk, *z)?))
        .collect::<Result<Vec<C64>, DecompositionError>>()?;
    let sup_residual = residual_samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(DecompositionResult { fk, residual_points: points.to_vec(), residual_samples, sup_residual })
}
