use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::DecompositionError;
use crate::geometry::{build_partition, AdmissibleSystem, AnalyticArc, AnalyticMap, PartitionOfUnity};
use crate::transforms::{build_quadrature_with_breaks, QuadratureRule};

/// Everything needed to apply `F_k`, `G_k^±` and assemble the remainder.
#[derive(Clone, Debug)]
pub struct DecompositionPlan {
    pub system: AdmissibleSystem,
    pub partition: PartitionOfUnity,
    pub quadrature: QuadratureRule,
    pub arcs: Arc<Vec<AnalyticArc>>,
    pub maps: Vec<Arc<AnalyticMap>>,
    /// Panels of `J_k`.
    pub piece_panels: Vec<Vec<usize>>,
    /// Per corner `k`: panels of `J_k^+` (end of `J_k`).
    pub plus_panels: Vec<Vec<usize>>,
    /// Per corner `k`: panels of `J_{k+1}^-` (start of `J_{k+1}`).
    pub minus_panels: Vec<Vec<usize>>,
    /// Per corner: `R_k(J_k^+)` as an arc.
    pub rotated_arcs: Vec<AnalyticArc>,
    /// Per corner: (rotation factor, shift) of `R_k`.
    pub motions: Vec<(C64, C64)>,
    /// Per corner: `ν_k` at every node.
    pub nu: Vec<Vec<f64>>,
    /// Piece index of every node.
    pub node_piece: Vec<usize>,
    /// Per corner: parameters of the disk boundary on the incoming and outgoing arc.
    pub splits: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub pieces: usize,
    pub corners: usize,
    pub nodes: usize,
    pub panels: usize,
    pub corner_radii: Vec<f64>,
    pub rotation_angles: Vec<f64>,
    pub rotation_clearances: Vec<f64>,
    pub plus_panel_counts: Vec<usize>,
    pub minus_panel_counts: Vec<usize>,
}

/// Panel breakpoints where the corner bumps change form: arc length `0.5 r`
/// and `0.9 r` from each corner and the disk boundary itself.
pub fn plan_breakpoints(system: &AdmissibleSystem, partition: &PartitionOfUnity) -> Vec<(usize, f64)> {
    let arcs = system.boundary().arcs();
    let mut out = Vec::new();
    for k in 0..system.num_corners() {
        let r = partition.radius(k);
        let (ai, ao) = (system.arc_in(k), system.arc_out(k));
        let (li, lo) = (arcs[ai].length(), arcs[ao].length());
        for f in [0.5, 0.9] {
            if f * r < li {
                out.push((ai, arcs[ai].param_at_length(li - f * r)));
            }
            if f * r < lo {
                out.push((ao, arcs[ao].param_at_length(f * r)));
            }
        }
        if let Some(t) = system.split_in(k, r) {
            out.push((ai, t));
        }
        if let Some(t) = system.split_out(k, r) {
            out.push((ao, t));
        }
    }
    out
}

/// Partition, rotations, graded quadrature with breakpoints, and the plan.
/// `base_panels` is the panel count before grading and breakpoints.
pub fn build_plan(system: &AdmissibleSystem, fraction: f64, base_panels: usize, depth: usize) -> Result<DecompositionPlan, DecompositionError> {
    let partition = build_partition(system, fraction)?;
    let ready = system.corners().len() == system.num_corners()
        && system.corners().iter().zip(partition.radii()).all(|(c, r)| c.radius == *r);
    let system = if ready { system.clone() } else { system.clone().with_rotations(&partition)? };
    let breaks = plan_breakpoints(&system, &partition);
    let quadrature = build_quadrature_with_breaks(system.boundary(), base_panels, depth, &breaks)?;
    plan_decomposition(&system, &partition, &quadrature)
}

pub fn plan_decomposition(
    system: &AdmissibleSystem,
    partition: &PartitionOfUnity,
    quadrature: &QuadratureRule,
) -> Result<DecompositionPlan, DecompositionError> {
    let nc = system.num_corners();
    if system.corners().len() != nc {
        return Err(DecompositionError::MissingRotations(nc - system.corners().len().min(nc)));
    }
    let arcs = Arc::new(system.boundary().arcs().to_vec());
    let n = system.n();
    let tol = 1e-13;

    let piece_panels: Vec<Vec<usize>> = (0..n)
        .map(|k| (0..quadrature.panels.len()).filter(|&p| system.assignment()[k].contains(&quadrature.panels[p].arc)).collect())
        .collect();
    let node_piece: Vec<usize> = quadrature.nodes.iter().map(|nd| system.piece_of_arc(nd.arc)).collect();

    let min_panel = quadrature.min_panel_length(&arcs);
    let mut plus_panels = Vec::with_capacity(nc);
    let mut minus_panels = Vec::with_capacity(nc);
    let mut rotated_arcs = Vec::with_capacity(nc);
    let mut motions = Vec::with_capacity(nc);
    let mut nu = Vec::with_capacity(nc);
    let mut splits = Vec::with_capacity(nc);
    for k in 0..nc {
        let r = partition.radius(k);
        if r < min_panel {
            return Err(DecompositionError::EmptySplit(k));
        }
        let (ai, ao) = (system.arc_in(k), system.arc_out(k));
        let t_in = system.split_in(k, r).ok_or(DecompositionError::EmptySplit(k))?;
        let t_out = system.split_out(k, r).ok_or(DecompositionError::EmptySplit(k))?;
        let plus = quadrature.panels_within(ai, t_in - tol, 1.0);
        let minus = quadrature.panels_within(ao, 0.0, t_out + tol);
        if plus.is_empty() || minus.is_empty() {
            return Err(DecompositionError::EmptySplit(k));
        }
        let values: Vec<f64> = quadrature.nodes.iter().map(|nd| partition.nu(system, k, nd.arc, nd.t)).collect();
        for (i, v) in values.iter().enumerate() {
            if *v != 0.0 {
                let p = quadrature.nodes[i].panel;
                if !plus.contains(&p) && !minus.contains(&p) {
                    return Err(DecompositionError::MisalignedSplit(k));
                }
            }
        }
        let corner = &system.corners()[k];
        let rot = corner.rotation_factor();
        let shift = corner.z - rot * corner.z;
        rotated_arcs.push(arcs[ai].sub_arc(t_in, 1.0)?.transformed(rot, shift));
        motions.push((rot, shift));
        plus_panels.push(plus);
        minus_panels.push(minus);
        nu.push(values);
        splits.push((t_in, t_out));
    }
    let maps = system.maps().iter().map(|m| Arc::new(m.clone())).collect();
    Ok(DecompositionPlan {
        system: system.clone(),
        partition: partition.clone(),
        quadrature: quadrature.clone(),
        arcs,
        maps,
        piece_panels,
        plus_panels,
        minus_panels,
        rotated_arcs,
        motions,
        nu,
        node_piece,
        splits,
    })
}

impl DecompositionPlan {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn num_corners(&self) -> usize {
        self.motions.len()
    }

    pub fn len(&self) -> usize {
        self.quadrature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quadrature.is_empty()
    }

    pub fn points(&self) -> Vec<C64> {
        self.quadrature.points()
    }

    /// Samples of `f` at the nodes.
    pub fn sample(&self, f: impl Fn(C64) -> C64) -> Vec<C64> {
        self.quadrature.nodes.iter().map(|nd| f(nd.z)).collect()
    }

    /// Nodes moved a distance `offset` along the inward normal, every
    /// `stride`-th node, keeping those that land inside.
    pub fn inward_points(&self, offset: f64, stride: usize) -> Vec<C64> {
        let b = self.system.boundary();
        self.quadrature
            .nodes
            .iter()
            .step_by(stride.max(1))
            .filter_map(|nd| {
                let d = self.arcs[nd.arc].derivative(nd.t);
                let z = nd.z + C64::new(0.0, 1.0) * d / d.norm() * offset;
                (b.contains(z) && b.distance(z) > 0.5 * offset).then_some(z)
            })
            .collect()
    }

    /// Nodes of `J_k^+` for corner `k`.
    pub fn plus_nodes(&self, k: usize) -> Vec<usize> {
        self.plus_panels[k].iter().flat_map(|&p| self.quadrature.panel_range(p)).collect()
    }

    pub fn summary(&self) -> PlanSummary {
        let corners = self.system.corners();
        PlanSummary {
            pieces: self.n(),
            corners: self.num_corners(),
            nodes: self.len(),
            panels: self.quadrature.panels.len(),
            corner_radii: self.partition.radii().to_vec(),
            rotation_angles: corners.iter().map(|c| c.theta).collect(),
            rotation_clearances: corners.iter().map(|c| c.clearance).collect(),
            plus_panel_counts: self.plus_panels.iter().map(|v| v.len()).collect(),
            minus_panel_counts: self.minus_panels.iter().map(|v| v.len()).collect(),
        }
    }
}
