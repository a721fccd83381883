//! Arc covers with their maps, corner sectors and rotations.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalyticArc, AnalyticMap, GeometryError, JordanBoundary, PartitionOfUnity};

const SCAN_ANGLES: usize = 720;
const SCAN_SAMPLES: usize = 64;
const VERIFY_SAMPLES: usize = 256;

/// Open circular sector with vertex `vertex`, directions from `start`
/// counterclockwise through `start + width`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Sector {
    pub vertex: C64,
    pub radius: f64,
    pub start: f64,
    pub width: f64,
}

impl Sector {
    pub fn contains(&self, z: C64) -> bool {
        let v = z - self.vertex;
        let r = v.norm();
        if r == 0.0 || r >= self.radius {
            return false;
        }
        if self.width >= 2.0 * PI {
            return true;
        }
        let off = (v.arg() - self.start).rem_euclid(2.0 * PI);
        off > 0.0 && off < self.width
    }
}

/// Angular data of a sector without its vertex, as given by a scenario.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SectorSpec {
    pub start: f64,
    pub width: f64,
    #[serde(default)]
    pub radius: Option<f64>,
}

/// Corner `k` joins the end of `J_k` to the start of `J_{k+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct CornerData {
    pub index: usize,
    pub z: C64,
    pub radius: f64,
    pub theta: f64,
    /// Sector around `J_k`, then around `J_{k+1}`.
    pub sectors: [Sector; 2],
    pub epsilon: f64,
    pub clearance: f64,
}

impl CornerData {
    /// `R_k`: rotation by `theta` about the corner.
    pub fn rotate(&self, z: C64) -> C64 {
        self.z + C64::from_polar(1.0, self.theta) * (z - self.z)
    }

    pub fn rotation_factor(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }
}

#[derive(Clone, Debug)]
pub struct AdmissibleSystem {
    boundary: JordanBoundary,
    maps: Vec<AnalyticMap>,
    assignment: Vec<Range<usize>>,
    alpha: f64,
    margins: Vec<f64>,
    sector_overrides: Vec<Option<[SectorSpec; 2]>>,
    corners: Vec<CornerData>,
}

impl AdmissibleSystem {
    pub fn new(
        boundary: JordanBoundary,
        maps: Vec<AnalyticMap>,
        assignment: Vec<Range<usize>>,
        alpha: f64,
        margins: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let n = maps.len();
        if n == 0 || assignment.len() != n || margins.len() != n {
            return Err(GeometryError::BadAssignment(format!(
                "{} maps, {} arc ranges, {} margins",
                n,
                assignment.len(),
                margins.len()
            )));
        }
        let mut next = 0;
        for r in &assignment {
            if r.start != next || r.end <= r.start {
                return Err(GeometryError::BadAssignment(format!("range {r:?} does not continue at {next}")));
            }
            next = r.end;
        }
        if next != boundary.arcs().len() {
            return Err(GeometryError::BadAssignment(format!("ranges cover {next} of {} arcs", boundary.arcs().len())));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(GeometryError::BadAssignment(format!("alpha {alpha} outside (0, 1]")));
        }
        Ok(AdmissibleSystem { boundary, maps, assignment, alpha, margins, sector_overrides: vec![None; n], corners: Vec::new() })
    }

    pub fn with_sector_overrides(mut self, overrides: Vec<Option<[SectorSpec; 2]>>) -> Self {
        self.sector_overrides = overrides;
        self
    }

    pub fn boundary(&self) -> &JordanBoundary {
        &self.boundary
    }

    pub fn maps(&self) -> &[AnalyticMap] {
        &self.maps
    }

    pub fn map(&self, k: usize) -> &AnalyticMap {
        &self.maps[k]
    }

    pub fn n(&self) -> usize {
        self.maps.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn margins(&self) -> &[f64] {
        &self.margins
    }

    pub fn assignment(&self) -> &[Range<usize>] {
        &self.assignment
    }

    pub fn corners(&self) -> &[CornerData] {
        &self.corners
    }

    /// Index `k` of the piece `J_k` containing boundary arc `arc`.
    pub fn piece_of_arc(&self, arc: usize) -> usize {
        self.assignment.iter().position(|r| r.contains(&arc)).expect("arc in assignment")
    }

    /// Number of corners: one per junction of consecutive pieces, none when
    /// a single piece covers the boundary.
    pub fn num_corners(&self) -> usize {
        if self.n() == 1 {
            0
        } else {
            self.n()
        }
    }

    /// Last arc of `J_k` (ends at corner `k`).
    pub fn arc_in(&self, k: usize) -> usize {
        self.assignment[k].end - 1
    }

    /// First arc of `J_{k+1}` (starts at corner `k`).
    pub fn arc_out(&self, k: usize) -> usize {
        self.assignment[(k + 1) % self.n()].start
    }

    pub fn corner_point(&self, k: usize) -> C64 {
        self.boundary.arcs()[self.arc_in(k)].end()
    }

    /// Interior angle at corner `k`.
    pub fn corner_angle(&self, k: usize) -> f64 {
        self.boundary.corner_angles()[self.arc_in(k)]
    }

    /// Directions at corner `k` pointing into `J_k` and into `J_{k+1}`.
    pub fn corner_directions(&self, k: usize) -> (C64, C64) {
        let arcs = self.boundary.arcs();
        let d_in = -arcs[self.arc_in(k)].derivative(1.0);
        let d_out = arcs[self.arc_out(k)].derivative(0.0);
        (d_in / d_in.norm(), d_out / d_out.norm())
    }

    /// The two sectors at corner `k` for disk radius `r`.
    pub fn sectors(&self, k: usize, r: f64) -> [Sector; 2] {
        let z = self.corner_point(k);
        if let Some(spec) = self.sector_overrides.get(k).copied().flatten() {
            return spec.map(|s| Sector { vertex: z, radius: s.radius.unwrap_or(2.0 * r), start: s.start, width: s.width });
        }
        let a = self.corner_angle(k);
        let (_, d_out) = self.corner_directions(k);
        let margin = (a / 8.0).min(0.05);
        let b = d_out.arg();
        [
            Sector { vertex: z, radius: 2.0 * r, start: b + 0.5 * a, width: 0.5 * a + PI - margin },
            Sector { vertex: z, radius: 2.0 * r, start: b - PI + margin, width: PI - margin + 0.5 * a },
        ]
    }

    /// Parameter on the arc ending at corner `k` where the distance to the
    /// corner first reaches `r`, scanning back from the corner.
    pub fn split_in(&self, k: usize, r: f64) -> Option<f64> {
        let arc = &self.boundary.arcs()[self.arc_in(k)];
        crossing(arc, self.corner_point(k), r, true)
    }

    /// Same for the arc starting at corner `k`.
    pub fn split_out(&self, k: usize, r: f64) -> Option<f64> {
        let arc = &self.boundary.arcs()[self.arc_out(k)];
        crossing(arc, self.corner_point(k), r, false)
    }

    /// Find the rotation `R_k` for every corner, using the partition's disk radii.
    pub fn with_rotations(mut self, partition: &PartitionOfUnity) -> Result<Self, GeometryError> {
        let corners = (0..self.num_corners())
            .map(|k| build_rotation(&self, k, partition.radius(k)))
            .collect::<Result<Vec<_>, _>>()?;
        self.corners = corners;
        Ok(self)
    }

    /// Same geometry with different maps (corners are kept).
    pub fn with_maps(&self, maps: Vec<AnalyticMap>) -> Result<Self, GeometryError> {
        if maps.len() != self.maps.len() {
            return Err(GeometryError::BadAssignment("map count changed".into()));
        }
        let mut s = self.clone();
        s.maps = maps;
        Ok(s)
    }
}

fn crossing(arc: &AnalyticArc, corner: C64, r: f64, from_end: bool) -> Option<f64> {
    let m = 512;
    let at = |j: usize| if from_end { 1.0 - j as f64 / m as f64 } else { j as f64 / m as f64 };
    let f = |t: f64| (arc.point(t) - corner).norm() - r;
    let mut prev = at(0);
    for j in 1..=m {
        let t = at(j);
        if f(t) >= 0.0 {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo).abs() < 1e-16 {
                    break;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = t;
    }
    None
}

/// Scan rotation angles for corner `k`; keep the first angle of maximal
/// clearance whose rotated copy of `J_k^+` passes the dense check.
pub fn build_rotation(system: &AdmissibleSystem, k: usize, r: f64) -> Result<CornerData, GeometryError> {
    let z = system.corner_point(k);
    let sectors = system.sectors(k, r);
    let t_plus = system.split_in(k, r).ok_or(GeometryError::EmptySplit(k))?;
    let arc = &system.boundary().arcs()[system.arc_in(k)];
    let n = system.n();
    let (phi_a, phi_b) = (system.map(k), system.map((k + 1) % n));
    let boundary = system.boundary();

    let samples = |m: usize| -> Vec<C64> { (1..=m).map(|j| arc.point(1.0 - (j as f64 / m as f64) * (1.0 - t_plus))).collect() };
    let clearance = |theta: f64, pts: &[C64]| -> Option<f64> {
        let rot = C64::from_polar(1.0, theta);
        let mut worst = f64::INFINITY;
        for p in pts {
            let xi = z + rot * (p - z);
            if !(sectors[0].contains(xi) && sectors[1].contains(xi)) {
                return None;
            }
            if phi_a.eval(xi).norm() <= 1.0 || phi_b.eval(xi).norm() <= 1.0 {
                return None;
            }
            if boundary.contains(xi) {
                return None;
            }
            let d = boundary.distance(xi);
            if d <= 1e-10 {
                return None;
            }
            worst = worst.min(d / (xi - z).norm());
        }
        Some(worst)
    };

    let coarse = samples(SCAN_SAMPLES);
    let scores: Vec<Option<f64>> = (0..SCAN_ANGLES)
        .into_par_iter()
        .map(|j| clearance(2.0 * PI * j as f64 / SCAN_ANGLES as f64, &coarse))
        .collect();
    let mut order: Vec<(usize, f64)> = scores.iter().enumerate().filter_map(|(j, s)| s.map(|v| (j, v))).collect();
    // stable sort keeps scan order among equal clearances
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let dense = samples(VERIFY_SAMPLES);
    for (j, _) in order {
        let theta = 2.0 * PI * j as f64 / SCAN_ANGLES as f64;
        if let Some(c) = clearance(theta, &dense) {
            return Ok(CornerData { index: k, z, radius: r, theta, sectors, epsilon: r, clearance: c });
        }
    }
    Err(GeometryError::NoValidRotation(k))
}
