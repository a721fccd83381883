//! Smooth partition of unity subordinate to the arc cover and corner disks.

use num_complex::Complex64 as C64;

use super::{AdmissibleSystem, GeometryError};

/// C^3 smoothstep on [0, 1].
pub fn smoothstep7(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let t4 = t * t * t * t;
    t4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
}

/// Corner bump as a function of arc length `s` from the corner, disk radius `r`.
/// Equal to 1 up to `0.5 r`, vanishes from `0.9 r` on.
pub fn corner_bump(s: f64, r: f64) -> f64 {
    1.0 - smoothstep7((s / r - 0.5) / 0.4)
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    n: usize,
    radii: Vec<f64>,
    corners: Vec<C64>,
    /// (arc ending at corner k, arc starting at corner k)
    corner_arcs: Vec<(usize, usize)>,
    piece_of_arc: Vec<usize>,
}

pub fn build_partition(system: &AdmissibleSystem, fraction: f64) -> Result<PartitionOfUnity, GeometryError> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(GeometryError::BadFraction(fraction));
    }
    let arcs = system.boundary().arcs();
    let radii: Vec<f64> = (0..system.num_corners())
        .map(|k| fraction * arcs[system.arc_in(k)].length().min(arcs[system.arc_out(k)].length()))
        .collect();
    build_partition_with_radii(system, radii)
}

pub fn build_partition_with_radii(system: &AdmissibleSystem, radii: Vec<f64>) -> Result<PartitionOfUnity, GeometryError> {
    let arcs = system.boundary().arcs();
    let nc = system.num_corners();
    if radii.len() != nc || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(GeometryError::BadAssignment(format!("{} radii for {} corners", radii.len(), nc)));
    }
    let corners: Vec<C64> = (0..nc).map(|k| system.corner_point(k)).collect();
    let corner_arcs: Vec<(usize, usize)> = (0..nc).map(|k| (system.arc_in(k), system.arc_out(k))).collect();
    let arc_lengths: Vec<f64> = arcs.iter().map(|a| a.length()).collect();

    for i in 0..nc {
        for j in i + 1..nc {
            if (corners[i] - corners[j]).norm() < radii[i] + radii[j] {
                return Err(GeometryError::DisksOverlap(i, j));
            }
        }
    }
    // bump supports (0.9 r of arc length) must stay inside the hosting arc
    let mut used = vec![0.0; arcs.len()];
    for k in 0..nc {
        let (ai, ao) = corner_arcs[k];
        used[ai] += 0.9 * radii[k];
        used[ao] += 0.9 * radii[k];
    }
    for (a, u) in used.iter().enumerate() {
        if *u >= arc_lengths[a] {
            return Err(GeometryError::SupportLeak(format!("corner supports cover arc {a}")));
        }
    }
    // each disk meets only its two adjacent arcs
    for k in 0..nc {
        let (ai, ao) = corner_arcs[k];
        for (a, arc) in arcs.iter().enumerate() {
            if a == ai || a == ao {
                continue;
            }
            if arc.nearest(corners[k]).1 < radii[k] {
                return Err(GeometryError::SupportLeak(format!("disk at corner {k} meets arc {a}")));
            }
        }
    }
    let piece_of_arc = (0..arcs.len()).map(|a| system.piece_of_arc(a)).collect();
    Ok(PartitionOfUnity { n: system.n(), radii, corners, corner_arcs, piece_of_arc })
}

impl PartitionOfUnity {
    pub fn radius(&self, k: usize) -> f64 {
        self.radii[k]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn num_corners(&self) -> usize {
        self.radii.len()
    }

    pub fn corner(&self, k: usize) -> C64 {
        self.corners[k]
    }

    /// `nu_k` at the point with parameter `t` on boundary arc `arc`.
    pub fn nu(&self, system: &AdmissibleSystem, k: usize, arc: usize, t: f64) -> f64 {
        let (ai, ao) = self.corner_arcs[k];
        let a = &system.boundary().arcs()[arc];
        let r = self.radii[k];
        if (a.point(t) - self.corners[k]).norm() >= r {
            return 0.0;
        }
        let mut v = 0.0;
        if arc == ai {
            let s = if t >= 1.0 { 0.0 } else { a.length_between(t, 1.0) };
            v = corner_bump(s, r);
        }
        if arc == ao {
            let s = if t <= 0.0 { 0.0 } else { a.length_between(0.0, t) };
            v = corner_bump(s, r);
        }
        v
    }

    /// `eta_k`: one minus the corner bumps, restricted to `J_k`.
    pub fn eta(&self, system: &AdmissibleSystem, k: usize, arc: usize, t: f64) -> f64 {
        if self.piece_of_arc[arc] != k {
            return 0.0;
        }
        if self.n == 1 {
            return 1.0;
        }
        let nc = self.num_corners();
        let mut v = 1.0;
        for j in 0..nc {
            let (ai, ao) = self.corner_arcs[j];
            if ai == arc || ao == arc {
                v -= self.nu(system, j, arc, t);
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AnalyticArc, AnalyticMap, JordanBoundary};
    use std::f64::consts::PI;

    fn two_circle_lens(c: f64, r: f64) -> AdmissibleSystem {
        let y = (r * r - c * c).sqrt();
        let top = C64::new(0.0, y);
        let bot = C64::new(0.0, -y);
        let a1 = (bot - C64::new(-c, 0.0)).arg();
        let b1 = (top - C64::new(-c, 0.0)).arg();
        let a2 = (top - C64::new(c, 0.0)).arg();
        let b2 = (bot - C64::new(c, 0.0)).arg() + 2.0 * PI;
        let arcs = vec![
            AnalyticArc::circular(C64::new(-c, 0.0), r, a1, b1).unwrap(),
            AnalyticArc::circular(C64::new(c, 0.0), r, a2, b2).unwrap(),
        ];
        let maps = vec![AnalyticMap::parse("z").unwrap(), AnalyticMap::parse("z").unwrap()];
        AdmissibleSystem::new(JordanBoundary::new(arcs).unwrap(), maps, vec![0..1, 1..2], 1.0, vec![0.1, 0.1]).unwrap()
    }

    #[test]
    fn smoothstep_is_c3() {
        assert_eq!(smoothstep7(0.0), 0.0);
        assert_eq!(smoothstep7(1.0), 1.0);
        // first three derivatives vanish at both ends
        let h = 1e-4;
        for &x in &[0.0, 1.0] {
            let d1 = (smoothstep7(x + h) - smoothstep7(x - h)) / (2.0 * h);
            assert!(d1.abs() < 1e-9);
        }
        assert!((smoothstep7(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lens_partition_sums_to_one() {
        let s = two_circle_lens(0.5, 1.2);
        let p = build_partition(&s, 0.25).unwrap();
        assert_eq!(p.num_corners(), 2);
        let m = 2048;
        for arc in 0..2 {
            for j in 0..=m {
                let t = j as f64 / m as f64;
                let mut total = 0.0;
                for k in 0..2 {
                    let e = p.eta(&s, k, arc, t);
                    let v = p.nu(&s, k, arc, t);
                    assert!((-1e-15..=1.0 + 1e-15).contains(&e) && (0.0..=1.0).contains(&v));
                    total += e + v;
                }
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
        // eta vanishes at the corners, nu is one there
        assert!(p.eta(&s, 0, 0, 1.0).abs() < 1e-15);
        assert_eq!(p.nu(&s, 0, 0, 1.0), 1.0);
        assert_eq!(p.nu(&s, 0, 1, 0.0), 1.0);
        assert_eq!(p.nu(&s, 1, 0, 0.0), 1.0);
    }

    #[test]
    fn thin_lens_overlaps() {
        let s = two_circle_lens(0.9, 1.0);
        assert!(matches!(build_partition(&s, 0.5), Err(GeometryError::DisksOverlap(0, 1))));
        assert!(build_partition(&s, 0.2).is_ok());
        assert!(matches!(build_partition(&s, 0.6), Err(GeometryError::BadFraction(_))));
    }

    #[test]
    fn single_piece_is_trivial() {
        let arcs = (0..4)
            .map(|k| AnalyticArc::circular(C64::new(0.0, 0.0), 1.0, k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0).unwrap())
            .collect();
        let s = AdmissibleSystem::new(JordanBoundary::new(arcs).unwrap(), vec![AnalyticMap::identity()], vec![0..4], 1.0, vec![0.5]).unwrap();
        let p = build_partition(&s, 0.25).unwrap();
        assert_eq!(p.num_corners(), 0);
        for arc in 0..4 {
            assert_eq!(p.eta(&s, 0, arc, 0.37), 1.0);
        }
    }
}
