//! Boundary geometry: arcs, Jordan curves, maps, corner data and the
//! partition of unity, plus grid checks of admissibility.

mod arc;
mod boundary;
mod map;
mod partition;
mod system;
mod validate;

use num_complex::Complex64 as C64;
use thiserror::Error;

pub use arc::AnalyticArc;
pub use boundary::JordanBoundary;
pub use map::{solve_map, AnalyticMap};
pub use partition::{build_partition, build_partition_with_radii, corner_bump, smoothstep7, PartitionOfUnity};
pub use system::{build_rotation, AdmissibleSystem, CornerData, Sector, SectorSpec};
pub use validate::{closure_grid, validate_admissible, AdmissibilityReport, ConditionCheck, MARGIN_FLOOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("no arcs given")]
    Empty,
    #[error("arc {arc} does not end where the next begins (gap {gap:e})")]
    ChainBroken { arc: usize, gap: f64 },
    #[error("interior angle {angle} at the end of arc {corner} is outside (0, pi]")]
    AngleOutOfRange { corner: usize, angle: f64 },
    #[error("boundary crosses itself near {0}")]
    SelfIntersection(C64),
    #[error("boundary is not positively oriented (tangent turning {0})")]
    NotPositivelyOriented(f64),
    #[error("degenerate arc: {0}")]
    DegenerateArc(String),
    #[error("Chebyshev fit did not resolve the arc (tail {0:e})")]
    NotResolved(f64),
    #[error("point is within {0:e} of the boundary")]
    TooCloseToBoundary(f64),
    #[error("map takes equal values at distinct points {zeta} and {z}")]
    MapCollision { zeta: C64, z: C64 },
    #[error("invalid arc assignment: {0}")]
    BadAssignment(String),
    #[error("corner radius fraction {0} outside (0, 0.5]")]
    BadFraction(f64),
    #[error("corner disks {0} and {1} overlap")]
    DisksOverlap(usize, usize),
    #[error("bump support leaks: {0}")]
    SupportLeak(String),
    #[error("no admissible rotation at corner {0}")]
    NoValidRotation(usize),
    #[error("corner disk {0} does not split its arc")]
    EmptySplit(usize),
}

/// Lens `D(-c, r) ∩ D(c, r)` with the right arc first.
pub fn lens_arcs(c: f64, r: f64) -> Result<Vec<AnalyticArc>, GeometryError> {
    use std::f64::consts::PI;
    let y = (r * r - c * c).sqrt();
    let top = C64::new(0.0, y);
    let bot = C64::new(0.0, -y);
    let a1 = (bot - C64::new(-c, 0.0)).arg();
    let b1 = (top - C64::new(-c, 0.0)).arg();
    let a2 = (top - C64::new(c, 0.0)).arg();
    let b2 = (bot - C64::new(c, 0.0)).arg() + 2.0 * PI;
    Ok(vec![AnalyticArc::circular(C64::new(-c, 0.0), r, a1, b1)?, AnalyticArc::circular(C64::new(c, 0.0), r, a2, b2)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lens(maps: [&str; 2]) -> AdmissibleSystem {
        let b = JordanBoundary::new(lens_arcs(0.5, 1.2).unwrap()).unwrap();
        let maps = maps.iter().map(|s| AnalyticMap::parse(s).unwrap()).collect();
        let s = AdmissibleSystem::new(b, maps, vec![0..1, 1..2], 1.0, vec![0.3, 0.3]).unwrap();
        let p = build_partition(&s, 0.25).unwrap();
        s.with_rotations(&p).unwrap()
    }

    #[test]
    fn mobius_lens_is_admissible() {
        let s = lens(["(z+0.5)/1.2", "(z-0.5)/1.2"]);
        let r = validate_admissible(&s, 64);
        assert!(r.all_passed(), "{:#?}", r.failures());
        let e = r.get("e").unwrap();
        assert!((e.margin - 1.0 / 1.2).abs() < 1e-12);
    }

    #[test]
    fn squared_lens_reports_arc_length() {
        let s = lens(["((z+0.5)/1.2)^2", "((z-0.5)/1.2)^2"]);
        let r = validate_admissible(&s, 64);
        assert!(r.all_passed(), "{:#?}", r.failures());
        // central angle of each lens arc, doubled by the square
        let central = 2.0 * (0.5f64 / 1.2).acos();
        for &len in &r.image_arc_lengths {
            assert!((len - 2.0 * central).abs() < 1e-9, "{len}");
        }
    }

    #[test]
    fn squared_disk_fails_injectivity() {
        use std::f64::consts::PI;
        let arcs = (0..4)
            .map(|k| AnalyticArc::circular(C64::new(0.0, 0.0), 1.0, k as f64 * PI / 2.0, (k + 1) as f64 * PI / 2.0).unwrap())
            .collect();
        let b = JordanBoundary::new(arcs).unwrap();
        let s = AdmissibleSystem::new(b, vec![AnalyticMap::parse("z^2").unwrap()], vec![0..4], 1.0, vec![0.5]).unwrap();
        let r = validate_admissible(&s, 64);
        let f = r.get("f").unwrap();
        assert!(!f.passed);
        assert!(f.margin < 1e-8);
        assert!(r.get("b").unwrap().passed);
    }
}
