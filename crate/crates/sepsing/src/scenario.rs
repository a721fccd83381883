//! Scenario files: geometry, maps, target functions and solver knobs.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::geometry::{lens_arcs, AdmissibleSystem, AnalyticArc, AnalyticMap, GeometryError, JordanBoundary, SectorSpec};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid scenario JSON: {0}")]
    Json(String),
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("bad expression {src:?}: {err}")]
    Expr { src: String, err: ExprError },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometrySpec {
    /// `D(-offset, radius) ∩ D(offset, radius)`, right arc first.
    Lens { offset: f64, radius: f64 },
    /// Circle split into `arcs` equal arcs.
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
        #[serde(default = "default_disk_arcs")]
        arcs: usize,
    },
    /// Counterclockwise vertices joined by outward circular arcs of the given central angle.
    CircularPolygon { vertices: Vec<[f64; 2]>, central_angle: f64 },
}

fn default_disk_arcs() -> usize {
    4
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SolverSpec {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_grading")]
    pub grading: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_fraction")]
    pub corner_fraction: f64,
    #[serde(default = "default_true")]
    pub jet_correction: bool,
}

fn default_nodes() -> usize {
    512
}
fn default_grading() -> usize {
    12
}
fn default_tau() -> f64 {
    1e-8
}
fn default_tolerance() -> f64 {
    1e-7
}
fn default_fraction() -> f64 {
    0.25
}
fn default_true() -> bool {
    true
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            nodes: default_nodes(),
            grading: default_grading(),
            tau: default_tau(),
            tolerance: default_tolerance(),
            seed: 0,
            corner_fraction: default_fraction(),
            jet_correction: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FamilySpec {
    pub parameter: String,
    pub values: Vec<f64>,
    /// Map expressions that may use the parameter.
    pub maps: Vec<String>,
    #[serde(default = "default_kernel_pairs")]
    pub kernel_pairs: usize,
}

fn default_kernel_pairs() -> usize {
    10_000
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Decomposition,
    Extension,
    Continuity,
    Algebra,
    All,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub geometry: GeometrySpec,
    pub maps: Vec<String>,
    /// Arc index ranges `[start, end)` per map; one arc per map when absent.
    #[serde(default)]
    pub assignment: Option<Vec<[usize; 2]>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Continuation margin per map; 0.3 when absent.
    #[serde(default)]
    pub margins: Option<Vec<f64>>,
    #[serde(default)]
    pub sectors: Option<Vec<Option<[SectorSpec; 2]>>>,
    /// Densities on the domain, as expressions in `z`.
    #[serde(default)]
    pub functions: Vec<String>,
    /// Functions on the curve, as expressions in `w1, ..., wn`; an expression
    /// in `z` is the function whose pullback through `Φ` it is.
    #[serde(default)]
    pub curve_functions: Vec<String>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// Algebra definitions for the algebra check (shorthand strings or objects).
    #[serde(default)]
    pub algebras: Vec<serde_json::Value>,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_checks() -> Vec<Check> {
    vec![Check::All]
}

impl Scenario {
    pub fn from_json(src: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(src).map_err(|e| ScenarioError::Json(e.to_string()))?;
        s.check_names()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        if !path.exists() {
            return Err(ScenarioError::FileNotFound(path.display().to_string()));
        }
        let src = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_json(&src)
    }

    pub fn wants(&self, c: Check) -> bool {
        self.checks.contains(&Check::All) || self.checks.contains(&c)
    }

    /// Every expression parses and references only known names.
    fn check_names(&self) -> Result<(), ScenarioError> {
        for m in &self.maps {
            parse(m)?;
        }
        for f in &self.functions {
            parse(f)?;
        }
        let n = self.maps.len();
        for f in &self.curve_functions {
            let e = parse(f)?;
            if e.curve_arity() > n {
                return Err(ScenarioError::Invalid(format!("{f:?} uses w{} but there are {n} maps", e.curve_arity())));
            }
        }
        if let Some(fam) = &self.family {
            if fam.maps.len() != n {
                return Err(ScenarioError::Invalid("family map count differs from maps".into()));
            }
            for v in &fam.values {
                for m in &fam.maps {
                    parse_with(m, &fam.parameter, *v)?;
                }
            }
        }
        Ok(())
    }

    pub fn boundary(&self) -> Result<JordanBoundary, ScenarioError> {
        Ok(JordanBoundary::new(geometry_arcs(&self.geometry)?)?)
    }

    pub fn system(&self) -> Result<AdmissibleSystem, ScenarioError> {
        let maps = self.maps.iter().map(|s| parse(s).map(AnalyticMap::new)).collect::<Result<Vec<_>, _>>()?;
        self.system_with(maps)
    }

    /// System of the family member at parameter value `value`.
    pub fn family_system(&self, value: f64) -> Result<AdmissibleSystem, ScenarioError> {
        let fam = self.family.as_ref().ok_or_else(|| ScenarioError::Invalid("no family given".into()))?;
        let maps = fam.maps.iter().map(|s| parse_with(s, &fam.parameter, value).map(AnalyticMap::new)).collect::<Result<Vec<_>, _>>()?;
        self.system_with(maps)
    }

    fn system_with(&self, maps: Vec<AnalyticMap>) -> Result<AdmissibleSystem, ScenarioError> {
        let boundary = self.boundary()?;
        let n = maps.len();
        let assignment = match &self.assignment {
            Some(a) => a.iter().map(|r| r[0]..r[1]).collect(),
            None => {
                let m = boundary.arcs().len();
                if n == 1 {
                    vec![0..m]
                } else if n == m {
                    (0..m).map(|i| i..i + 1).collect()
                } else {
                    return Err(ScenarioError::Invalid(format!("{n} maps for {m} arcs needs an explicit assignment")));
                }
            }
        };
        let margins = self.margins.clone().unwrap_or_else(|| vec![0.3; n]);
        let mut sys = AdmissibleSystem::new(boundary, maps, assignment, self.alpha, margins)?;
        if let Some(s) = &self.sectors {
            sys = sys.with_sector_overrides(s.clone());
        }
        Ok(sys)
    }

    pub fn function_exprs(&self) -> Result<Vec<Expr>, ScenarioError> {
        self.functions.iter().map(|s| parse(s)).collect()
    }

    pub fn curve_function_exprs(&self) -> Result<Vec<Expr>, ScenarioError> {
        self.curve_functions.iter().map(|s| parse(s)).collect()
    }
}

fn parse(src: &str) -> Result<Expr, ScenarioError> {
    Expr::parse(src).map_err(|err| ScenarioError::Expr { src: src.to_string(), err })
}

fn parse_with(src: &str, name: &str, value: f64) -> Result<Expr, ScenarioError> {
    Expr::parse_with(src, &[(name, C64::new(value, 0.0))]).map_err(|err| ScenarioError::Expr { src: src.to_string(), err })
}

pub fn geometry_arcs(g: &GeometrySpec) -> Result<Vec<AnalyticArc>, ScenarioError> {
    match g {
        GeometrySpec::Lens { offset, radius } => {
            if !(*offset > 0.0 && offset < radius) {
                return Err(ScenarioError::Invalid(format!("lens needs 0 < offset < radius, got {offset}, {radius}")));
            }
            Ok(lens_arcs(*offset, *radius)?)
        }
        GeometrySpec::Disk { center, radius, arcs } => {
            let c = C64::new(center[0], center[1]);
            let m = (*arcs).max(1);
            (0..m)
                .map(|k| AnalyticArc::circular(c, *radius, 2.0 * PI * k as f64 / m as f64, 2.0 * PI * (k + 1) as f64 / m as f64).map_err(Into::into))
                .collect()
        }
        GeometrySpec::CircularPolygon { vertices, central_angle } => {
            let v: Vec<C64> = vertices.iter().map(|p| C64::new(p[0], p[1])).collect();
            if v.len() < 2 || !(*central_angle > 0.0 && *central_angle < 2.0 * PI) {
                return Err(ScenarioError::Invalid("circular polygon needs two vertices and a central angle in (0, 2 pi)".into()));
            }
            (0..v.len())
                .map(|j| {
                    let (a, b) = (v[j], v[(j + 1) % v.len()]);
                    let (c, r) = arc_circle(a, b, *central_angle);
                    let t0 = (a - c).arg();
                    AnalyticArc::circular(c, r, t0, t0 + central_angle).map_err(Into::into)
                })
                .collect()
        }
    }
}

/// Centre and radius of the circle through `a`, `b` whose counterclockwise
/// arc from `a` to `b` spans `angle` and bulges to the right of `a -> b`.
pub fn arc_circle(a: C64, b: C64, angle: f64) -> (C64, f64) {
    let chord = b - a;
    let r = chord.norm() / (2.0 * (0.5 * angle).sin());
    let inward = C64::new(0.0, 1.0) * chord / chord.norm();
    (0.5 * (a + b) + inward * (r * (0.5 * angle).cos()), r)
}

const BUNDLED: [(&str, &str); 6] = [
    ("lens_mobius", include_str!("../scenarios/lens_mobius.json")),
    ("lens_squared", include_str!("../scenarios/lens_squared.json")),
    ("critical_point", include_str!("../scenarios/critical_point.json")),
    ("identity_disk", include_str!("../scenarios/identity_disk.json")),
    ("continuity_sweep", include_str!("../scenarios/continuity_sweep.json")),
    ("glued_algebras", include_str!("../scenarios/glued_algebras.json")),
];

pub fn list_scenarios() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled_source(name: &str) -> Result<&'static str, ScenarioError> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))
}

pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_json(bundled_source(name)?)
}

/// Bundled name or path to a JSON file.
pub fn resolve(name_or_path: &str) -> Result<Scenario, ScenarioError> {
    let p = Path::new(name_or_path);
    if p.extension().is_some_and(|e| e == "json") || p.exists() {
        Scenario::load(p)
    } else {
        bundled(name_or_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_admissible;

    #[test]
    fn all_bundled_parse() {
        assert!(list_scenarios().len() >= 5);
        for n in list_scenarios() {
            let s = bundled(n).unwrap();
            assert_eq!(s.name, n);
            s.system().unwrap();
        }
        assert!(matches!(bundled("nope"), Err(ScenarioError::UnknownScenario(_))));
    }

    #[test]
    fn triangle_arcs_meet_at_vertices() {
        let s = bundled("critical_point").unwrap();
        let b = s.boundary().unwrap();
        assert_eq!(b.arcs().len(), 3);
        for a in b.arcs() {
            assert!((a.start().norm() - 1.0).abs() < 1e-13);
        }
        for ang in b.corner_angles() {
            assert!((ang - 5.0 * PI / 6.0).abs() < 1e-8, "{ang}");
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(Scenario::load(Path::new("/nonexistent/x.json")), Err(ScenarioError::FileNotFound(_))));
        assert!(matches!(Scenario::from_json("{"), Err(ScenarioError::Json(_))));
        let mut s = bundled("lens_mobius").unwrap();
        s.curve_functions = vec!["w3".into()];
        let j = serde_json::to_string(&s).unwrap();
        assert!(matches!(Scenario::from_json(&j), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn bundled_systems_are_admissible() {
        for n in ["lens_mobius", "lens_squared", "identity_disk", "critical_point"] {
            let s = bundled(n).unwrap();
            let sys = s.system().unwrap();
            let p = crate::geometry::build_partition(&sys, s.solver.corner_fraction).unwrap();
            let sys = sys.with_rotations(&p).unwrap();
            let r = validate_admissible(&sys, 64);
            assert!(r.all_passed(), "{n}: {:#?}", r.failures());
        }
    }
}
