//! Parameter sweeps over families of maps on a fixed domain: operator
//! distances of the remainders against `C^{1+α}` distances of the maps.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::decomposition::{apply_fk, assemble_remainder, build_plan, plan_decomposition, DecompositionError, DecompositionPlan};
use crate::extension::interior_samples;
use crate::geometry::{closure_grid, validate_admissible, AdmissibleSystem, AnalyticMap, GeometryError};
use crate::linalg::spectral_norm;
use crate::scenario::{Scenario, ScenarioError};
use crate::transforms::{holder_seminorm, TransformError};

/// Box grid density used for `C^{1+α}` distances.
const CDIST_GRID: usize = 24;
/// Box grid density of the admissibility check run on every member.
const VALIDATION_GRID: usize = 64;
/// Samples on each rotated arc in the containment check.
const ROTATION_SAMPLES: usize = 256;
/// Interior points where the `F_k` norm estimates are taken.
const FK_SAMPLES: usize = 60;
/// Below this both distances count as zero and the ratio is 0.
const ZERO_DIST: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum ContinuityError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("family member {value} is not admissible: {failures}")]
    Inadmissible { value: f64, failures: String },
    #[error("family member {value}: rotated arc at corner {corner} leaves the exterior of the disk")]
    RotationLost { value: f64, corner: usize },
    #[error("family needs at least one parameter value")]
    Empty,
}

/// Members `φ^ε` on one domain, sharing partition, rotations and quadrature.
#[derive(Clone, Debug)]
pub struct MapFamily {
    pub parameter: String,
    pub values: Vec<f64>,
    pub systems: Vec<AdmissibleSystem>,
    /// Plan of the first member; its geometry is reused by every member.
    pub base: DecompositionPlan,
}

impl MapFamily {
    /// Build and validate a family. Rotations come from the first member and
    /// are kept fixed; members where they stop working are rejected.
    pub fn new(
        parameter: impl Into<String>,
        values: Vec<f64>,
        maps: Vec<Vec<AnalyticMap>>,
        template: &AdmissibleSystem,
        fraction: f64,
        base_panels: usize,
        depth: usize,
    ) -> Result<Self, ContinuityError> {
        if values.is_empty() || maps.len() != values.len() {
            return Err(ContinuityError::Empty);
        }
        let first = template.with_maps(maps[0].clone())?;
        let base = build_plan(&first, fraction, base_panels, depth)?;
        let mut systems = Vec::with_capacity(values.len());
        for (v, m) in values.iter().zip(maps) {
            let s = base.system.with_maps(m)?;
            check_member(&s, *v)?;
            check_rotations(&base, &s, *v)?;
            systems.push(s);
        }
        Ok(MapFamily { parameter: parameter.into(), values, systems, base })
    }

    /// The family declared by a scenario.
    pub fn from_scenario(scenario: &Scenario, base_panels: usize, depth: usize) -> Result<Self, ContinuityError> {
        let fam = scenario.family.as_ref().ok_or_else(|| ScenarioError::Invalid("no family given".into()))?;
        let maps = fam
            .values
            .iter()
            .map(|v| scenario.family_system(*v).map(|s| s.maps().to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let template = scenario.system()?;
        Self::new(&fam.parameter, fam.values.clone(), maps, &template, scenario.solver.corner_fraction, base_panels, depth)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Plan of member `i` on the shared geometry.
    pub fn plan(&self, i: usize) -> Result<DecompositionPlan, ContinuityError> {
        Ok(plan_decomposition(&self.systems[i], &self.base.partition, &self.base.quadrature)?)
    }
}

fn check_member(system: &AdmissibleSystem, value: f64) -> Result<(), ContinuityError> {
    let report = validate_admissible(system, VALIDATION_GRID);
    if report.all_passed() {
        return Ok(());
    }
    let failures = report.failures().iter().map(|c| format!("({}) {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    Err(ContinuityError::Inadmissible { value, failures })
}

/// Both maps at a corner stay outside the closed unit disk on the rotated arc.
fn check_rotations(base: &DecompositionPlan, system: &AdmissibleSystem, value: f64) -> Result<(), ContinuityError> {
    let n = system.n();
    for (k, arc) in base.rotated_arcs.iter().enumerate() {
        let (a, b) = (system.map(k), system.map((k + 1) % n));
        for j in 0..=ROTATION_SAMPLES {
            let xi = arc.point(j as f64 / ROTATION_SAMPLES as f64);
            if (xi - system.corner_point(k)).norm() < 1e-12 {
                continue;
            }
            if a.eval(xi).norm() <= 1.0 || b.eval(xi).norm() <= 1.0 {
                return Err(ContinuityError::RotationLost { value, corner: k });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityRow {
    pub eps: f64,
    pub delta: f64,
    pub opdist: f64,
    pub cdist: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub parameter: String,
    pub nodes: usize,
    pub rows: Vec<ContinuityRow>,
    /// Largest ratio: the fitted constant bounding every row.
    pub c_fit: f64,
    /// `(max - min) / max` over rows with nonzero distances.
    pub spread: f64,
    /// Per parameter value, per piece: largest `sup |F_k f|` over the test densities.
    pub fk_norms: Vec<Vec<f64>>,
    /// `max / min` of the per-value maxima of `fk_norms`.
    pub fk_norm_ratio: f64,
}

impl ContinuityReport {
    pub fn ratios_finite(&self) -> bool {
        self.rows.iter().all(|r| r.ratio.is_finite())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,delta,opdist,cdist,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", r.eps, r.delta, r.opdist, r.cdist, r.ratio));
        }
        s
    }
}

/// Adjacent pairs and every pair with an endpoint of the grid.
pub fn sweep_pairs(m: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (1..m).map(|i| (i - 1, i)).collect();
    for i in 0..m {
        for j in [0, m - 1] {
            let p = (i.min(j), i.max(j));
            if p.0 != p.1 && !pairs.contains(&p) {
                pairs.push(p);
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// `max_k sup |Δφ_k'| + [Δφ_k']_α` over a grid of the closed domain.
pub fn derivative_distance(a: &AdmissibleSystem, b: &AdmissibleSystem, points: &[C64]) -> f64 {
    (0..a.n())
        .map(|k| {
            let diff: Vec<C64> = points.iter().map(|z| a.map(k).derivative(*z) - b.map(k).derivative(*z)).collect();
            let sup = diff.iter().map(|v| v.norm()).fold(0.0, f64::max);
            sup + holder_seminorm(points, &diff, a.alpha())
        })
        .fold(0.0, f64::max)
}

/// Unit sup-norm analytic test densities sampled at the plan nodes.
fn test_densities(plan: &DecompositionPlan, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<C64>> = (0..4).map(|m| plan.sample(|z| z.powu(m))).collect();
    out.push(plan.sample(|z| z.exp()));
    for _ in 0..3 {
        let c: Vec<C64> = (0..5).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        out.push(plan.sample(|z| c.iter().rev().fold(C64::new(0.0, 0.0), |acc, ci| acc * z + ci)));
    }
    for f in &mut out {
        let s = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if s > 0.0 {
            f.iter_mut().for_each(|v| *v /= s);
        }
    }
    out
}

fn fk_norms(plan: &DecompositionPlan, densities: &[Vec<C64>], samples: &[C64]) -> Result<Vec<f64>, ContinuityError> {
    let mut norms = vec![0.0f64; plan.n()];
    for f in densities {
        for (k, norm) in norms.iter_mut().enumerate() {
            let fk = apply_fk(plan, f, k)?;
            let ws: Vec<C64> = samples.iter().map(|z| plan.maps[k].eval(*z)).collect();
            let sup = fk.eval_many(&ws)?.iter().map(|v| v.norm()).fold(0.0, f64::max) / (2.0 * PI);
            *norm = norm.max(sup);
        }
    }
    Ok(norms)
}

/// Remainder matrices of every member, distances over `sweep_pairs`, and
/// `F_k` norm estimates.
pub fn sweep(family: &MapFamily, seed: u64) -> Result<ContinuityReport, ContinuityError> {
    let plans = (0..family.len()).map(|i| family.plan(i)).collect::<Result<Vec<_>, _>>()?;
    let remainders = plans.iter().map(|p| assemble_remainder(p).map(|op| op.matrix)).collect::<Result<Vec<_>, _>>()?;
    let grid = closure_grid(&family.systems[0], CDIST_GRID);
    let rows: Vec<ContinuityRow> = sweep_pairs(family.len())
        .into_par_iter()
        .map(|(i, j)| {
            let opdist = spectral_norm(&(&remainders[i] - &remainders[j]));
            let cdist = derivative_distance(&family.systems[i], &family.systems[j], &grid);
            let ratio = if opdist <= ZERO_DIST && cdist <= ZERO_DIST { 0.0 } else { opdist / cdist };
            ContinuityRow { eps: family.values[i], delta: family.values[j], opdist, cdist, ratio }
        })
        .collect();
    let live: Vec<f64> = rows.iter().filter(|r| r.cdist > ZERO_DIST).map(|r| r.ratio).collect();
    let c_fit = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min = live.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if live.is_empty() || c_fit == 0.0 { 0.0 } else { (c_fit - min) / c_fit };

    let densities = test_densities(&plans[0], seed);
    let samples = interior_samples(&family.systems[0], FK_SAMPLES);
    let fk_norms = plans.iter().map(|p| fk_norms(p, &densities, &samples)).collect::<Result<Vec<_>, _>>()?;
    let maxima: Vec<f64> = fk_norms.iter().map(|v| v.iter().copied().fold(0.0, f64::max)).collect();
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    Ok(ContinuityReport {
        parameter: family.parameter.clone(),
        nodes: plans[0].len(),
        rows,
        c_fit,
        spread,
        fk_norms,
        fk_norm_ratio: if lo > 0.0 { hi / lo } else { f64::INFINITY },
    })
}

/// Empirical constant in `|G_ε(ζ,z) - G_δ(ζ,z)| ≤ C ‖φ_ε' - φ_δ'‖_{C^α} |ζ - z|^{α-1}`
/// over random `ζ ∈ J_k`, `z` in the closed domain and member pairs.
/// Every 50th sample takes `z = ζ`.
pub fn kernel_family_bound(family: &MapFamily, pairs: usize, seed: u64) -> Result<f64, ContinuityError> {
    let m = family.len();
    let sys = &family.systems[0];
    let grid = closure_grid(sys, CDIST_GRID);
    let alpha = sys.alpha();
    let n = sys.n();
    let arcs = sys.boundary().arcs();
    // per member pair and piece: C^{1+α} distance of the derivatives
    let mut cnorm = vec![0.0f64; m * m * n];
    for i in 0..m {
        for j in i + 1..m {
            for k in 0..n {
                let diff: Vec<C64> = grid.iter().map(|z| family.systems[i].map(k).derivative(*z) - family.systems[j].map(k).derivative(*z)).collect();
                let d = diff.iter().map(|v| v.norm()).fold(0.0, f64::max) + holder_seminorm(&grid, &diff, alpha);
                cnorm[(i * m + j) * n + k] = d;
                cnorm[(j * m + i) * n + k] = d;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for s in 0..pairs {
        let k = rng.gen_range(0..n);
        let range = sys.assignment()[k].clone();
        let arc = rng.gen_range(range);
        let zeta = arcs[arc].point(rng.gen_range(0.0..1.0));
        let z = if s % 50 == 0 { zeta } else { grid[rng.gen_range(0..grid.len())] };
        let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..m));
        let lhs = (family.systems[i].map(k).kernel_g(zeta, z)? - family.systems[j].map(k).kernel_g(zeta, z)?).norm();
        if lhs == 0.0 {
            continue;
        }
        let h = (zeta - z).norm();
        let weight = if alpha >= 1.0 { 1.0 } else if h == 0.0 { f64::INFINITY } else { h.powf(alpha - 1.0) };
        let rhs = cnorm[(i * m + j) * n + k] * weight;
        worst = worst.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled;

    fn lens_template() -> AdmissibleSystem {
        bundled("lens_mobius").unwrap().system().unwrap()
    }

    fn parse_maps(src: &[String]) -> Vec<AnalyticMap> {
        src.iter().map(|s| AnalyticMap::parse(s).unwrap()).collect()
    }

    fn disk_lens_maps(shift: f64) -> Vec<AnalyticMap> {
        parse_maps(&[format!("mobius(1,{},{},1,(z+0.5)/1.2)", -shift, -shift), format!("mobius(1,{shift},{shift},1,(z-0.5)/1.2)")])
    }

    #[test]
    fn pairs_cover_adjacent_and_endpoints() {
        assert_eq!(sweep_pairs(2), vec![(0, 1)]);
        assert_eq!(sweep_pairs(4), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(sweep_pairs(6).len(), 5 + 4 + 3);
    }

    #[test]
    fn constant_family_has_zero_distances() {
        let maps = vec![disk_lens_maps(0.02); 3];
        let fam = MapFamily::new("eps", vec![0.0, 0.5, 1.0], maps, &lens_template(), 0.25, 8, 4).unwrap();
        let r = sweep(&fam, 0).unwrap();
        assert!(r.rows.iter().all(|row| row.opdist == 0.0 && row.cdist == 0.0 && row.ratio == 0.0));
        assert!(r.ratios_finite());
        assert!((r.fk_norm_ratio - 1.0).abs() < 1e-12);
        assert_eq!(kernel_family_bound(&fam, 200, 0).unwrap(), 0.0);
    }

    #[test]
    fn moving_family_has_bounded_ratios() {
        let values = vec![0.0, 0.02, 0.04];
        let maps = values.iter().map(|v| disk_lens_maps(*v)).collect();
        let fam = MapFamily::new("eps", values, maps, &lens_template(), 0.25, 8, 4).unwrap();
        let r = sweep(&fam, 0).unwrap();
        assert!(r.ratios_finite());
        assert!(r.rows.iter().all(|row| row.opdist > 0.0 && row.cdist > 0.0));
        // distances grow with the parameter gap
        let d = |a: f64, b: f64| r.rows.iter().find(|x| x.eps == a && x.delta == b).unwrap().cdist;
        assert!(d(0.0, 0.04) > d(0.0, 0.02));
        let c = kernel_family_bound(&fam, 2000, 1).unwrap();
        assert!(c.is_finite() && c > 0.0);
        assert!(r.csv_header_ok());
    }

    impl ContinuityReport {
        fn csv_header_ok(&self) -> bool {
            let csv = self.to_csv();
            csv.starts_with("eps,delta,opdist,cdist,ratio\n") && csv.lines().count() == self.rows.len() + 1
        }
    }

    #[test]
    fn inadmissible_member_is_rejected() {
        // the last member is no longer unimodular on its arc
        let values = vec![0.0, 0.5];
        let maps = vec![disk_lens_maps(0.0), parse_maps(&["(z+0.5)/1.7".into(), "(z-0.5)/1.2".into()])];
        let err = MapFamily::new("eps", values, maps, &lens_template(), 0.25, 8, 4).unwrap_err();
        assert!(matches!(err, ContinuityError::Inadmissible { value, .. } if value == 0.5), "{err}");
    }
}
