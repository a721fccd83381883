use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    characters_of, decompose_derivation, derivations_at, glue, interpolation_element, lying_over_check, AlgebraError, Character,
    FiniteCommAlgebra,
};

const INTERP_TOL: f64 = 1e-12;
const ROUNDTRIP_TOL: f64 = 1e-10;

/// Direct sums of `C`, `C[x]/(x^2)` and `C[x]/(x^3)` of total dimension at most `max_dim`.
pub fn exhaustive_family(max_dim: usize) -> Result<Vec<FiniteCommAlgebra>, AlgebraError> {
    fn grow(start: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for m in start..=3usize.min(left) {
            prefix.push(m);
            grow(m, left - m, prefix, out);
            prefix.pop();
        }
    }
    let mut shapes = Vec::new();
    grow(1, max_dim, &mut Vec::new(), &mut shapes);
    shapes
        .into_iter()
        .map(|s| {
            let parts = s.iter().map(|&m| FiniteCommAlgebra::truncated(m)).collect::<Result<Vec<_>, _>>()?;
            FiniteCommAlgebra::direct_sum(&parts)
        })
        .collect()
}

/// Every set of at most two distinct unordered pairs of `s` characters.
pub fn gluings(s: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..s).flat_map(|i| (i + 1..s).map(move |j| (i, j))).collect();
    let mut out = vec![Vec::new()];
    for (a, &p) in pairs.iter().enumerate() {
        out.push(vec![p]);
        for &q in &pairs[a + 1..] {
            out.push(vec![p, q]);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingReport {
    pub algebra: String,
    pub pairs: Vec<(usize, usize)>,
    pub codim: usize,
    pub characters_a: usize,
    pub characters_b: usize,
    pub surjective: bool,
    pub dichotomy: bool,
    pub interpolation_error: f64,
    pub roundtrip_error: f64,
    pub leibniz_defect: f64,
    pub uniqueness_error: f64,
    pub derivation_dim_b: usize,
    pub derivation_dim_fibers: usize,
    pub dims_match: bool,
    pub passed: bool,
    pub error: Option<String>,
}

fn interpolation_exactness(a: &FiniteCommAlgebra, chars: &[Character]) -> Result<f64, AlgebraError> {
    let mut worst = 0.0f64;
    for (i, psi0) in chars.iter().enumerate() {
        let others: Vec<Character> = chars.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.clone()).collect();
        let f = interpolation_element(a, psi0, &others)?;
        worst = worst.max((psi0.eval(&f) - C64::new(1.0, 0.0)).norm());
        for c in &others {
            worst = worst.max(c.eval(&f).norm());
        }
    }
    Ok(worst)
}

fn check(a: &FiniteCommAlgebra, chars: &[Character], pairs: &[(usize, usize)], seed: u64) -> Result<GluingReport, AlgebraError> {
    let glued_pairs: Vec<(Character, Character)> = pairs.iter().map(|&(i, j)| (chars[i].clone(), chars[j].clone())).collect();
    let b = glue(a, &glued_pairs)?;
    let lying = lying_over_check(a, &b, seed)?;
    let interpolation_error = interpolation_exactness(a, chars)?;

    let balg = b.algebra()?;
    let chars_b = characters_of(&balg, seed)?;
    let (mut roundtrip_error, mut leibniz_defect, mut uniqueness_error) = (0.0f64, 0.0f64, 0.0f64);
    let (mut dim_b, mut dim_fibers) = (0, 0);
    let mut dims_match = true;
    for psi_b in &chars_b {
        let ders = derivations_at(&balg, psi_b);
        let fiber: Vec<&Character> = chars.iter().filter(|c| b.restrict(c).distance(psi_b) <= 1e-7).collect();
        let over: usize = fiber.iter().map(|c| derivations_at(a, c).len()).sum();
        dims_match &= ders.len() == over;
        dim_b += ders.len();
        dim_fibers += over;
        for eta in &ders {
            let split = decompose_derivation(&b, eta, seed)?;
            roundtrip_error = roundtrip_error.max(split.roundtrip_error);
            leibniz_defect = leibniz_defect.max(split.leibniz_defect);
            uniqueness_error = uniqueness_error.max(split.uniqueness_error);
        }
    }
    let passed = lying.surjective
        && lying.dichotomy
        && interpolation_error <= INTERP_TOL
        && roundtrip_error <= ROUNDTRIP_TOL
        && leibniz_defect <= ROUNDTRIP_TOL
        && uniqueness_error <= ROUNDTRIP_TOL
        && dims_match;
    Ok(GluingReport {
        algebra: a.label().to_string(),
        pairs: pairs.to_vec(),
        codim: b.codim(),
        characters_a: lying.characters_a,
        characters_b: lying.characters_b,
        surjective: lying.surjective,
        dichotomy: lying.dichotomy,
        interpolation_error,
        roundtrip_error,
        leibniz_defect,
        uniqueness_error,
        derivation_dim_b: dim_b,
        derivation_dim_fibers: dim_fibers,
        dims_match,
        passed,
        error: None,
    })
}

/// Run every check for one gluing given by character indices.
pub fn verify_gluing(a: &FiniteCommAlgebra, chars: &[Character], pairs: &[(usize, usize)], seed: u64) -> GluingReport {
    check(a, chars, pairs, seed).unwrap_or_else(|e| GluingReport {
        algebra: a.label().to_string(),
        pairs: pairs.to_vec(),
        codim: 0,
        characters_a: chars.len(),
        characters_b: 0,
        surjective: false,
        dichotomy: false,
        interpolation_error: f64::NAN,
        roundtrip_error: f64::NAN,
        leibniz_defect: f64::NAN,
        uniqueness_error: f64::NAN,
        derivation_dim_b: 0,
        derivation_dim_fibers: 0,
        dims_match: false,
        passed: false,
        error: Some(e.to_string()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub algebras: usize,
    pub gluings: usize,
    pub failures: usize,
    pub worst_interpolation: f64,
    pub worst_roundtrip: f64,
    pub reports: Vec<GluingReport>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.gluings > 0
    }
}

/// All gluings of at most two pairs for each algebra.
pub fn run_family(algebras: &[FiniteCommAlgebra], seed: u64) -> Result<FamilyReport, AlgebraError> {
    let chars = algebras.par_iter().map(|a| characters_of(a, seed)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, Vec<(usize, usize)>)> = chars.iter().enumerate().flat_map(|(i, c)| gluings(c.len()).into_iter().map(move |g| (i, g))).collect();
    let reports: Vec<GluingReport> = jobs.par_iter().map(|(i, g)| verify_gluing(&algebras[*i], &chars[*i], g, seed)).collect();
    let nan_max = |f: fn(&GluingReport) -> f64| reports.iter().map(f).fold(0.0f64, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    Ok(FamilyReport {
        algebras: algebras.len(),
        gluings: reports.len(),
        failures: reports.iter().filter(|r| !r.passed).count(),
        worst_interpolation: nan_max(|r| r.interpolation_error),
        worst_roundtrip: nan_max(|r| r.roundtrip_error),
        reports,
    })
}
