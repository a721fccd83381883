use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{characters_of, interpolation_element, AlgebraError, Character, FiniteCommAlgebra, GluedSubalgebra, CHAR_MERGE};
use crate::linalg::null_space;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// A point derivation `η` at the character `base`: `η(fg) = η(f)ψ(g) + ψ(f)η(g)`.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub base: Character,
    pub coeffs: DVector<C64>,
}

impl Derivation {
    pub fn eval(&self, a: &DVector<C64>) -> C64 {
        self.coeffs.iter().zip(a.iter()).map(|(c, v)| c * v).sum()
    }

    /// Largest Leibniz defect over basis pairs, and `|η(1)|`.
    pub fn defect(&self, a: &FiniteCommAlgebra) -> f64 {
        let n = a.dim();
        let psi = &self.base.coeffs;
        let mut worst = self.eval(a.unit()).norm();
        for i in 0..n {
            for j in i..n {
                let p = a.mul(&a.basis(i), &a.basis(j));
                let d = self.eval(&p) - self.coeffs[i] * psi[j] - psi[i] * self.coeffs[j];
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Basis of the derivations at `psi`: the null space of the Leibniz system.
pub fn derivations_at(a: &FiniteCommAlgebra, psi: &Character) -> Vec<Derivation> {
    let n = a.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut m = DMatrix::<C64>::zeros(pairs.len(), n);
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..n {
            m[(r, k)] += a.c(i, j, k);
        }
        m[(r, i)] -= psi.coeffs[j];
        m[(r, j)] -= psi.coeffs[i];
    }
    null_space(&m, 1e-10).into_iter().map(|coeffs| Derivation { base: psi.clone(), coeffs }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivationSplit {
    /// Indices of the characters of `A` over the base of `η_B`.
    pub fiber: Vec<usize>,
    #[serde(skip)]
    pub parts: Vec<Derivation>,
    pub leibniz_defect: f64,
    /// `max |Σ_j η_A^j(q) - η_B(q)|` over the basis of `B`.
    pub roundtrip_error: f64,
    /// Change of the parts when the interpolating elements are perturbed.
    pub uniqueness_error: f64,
}

fn component(b: &GluedSubalgebra, eta_b: &Derivation, psi: &Character, f: &DVector<C64>) -> Result<Derivation, AlgebraError> {
    let a = &b.parent;
    let g = f * C64::new(2.0, 0.0) - a.mul(f, f);
    let g2 = a.mul(&g, &g);
    let mut coeffs = DVector::zeros(a.dim());
    for i in 0..a.dim() {
        let centered = a.basis(i) - a.unit() * psi.coeffs[i];
        let h = a.mul(&g2, &centered);
        let (c, off) = b.coordinates(&h);
        if off > MEMBERSHIP_TOL {
            return Err(AlgebraError::FiberResolutionFailure(format!("g^2 (e{i} - ψ(e{i})) lies {off:e} outside B")));
        }
        coeffs[i] = eta_b.eval(&c);
    }
    Ok(Derivation { base: psi.clone(), coeffs })
}

/// Split a derivation of `B` (in `B`'s coordinates) into derivations of `A`
/// at the characters over its base.
pub fn decompose_derivation(b: &GluedSubalgebra, eta_b: &Derivation, seed: u64) -> Result<DerivationSplit, AlgebraError> {
    let a = &b.parent;
    let chars = characters_of(a, seed)?;
    let fiber: Vec<usize> = (0..chars.len()).filter(|&i| b.restrict(&chars[i]).distance(&eta_b.base) <= 1e-7).collect();
    if fiber.is_empty() {
        return Err(AlgebraError::FiberResolutionFailure("no character of A lies over the base".into()));
    }
    let glued: Vec<usize> = (0..chars.len())
        .filter(|&i| b.pairs.iter().any(|(x, y)| x.distance(&chars[i]) <= CHAR_MERGE || y.distance(&chars[i]) <= CHAR_MERGE))
        .collect();
    let char_matrix = DMatrix::from_fn(chars.len(), a.dim(), |r, i| chars[r].coeffs[i]);
    let radical = null_space(&char_matrix, 1e-10);

    let mut parts = Vec::new();
    let mut uniqueness_error = 0.0f64;
    for &j in &fiber {
        let others: Vec<Character> = (0..chars.len()).filter(|&i| i != j && (fiber.contains(&i) || glued.contains(&i))).map(|i| chars[i].clone()).collect();
        let f = interpolation_element(a, &chars[j], &others)?;
        let part = component(b, eta_b, &chars[j], &f)?;
        if let Some(r) = radical.first() {
            let alt = component(b, eta_b, &chars[j], &(&f + r * C64::new(0.37, 0.21)))?;
            uniqueness_error = uniqueness_error.max((&alt.coeffs - &part.coeffs).iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        parts.push(part);
    }
    let leibniz_defect = parts.iter().map(|p| p.defect(a)).fold(0.0, f64::max);
    let mut roundtrip_error = 0.0f64;
    for i in 0..b.dim() {
        let q = b.basis.column(i).into_owned();
        let sum: C64 = parts.iter().map(|p| p.eval(&q)).sum();
        roundtrip_error = roundtrip_error.max((sum - eta_b.coeffs[i]).norm());
    }
    Ok(DerivationSplit { fiber, parts, leibniz_defect, roundtrip_error, uniqueness_error })
}
