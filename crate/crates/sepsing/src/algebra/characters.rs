use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AlgebraError, FiniteCommAlgebra, CHAR_MERGE};
use crate::linalg::null_space;

const ATTEMPTS: usize = 5;
const CLUSTER: f64 = 1e-4;
const MULT_TOL: f64 = 1e-10;

/// A unital multiplicative functional `a -> Σ coeffs_i a_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Character {
    pub coeffs: DVector<C64>,
}

impl Character {
    pub fn eval(&self, a: &DVector<C64>) -> C64 {
        self.coeffs.iter().zip(a.iter()).map(|(c, v)| c * v).sum()
    }

    pub fn distance(&self, other: &Character) -> f64 {
        (&self.coeffs - &other.coeffs).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|χ(e_i e_j) - χ(e_i) χ(e_j)|` and `|χ(1) - 1|`.
    pub fn defect(&self, a: &FiniteCommAlgebra) -> f64 {
        let n = a.dim();
        let mut worst = (self.eval(a.unit()) - C64::new(1.0, 0.0)).norm();
        for i in 0..n {
            for j in i..n {
                let p = a.mul(&a.basis(i), &a.basis(j));
                worst = worst.max((self.eval(&p) - self.coeffs[i] * self.coeffs[j]).norm());
            }
        }
        worst
    }
}

fn eigenvalue_clusters(b: &DMatrix<C64>) -> Vec<C64> {
    let t = b.clone().schur().unpack().1;
    let eig: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    let scale = eig.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for e in eig {
        match groups.iter_mut().find(|g| g.iter().any(|v| (v - e).norm() < CLUSTER * scale)) {
            Some(g) => g.push(e),
            None => groups.push(vec![e]),
        }
    }
    groups.into_iter().map(|g| g.iter().sum::<C64>() / g.len() as f64).collect()
}

/// Split each invariant subspace into eigenspaces of the transposed
/// multiplication operator.
fn refine(leaves: Vec<DMatrix<C64>>, op: &DMatrix<C64>) -> Option<Vec<DMatrix<C64>>> {
    let mut out = Vec::new();
    for w in leaves {
        let b = w.adjoint() * op * &w;
        for lambda in eigenvalue_clusters(&b) {
            let shifted = &b - DMatrix::identity(b.nrows(), b.ncols()) * lambda;
            let v = null_space(&shifted, 1e-7);
            if v.is_empty() {
                return None;
            }
            let v = DMatrix::from_columns(&v);
            out.push(&w * v);
        }
    }
    Some(out)
}

fn attempt(a: &FiniteCommAlgebra, rng: &mut ChaCha8Rng) -> Option<Vec<Character>> {
    let n = a.dim();
    let combo = DVector::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let mut leaves = refine(vec![DMatrix::identity(n, n)], &a.mult_matrix(&combo).transpose())?;
    for i in 0..n {
        leaves = refine(leaves, &a.mult_matrix(&a.basis(i)).transpose())?;
    }
    let mut chars: Vec<Character> = Vec::new();
    for w in leaves {
        // the vector in the leaf with χ(1) = 1 and least norm
        let row = a.unit().transpose() * &w;
        let s: f64 = row.iter().map(|v| v.norm_sqr()).sum();
        if s < 1e-20 {
            return None;
        }
        let coeffs = &w * row.adjoint() / C64::new(s, 0.0);
        let ch = Character { coeffs };
        let scale = ch.coeffs.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if ch.defect(a) > MULT_TOL * scale * scale {
            return None;
        }
        if chars.iter().all(|c| c.distance(&ch) > CHAR_MERGE) {
            chars.push(ch);
        }
    }
    Some(chars)
}

/// All characters, as common eigenvectors of the transposed multiplication
/// operators, seeded by a random combination.
pub fn characters_of(a: &FiniteCommAlgebra, seed: u64) -> Result<Vec<Character>, AlgebraError> {
    for k in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        if let Some(mut chars) = attempt(a, &mut rng) {
            chars.sort_by(|x, y| {
                let kx: Vec<(f64, f64)> = x.coeffs.iter().map(|v| (v.re, v.im)).collect();
                let ky: Vec<(f64, f64)> = y.coeffs.iter().map(|v| (v.re, v.im)).collect();
                kx.partial_cmp(&ky).unwrap_or(std::cmp::Ordering::Equal)
            });
            return Ok(chars);
        }
    }
    Err(AlgebraError::NumericalDegeneracy(ATTEMPTS))
}
