use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{characters_of, AlgebraError, Character, FiniteCommAlgebra, CHAR_MERGE};
use crate::linalg::{min_norm_solve, null_space};

const CLOSURE_TOL: f64 = 1e-10;

/// `B = {f : α_j(f) = β_j(f)}` with an orthonormal basis `Q` (columns).
#[derive(Clone, Debug)]
pub struct GluedSubalgebra {
    pub parent: FiniteCommAlgebra,
    pub pairs: Vec<(Character, Character)>,
    pub basis: DMatrix<C64>,
}

impl GluedSubalgebra {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn codim(&self) -> usize {
        self.parent.dim() - self.dim()
    }

    /// Element of the parent with coordinates `c` in `B`.
    pub fn embed(&self, c: &DVector<C64>) -> DVector<C64> {
        &self.basis * c
    }

    /// Coordinates in `B` and the distance of `f` from `B`.
    pub fn coordinates(&self, f: &DVector<C64>) -> (DVector<C64>, f64) {
        let c = self.basis.adjoint() * f;
        let off = (&self.basis * &c - f).iter().map(|v| v.norm()).fold(0.0, f64::max);
        (c, off)
    }

    /// `χ|B` as a functional on `B`'s coordinates.
    pub fn restrict(&self, ch: &Character) -> Character {
        Character { coeffs: self.basis.transpose() * &ch.coeffs }
    }

    /// `B` as an algebra in its own right, in the coordinates of `Q`.
    pub fn algebra(&self) -> Result<FiniteCommAlgebra, AlgebraError> {
        let m = self.dim();
        let mut consts = vec![C64::new(0.0, 0.0); m * m * m];
        for i in 0..m {
            for j in 0..m {
                let p = self.parent.mul(&self.basis.column(i).into_owned(), &self.basis.column(j).into_owned());
                let (c, _) = self.coordinates(&p);
                for k in 0..m {
                    consts[(i * m + j) * m + k] = c[k];
                }
            }
        }
        let (unit, _) = self.coordinates(self.parent.unit());
        FiniteCommAlgebra::new(format!("glued {}", self.parent.label()), m, consts, unit)
    }
}

/// The subalgebra on which every pair of characters agrees.
pub fn glue(a: &FiniteCommAlgebra, pairs: &[(Character, Character)]) -> Result<GluedSubalgebra, AlgebraError> {
    let n = a.dim();
    for (j, (x, y)) in pairs.iter().enumerate() {
        if x.distance(y) <= CHAR_MERGE {
            return Err(AlgebraError::NotDistinct(j));
        }
    }
    let basis = if pairs.is_empty() {
        DMatrix::identity(n, n)
    } else {
        let constraints = DMatrix::from_fn(pairs.len(), n, |j, i| pairs[j].0.coeffs[i] - pairs[j].1.coeffs[i]);
        DMatrix::from_columns(&null_space(&constraints, 1e-10))
    };
    let b = GluedSubalgebra { parent: a.clone(), pairs: pairs.to_vec(), basis };
    let (_, off) = b.coordinates(a.unit());
    if off > CLOSURE_TOL {
        return Err(AlgebraError::Invalid(format!("unit lies {off:e} from the glued subalgebra")));
    }
    for i in 0..b.dim() {
        for j in i..b.dim() {
            let p = a.mul(&b.basis.column(i).into_owned(), &b.basis.column(j).into_owned());
            let (_, off) = b.coordinates(&p);
            if off > CLOSURE_TOL {
                return Err(AlgebraError::Invalid(format!("product of basis elements {i}, {j} leaves the subalgebra by {off:e}")));
            }
        }
    }
    Ok(b)
}

#[derive(Clone, Debug, Serialize)]
pub struct LyingOverReport {
    pub characters_a: usize,
    pub characters_b: usize,
    /// Indices of the characters of `A` over each character of `B`.
    pub fibers: Vec<Vec<usize>>,
    /// Indices of characters of `A` that occur in a glued pair.
    pub glued: Vec<usize>,
    pub surjective: bool,
    pub dichotomy: bool,
    pub restriction_error: f64,
}

fn index_of(chars: &[Character], ch: &Character) -> Option<usize> {
    chars.iter().position(|c| c.distance(ch) <= CHAR_MERGE)
}

/// Characters of `B` computed from its own structure, compared with
/// restrictions of characters of `A`.
pub fn lying_over_check(a: &FiniteCommAlgebra, b: &GluedSubalgebra, seed: u64) -> Result<LyingOverReport, AlgebraError> {
    let chars_a = characters_of(a, seed)?;
    let chars_b = characters_of(&b.algebra()?, seed)?;
    let restricted: Vec<Character> = chars_a.iter().map(|c| b.restrict(c)).collect();
    let mut fibers = Vec::new();
    let mut worst = 0.0f64;
    for cb in &chars_b {
        let fiber: Vec<usize> = (0..chars_a.len()).filter(|&i| restricted[i].distance(cb) <= 1e-7).collect();
        for &i in &fiber {
            worst = worst.max(restricted[i].distance(cb));
        }
        fibers.push(fiber);
    }
    let surjective = fibers.iter().all(|f| !f.is_empty());
    let mut glued: Vec<usize> = b.pairs.iter().flat_map(|(x, y)| [index_of(&chars_a, x), index_of(&chars_a, y)]).flatten().collect();
    glued.sort_unstable();
    glued.dedup();
    let dichotomy = fibers.iter().all(|f| f.len() == 1 || f.iter().all(|i| glued.contains(i)));
    Ok(LyingOverReport {
        characters_a: chars_a.len(),
        characters_b: chars_b.len(),
        fibers,
        glued,
        surjective,
        dichotomy,
        restriction_error: worst,
    })
}

/// `f` with `ψ_0(f) = 1` and `ψ_j(f) = 0` for every other character, built
/// as a product of two-constraint minimum-norm solutions.
pub fn interpolation_element(a: &FiniteCommAlgebra, psi0: &Character, others: &[Character]) -> Result<DVector<C64>, AlgebraError> {
    let mut f = a.unit().clone();
    for (j, psi) in others.iter().enumerate() {
        if psi.distance(psi0) <= CHAR_MERGE {
            return Err(AlgebraError::CharactersCollide(j));
        }
        let m = DMatrix::from_fn(2, a.dim(), |r, i| if r == 0 { psi0.coeffs[i] } else { psi.coeffs[i] });
        let rhs = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let fj = min_norm_solve(&m, &rhs, 1e-13);
        let scale = psi0.eval(&fj);
        f = a.mul(&f, &(fj / scale));
    }
    Ok(f)
}
