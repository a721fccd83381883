use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde_json::Value;

use super::{AlgebraError, MAX_DIM};
use crate::expr::{Expr, Taylor, NUM_VARS, VAR_X};

const STRUCTURE_TOL: f64 = 1e-12;

/// Unital commutative algebra given by structure constants
/// `e_i e_j = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug)]
pub struct FiniteCommAlgebra {
    label: String,
    dim: usize,
    consts: Vec<C64>,
    unit: DVector<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl FiniteCommAlgebra {
    /// `consts[(i * dim + j) * dim + k] = c[i][j][k]`.
    pub fn new(label: impl Into<String>, dim: usize, consts: Vec<C64>, unit: DVector<C64>) -> Result<Self, AlgebraError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(AlgebraError::Invalid(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if consts.len() != dim * dim * dim || unit.len() != dim {
            return Err(AlgebraError::Invalid("structure constants or unit have the wrong length".into()));
        }
        let a = FiniteCommAlgebra { label: label.into(), dim, consts, unit };
        a.check()?;
        Ok(a)
    }

    fn check(&self) -> Result<(), AlgebraError> {
        let n = self.dim;
        let scale = self.consts.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if (self.c(i, j, k) - self.c(j, i, k)).norm() > STRUCTURE_TOL * scale {
                        return Err(AlgebraError::Invalid(format!("e{i} e{j} != e{j} e{i}")));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let left = self.mul(&self.mul(&self.basis(i), &self.basis(j)), &self.basis(l));
                    let right = self.mul(&self.basis(i), &self.mul(&self.basis(j), &self.basis(l)));
                    if (left - right).iter().any(|v| v.norm() > STRUCTURE_TOL * scale * scale) {
                        return Err(AlgebraError::Invalid(format!("(e{i} e{j}) e{l} != e{i} (e{j} e{l})")));
                    }
                }
            }
        }
        for i in 0..n {
            if (self.mul(&self.unit, &self.basis(i)) - self.basis(i)).iter().any(|v| v.norm() > STRUCTURE_TOL * scale) {
                return Err(AlgebraError::Invalid(format!("unit does not fix e{i}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &DVector<C64> {
        &self.unit
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> C64 {
        self.consts[(i * self.dim + j) * self.dim + k]
    }

    pub fn basis(&self, i: usize) -> DVector<C64> {
        DVector::from_fn(self.dim, |k, _| if k == i { one() } else { zero() })
    }

    pub fn mul(&self, a: &DVector<C64>, b: &DVector<C64>) -> DVector<C64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if a[i] == zero() {
                continue;
            }
            for j in 0..n {
                let ab = a[i] * b[j];
                if ab == zero() {
                    continue;
                }
                for k in 0..n {
                    out[k] += ab * self.c(i, j, k);
                }
            }
        }
        out
    }

    /// Matrix of `b -> a b`.
    pub fn mult_matrix(&self, a: &DVector<C64>) -> DMatrix<C64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m.set_column(j, &self.mul(a, &self.basis(j)));
        }
        m
    }

    /// `C[x]/(p)` with `p` given by ascending coefficients; basis `1, x, ..., x^(d-1)`.
    pub fn quotient(label: impl Into<String>, p: &[C64]) -> Result<Self, AlgebraError> {
        let d = p.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
        if d == 0 {
            return Err(AlgebraError::Invalid("modulus must have positive degree".into()));
        }
        let lead = p[d];
        // coordinates of x^m for m = 0..2d-2
        let mut powers: Vec<DVector<C64>> = Vec::with_capacity(2 * d - 1);
        for m in 0..2 * d - 1 {
            let v = if m < d {
                DVector::from_fn(d, |k, _| if k == m { one() } else { zero() })
            } else {
                let prev: &DVector<C64> = &powers[m - 1];
                let top = prev[d - 1];
                DVector::from_fn(d, |k, _| (if k > 0 { prev[k - 1] } else { zero() }) - top * p[k] / lead)
            };
            powers.push(v);
        }
        let mut consts = vec![zero(); d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    consts[(i * d + j) * d + k] = powers[i + j][k];
                }
            }
        }
        let unit = DVector::from_fn(d, |k, _| if k == 0 { one() } else { zero() });
        Self::new(label, d, consts, unit)
    }

    /// `C[x]/(x^m)`.
    pub fn truncated(m: usize) -> Result<Self, AlgebraError> {
        let mut p = vec![zero(); m + 1];
        p[m] = one();
        Self::quotient(if m == 1 { "C".to_string() } else { format!("C[x]/(x^{m})") }, &p)
    }

    /// `C^m` with pointwise multiplication.
    pub fn diagonal(m: usize) -> Result<Self, AlgebraError> {
        let parts = vec![Self::truncated(1)?; m];
        Self::direct_sum(&parts)
    }

    pub fn direct_sum(parts: &[FiniteCommAlgebra]) -> Result<Self, AlgebraError> {
        if parts.is_empty() {
            return Err(AlgebraError::Invalid("empty direct sum".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        if dim > MAX_DIM {
            return Err(AlgebraError::Invalid(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        let mut consts = vec![zero(); dim * dim * dim];
        let mut unit = DVector::zeros(dim);
        let mut off = 0;
        for p in parts {
            for i in 0..p.dim {
                unit[off + i] = p.unit[i];
                for j in 0..p.dim {
                    for k in 0..p.dim {
                        consts[((off + i) * dim + off + j) * dim + off + k] = p.c(i, j, k);
                    }
                }
            }
            off += p.dim;
        }
        let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" + ");
        Self::new(label, dim, consts, unit)
    }

    /// Parse `C[x]/(p(x))`.
    pub fn parse_quotient(src: &str) -> Result<Self, AlgebraError> {
        let bad = |why: &str| AlgebraError::Parse(src.to_string(), why.to_string());
        let s = src.trim();
        let inner = s
            .strip_prefix("C[x]/(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("expected C[x]/(p)"))?;
        let e = Expr::parse(inner).map_err(|err| bad(&err.to_string()))?;
        let mut vars = vec![Taylor::<{ MAX_DIM + 2 }>::zero(); NUM_VARS];
        vars[VAR_X] = Taylor::variable(zero());
        let series = e.eval_vars(&vars);
        if series.0[MAX_DIM + 1].norm() > 0.0 {
            return Err(bad("modulus is not a polynomial of degree <= 12"));
        }
        Self::quotient(s, &series.0[..=MAX_DIM])
    }

    /// A shorthand string, `{"sum": [...]}`, or
    /// `{"dim": d, "constants": [[[c_ijk]]], "unit": [...]}` with complex
    /// entries written as `[re, im]`.
    pub fn from_json(v: &Value) -> Result<Self, AlgebraError> {
        match v {
            Value::String(s) => Self::parse_quotient(s),
            Value::Object(map) if map.contains_key("sum") => {
                let parts = map["sum"].as_array().ok_or_else(|| AlgebraError::Parse(v.to_string(), "sum must be a list".into()))?;
                let parts = parts.iter().map(Self::from_json).collect::<Result<Vec<_>, _>>()?;
                Self::direct_sum(&parts)
            }
            Value::Object(map) => {
                let bad = |why: String| AlgebraError::Parse(v.to_string(), why);
                let dim = map.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim".into()))? as usize;
                let c: Vec<Vec<Vec<C64>>> =
                    serde_json::from_value(map.get("constants").cloned().unwrap_or(Value::Null)).map_err(|e| bad(e.to_string()))?;
                let unit: Vec<C64> = serde_json::from_value(map.get("unit").cloned().unwrap_or(Value::Null)).map_err(|e| bad(e.to_string()))?;
                let consts: Vec<C64> = c.into_iter().flatten().flatten().collect();
                let label = map.get("name").and_then(Value::as_str).unwrap_or("structure constants").to_string();
                Self::new(label, dim, consts, DVector::from_vec(unit))
            }
            _ => Err(AlgebraError::Parse(v.to_string(), "expected a string or an object".into())),
        }
    }
}
