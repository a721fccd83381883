use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{ExceptionalSet, ExtensionError};
use crate::expr::{Expr, ExprError, Scalar, Taylor};
use crate::geometry::AdmissibleSystem;
use crate::linalg::{least_squares, min_norm_solve, sup_norm};

/// Taylor length used for pullback jets; enough for vanishing order 8.
pub const JET_LEN: usize = 9;
const JET_TOL: f64 = 1e-10;

/// A function on the curve `V = Φ(Ω)`: either an ambient expression in
/// `w1..wn` restricted to `V`, or a function of `z` read through `Φ`.
#[derive(Clone, Debug)]
pub enum CurveFunction {
    Ambient(Expr),
    Pullback(Expr),
}

impl CurveFunction {
    /// Expressions in `z` are pullbacks, anything else is ambient.
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        Ok(Self::from_expr(Expr::parse(src)?))
    }

    pub fn from_expr(e: Expr) -> Self {
        if e.uses_z() {
            CurveFunction::Pullback(e)
        } else {
            CurveFunction::Ambient(e)
        }
    }

    pub fn source(&self) -> &str {
        match self {
            CurveFunction::Ambient(e) | CurveFunction::Pullback(e) => e.source(),
        }
    }

    /// `f(Φ(z))`.
    pub fn pullback(&self, system: &AdmissibleSystem, z: C64) -> C64 {
        match self {
            CurveFunction::Ambient(e) => {
                let w: Vec<C64> = system.maps().iter().map(|m| m.eval(z)).collect();
                e.eval_curve(&w)
            }
            CurveFunction::Pullback(e) => e.eval(z),
        }
    }

    /// Taylor coefficients of `f∘Φ` at `z`.
    pub fn pullback_series(&self, system: &AdmissibleSystem, z: C64) -> Taylor<JET_LEN> {
        match self {
            CurveFunction::Ambient(e) => {
                let w: Vec<Taylor<JET_LEN>> = system.maps().iter().map(|m| m.series::<JET_LEN>(z)).collect();
                e.eval_curve(&w)
            }
            CurveFunction::Pullback(e) => e.eval(Taylor::<JET_LEN>::variable(z)),
        }
    }

    /// Value at an ambient point, when the function is given ambiently.
    pub fn ambient(&self, w: &[C64]) -> Option<C64> {
        match self {
            CurveFunction::Ambient(e) => Some(e.eval_curve(w)),
            CurveFunction::Pullback(_) => None,
        }
    }
}

/// All exponent vectors in `n` variables of total degree `<= d`, graded
/// lexicographic.
pub fn monomials(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn fill(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=left).rev() {
            prefix.push(a);
            fill(n, left - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for deg in 0..=d as u32 {
        fill(n, deg, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JetPolynomial {
    pub n: usize,
    pub exponents: Vec<Vec<u32>>,
    pub coeffs: Vec<C64>,
}

impl JetPolynomial {
    pub fn zero(n: usize) -> Self {
        JetPolynomial { n, exponents: Vec::new(), coeffs: Vec::new() }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().zip(&self.coeffs).filter(|(_, c)| c.norm() > 0.0).map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, w: &[C64]) -> C64 {
        self.eval_series(w)
    }

    /// Evaluate over any scalar, e.g. the Taylor series of the coordinates.
    pub fn eval_series<T: Scalar>(&self, w: &[T]) -> T {
        let mut s = T::constant(C64::new(0.0, 0.0));
        for (e, c) in self.exponents.iter().zip(&self.coeffs) {
            if c.norm() == 0.0 {
                continue;
            }
            let mut t = T::constant(*c);
            for (wk, &a) in w.iter().zip(e) {
                if a > 0 {
                    t = t * wk.powi(a as i32);
                }
            }
            s = s + t;
        }
        s
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}

/// Least-degree polynomial `P` whose pullback `P∘Φ` agrees with `f∘Φ` to
/// order `N` (derivatives `0..N-1`) at every exceptional point, including
/// both ends of glued pairs.
pub fn jet_correction(target: &CurveFunction, set: &ExceptionalSet, system: &AdmissibleSystem) -> Result<JetPolynomial, ExtensionError> {
    let n = system.n();
    let pts = set.jet_points();
    if pts.is_empty() {
        return Ok(JetPolynomial::zero(n));
    }
    if let Some(&(_, order)) = pts.iter().find(|p| p.1 == 0 || p.1 > JET_LEN) {
        return Err(ExtensionError::JetMismatch(format!("order {order} outside 1..={JET_LEN}")));
    }
    let coord: Vec<Vec<Taylor<JET_LEN>>> = pts.iter().map(|(z, _)| system.maps().iter().map(|m| m.series::<JET_LEN>(*z)).collect()).collect();
    let rhs: Vec<C64> = pts.iter().flat_map(|(z, order)| target.pullback_series(system, *z).0.into_iter().take(*order)).collect();
    let b = DVector::from_vec(rhs);
    let scale = sup_norm(&b).max(1.0);
    let max_degree = pts.iter().map(|p| p.1).max().unwrap_or(1) * set.len();

    let mut best = f64::INFINITY;
    for d in 0..=max_degree {
        let exps = monomials(n, d);
        let mut a = DMatrix::<C64>::zeros(b.len(), exps.len());
        for (col, e) in exps.iter().enumerate() {
            let mono = JetPolynomial { n, exponents: vec![e.clone()], coeffs: vec![C64::new(1.0, 0.0)] };
            let mut row = 0;
            for (i, (_, order)) in pts.iter().enumerate() {
                let s: Taylor<JET_LEN> = mono.eval_series(&coord[i]);
                for m in 0..*order {
                    a[(row, col)] = s.0[m];
                    row += 1;
                }
            }
        }
        let x = if a.nrows() >= a.ncols() {
            match least_squares(&a, &b) {
                Some(x) => x,
                None => min_norm_solve(&a, &b, 1e-13),
            }
        } else {
            min_norm_solve(&a, &b, 1e-13)
        };
        let res = sup_norm(&(&a * &x - &b));
        best = best.min(res);
        if res <= JET_TOL * scale {
            return Ok(JetPolynomial { n, exponents: exps, coeffs: x.iter().copied().collect() });
        }
    }
    Err(ExtensionError::JetMismatch(format!(
        "no polynomial of degree <= {max_degree} reproduces the jets of {} (best residual {best:e})",
        target.source()
    )))
}
