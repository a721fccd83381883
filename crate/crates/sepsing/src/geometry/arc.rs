//! Analytic arcs stored as Chebyshev series on [0, 1].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::transforms::gauss::gl16;

const TAIL_TOL: f64 = 1e-13;
const MAX_FIT: usize = 1024;

/// A parametrized arc `t -> gamma(t)`, `t` in [0, 1].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyticArc {
    coeffs: Vec<C64>,
    /// Coefficients of d gamma / dt (not of d gamma / dx).
    dcoeffs: Vec<C64>,
    orientation: i8,
    tail: f64,
}

fn clenshaw(c: &[C64], x: f64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or_default() + b1 * x - b2
}

/// Coefficients of the x-derivative of a Chebyshev series.
fn cheb_derivative(c: &[C64]) -> Vec<C64> {
    let n = c.len();
    if n <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    let mut d = vec![C64::new(0.0, 0.0); n + 1];
    for k in (0..n - 1).rev() {
        d[k] = d[k + 2] + c[k + 1] * (2.0 * (k + 1) as f64);
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Chebyshev coefficients interpolating `f` at the `n + 1` Lobatto points.
fn cheb_fit_lobatto(f: &dyn Fn(f64) -> C64, n: usize) -> Vec<C64> {
    let pi = std::f64::consts::PI;
    let vals: Vec<C64> = (0..=n).map(|j| f((pi * j as f64 / n as f64).cos())).collect();
    let cosines: Vec<f64> = (0..2 * n).map(|m| (pi * m as f64 / n as f64).cos()).collect();
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            let w = if j == 0 || j == n { 0.5 } else { 1.0 };
            s += v * (w * cosines[(j * k) % (2 * n)]);
        }
        *ck = s * (2.0 / n as f64);
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

impl AnalyticArc {
    /// Adaptive Chebyshev fit of `f` on [0, 1].
    pub fn fit(f: impl Fn(f64) -> C64) -> Result<Self, GeometryError> {
        let g = |x: f64| f(0.5 * (x + 1.0));
        let mut n = 16;
        loop {
            let c = cheb_fit_lobatto(&g, n);
            let scale = c.iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let q = (n / 4).max(4);
            let tail = c[n + 1 - q..].iter().fold(0.0f64, |m, v| m.max(v.norm())) / scale.max(f64::MIN_POSITIVE);
            if tail < TAIL_TOL * 0.1 || n >= MAX_FIT {
                if tail >= TAIL_TOL {
                    return Err(GeometryError::NotResolved(tail));
                }
                let mut keep = c.len();
                while keep > 2 && c[keep - 1].norm() <= 1e-17 * scale {
                    keep -= 1;
                }
                let mut c = c;
                c.truncate(keep);
                return Self::from_coeffs_with_tail(c, tail);
            }
            n *= 2;
        }
    }

    /// Arc from an explicit Chebyshev coefficient list (in x = 2t - 1).
    pub fn from_coeffs(coeffs: Vec<C64>) -> Result<Self, GeometryError> {
        Self::from_coeffs_with_tail(coeffs, 0.0)
    }

    fn from_coeffs_with_tail(coeffs: Vec<C64>, tail: f64) -> Result<Self, GeometryError> {
        if coeffs.len() < 2 || coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(GeometryError::DegenerateArc("coefficient list".into()));
        }
        let dcoeffs = cheb_derivative(&coeffs).into_iter().map(|d| d * 2.0).collect();
        let arc = AnalyticArc { coeffs, dcoeffs, orientation: 1, tail };
        arc.check()?;
        Ok(arc)
    }

    /// Circular arc `center + radius e^{i theta}`, theta from `theta0` to `theta1`.
    pub fn circular(center: C64, radius: f64, theta0: f64, theta1: f64) -> Result<Self, GeometryError> {
        if radius <= 0.0 || theta0 == theta1 || (theta1 - theta0).abs() > 2.0 * std::f64::consts::PI {
            return Err(GeometryError::DegenerateArc(format!("circle r={radius} [{theta0}, {theta1}]")));
        }
        Self::fit(|t| center + C64::from_polar(radius, theta0 + t * (theta1 - theta0)))
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: C64, b: C64) -> Result<Self, GeometryError> {
        let mid = (a + b) * 0.5;
        Self::from_coeffs(vec![mid, (b - a) * 0.5])
    }

    fn check(&self) -> Result<(), GeometryError> {
        let m = 2048;
        let mut min_speed = f64::INFINITY;
        let mut max_speed = 0.0f64;
        for j in 0..=m {
            let s = self.derivative(j as f64 / m as f64).norm();
            min_speed = min_speed.min(s);
            max_speed = max_speed.max(s);
        }
        if !(min_speed > 1e-12 * max_speed.max(1e-300)) {
            return Err(GeometryError::DegenerateArc(format!("derivative vanishes (min speed {min_speed:e})")));
        }
        // injectivity: chords of non-neighbouring samples stay away from zero
        let m = 256;
        let pts: Vec<C64> = (0..=m).map(|j| self.point(j as f64 / m as f64)).collect();
        let h = min_speed / m as f64;
        for i in 0..=m {
            for j in i + 2..=m {
                if (pts[i] - pts[j]).norm() < 0.5 * h {
                    return Err(GeometryError::DegenerateArc("arc is not injective".into()));
                }
            }
        }
        Ok(())
    }

    fn raw_param(&self, t: f64) -> f64 {
        let s = if self.orientation > 0 { t } else { 1.0 - t };
        2.0 * s - 1.0
    }

    pub fn point(&self, t: f64) -> C64 {
        clenshaw(&self.coeffs, self.raw_param(t))
    }

    /// d gamma / dt.
    pub fn derivative(&self, t: f64) -> C64 {
        clenshaw(&self.dcoeffs, self.raw_param(t)) * self.orientation as f64
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.point(1.0)
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Relative size of the trailing Chebyshev coefficients at fit time.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.orientation = -r.orientation;
        r
    }

    /// Image under `z -> rot * z + shift`.
    pub fn transformed(&self, rot: C64, shift: C64) -> Self {
        let mut coeffs: Vec<C64> = self.coeffs.iter().map(|c| c * rot).collect();
        coeffs[0] += shift;
        let dcoeffs = self.dcoeffs.iter().map(|c| c * rot).collect();
        AnalyticArc { coeffs, dcoeffs, orientation: self.orientation, tail: self.tail }
    }

    /// Rigid rotation by `theta` about `center`.
    pub fn rotated(&self, center: C64, theta: f64) -> Self {
        let rot = C64::from_polar(1.0, theta);
        self.transformed(rot, center - rot * center)
    }

    /// The piece `s -> gamma(t0 + s (t1 - t0))`, refitted.
    pub fn sub_arc(&self, t0: f64, t1: f64) -> Result<Self, GeometryError> {
        Self::fit(|s| self.point(t0 + s * (t1 - t0)))
    }

    /// Arc length of the parameter interval [t0, t1].
    pub fn length_between(&self, t0: f64, t1: f64) -> f64 {
        let (x, w) = gl16();
        let panels = 8;
        let h = (t1 - t0) / panels as f64;
        let mut s = 0.0;
        for p in 0..panels {
            let a = t0 + p as f64 * h;
            for (xi, wi) in x.iter().zip(w) {
                s += wi * 0.5 * h * self.derivative(a + 0.5 * h * (xi + 1.0)).norm();
            }
        }
        s.abs()
    }

    pub fn length(&self) -> f64 {
        self.length_between(0.0, 1.0)
    }

    /// Parameter `t` whose arc length from `t = 0` equals `s`.
    pub fn param_at_length(&self, s: f64) -> f64 {
        let total = self.length();
        if s <= 0.0 {
            return 0.0;
        }
        if s >= total {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t = s / total;
        for _ in 0..100 {
            let g = self.length_between(0.0, t) - s;
            if g.abs() < 1e-15 * total {
                break;
            }
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let tn = t - g / self.derivative(t).norm();
            t = if tn > lo && tn < hi { tn } else { 0.5 * (lo + hi) };
        }
        t
    }

    /// Closest point on the arc: (parameter, distance).
    pub fn nearest(&self, z: C64) -> (f64, f64) {
        let m = 64;
        let mut seeds: Vec<(f64, f64)> = (0..=m)
            .map(|j| {
                let t = j as f64 / m as f64;
                (t, (self.point(t) - z).norm())
            })
            .collect();
        seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut best = seeds[0];
        for &(t0, _) in seeds.iter().take(3) {
            let (mut lo, mut hi) = ((t0 - 1.0 / m as f64).max(0.0), (t0 + 1.0 / m as f64).min(1.0));
            // golden-section on the squared distance, then a few Newton steps
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let d2 = |t: f64| (self.point(t) - z).norm_sqr();
            let (mut a, mut b) = (hi - g * (hi - lo), lo + g * (hi - lo));
            let (mut fa, mut fb) = (d2(a), d2(b));
            for _ in 0..40 {
                if fa < fb {
                    hi = b;
                    b = a;
                    fb = fa;
                    a = hi - g * (hi - lo);
                    fa = d2(a);
                } else {
                    lo = a;
                    a = b;
                    fa = fb;
                    b = lo + g * (hi - lo);
                    fb = d2(b);
                }
            }
            let mut t = 0.5 * (lo + hi);
            for _ in 0..4 {
                let p = self.point(t) - z;
                let d = self.derivative(t);
                let h = 1e-5;
                let dd = (self.derivative((t + h).min(1.0)) - self.derivative((t - h).max(0.0))) / ((t + h).min(1.0) - (t - h).max(0.0));
                let g1 = (p.conj() * d).re;
                let g2 = d.norm_sqr() + (p.conj() * dd).re;
                if g2 <= 0.0 {
                    break;
                }
                t = (t - g1 / g2).clamp(0.0, 1.0);
            }
            for cand in [t, 0.0, 1.0] {
                let dist = (self.point(cand) - z).norm();
                if dist < best.1 {
                    best = (cand, dist);
                }
            }
        }
        best
    }
}
