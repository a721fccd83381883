//! Discrete Hölder seminorms.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// `max |g(x) - g(y)| / |x - y|^alpha` over distinct sample pairs.
///
/// A lower bound for the true seminorm on the sampled set.
pub fn holder_seminorm(points: &[C64], values: &[C64], alpha: f64) -> f64 {
    assert_eq!(points.len(), values.len());
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in i + 1..points.len() {
                let d = (points[i] - points[j]).norm();
                if d > 0.0 {
                    m = m.max((values[i] - values[j]).norm() / d.powf(alpha));
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

/// Same for real samples on the line.
pub fn holder_seminorm_real(xs: &[f64], ys: &[f64], alpha: f64) -> f64 {
    let p: Vec<C64> = xs.iter().map(|&x| C64::new(x, 0.0)).collect();
    let v: Vec<C64> = ys.iter().map(|&y| C64::new(y, 0.0)).collect();
    holder_seminorm(&p, &v, alpha)
}
