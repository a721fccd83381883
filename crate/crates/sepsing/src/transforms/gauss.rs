//! Gauss-Legendre rules on [-1, 1].

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

pub const ORDER: usize = 16;

/// The 16-point rule used by every panel.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// The 32-point rule, used as the doubled-order reference.
pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(2 * ORDER))
}

/// Barycentric weights for interpolation through the given nodes.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter().map(|v| v / scale).collect()
}

/// Row of the barycentric interpolation matrix evaluating at `x`.
pub fn interp_row(nodes: &[f64], bw: &[f64], x: f64, row: &mut [f64]) {
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            row.iter_mut().for_each(|r| *r = 0.0);
            row[j] = 1.0;
            return;
        }
    }
    let mut den = 0.0;
    for j in 0..nodes.len() {
        let t = bw[j] / (x - nodes[j]);
        row[j] = t;
        den += t;
    }
    row.iter_mut().for_each(|r| *r /= den);
}

pub fn gl16_bary() -> &'static Vec<f64> {
    static W: OnceLock<Vec<f64>> = OnceLock::new();
    W.get_or_init(|| barycentric_weights(&gl16().0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 32] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "n={n} deg={deg} q={q}");
            }
        }
    }

    #[test]
    fn sixteen_point_known_node() {
        // largest node of the 16-point rule
        let (x, w) = gl16();
        assert!((x[15] - 0.989_400_934_991_649_9).abs() < 1e-15);
        assert!((w[15] - 0.027_152_459_411_754_1).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_degree_15() {
        let (x, _) = gl16();
        let bw = gl16_bary();
        let f = |t: f64| t.powi(15) - 3.0 * t.powi(7) + 0.5;
        let vals: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let mut row = vec![0.0; 16];
        for &t in &[-1.0, -0.3, 0.11, 0.999] {
            interp_row(x, bw, t, &mut row);
            let v: f64 = row.iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((v - f(t)).abs() < 1e-12);
        }
    }
}
