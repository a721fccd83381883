use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{build_partition_with_radii, AdmissibleSystem};
use crate::scenario::bundled;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn system(name: &str) -> AdmissibleSystem {
    bundled(name).unwrap().system().unwrap()
}

fn random_density(plan: &DecompositionPlan, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let coeffs: Vec<(C64, C64)> = (0..6).map(|_| (c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect();
    plan.sample(|z| coeffs.iter().enumerate().map(|(j, (a, b))| a * z.powi(j as i32) + b * z.conj().powi(j as i32)).sum::<C64>() / 6.0)
}

#[test]
fn identity_disk_is_plain_cauchy() {
    let plan = build_plan(&system("identity_disk"), 0.25, 16, 0).unwrap();
    assert_eq!(plan.num_corners(), 0);
    assert!(plan.rotated_arcs.is_empty());
    let k = assemble_remainder(&plan).unwrap();
    assert!(k.matrix.iter().all(|v| *v == c(0.0, 0.0)));
    let f = plan.sample(|z| z * z);
    let fk = apply_fk(&plan, &f, 0).unwrap();
    for w in [c(0.3, 0.1), c(-0.5, 0.6), c(0.0, -0.9)] {
        let v = fk.eval(w).unwrap() / c(0.0, 2.0 * std::f64::consts::PI);
        assert!((v - w * w).norm() < 1e-13);
    }
    assert!(matches!(apply_fk(&plan, &f, 1), Err(DecompositionError::IndexOutOfRange(1, 1))));
    assert!(matches!(apply_fk(&plan, &f[1..], 0), Err(DecompositionError::DensityLength(..))));
}

#[test]
fn lens_rotated_arcs_attach_at_corners() {
    let sys = system("lens_mobius");
    let plan = build_plan(&sys, 0.25, 32, 8).unwrap();
    assert_eq!(plan.rotated_arcs.len(), 2);
    let b = plan.system.boundary();
    for k in 0..2 {
        let arc = &plan.rotated_arcs[k];
        assert!((arc.end() - plan.system.corner_point(k)).norm() < 1e-12);
        assert!(!b.contains(arc.start()) && b.distance(arc.start()) > 1e-3);
        // split pieces cover J_k^+ exactly up to the disk boundary
        let (t_in, _) = plan.splits[k];
        let first = plan.plus_panels[k].iter().map(|&p| plan.quadrature.panels[p].t0).fold(1.0, f64::min);
        assert!((first - t_in).abs() < 1e-13);
    }
    let k = assemble_remainder(&plan).unwrap();
    assert!(k.matrix.iter().all(|v| *v == c(0.0, 0.0)));
    let pts = plan.inward_points(1e-2, 7);
    let r = decompose(&plan, &plan.sample(|_| c(1.0, 0.0)), &pts).unwrap();
    assert!(r.sup_residual < 1e-10, "{:e}", r.sup_residual);
}

#[test]
fn tiny_corner_radius_gives_empty_split() {
    let sys = system("lens_mobius");
    let normal = crate::geometry::build_partition(&sys, 0.25).unwrap();
    let sys = sys.with_rotations(&normal).unwrap();
    let part = build_partition_with_radii(&sys, vec![1e-9, 1e-9]).unwrap();
    let q = crate::transforms::build_quadrature(sys.boundary(), 16, 12).unwrap();
    assert!(matches!(plan_decomposition(&sys, &part, &q), Err(DecompositionError::EmptySplit(0))));
}

#[test]
fn squared_lens_cross_assembly() {
    let plan = build_plan(&system("lens_squared"), 0.25, 16, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts = plan.inward_points(0.05, 5);
    let rows = remainder_rows(&plan, &pts).unwrap();
    assert!(rows.matrix.iter().any(|v| v.norm() > 1e-6));
    for _ in 0..3 {
        let f = random_density(&plan, &mut rng);
        let direct = rows.apply(&f);
        let r = decompose(&plan, &f, &pts).unwrap();
        let err = direct.iter().zip(&r.residual_samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err:e}");
    }
}

#[test]
fn adjoint_pairing_and_low_rank() {
    let plan = build_plan(&system("lens_squared"), 0.25, 16, 2).unwrap();
    let k = assemble_remainder(&plan).unwrap();
    let s = discrete_adjoint(&k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psi: Vec<C64> = (0..k.ncols()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let g: Vec<C64> = (0..k.ncols()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let w = &k.col_weights;
    let lhs = weighted_pairing(&k.apply(&psi), &g, w);
    let rhs = weighted_pairing(&psi, &s.apply(&g), w);
    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));

    let sigma = crate::linalg::singular_values(&k.matrix);
    let (approx, rank) = low_rank_approx(&k, 1e-6);
    assert!(rank > 0 && sigma[rank - 1] > 1e-6 && sigma[rank] <= 1e-6);
    let err = crate::linalg::singular_values(&(&k.matrix - &approx.matrix))[0];
    assert!(err <= sigma[rank] * (1.0 + 1e-8) + 1e-15);
    let (zero, r0) = low_rank_approx(&k, sigma[0] * 1.01);
    assert_eq!(r0, 0);
    assert!(zero.matrix.iter().all(|v| *v == c(0.0, 0.0)));
    let (_, full) = low_rank_approx(&k, 1e-300);
    assert_eq!(full, sigma.iter().filter(|v| **v > 1e-300).count());
    let square_err = discrete_adjoint(&remainder_rows(&plan, &[c(0.0, 0.0)]).unwrap());
    assert!(matches!(square_err, Err(DecompositionError::ShapeMismatch(_))));
}

#[test]
fn corner_ray_growth_is_bounded() {
    let plan = build_plan(&system("lens_mobius"), 0.25, 32, 12).unwrap();
    let f = plan.sample(|_| c(1.0, 0.0));
    for k in 0..2 {
        let g = apply_gk(&plan, &f, k, Side::Minus).unwrap();
        let wk = plan.maps[(k + 1) % 2].eval(plan.system.corner_point(k));
        let mut sup = 0.0f64;
        for j in 0..50 {
            let s = 0.1 * (1e-5f64 / 0.1).powf(j as f64 / 49.0);
            let z = wk * (1.0 - s);
            sup = sup.max(((z - wk) * g.eval(z).unwrap()).norm());
        }
        assert!(sup.is_finite() && sup < 10.0, "{sup}");
    }
}

#[test]
fn geometric_fit_recovers_rate() {
    let sigma: Vec<f64> = (0..60).map(|j| 3.0 * 0.5f64.powi(j)).collect();
    let fit = geometric_fit(&sigma, 50, 1e-14).unwrap();
    assert!((fit.rho - 0.5).abs() < 1e-12 && (fit.c - 3.0).abs() < 1e-10);
    assert!(fit.rms_log_residual < 1e-10);
    assert_eq!(fit.used, 47);
    assert!(geometric_fit(&[1.0, 0.0], 50, 1e-14).is_none());
}
