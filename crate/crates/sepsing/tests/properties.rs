use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use sepsing::algebra::{characters_of, FiniteCommAlgebra};
use sepsing::continuity::sweep_pairs;
use sepsing::decomposition::{discrete_adjoint, geometric_fit, low_rank_approx, weighted_pairing};
use sepsing::expr::Expr;
use sepsing::linalg::singular_values;
use sepsing::transforms::{holder_seminorm, DiscreteOperator};

fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex(), n)
}

fn operator(n: usize) -> impl Strategy<Value = DiscreteOperator> {
    (complex_vec(n * n), complex_vec(n), prop::collection::vec(0.1f64..2.0, n), prop::collection::vec(-3.0f64..3.0, n)).prop_map(move |(m, pts, mag, arg)| {
        let weights = mag.iter().zip(&arg).map(|(r, t)| C64::from_polar(*r, *t)).collect();
        let mut op = DiscreteOperator::zeros(pts.clone(), pts, weights);
        op.matrix = DMatrix::from_vec(n, n, m);
        op
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweep_pairs_are_sorted_unique_and_cover_neighbours(m in 2usize..12) {
        let pairs = sweep_pairs(m);
        prop_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(pairs.iter().all(|&(i, j)| i < j && j < m));
        for i in 0..m - 1 {
            prop_assert!(pairs.contains(&(i, i + 1)));
        }
        prop_assert!(pairs.contains(&(0, m - 1)));
    }

    #[test]
    fn geometric_fit_recovers_exact_decay(c in 0.1f64..10.0, rho in 0.2f64..0.9) {
        let sigma: Vec<f64> = (0..60).map(|j| c * rho.powi(j)).collect();
        let fit = geometric_fit(&sigma, 50, 1e-14).unwrap();
        prop_assert!((fit.rho - rho).abs() < 1e-9 * rho);
        prop_assert!((fit.c - c).abs() < 1e-8 * c);
        prop_assert!(fit.rms_log_residual < 1e-8);
        prop_assert!(fit.c_bound >= fit.c * (1.0 - 1e-12));
    }

    #[test]
    fn weighted_adjoint_identity(op in operator(6), psi in complex_vec(6), g in complex_vec(6)) {
        let adj = discrete_adjoint(&op).unwrap();
        let w = &op.col_weights;
        let lhs = weighted_pairing(&op.apply(&psi), &g, w);
        let rhs = weighted_pairing(&psi, &adj.apply(&g), w);
        prop_assert!((lhs - rhs).norm() < 1e-11 * lhs.norm().max(1.0));
    }

    #[test]
    fn low_rank_tail_is_next_singular_value(op in operator(7), eps in 0.05f64..1.5) {
        let sigma = singular_values(&op.matrix);
        let (approx, rank) = low_rank_approx(&op, eps);
        prop_assert_eq!(rank, sigma.iter().filter(|s| **s > eps).count());
        let tail = singular_values(&(&op.matrix - &approx.matrix))[0];
        let expected = sigma.get(rank).copied().unwrap_or(0.0);
        prop_assert!((tail - expected).abs() < 1e-10 * sigma[0].max(1.0));
    }

    #[test]
    fn polynomial_expressions_evaluate_like_horner(coeffs in prop::collection::vec(-5i32..5, 1..6), z in complex()) {
        let src = coeffs.iter().enumerate().map(|(j, a)| format!("({a})*z^{j}")).collect::<Vec<_>>().join(" + ");
        let e = Expr::parse(&src).unwrap();
        prop_assert_eq!(e.to_string(), src);
        let expected = coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + *a as f64);
        prop_assert!((e.eval(z) - expected).norm() < 1e-10 * (1.0 + expected.norm()));
    }

    #[test]
    fn affine_maps_are_detected(a in 0.5f64..3.0, b in -2.0f64..2.0) {
        let linear = Expr::parse(&format!("({a})*z + ({b})")).unwrap();
        let quadratic = Expr::parse(&format!("({a})*z^2 + ({b})")).unwrap();
        prop_assert!(linear.is_affine_in_z());
        prop_assert!(!quadratic.is_affine_in_z());
    }

    #[test]
    fn holder_seminorm_of_linear_function(a in complex(), alpha in 0.3f64..1.0) {
        let pts: Vec<C64> = (0..12).map(|j| C64::from_polar(0.4, j as f64)).collect();
        let vals: Vec<C64> = pts.iter().map(|z| a * z).collect();
        let h = holder_seminorm(&pts, &vals, 1.0);
        prop_assert!((h - a.norm()).abs() < 1e-12);
        // smaller exponents only help on points closer than one unit
        prop_assert!(holder_seminorm(&pts, &vals, alpha) <= h + 1e-12);
    }

    #[test]
    fn products_of_local_algebras_have_one_character_per_factor(orders in prop::collection::vec(1usize..4, 1..4), seed in 0u64..1000) {
        let parts: Vec<FiniteCommAlgebra> = orders.iter().map(|m| FiniteCommAlgebra::truncated(*m).unwrap()).collect();
        let a = FiniteCommAlgebra::direct_sum(&parts).unwrap();
        prop_assert_eq!(a.dim(), orders.iter().sum::<usize>());
        let chars = characters_of(&a, seed).unwrap();
        prop_assert_eq!(chars.len(), orders.len());
        for ch in &chars {
            prop_assert!(ch.defect(&a) < 1e-10);
        }
    }
}
