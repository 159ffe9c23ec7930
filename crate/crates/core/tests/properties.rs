mod common;

use common::random_field;
use proptest::prelude::*;
use sie_core::spectral::dealias_grid_size;
use sie_core::stepper::{dense_transport_solve, fixed_point_solve_from};
use sie_core::{
    biot_savart, evaluate_on_grid, galerkin_project, grid_to_spectral, implicit_transport_solve,
    transport_term, StepperConfig,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_round_trip_and_parseval(n in 1usize..7, seed in any::<u64>(), extra in 0usize..6) {
        let xi = random_field(n, 1.0, seed);
        let m = 2 * n + 2 + extra;
        let back = grid_to_spectral(&evaluate_on_grid(&xi, m).unwrap(), n).unwrap();
        prop_assert!(back.max_abs_diff(&xi) <= 1e-13 * xi.l2_norm());
        let l2 = xi.l2_norm();
        let sum_sq: f64 = xi.coefficients().iter().map(|c| c * c).sum();
        prop_assert!((l2 * l2 - sum_sq).abs() <= 1e-13 * sum_sq);
        let quad = xi.lp_grid_norm(2.0, m).unwrap();
        prop_assert!((quad - l2).abs() <= 1e-12 * l2);
    }

    #[test]
    fn biot_savart_is_a_divergence_free_curl_inverse(n in 1usize..9, seed in any::<u64>()) {
        let xi = random_field(n, 0.5, seed);
        let u = biot_savart(&xi);
        prop_assert_eq!(u.max_divergence(), 0.0);
        prop_assert!(u.curl().max_abs_diff(&xi) <= 1e-13 * xi.l2_norm());
        prop_assert!(u.l2_norm() <= xi.l2_norm() / (2.0 * std::f64::consts::PI) * (1.0 + 1e-14));
    }

    #[test]
    fn transport_is_skew_symmetric(n in 1usize..9, seed in any::<u64>()) {
        let xi = random_field(n, 0.0, seed);
        let zeta = random_field(n, 0.0, seed.wrapping_add(1));
        let b = transport_term(&xi, &zeta).unwrap();
        let h1 = zeta.sobolev_norm(1);
        prop_assert!(b.dot(&zeta).abs() <= 1e-10 * xi.l2_norm() * h1 * h1);
    }

    #[test]
    fn projection_never_increases_the_norm(n in 2usize..8, seed in any::<u64>(), cut in 1usize..8) {
        let xi = random_field(n, 0.0, seed);
        let target = cut.min(n);
        let p = galerkin_project(&xi, target).unwrap();
        prop_assert!(p.l2_norm() <= xi.l2_norm());
        prop_assert_eq!(galerkin_project(&p, target).unwrap(), p);
    }

    #[test]
    fn implicit_step_satisfies_the_energy_identity(
        n in 1usize..7,
        seed in any::<u64>(),
        tau in prop::sample::select(vec![1e-3, 1e-2, 5e-2]),
    ) {
        let xi = random_field(n, 1.0, seed);
        let bar = implicit_transport_solve(&xi, &StepperConfig::new(tau)).unwrap();
        let lhs = bar.dot(&bar) + (&xi - &bar).dot(&(&xi - &bar));
        prop_assert!((lhs - xi.dot(&xi)).abs() <= 1e-10 * xi.dot(&xi));
        prop_assert!(bar.l2_norm() <= xi.l2_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn fixed_point_and_dense_solvers_agree(
        n in 1usize..5,
        seed in any::<u64>(),
        tau in prop::sample::select(vec![1e-3, 1e-2, 5e-2]),
    ) {
        let xi = random_field(n, 1.0, seed);
        let fp = implicit_transport_solve(&xi, &StepperConfig::new(tau)).unwrap();
        let dense = dense_transport_solve(&xi, tau).unwrap();
        prop_assert!((&fp - &dense).l2_norm() <= 1e-10 * xi.l2_norm());
    }

    #[test]
    fn converged_solution_does_not_depend_on_the_initial_guess(
        n in 1usize..6,
        seed in any::<u64>(),
    ) {
        let xi = random_field(n, 1.0, seed);
        let cfg = StepperConfig::new(1e-2);
        let from_xi = implicit_transport_solve(&xi, &cfg).unwrap();
        let mut guess = xi.clone();
        guess.axpy(0.3, &random_field(n, 0.0, seed.wrapping_add(7)));
        let from_guess = fixed_point_solve_from(&xi, &guess, &cfg).unwrap();
        // Each certified iterate is within fp_tol·|ξ|·‖(I+τB)⁻¹‖ ≤ fp_tol·|ξ| of the solution.
        prop_assert!((&from_xi - &from_guess).l2_norm() <= 2.0 * cfg.fp_tol * xi.l2_norm());
    }
}

#[test]
fn l4_norm_is_monitoring_grade_on_the_dealiased_grid() {
    let xi = random_field(6, 2.0, 3);
    let coarse = xi.lp_grid_norm(4.0, dealias_grid_size(6)).unwrap();
    let fine = xi.lp_grid_norm(4.0, 128).unwrap();
    assert!((coarse - fine).abs() <= 1e-12 * fine);
}
