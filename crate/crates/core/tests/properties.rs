//! Property-based invariants across the kernel, objective, and optimizer.

use proptest::prelude::*;

use splitci::corpus;
use splitci::objective::{default_first_step, SplitPair};
use splitci::optimizer::{grid_scan, minimize_w, OptimizeOptions, OptimizeStatus};
use splitci::symmat::SymMatrix;

/// Dimension, dependent-part ranks, and seed for a corpus pair.
fn pair_inputs() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=5).prop_flat_map(|n| (Just(n), 0..=n, 0..=n, any::<u64>()))
}

proptest! {
    #[test]
    fn trace_product_commutes_exactly(
        n in 1usize..=6,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let a = SymMatrix::random_psd(n, n, 1.0, seed_a).unwrap();
        let b = SymMatrix::random_psd(n, n.max(1) - 1, 2.0, seed_b).unwrap();
        prop_assert_eq!(
            a.trace_product(&b).unwrap(),
            b.trace_product(&a).unwrap()
        );
    }

    #[test]
    fn random_psd_outputs_are_psd(
        n in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let rank = (seed % (n as u64 + 1)) as usize;
        let m = SymMatrix::random_psd(n, rank, 1.0, seed).unwrap();
        prop_assert!(m.is_psd(1e-10));
    }

    #[test]
    fn spd_solve_round_trip(
        n in 1usize..=6,
        seed in any::<u64>(),
    ) {
        // jittered Gram matrices keep the condition number well below 1e6
        let m = corpus::random_pd(n, seed);
        let b = corpus::random_square(n, seed.wrapping_add(1));
        let x = m.spd_solve(&b).unwrap();
        let residual = (m.matrix() * &x - &b).abs().max();
        prop_assert!(residual <= 1e-9 * (1.0 + b.abs().max()));
    }

    #[test]
    fn log_curvature_is_nonnegative(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let d2 = pair.d2_logdet_direct(w).unwrap();
        prop_assert!(d2 >= -1e-8 * (1.0 + d2.abs()), "d2 = {d2}");
    }

    #[test]
    fn det_curvature_is_nonnegative(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let h = 0.5 * w.min(1.0 - w);
        let fd = pair.det_d2_fd(w, h).unwrap();
        let det = pair.logdet_objective(w).unwrap().exp();
        prop_assert!(fd >= -1e-6 * (1.0 + det), "fd = {fd}, det = {det}");
    }

    #[test]
    fn curvature_chain_inequality(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let d2 = pair.d2_logdet_direct(w).unwrap();
        let lb = pair.convexity_lower_bound(w).unwrap();
        let tol = 1e-7 * (1.0 + d2.abs());
        prop_assert!(d2 >= lb - tol, "d2 = {d2}, lb = {lb}");
        prop_assert!(lb >= -tol, "lb = {lb}");
    }

    #[test]
    fn curvature_formulas_agree(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let direct = pair.d2_logdet_direct(w).unwrap();
        let decomposed = pair.d2_logdet_decomposed(w).unwrap().d2;
        prop_assert!(
            (direct - decomposed).abs() <= 1e-8 * (1.0 + direct.abs()),
            "{direct} vs {decomposed}"
        );
    }

    #[test]
    fn slope_matches_finite_differences(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let d1 = pair.d1_logdet(w).unwrap();
        let fd = pair.d1_fd(w, default_first_step(w)).unwrap();
        prop_assert!(
            (d1 - fd).abs() <= 1e-5 * (1.0 + d1.abs()),
            "d1 = {d1}, fd = {fd}"
        );
    }

    #[test]
    fn no_dependent_parts_makes_objective_flat(
        n in 1usize..=5,
        seed in any::<u64>(),
    ) {
        let pair = SplitPair::new(
            SymMatrix::zeros(n),
            corpus::random_pd(n, seed),
            SymMatrix::zeros(n),
            corpus::random_pd(n, seed.wrapping_add(9)),
        )
        .unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 1..=9 {
            let v = pair.logdet_objective(0.1 * k as f64).unwrap();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        prop_assert!(hi - lo <= 1e-12);
    }

    #[test]
    fn swapping_sources_mirrors_objective(
        (n, r1, r2, seed) in pair_inputs(),
        w in 0.05f64..0.95,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let a = pair.logdet_objective(w).unwrap();
        let b = pair.swapped().logdet_objective(1.0 - w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn swapping_sources_mirrors_argmin(
        (n, r1, r2, seed) in pair_inputs(),
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let opts = OptimizeOptions::default();
        let res = minimize_w(&pair, &opts).unwrap();
        let res_swapped = minimize_w(&pair.swapped(), &opts).unwrap();
        match res.status {
            OptimizeStatus::Flat => {
                prop_assert_eq!(res_swapped.status, OptimizeStatus::Flat);
            }
            _ => prop_assert!(
                (res_swapped.w_star - (1.0 - res.w_star)).abs() <= 2.0 * opts.w_tol
                    || (res_swapped.objective_logdet - res.objective_logdet).abs() <= 1e-10,
                "w = {}, swapped w = {}",
                res.w_star,
                res_swapped.w_star
            ),
        }
    }

    #[test]
    fn scaling_preserves_argmin(
        (n, r1, r2, seed) in pair_inputs(),
        c in 0.1f64..10.0,
    ) {
        let pair = corpus::random_pair(n, r1, r2, seed);
        let opts = OptimizeOptions::default();
        let res = minimize_w(&pair, &opts).unwrap();
        let res_scaled = minimize_w(&pair.scaled(c), &opts).unwrap();
        // Shallow minima leave the argmin determined only up to the plateau
        // where the derivative is rounding noise; accept weights whose
        // (unscaled) objectives are indistinguishable there.
        let basin = (pair.logdet_objective(res_scaled.w_star).unwrap()
            - res.objective_logdet)
            .abs();
        prop_assert!(
            (res.w_star - res_scaled.w_star).abs() <= 2.0 * opts.w_tol || basin <= 1e-10,
            "{} vs {} (basin {basin:.3e})",
            res.w_star,
            res_scaled.w_star
        );
    }
}

#[test]
fn optimizer_agrees_with_coarse_grid_oracle() {
    // the full 100001-point agreement sweep lives in the acceptance suite;
    // this cheaper pass covers more seeds
    let opts = OptimizeOptions::default();
    for (k, pair) in corpus::pair_corpus(40, &[1, 2, 3, 5], 5150)
        .iter()
        .enumerate()
    {
        let res = minimize_w(pair, &opts).unwrap();
        let (w_grid, obj_grid) = grid_scan(pair, 10_001, opts.delta).unwrap();
        let dw = (res.w_star - w_grid).abs();
        let dv = (res.objective_logdet - obj_grid).abs();
        assert!(
            dw <= 2e-4 || dv <= 1e-10,
            "pair {k}: dw = {dw:.3e}, dv = {dv:.3e}"
        );
    }
}
