use std::f64::consts::LN_2;

use poik::dist::{
    self, cdf, kappa, mean, median, mode, pmf_combinatorial, pmf_table, support_bound, variance,
    CdfWalker, OrderKParams,
};
use poik::oracle::pmf_by_convolution;
use poik::solver::{
    head_mass_by_pmf_sums, lambda_star_approx, median_equation_sum, solve_lambda_star,
    solve_lambda_star_by_cdf, verify_boundary,
};
use poik::sweep::sweep_nu_mu;
use proptest::prelude::*;
use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

fn p(k: u64, lambda: f64) -> OrderKParams<f64> {
    OrderKParams::new(k, lambda).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Indices spread over `0..=hi`, always including both ends and `k`, `k+1`.
fn probe_indices(k: u64, hi: u64, extra: &[u64]) -> Vec<u64> {
    let mut v: Vec<u64> = vec![0, 1, k.min(hi), (k + 1).min(hi), hi];
    v.extend(extra.iter().map(|&n| n % (hi + 1)));
    v.sort_unstable();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_up_to_support_bound(k in 1u64..=200, lambda in 0.005f64..4.0) {
        let params = p(k, lambda);
        let t = pmf_table(&params, support_bound(&params)).unwrap();
        prop_assert!((t.total_mass() - 1.0).abs() <= 1e-10, "mass {}", t.total_mass());
    }

    #[test]
    fn closed_form_matches_recurrence(
        k in 1u64..=50,
        k_lambda in 0.01f64..30.0,
        extra in prop::collection::vec(any::<u64>(), 6),
    ) {
        let params = p(k, k_lambda / k as f64);
        let hi = 4 * kappa(k);
        let t = pmf_table(&params, hi).unwrap();
        for n in probe_indices(k, hi, &extra) {
            let a = t.probability(n).unwrap();
            let b = pmf_combinatorial(&params, n).unwrap();
            prop_assert!(rel(a, b) <= 1e-10, "k={k} n={n}: {a:e} vs {b:e}");
        }
    }

    #[test]
    fn three_way_agreement(k in 1u64..=20, k_lambda in 0.01f64..20.0, extra in prop::collection::vec(any::<u64>(), 4)) {
        let params = p(k, k_lambda / k as f64);
        let t = pmf_table(&params, 300).unwrap();
        let o = pmf_by_convolution(&params, 300).unwrap();
        for n in probe_indices(k, 300, &extra) {
            let a = t.probability(n).unwrap();
            let b = pmf_combinatorial(&params, n).unwrap();
            let c = o.probability(n).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 && (a - c).abs() <= 1e-10 && (b - c).abs() <= 1e-10);
        }
    }

    #[test]
    fn standard_poisson_reduction(lambda in 0.01f64..60.0) {
        let params = p(1, lambda);
        let reference = Poisson::new(lambda).unwrap();
        let t = pmf_table(&params, support_bound(&params)).unwrap();
        for n in 0..=t.n_max().min(200) {
            let a = t.probability(n).unwrap();
            let b = reference.pmf(n);
            prop_assert!(rel(a, b) <= 1e-9 || (a - b).abs() < 1e-300, "n={n}");
            prop_assert!((cdf(&t, n).unwrap() - reference.cdf(n)).abs() <= 1e-12);
        }
        prop_assert!((mean(&params) - lambda).abs() <= 1e-15 * lambda);
        prop_assert!((variance(&params) - lambda).abs() <= 1e-15 * lambda);
        let m = median(&params);
        prop_assert!(reference.cdf(m) >= 0.5 - 1e-12);
        prop_assert!(m == 0 || reference.cdf(m - 1) < 0.5 + 1e-12);
    }

    #[test]
    fn median_zero_iff_below_threshold(k in 1u64..=100, frac in 0.0f64..1.0) {
        let threshold = LN_2 / k as f64;
        prop_assert_eq!(median(&p(k, threshold * (0.01 + 0.99 * frac))), 0);
        prop_assert!(median(&p(k, threshold * (1.0 + 1e-6 + frac))) >= 1);
    }

    #[test]
    fn median_is_a_median(k in 1u64..=60, lambda in 0.001f64..3.0) {
        let params = p(k, lambda);
        let m = median(&params);
        let mut w = CdfWalker::new(&params);
        if m > 0 {
            prop_assert!(w.ln_cdf_at(m - 1) < -LN_2);
        }
        prop_assert!(w.ln_cdf_at(m) >= -LN_2 - 1e-15);
    }

    #[test]
    fn solver_agrees_with_cdf_root(k in 1u64..=50, nu_frac in 0.0f64..=1.0) {
        let nu = (nu_frac * k as f64).round() as u64;
        let a = solve_lambda_star::<f64>(k, nu).unwrap();
        let b = solve_lambda_star_by_cdf::<f64>(k, nu).unwrap();
        prop_assert!(rel(a.lambda_star, b.lambda_star) <= 1e-10,
            "k={k} nu={nu}: {} vs {}", a.lambda_star, b.lambda_star);
    }

    #[test]
    fn boundary_is_where_the_median_steps(k in 1u64..=40, nu_frac in 0.0f64..=2.0) {
        let nu = (nu_frac * k as f64).round() as u64;
        let r = solve_lambda_star::<f64>(k, nu).unwrap();
        prop_assert!(verify_boundary(&r), "k={k} nu={nu}");
    }

    #[test]
    fn telescoping_identity(nu in 0u64..=30, lambda in 0.001f64..2.0) {
        let a = head_mass_by_pmf_sums(nu, lambda);
        let b = median_equation_sum(nu, lambda);
        prop_assert!(rel(a, b) <= 1e-12);
    }

    #[test]
    fn order_one_approximation_quality(k in 20u64..=400, nu_frac in 0.0f64..1.0) {
        let nu = ((nu_frac * k as f64) as u64).min(k - 1);
        let exact = solve_lambda_star::<f64>(k, nu).unwrap().lambda_star;
        let approx = lambda_star_approx::<f64>(k, nu, 1).unwrap();
        let bound = 2.0 * nu as f64 / k as f64 + 2.0 / k as f64;
        prop_assert!(rel(approx, exact) < bound, "k={k} nu={nu}");
    }

    #[test]
    fn single_and_double_precision_medians_agree(k in 1u64..=30, lambda in 0.01f64..3.0) {
        // Stay away from boundaries where the two precisions may legitimately differ.
        let m64 = median(&p(k, lambda));
        let lo = median(&p(k, lambda * (1.0 - 1e-4)));
        let hi = median(&p(k, lambda * (1.0 + 1e-4)));
        prop_assume!(lo == m64 && hi == m64);
        let m32 = median(&OrderKParams::<f32>::new(k, lambda as f32).unwrap());
        prop_assert_eq!(m32, m64);
    }
}

#[test]
fn moments_match_closed_forms() {
    for k in [1, 2, 3, 5, 10, 20] {
        for lambda in [0.1, 0.5, 1.0, 2.0] {
            let params = p(k, lambda);
            let t = pmf_table(&params, support_bound(&params)).unwrap();
            let probs = t.probabilities();
            let m1: f64 = probs.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
            let m2: f64 = probs.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum();
            let (mu, var) = (mean(&params), variance(&params));
            assert!(rel(m1, mu) <= 1e-8, "k={k} lambda={lambda}");
            assert!(rel(m2 - m1 * m1, var) <= 1e-6, "k={k} lambda={lambda}");
        }
    }
}

#[test]
fn median_moves_in_unit_steps() {
    for k in [1, 2, 3, 5, 8, 13, 20] {
        let mut previous = 0;
        for i in 1..=3000 {
            let m = median(&p(k, i as f64 * 1e-3));
            assert!(m == previous || m == previous + 1, "k={k} lambda={}", i as f64 * 1e-3);
            previous = m;
        }
    }
}

#[test]
fn median_zero_threshold_every_order() {
    for k in 1..=100u64 {
        let threshold = LN_2 / k as f64;
        assert_eq!(median(&p(k, threshold)), 0, "k={k}");
        assert_eq!(median(&p(k, threshold + 1e-9)), 1, "k={k}");
    }
}

#[test]
fn boundary_rates_increase_with_nu() {
    for k in [1, 2, 7, 20, 45] {
        let s = sweep_nu_mu::<f64>(k, 2 * k).unwrap();
        assert!(s.windows(2).all(|w| w[1].lambda_star > w[0].lambda_star), "k={k}");
        assert!(s.windows(2).all(|w| w[1].mu_star > w[0].mu_star), "k={k}");
        assert!(s.iter().all(verify_boundary), "k={k}");
    }
}

#[test]
fn oracle_self_consistency() {
    for (k, lambda) in [(1, 3.0), (3, 1.5), (8, 0.9), (20, 1.0), (20, 2.5)] {
        let params = p(k, lambda);
        let n_max = support_bound(&params).min(5000);
        let o = pmf_by_convolution(&params, n_max).unwrap();
        assert!((o.total_mass() - 1.0).abs() <= 1e-12, "k={k} lambda={lambda}");
    }
}

#[test]
fn mode_reduces_to_floor_for_standard_poisson() {
    for lambda in [0.3, 1.7, 4.2, 9.9, 25.5] {
        assert_eq!(mode(&p(1, lambda)).modes, vec![lambda.floor() as u64]);
    }
    // integer λ: tie between λ − 1 and λ
    assert_eq!(dist::mode(&p(1, 7.0)).modes, vec![6, 7]);
}
