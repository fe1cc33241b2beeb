//! Randomized property tests for the invariants that hold on the whole input
//! domain rather than at calibrated points.

use proptest::prelude::*;

use commons_core::analysis::MarginDecomposition;
use commons_core::dynamics::{simulate, step};
use commons_core::equilibrium::{inner_map, solve_congestion, SolverOptions};
use commons_core::params::{Environment, ModelParams, QueryType};
use commons_core::primitives::{answer_surplus, posting_cdf, private_resolution};

fn params() -> ModelParams {
    ModelParams::baseline()
}

proptest! {
    /// Midpoint weighting makes the two margins exhaust the total decline
    /// for arbitrary flows and resolution probabilities.
    #[test]
    fn decomposition_margins_sum_to_total(
        q_ho in 0.0..1.0f64,
        s_ho in 0.0..1.0f64,
        q_ai in 0.0..1.0f64,
        s_ai in 0.0..1.0f64,
    ) {
        let d = MarginDecomposition::from_flows(1.0, q_ho, s_ho, q_ai, s_ai);
        prop_assert!((d.flow_margin + d.resolution_margin - d.total).abs() <= 1e-15);
    }

    /// Every field of the inner map stays inside its range, and the exact
    /// flow identities hold.
    #[test]
    fn inner_map_respects_bounds(
        sigma in 0.0..=1.0f64,
        k in 0.0..5.0f64,
        pool in 0.0..=1.0f64,
    ) {
        let p = params();
        for env in [Environment::Ho, Environment::Ai] {
            let st = inner_map(sigma, k, pool, env, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&st.sigma));
            prop_assert!((0.0..=1.0).contains(&st.mu));
            prop_assert!((0.0..=1.0).contains(&st.omega));
            prop_assert!(st.c_star >= 0.0);
            let a_l = private_resolution(QueryType::L, k, env, &p).unwrap();
            let a_h = private_resolution(QueryType::H, k, env, &p).unwrap();
            prop_assert!((st.q_l - st.m_l * (1.0 - a_l)).abs() <= 1e-15);
            prop_assert!((st.q_h - st.m_h * (1.0 - a_h)).abs() <= 1e-15);
            let q = 0.4 * st.q_l + 0.6 * st.q_h;
            prop_assert!((st.q_total - q).abs() <= 1e-15);
            if st.q_total == 0.0 {
                prop_assert_eq!(st.sigma, 0.0);
                prop_assert_eq!(st.mu, 0.0);
                prop_assert_eq!(st.delta_bar, 0.0);
            }
        }
    }

    /// Steady-state accounting: resolved stock per period equals resolved
    /// inflow, for any pool, flow, cutoff, and lifetime.
    #[test]
    fn congestion_cohort_identity(
        pool in 0.0..2.0f64,
        q in 1e-6..1.0f64,
        c_star in 0.0..1.5f64,
        t in 1u32..16,
    ) {
        let sol = solve_congestion(pool, q, c_star, t, &params(), 1e-12).unwrap();
        prop_assert!((sol.stock * sol.hazard - q * sol.sigma_lifetime).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&sol.mu));
        prop_assert!(sol.stock >= q - 1e-12);
    }

    /// Escalation is a CDF: bounded by one and monotone in the posting
    /// benefit.
    #[test]
    fn escalation_monotone(a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let p = params();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m_lo = posting_cdf(lo, &p).unwrap();
        let m_hi = posting_cdf(hi, &p).unwrap();
        prop_assert!(m_lo <= m_hi);
        prop_assert!((0.0..=1.0).contains(&m_hi));
    }

    /// The closed-form answering surplus agrees with a direct quadrature of
    /// the truncated integral, including cutoffs above the cost support.
    #[test]
    fn answer_surplus_matches_quadrature(c_star in 0.0..2.0f64) {
        let p = params();
        let upper = c_star.min(p.shared.c_bar_support);
        let n = 20_000;
        let mut acc = 0.0;
        for i in 0..=n {
            let c = upper * i as f64 / n as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * (c_star - c);
        }
        let integral = acc * (upper / n as f64) / p.shared.c_bar_support;
        prop_assert!((answer_surplus(c_star, &p) - integral).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Simulated paths are exactly re-evaluable through the one-step map.
    #[test]
    fn trajectory_steps_are_reproducible(k0 in 0.05..1.0f64) {
        let p = params();
        let opts = SolverOptions::default();
        let traj = simulate(k0, 5, Environment::Ai, 0.0, &p, 1e-12, &opts).unwrap();
        for w in traj.k_path.windows(2) {
            let again = step(w[0], Environment::Ai, 0.0, &p, &opts).unwrap();
            prop_assert_eq!(again, w[1]);
        }
    }
}
