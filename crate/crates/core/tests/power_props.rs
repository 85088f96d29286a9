mod common;

use proptest::prelude::*;
use uav_secrecy::alice_power::{
    alice_coefficients, p1_objective, p2_objective, slot_alice_power_given_dual, solve_alice_power,
};
use uav_secrecy::an_split::{alpha_closed_form, golden_section_max, psi, solve_alpha, GammaTriple};
use uav_secrecy::bob_power::{bob_coefficients, p3_objective, solve_bob_power};
use uav_secrecy::scenario::{ScenarioConfig, SolverTolerances};
use uav_secrecy::secrecy::{PowerAllocation, SlotLink};

fn instance(max_n: usize) -> impl Strategy<Value = (PowerAllocation, Vec<SlotLink>)> {
    (1..=max_n).prop_flat_map(|n| (common::allocation(n), prop::collection::vec(common::link(), n)))
}

fn limits() -> uav_secrecy::PowerLimits {
    ScenarioConfig::table1(120.0).budgets.limits()
}

proptest! {
    #[test]
    fn alice_surrogate_is_tight_lower_bound(
        (alloc, links) in instance(10),
        trial in prop::collection::vec(0.0..4e-3f64, 10),
    ) {
        let k = alice_coefficients(&alloc, &links).unwrap();
        let p = &trial[..alloc.len()];
        let exact = p1_objective(&k, p);
        let bound = p2_objective(&k, &alloc.p_a, p);
        prop_assert!(bound <= exact + 1e-12);
        let at_prev = p2_objective(&k, &alloc.p_a, &alloc.p_a) - p1_objective(&k, &alloc.p_a);
        prop_assert!(at_prev.abs() <= 1e-9);
    }

    #[test]
    fn alice_block_ascends_and_stays_feasible((alloc, links) in instance(10)) {
        let lim = limits();
        let tol = SolverTolerances::default();
        let out = solve_alice_power(&alloc, &links, &lim, &tol).unwrap();
        let k = alice_coefficients(&alloc, &links).unwrap();
        prop_assert!(p1_objective(&k, &out) >= p1_objective(&k, &alloc.p_a) - 1e-9);
        let next = PowerAllocation { p_a: out, ..alloc };
        prop_assert!(next.check(&lim, 0.0).is_ok());
    }

    #[test]
    fn alice_dual_power_falls_with_price((alloc, links) in instance(10), mu in 0.0..50.0f64, step in 0.0..50.0f64) {
        let k = alice_coefficients(&alloc, &links).unwrap();
        let total = |m: f64| k.iter().map(|c| slot_alice_power_given_dual(c, m, 4e-3)).sum::<f64>();
        prop_assert!(total(mu + step) <= total(mu) + 1e-18);
    }

    #[test]
    fn bob_block_ascends_binds_and_equalizes_slopes((alloc, links) in instance(10)) {
        let lim = limits();
        let tol = SolverTolerances::default();
        let out = solve_bob_power(&alloc, &links, &lim, &tol).unwrap();
        let k = bob_coefficients(&alloc, &links).unwrap();
        prop_assert!(p3_objective(&k, &out) >= p3_objective(&k, &alloc.p_b) - 1e-9);
        let next = PowerAllocation { p_b: out.clone(), ..alloc.clone() };
        prop_assert!(next.check(&lim, 0.0).is_ok());

        let n = out.len() as f64;
        let all_peak = k.iter().filter(|c| c.gain() > 0.0).count() as f64 * lim.peak_b;
        if all_peak > n * lim.avg_b {
            prop_assert!(out.iter().sum::<f64>() >= n * lim.avg_b * (1.0 - 1e-9));
        }
        // interior slots share the multiplier, hence the slope
        let slopes: Vec<f64> = k
            .iter()
            .zip(&out)
            .filter(|(_, p)| **p > 1e-9 && **p < lim.peak_b - 1e-9)
            .map(|(c, p)| c.slope(*p))
            .collect();
        for s in &slopes {
            prop_assert!(common::rel_close(*s, slopes[0], 1e-6), "{:?}", slopes);
        }
    }

    #[test]
    fn bob_objective_grows_with_each_slot_power(
        (alloc, links) in instance(5),
        slot in 0usize..5,
        bump in 1e-6..1e-3f64,
    ) {
        let k = bob_coefficients(&alloc, &links).unwrap();
        let i = slot % k.len();
        let mut p = alloc.p_b.clone();
        let before = p3_objective(&k, &p);
        p[i] += bump;
        prop_assert!(p3_objective(&k, &p) >= before);
    }

    #[test]
    fn psi_is_quasi_concave(g1 in 1.0..1e3f64, g2 in 1.0..1e3f64, g3 in 1.0..1e3f64) {
        let g = GammaTriple { g1, g2, g3 };
        let vals: Vec<f64> = (0..=1000).map(|i| psi(i as f64 * 1e-3, g)).collect();
        let signs: Vec<bool> = vals.windows(2).map(|w| w[1] >= w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        prop_assert!(changes <= 1);
    }

    #[test]
    fn closed_form_agrees_with_golden(g1 in 1.0..1e3f64, g2 in 1.0..1e3f64, g3 in 1.0..1e3f64) {
        let g = GammaTriple { g1, g2, g3 };
        if let Some(a) = alpha_closed_form(g) {
            let gs = golden_section_max(|x| psi(x, g).ln(), 0.0, 1.0, 1e-12);
            prop_assert!((a - gs).abs() <= 1e-6, "{} vs {}", a, gs);
        }
    }

    #[test]
    fn alpha_block_ascends((alloc, links) in instance(10)) {
        let tol = SolverTolerances::default();
        let out = solve_alpha(&alloc, &links, &tol).unwrap();
        for (i, a) in out.iter().enumerate() {
            let g = GammaTriple::new(alloc.p_a[i], alloc.p_b[i], links[i]);
            prop_assert!(psi(*a, g).ln() >= psi(alloc.alpha[i], g).ln() - 1e-9);
            prop_assert!((0.0..=1.0).contains(a));
        }
    }
}
