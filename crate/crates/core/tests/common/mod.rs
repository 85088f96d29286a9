#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use uav_secrecy::experiments::dbm_to_watts;
use uav_secrecy::scenario::{Point, ScenarioConfig};
use uav_secrecy::secrecy::{PowerAllocation, SlotLink};

pub fn point_in(half_width: f64) -> impl Strategy<Value = Point> {
    (-half_width..half_width, -half_width..half_width).prop_map(|(x, y)| Point::new(x, y))
}

/// Random feasible scenario: ground nodes and endpoints in ±250 m, a
/// horizon between 5% and 60% above the straight-line minimum (plus up to
/// 20 s), average power in [−10, 10] dBm.
pub fn scenario(n_slots: usize) -> impl Strategy<Value = ScenarioConfig> {
    (
        point_in(250.0),
        point_in(250.0),
        point_in(250.0),
        point_in(250.0),
        1.05..1.6f64,
        0.0..20.0f64,
        -10.0..10.0f64,
    )
        .prop_map(move |(bob, eve, start, end, stretch, extra, dbm)| {
            let mut cfg = ScenarioConfig::table1(1.0);
            cfg.n_slots = n_slots;
            cfg.bob = bob;
            cfg.eve = eve;
            cfg.start = start;
            cfg.end = end;
            cfg.horizon_s = start.dist(end) / cfg.speed_mps * stretch + extra + 1.0;
            cfg.budgets.p_ave_w = dbm_to_watts(dbm);
            cfg
        })
}

/// Same distribution as [`scenario`], drawn from an explicit RNG.
pub fn random_scenario<R: Rng>(rng: &mut R, n_slots: usize) -> ScenarioConfig {
    let mut p = || Point::new(rng.gen_range(-250.0..250.0), rng.gen_range(-250.0..250.0));
    let (bob, eve, start, end) = (p(), p(), p(), p());
    let mut cfg = ScenarioConfig::table1(1.0);
    cfg.n_slots = n_slots;
    cfg.bob = bob;
    cfg.eve = eve;
    cfg.start = start;
    cfg.end = end;
    cfg.horizon_s = start.dist(end) / cfg.speed_mps * rng.gen_range(1.05..1.6) + rng.gen_range(0.0..20.0) + 1.0;
    cfg.budgets.p_ave_w = dbm_to_watts(rng.gen_range(-10.0..10.0));
    cfg
}

/// Normalized gains typical of the reference geometry (γ0 = 80 dB, 100 m
/// altitude, up to ~400 m offset).
pub fn link() -> impl Strategy<Value = SlotLink> {
    (5e2..1e4f64, 5e2..1e4f64).prop_map(|(h_ab, h_ae)| SlotLink { h_ab, h_ae })
}

/// Allocation strictly inside the reference budget (0 dBm, even split, 4× peak).
pub fn allocation(n: usize) -> impl Strategy<Value = PowerAllocation> {
    (
        prop::collection::vec(1e-5..5e-4f64, n),
        prop::collection::vec(1e-5..5e-4f64, n),
        prop::collection::vec(0.02..0.98f64, n),
    )
        .prop_map(|(p_a, p_b, alpha)| PowerAllocation { p_a, p_b, alpha })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
