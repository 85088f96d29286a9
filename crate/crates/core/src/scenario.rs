//! Physical scenario: geometry, time discretization, channel model and
//! mobility limits of the UAV transmitter.
//!
//! Positions are horizontal `(x, y)` pairs in meters. The UAV flies at the
//! constant altitude [`ScenarioConfig::altitude_m`], which enters every
//! squared distance as an additive `H²`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack (meters) tolerated when checking mobility constraints.
pub const MOBILITY_SLACK_M: f64 = 1e-9;

/// Horizontal coordinate pair in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Average and peak power limits for the transmitter (Alice) and the
/// jamming receiver (Bob).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    /// Total average network power in watts.
    pub p_ave_w: f64,
    /// Fraction of `p_ave_w` granted to the transmitter on average.
    pub split: f64,
    /// Peak-to-average ratio applied to both nodes.
    pub peak_factor: f64,
}

impl PowerBudget {
    pub fn p_bar_a(&self) -> f64 {
        self.split * self.p_ave_w
    }

    pub fn p_bar_b(&self) -> f64 {
        (1.0 - self.split) * self.p_ave_w
    }

    pub fn p_hat_a(&self) -> f64 {
        self.peak_factor * self.p_ave_w
    }

    pub fn p_hat_b(&self) -> f64 {
        self.peak_factor * self.p_ave_w
    }

    /// Limits for the AN-aided schemes.
    pub fn limits(&self) -> PowerLimits {
        PowerLimits {
            avg_a: self.p_bar_a(),
            avg_b: self.p_bar_b(),
            peak_a: self.p_hat_a(),
            peak_b: self.p_hat_b(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_ave_w > 0.0 && self.p_ave_w.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "average power must be positive, got {}",
                self.p_ave_w
            )));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "power split must lie in (0, 1), got {}",
                self.split
            )));
        }
        if !(self.peak_factor > 0.0 && self.peak_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "peak factor must be positive, got {}",
                self.peak_factor
            )));
        }
        if self.p_bar_a() >= self.p_hat_a() || self.p_bar_b() >= self.p_hat_b() {
            return Err(Error::InvalidConfig(
                "average power limits must be strictly below the peak limits".into(),
            ));
        }
        Ok(())
    }
}

/// Per-slot average (C5, C7) and peak (C6, C8) power limits in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLimits {
    pub avg_a: f64,
    pub avg_b: f64,
    pub peak_a: f64,
    pub peak_b: f64,
}

/// Numerical knobs shared by the subproblem solvers and the outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverTolerances {
    /// Outer loop stops once the fractional ASR increase drops below this.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Per-slot tolerance of the dual bisections (watts) and of the
    /// baseline turn-point search (meters).
    pub bisection_tol: f64,
    /// Optimality tolerance of the trajectory subproblem and of the scalar
    /// searches over the power-split factor.
    pub inner_tol: f64,
    /// Power-split factors are kept inside `[alpha_clamp, 1 - alpha_clamp]`.
    pub alpha_clamp: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_outer_iters: 50,
            bisection_tol: 1e-14,
            inner_tol: 1e-9,
            alpha_clamp: 1e-6,
        }
    }
}

impl SolverTolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.epsilon, self.bisection_tol, self.inner_tol, self.alpha_clamp];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.max_outer_iters == 0 {
            return Err(Error::InvalidConfig(
                "solver tolerances must be strictly positive".into(),
            ));
        }
        if self.alpha_clamp >= 0.5 {
            return Err(Error::InvalidConfig(format!(
                "alpha_clamp must be below 0.5, got {}",
                self.alpha_clamp
            )));
        }
        Ok(())
    }
}

/// Complete description of one secure-UAV scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_slots: usize,
    pub horizon_s: f64,
    pub altitude_m: f64,
    pub speed_mps: f64,
    /// Reference channel gain at unit distance over noise power (linear).
    pub gamma0: f64,
    pub bob: Point,
    pub eve: Point,
    pub start: Point,
    pub end: Point,
    pub budgets: PowerBudget,
    pub solver: SolverTolerances,
}

impl ScenarioConfig {
    /// Reference setup: N = 100 slots, H = 100 m, 4 m/s, γ0 = 80 dB,
    /// 0 dBm average power split evenly, peak = 4× average.
    pub fn table1(horizon_s: f64) -> Self {
        Self {
            n_slots: 100,
            horizon_s,
            altitude_m: 100.0,
            speed_mps: 4.0,
            gamma0: 1e8,
            bob: Point::new(0.0, 0.0),
            eve: Point::new(100.0, 0.0),
            start: Point::new(50.0, 200.0),
            end: Point::new(50.0, -200.0),
            budgets: PowerBudget {
                p_ave_w: 1e-3,
                split: 0.5,
                peak_factor: 4.0,
            },
            solver: SolverTolerances::default(),
        }
    }

    pub fn slot_len(&self) -> f64 {
        self.horizon_s / self.n_slots as f64
    }

    /// Total distance the UAV can cover over the horizon.
    pub fn travel_budget(&self) -> f64 {
        self.n_slots as f64 * max_displacement(self)
    }

    /// Checks positivity invariants and geometric feasibility.
    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::InvalidConfig("n_slots must be at least 1".into()));
        }
        for (name, v) in [
            ("horizon_s", self.horizon_s),
            ("altitude_m", self.altitude_m),
            ("speed_mps", self.speed_mps),
            ("gamma0", self.gamma0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, p) in [
            ("bob_xy", self.bob),
            ("eve_xy", self.eve),
            ("start_xy", self.start),
            ("end_xy", self.end),
        ] {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        self.budgets.validate()?;
        self.solver.validate()?;
        let distance = self.start.dist(self.end);
        let budget = self.travel_budget();
        if distance > budget + MOBILITY_SLACK_M {
            return Err(Error::InfeasibleScenario { distance, budget });
        }
        Ok(())
    }
}

/// Normalized air-to-ground gain `γ0 / (‖uav − ground‖² + H²)`.
pub fn channel_gain(uav: Point, ground: Point, cfg: &ScenarioConfig) -> f64 {
    cfg.gamma0 / (uav.dist_sq(ground) + cfg.altitude_m * cfg.altitude_m)
}

/// Maximum displacement per slot, `V̄·T/N`.
pub fn max_displacement(cfg: &ScenarioConfig) -> f64 {
    cfg.speed_mps * cfg.slot_len()
}

/// Horizontal waypoints, one per slot, at the scenario's fixed altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Point>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Self { waypoints }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Minimum horizontal distance from the trajectory to `p`.
    pub fn min_distance_to(&self, p: Point) -> f64 {
        self.waypoints
            .iter()
            .map(|w| w.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points `start, w[0], …, w[N-1], end` as flown.
    pub fn flown_path(&self, cfg: &ScenarioConfig) -> Vec<Point> {
        let mut path = Vec::with_capacity(self.len() + 2);
        path.push(cfg.start);
        path.extend_from_slice(&self.waypoints);
        path.push(cfg.end);
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MobilityConstraint {
    /// First waypoint within reach of the start point.
    C1,
    /// Consecutive waypoints within reach of each other.
    C2,
    /// Final point within reach of the last waypoint.
    C3,
}

impl fmt::Display for MobilityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MobilityConstraint::C1 => "C1",
            MobilityConstraint::C2 => "C2",
            MobilityConstraint::C3 => "C3",
        };
        f.write_str(s)
    }
}

/// A violated mobility constraint. `slot` is zero-based: for C2 it names the
/// segment from waypoint `slot` to `slot + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub constraint: MobilityConstraint,
    pub slot: usize,
    pub excess_m: f64,
}

/// Reports every mobility constraint the trajectory violates (empty when
/// feasible).
pub fn validate_trajectory(traj: &Trajectory, cfg: &ScenarioConfig) -> Result<Vec<Violation>> {
    let n = cfg.n_slots;
    if traj.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: traj.len(),
        });
    }
    let d = max_displacement(cfg);
    let mut out = Vec::new();
    let mut check = |constraint, slot, len: f64| {
        if len > d + MOBILITY_SLACK_M {
            out.push(Violation {
                constraint,
                slot,
                excess_m: len - d,
            });
        }
    };
    let w = &traj.waypoints;
    check(MobilityConstraint::C1, 0, w[0].dist(cfg.start));
    for i in 0..n - 1 {
        check(MobilityConstraint::C2, i, w[i + 1].dist(w[i]));
    }
    check(MobilityConstraint::C3, n - 1, cfg.end.dist(w[n - 1]));
    Ok(out)
}

/// Point at arc length `s` along a polyline; clamps to the last vertex.
fn point_along(path: &[Point], mut s: f64) -> Point {
    for seg in path.windows(2) {
        let len = seg[0].dist(seg[1]);
        if s <= len {
            return if len > 0.0 {
                seg[0].lerp(seg[1], s / len)
            } else {
                seg[0]
            };
        }
        s -= len;
    }
    *path.last().expect("non-empty path")
}

/// Best-effort initial trajectory.
///
/// With enough time the UAV flies straight to the point above Bob at full
/// speed, hovers there, then flies straight to the final point. Otherwise it
/// turns at the point `u` on the start→Bob segment for which the two-leg path
/// `start → u → end` uses the whole travel budget. Waypoint `n` is the
/// position after `n + 1` full-speed slots, so the last waypoint is `end`.
pub fn baseline_trajectory(cfg: &ScenarioConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.n_slots;
    let d = max_displacement(cfg);
    let budget = cfg.travel_budget();
    let leg_in = cfg.start.dist(cfg.bob);
    let leg_out = cfg.bob.dist(cfg.end);

    let waypoints = if leg_in + leg_out <= budget {
        let hover = budget - leg_in - leg_out;
        (1..=n)
            .map(|k| {
                let tau = if k == n { budget } else { k as f64 * d };
                if tau <= leg_in {
                    point_along(&[cfg.start, cfg.bob], tau)
                } else if tau <= leg_in + hover {
                    cfg.bob
                } else if k == n {
                    cfg.end
                } else {
                    point_along(&[cfg.bob, cfg.end], tau - leg_in - hover)
                }
            })
            .collect()
    } else {
        let turn = turn_point(cfg, budget, leg_in);
        let path = [cfg.start, turn, cfg.end];
        let total = cfg.start.dist(turn) + turn.dist(cfg.end);
        (1..=n)
            .map(|k| {
                let tau = k as f64 * d;
                if k == n || tau >= total {
                    cfg.end
                } else {
                    point_along(&path, tau)
                }
            })
            .collect()
    };
    Ok(Trajectory::new(waypoints))
}

/// Turn point `u` of the baseline when the horizon is too short to pass
/// over Bob; `None` when the baseline hovers instead.
pub fn baseline_turn_point(cfg: &ScenarioConfig) -> Result<Option<Point>> {
    cfg.validate()?;
    let budget = cfg.travel_budget();
    let leg_in = cfg.start.dist(cfg.bob);
    if leg_in + cfg.bob.dist(cfg.end) <= budget {
        return Ok(None);
    }
    Ok(Some(turn_point(cfg, budget, leg_in)))
}

/// Bisection for the midway turn point on the start→Bob segment.
fn turn_point(cfg: &ScenarioConfig, budget: f64, leg_in: f64) -> Point {
    let length = |t: f64| t * leg_in + cfg.start.lerp(cfg.bob, t).dist(cfg.end);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if length(lo) >= budget - cfg.solver.bisection_tol {
        return cfg.start;
    }
    // length(lo) < budget < length(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if length(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if length(hi) - length(lo) <= cfg.solver.bisection_tol {
            break;
        }
    }
    cfg.start.lerp(cfg.bob, lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn gain_overhead_and_offset() {
        let cfg = ScenarioConfig::table1(100.0);
        let o = Point::new(0.0, 0.0);
        assert!(close(channel_gain(o, o, &cfg), 1e4, 1e-12));
        let p = Point::new(100.0, 0.0);
        assert!(close(channel_gain(p, p, &cfg), 1e4, 1e-12));
        let g = channel_gain(Point::new(50.0, 200.0), o, &cfg);
        assert!(close(g, 1e8 / 52_500.0, 1e-12));
        assert!(close(g, 1_904.761_904_76, 1e-9));
    }

    #[test]
    fn gain_decreases_with_distance() {
        let cfg = ScenarioConfig::table1(100.0);
        let g = Point::new(0.0, 0.0);
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let v = channel_gain(Point::new(i as f64 * 7.0, 0.0), g, &cfg);
            assert!(v < last && v > 0.0);
            assert!(v <= cfg.gamma0 / (cfg.altitude_m * cfg.altitude_m));
            last = v;
        }
    }

    #[test]
    fn displacement_examples() {
        let cfg = ScenarioConfig::table1(100.0);
        assert_eq!(max_displacement(&cfg), 4.0);
        let cfg = ScenarioConfig::table1(120.0);
        assert!(close(max_displacement(&cfg), 4.8, 1e-15));
        let mut cfg = ScenarioConfig::table1(120.0);
        cfg.speed_mps = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn infeasible_horizon_rejected() {
        let cfg = ScenarioConfig::table1(90.0);
        assert!(matches!(cfg.validate(), Err(Error::InfeasibleScenario { .. })));
        assert!(baseline_trajectory(&cfg).is_err());
    }

    #[test]
    fn budgets_must_be_nontrivial() {
        let mut cfg = ScenarioConfig::table1(120.0);
        cfg.budgets.peak_factor = 0.4;
        assert!(cfg.validate().is_err());
        cfg.budgets.peak_factor = 4.0;
        cfg.budgets.split = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn straight_line_is_feasible() {
        let cfg = ScenarioConfig::table1(100.0);
        let traj = Trajectory::new(
            (1..=100)
                .map(|k| Point::new(50.0, 200.0 - 4.0 * k as f64))
                .collect(),
        );
        assert!(validate_trajectory(&traj, &cfg).unwrap().is_empty());
    }

    #[test]
    fn single_jump_reports_c2() {
        let cfg = ScenarioConfig::table1(100.0);
        let mut w: Vec<Point> = (1..=100)
            .map(|k| Point::new(50.0, 200.0 - 4.0 * k as f64))
            .collect();
        // stretch the segment 9 -> 10 to 4.0001 m while keeping its neighbours legal
        w[10] = w[9] + Point::new(0.0, -4.0001);
        let v = validate_trajectory(&Trajectory::new(w), &cfg).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, MobilityConstraint::C2);
        assert_eq!(v[0].slot, 9);
        assert!(close(v[0].excess_m, 1e-4, 1e-6));
    }

    #[test]
    fn last_waypoint_on_end_satisfies_c3() {
        let cfg = ScenarioConfig::table1(100.0);
        let traj = baseline_trajectory(&cfg).unwrap();
        assert_eq!(*traj.waypoints.last().unwrap(), cfg.end);
        let v = validate_trajectory(&traj, &cfg).unwrap();
        assert!(v.iter().all(|v| v.constraint != MobilityConstraint::C3));
    }

    #[test]
    fn length_mismatch_is_error() {
        let cfg = ScenarioConfig::table1(100.0);
        let traj = Trajectory::new(vec![Point::default(); 3]);
        assert!(matches!(
            validate_trajectory(&traj, &cfg),
            Err(Error::LengthMismatch { expected: 100, got: 3 })
        ));
    }

    #[test]
    fn baseline_tight_horizon_is_straight_line() {
        let cfg = ScenarioConfig::table1(100.0);
        let traj = baseline_trajectory(&cfg).unwrap();
        for (k, w) in traj.waypoints.iter().enumerate() {
            let expect = Point::new(50.0, 200.0 - 4.0 * (k + 1) as f64);
            assert!(w.dist(expect) < 1e-9, "slot {k}: {w:?}");
        }
    }

    #[test]
    fn baseline_long_horizon_hovers_over_bob() {
        let cfg = ScenarioConfig::table1(120.0);
        let traj = baseline_trajectory(&cfg).unwrap();
        assert!(traj.waypoints.contains(&cfg.bob));
        assert!(validate_trajectory(&traj, &cfg).unwrap().is_empty());
    }

    #[test]
    fn baseline_degenerate_hover() {
        let mut cfg = ScenarioConfig::table1(100.0);
        cfg.start = cfg.bob;
        cfg.end = cfg.bob;
        let traj = baseline_trajectory(&cfg).unwrap();
        assert!(traj.waypoints.iter().all(|w| *w == cfg.bob));
    }

    #[test]
    fn baseline_midway_turn_uses_whole_budget() {
        let cfg = ScenarioConfig::table1(102.0);
        let traj = baseline_trajectory(&cfg).unwrap();
        assert!(validate_trajectory(&traj, &cfg).unwrap().is_empty());
        let path = traj.flown_path(&cfg);
        let length: f64 = path.windows(2).map(|s| s[0].dist(s[1])).sum();
        // sampling cuts the corner by less than one hop
        assert!(length <= cfg.travel_budget() + 1e-9, "{length}");
        assert!(length > cfg.travel_budget() - max_displacement(&cfg), "{length}");
        // bends toward Bob (x < 50)
        assert!(traj.waypoints.iter().any(|w| w.x < 49.0));
    }
}
