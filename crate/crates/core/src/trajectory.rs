//! Trajectory block.
//!
//! For fixed powers and split factors, slot `n` contributes
//! `ln(c0 + c1/s) − ln(1 + c2/(c3 + v))`, where `s` and `v` are the squared
//! 3-D distances to the receiver and the eavesdropper. Both terms are made
//! concave in the waypoints around the previous trajectory:
//!
//! * `ln(c0 + c1/s)` is convex in `s`; it is replaced by its tangent
//!   `B·s + const` (`B < 0`), which under-estimates it.
//! * `‖w − eve‖²` is convex in `w`; it is replaced by its tangent plane
//!   `v_lb(w)`, which under-estimates it, so the eavesdropper term is
//!   over-estimated.
//!
//! Both slack variables bind at the optimum, so they are eliminated and the
//! surrogate is maximized directly over the waypoints. The final waypoint is
//! pinned to the end point; the remaining waypoints must keep every hop
//! within the per-slot reach. The concave program is solved with a
//! log-barrier interior-point method whose Newton systems are
//! block-tridiagonal and solved in `O(N)`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::scenario::{max_displacement, Point, ScenarioConfig, Trajectory, MOBILITY_SLACK_M};
use crate::secrecy::PowerAllocation;

/// Relative floor on `c3 + v_lb`; below it the surrogate is treated as undefined.
const DOMAIN_GUARD: f64 = 1e-6;

/// Affine lower bound `grad·w + offset` of `‖w − eve‖² + H²`, tight at the
/// expansion waypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBound {
    pub grad: Point,
    pub offset: f64,
}

impl AffineBound {
    pub fn eval(&self, w: Point) -> f64 {
        self.grad.dot(w) + self.offset
    }
}

/// `v_lb(w) = −‖w_prev‖² + 2(w_prev − eve)ᵀw + ‖eve‖² + H²`.
pub fn eve_distance_linearization(w_prev: Point, eve: Point, cfg: &ScenarioConfig) -> AffineBound {
    AffineBound {
        grad: (w_prev - eve) * 2.0,
        offset: -w_prev.norm_sq() + eve.norm_sq() + cfg.altitude_m * cfg.altitude_m,
    }
}

/// `(c0, c1, c2, c3)` for one slot, or `None` when the slot carries no
/// information power (`α·P_a = 0`) and its rate does not depend on position.
///
/// When there is neither artificial noise nor jamming (`α = 1`, `P_b = 0`)
/// the receiver term is exactly `ln(1 + P_a·γ0/s)`, i.e. `c0 = 1`,
/// `c1 = P_a·γ0`.
pub fn p5_coefficients(alpha: f64, p_a: f64, p_b: f64, gamma0: f64) -> Option<[f64; 4]> {
    if alpha * p_a <= 0.0 {
        return None;
    }
    let interference = p_b + p_a * (1.0 - alpha);
    let c2 = alpha * p_a * gamma0;
    let c3 = (1.0 - alpha) * p_a * gamma0;
    if interference <= 0.0 {
        return Some([1.0, p_a * gamma0, c2, c3]);
    }
    Some([
        alpha * p_a / interference,
        alpha * p_a * p_b * gamma0 / interference,
        c2,
        c3,
    ])
}

/// Tangent slope `B` of `ln(c0 + c1/s)` at `s_prev`.
pub fn bob_term_linear_coeff(s_prev: f64, c0: f64, c1: f64) -> f64 {
    -c1 / (s_prev * (c0 * s_prev + c1))
}

/// Surrogate data of one slot, expanded at the previous waypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajSlotCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Tangent slope `B` of the receiver term.
    pub b_lin: f64,
    /// Expansion point of the receiver term (squared distance).
    pub s_prev: f64,
    pub eve_lin: AffineBound,
    /// `false` for slots whose objective is constant in position.
    pub active: bool,
}

impl TrajSlotCoeffs {
    fn inactive(eve_lin: AffineBound, s_prev: f64) -> Self {
        Self {
            c0: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            b_lin: 0.0,
            s_prev,
            eve_lin,
            active: false,
        }
    }

    /// Builds the slot surrogate from explicit `(c0..c3)`.
    pub fn new(c: [f64; 4], w_prev: Point, cfg: &ScenarioConfig) -> Self {
        let [c0, c1, c2, c3] = c;
        let s_prev = bob_sq_dist(w_prev, cfg);
        Self {
            c0,
            c1,
            c2,
            c3,
            b_lin: bob_term_linear_coeff(s_prev, c0, c1),
            s_prev,
            eve_lin: eve_distance_linearization(w_prev, cfg.eve, cfg),
            active: true,
        }
    }

    fn guard(&self, cfg: &ScenarioConfig) -> f64 {
        if self.c3 > 0.0 {
            DOMAIN_GUARD * self.c3
        } else {
            DOMAIN_GUARD * cfg.altitude_m * cfg.altitude_m
        }
    }

    /// `ln(c0 + c1/s)`.
    pub fn bob_term(&self, s: f64) -> f64 {
        (self.c0 + self.c1 / s).ln()
    }

    /// `ln(1 + c2/(c3 + v))`.
    pub fn eve_term(&self, v: f64) -> f64 {
        (self.c2 / (self.c3 + v)).ln_1p()
    }

    /// Constant dropped from the receiver tangent: `ln(c0 + c1/s_prev) − B·s_prev`.
    pub fn bob_offset(&self) -> f64 {
        self.bob_term(self.s_prev) - self.b_lin * self.s_prev
    }
}

fn bob_sq_dist(w: Point, cfg: &ScenarioConfig) -> f64 {
    w.dist_sq(cfg.bob) + cfg.altitude_m * cfg.altitude_m
}

fn eve_sq_dist(w: Point, cfg: &ScenarioConfig) -> f64 {
    w.dist_sq(cfg.eve) + cfg.altitude_m * cfg.altitude_m
}

/// Per-slot surrogate coefficients around `prev` for the given allocation.
pub fn traj_coefficients(
    prev: &Trajectory,
    alloc: &PowerAllocation,
    cfg: &ScenarioConfig,
) -> Result<Vec<TrajSlotCoeffs>> {
    if alloc.len() != prev.len() {
        return Err(Error::LengthMismatch {
            expected: prev.len(),
            got: alloc.len(),
        });
    }
    Ok(prev
        .waypoints
        .iter()
        .enumerate()
        .map(|(i, w)| {
            match p5_coefficients(alloc.alpha[i], alloc.p_a[i], alloc.p_b[i], cfg.gamma0) {
                Some(c) => TrajSlotCoeffs::new(c, *w, cfg),
                None => TrajSlotCoeffs::inactive(
                    eve_distance_linearization(*w, cfg.eve, cfg),
                    bob_sq_dist(*w, cfg),
                ),
            }
        })
        .collect())
}

/// `Σ B·(‖w − bob‖² + H²) − ln(1 + c2/(c3 + v_lb(w)))` over active slots.
///
/// Fails with [`Error::SurrogateDomain`] when `c3 + v_lb` drops below the
/// domain guard in some slot.
pub fn surrogate_objective(traj: &Trajectory, coeffs: &[TrajSlotCoeffs], cfg: &ScenarioConfig) -> Result<f64> {
    if coeffs.len() != traj.len() {
        return Err(Error::LengthMismatch {
            expected: traj.len(),
            got: coeffs.len(),
        });
    }
    let mut total = 0.0;
    for (slot, (w, k)) in traj.waypoints.iter().zip(coeffs).enumerate() {
        if !k.active {
            continue;
        }
        let v = k.eve_lin.eval(*w);
        if k.c3 + v <= k.guard(cfg) {
            return Err(Error::SurrogateDomain { slot });
        }
        total += k.b_lin * bob_sq_dist(*w, cfg) - k.eve_term(v);
    }
    Ok(total)
}

/// Surrogate including the receiver-tangent constants; a lower bound of
/// [`p5_objective`] that is tight at the expansion trajectory.
pub fn surrogate_lower_bound(traj: &Trajectory, coeffs: &[TrajSlotCoeffs], cfg: &ScenarioConfig) -> Result<f64> {
    let offset: f64 = coeffs.iter().filter(|k| k.active).map(|k| k.bob_offset()).sum();
    Ok(surrogate_objective(traj, coeffs, cfg)? + offset)
}

/// Trajectory objective with both slacks at their binding values:
/// `Σ ln(c0 + c1/s) − ln(1 + c2/(c3 + d_e²))`.
pub fn p5_objective(traj: &Trajectory, coeffs: &[TrajSlotCoeffs], cfg: &ScenarioConfig) -> f64 {
    traj.waypoints
        .iter()
        .zip(coeffs)
        .filter(|(_, k)| k.active)
        .map(|(w, k)| k.bob_term(bob_sq_dist(*w, cfg)) - k.eve_term(eve_sq_dist(*w, cfg)))
        .sum()
}

/// Result of one trajectory block update.
#[derive(Debug, Clone)]
pub struct TrajectoryUpdate {
    pub trajectory: Trajectory,
    /// `‖w[n] − bob‖² + H²`.
    pub s: Vec<f64>,
    /// `v_lb(w[n])`.
    pub v: Vec<f64>,
    /// Surrogate increase over the previous trajectory (≥ 0).
    pub surrogate_gain: f64,
    /// Duality-gap bound of the returned point (0 for a null step).
    pub residual: f64,
    /// `true` when the previous trajectory was returned unchanged.
    pub null_step: bool,
}

/// Trajectory block update around `prev` for the given allocation.
pub fn solve_trajectory(prev: &Trajectory, alloc: &PowerAllocation, cfg: &ScenarioConfig) -> Result<TrajectoryUpdate> {
    let coeffs = traj_coefficients(prev, alloc, cfg)?;
    solve_surrogate(prev, &coeffs, cfg)
}

/// Maximizes the surrogate for explicit slot coefficients.
pub fn solve_surrogate(prev: &Trajectory, coeffs: &[TrajSlotCoeffs], cfg: &ScenarioConfig) -> Result<TrajectoryUpdate> {
    let n = cfg.n_slots;
    if prev.len() != n || coeffs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: prev.len().min(coeffs.len()),
        });
    }
    check_pinned_feasible(prev, cfg)?;
    surrogate_objective(prev, coeffs, cfg)?;

    let problem = Barrier::new(coeffs, cfg);
    let null = |residual| finish(prev.clone(), coeffs, cfg, 0.0, residual, true);

    // tight horizon or nothing to move: the feasible set is a single point
    let slack = cfg.travel_budget() - cfg.start.dist(cfg.end);
    if n < 2 || slack <= MOBILITY_SLACK_M || coeffs.iter().all(|k| !k.active) {
        return Ok(null(0.0));
    }

    let Some(x0) = problem.interior_start(&prev.waypoints[..n - 1]) else {
        return Ok(null(0.0));
    };
    let (x, gap) = problem.solve(x0, cfg.solver.inner_tol);

    let mut waypoints = x;
    waypoints.push(cfg.end);
    let candidate = Trajectory::new(waypoints);
    let gain = problem.objective_diff(&prev.waypoints[..n - 1], &candidate.waypoints[..n - 1]);
    match gain {
        Some(g) if g > 0.0 && validate_pinned(&candidate, cfg) => Ok(finish(candidate, coeffs, cfg, g, gap, false)),
        _ => Ok(null(gap)),
    }
}

fn finish(
    trajectory: Trajectory,
    coeffs: &[TrajSlotCoeffs],
    cfg: &ScenarioConfig,
    surrogate_gain: f64,
    residual: f64,
    null_step: bool,
) -> TrajectoryUpdate {
    let s = trajectory.waypoints.iter().map(|w| bob_sq_dist(*w, cfg)).collect();
    let v = trajectory
        .waypoints
        .iter()
        .zip(coeffs)
        .map(|(w, k)| k.eve_lin.eval(*w))
        .collect();
    TrajectoryUpdate {
        trajectory,
        s,
        v,
        surrogate_gain,
        residual,
        null_step,
    }
}

fn validate_pinned(traj: &Trajectory, cfg: &ScenarioConfig) -> bool {
    check_pinned_feasible(traj, cfg).is_ok()
}

/// C1, C2 and `w[N−1] = end`.
fn check_pinned_feasible(traj: &Trajectory, cfg: &ScenarioConfig) -> Result<()> {
    let d = max_displacement(cfg);
    let last = *traj.waypoints.last().expect("non-empty trajectory");
    if last.dist(cfg.end) > MOBILITY_SLACK_M {
        return Err(Error::InfeasibleTrajectory(format!(
            "last waypoint {last:?} is not the end point {:?}",
            cfg.end
        )));
    }
    let path = traj.flown_path(cfg);
    if let Some(i) = path[..path.len() - 1]
        .windows(2)
        .position(|s| s[0].dist(s[1]) > d + MOBILITY_SLACK_M)
    {
        return Err(Error::InfeasibleTrajectory(format!("hop {i} exceeds the per-slot reach")));
    }
    Ok(())
}

/// Log-barrier formulation over the free waypoints `w[0..N−1]`.
///
/// Hops: `start → w[0]`, `w[k] → w[k+1]`, `w[N−2] → end`.
struct Barrier<'a> {
    coeffs: &'a [TrajSlotCoeffs],
    cfg: &'a ScenarioConfig,
    reach_sq: f64,
}

type V2 = Vector2<f64>;
type M2 = Matrix2<f64>;

fn v2(p: Point) -> V2 {
    V2::new(p.x, p.y)
}

impl<'a> Barrier<'a> {
    fn new(coeffs: &'a [TrajSlotCoeffs], cfg: &'a ScenarioConfig) -> Self {
        let d = max_displacement(cfg);
        Self {
            coeffs,
            cfg,
            reach_sq: d * d,
        }
    }

    fn hops(&self) -> usize {
        self.coeffs.len()
    }

    /// Chain node `k`: start, free waypoints, end.
    fn node(&self, x: &[Point], k: usize) -> Point {
        if k == 0 {
            self.cfg.start
        } else if k <= x.len() {
            x[k - 1]
        } else {
            self.cfg.end
        }
    }

    fn hop_slacks(&self, x: &[Point]) -> Option<Vec<f64>> {
        let slacks: Vec<f64> = (0..self.hops())
            .map(|i| self.reach_sq - self.node(x, i).dist_sq(self.node(x, i + 1)))
            .collect();
        slacks.iter().all(|s| *s > 0.0).then_some(slacks)
    }

    fn in_domain(&self, x: &[Point]) -> bool {
        x.iter()
            .zip(self.coeffs)
            .all(|(w, k)| !k.active || k.c3 + k.eve_lin.eval(*w) > k.guard(self.cfg))
    }

    /// Blend of `prev` with the evenly spaced straight line, which is
    /// strictly feasible whenever the horizon is not tight.
    fn interior_start(&self, prev: &[Point]) -> Option<Vec<Point>> {
        let m = prev.len();
        let n = m + 1;
        let line: Vec<Point> = (1..=m)
            .map(|k| self.cfg.start.lerp(self.cfg.end, k as f64 / n as f64))
            .collect();
        let mut theta = 0.1;
        for _ in 0..60 {
            let x: Vec<Point> = prev.iter().zip(&line).map(|(p, l)| p.lerp(*l, theta)).collect();
            if self.hop_slacks(&x).is_some() && self.in_domain(&x) {
                return Some(x);
            }
            theta *= 0.5;
        }
        None
    }

    /// `G(y) − G(x)` for the barrier objective `t·F + Σ ln(slack)`, formed
    /// term by term so that small differences survive large `t`. `None`
    /// when `y` leaves the feasible interior or the surrogate domain.
    fn barrier_diff(&self, t: f64, x: &[Point], y: &[Point], slack_x: &[f64]) -> Option<f64> {
        let slack_y = self.hop_slacks(y)?;
        if !self.in_domain(y) {
            return None;
        }
        let f = self.objective_diff(x, y)?;
        let b: f64 = slack_x
            .iter()
            .zip(&slack_y)
            .map(|(sx, sy)| ((sy - sx) / sx).ln_1p())
            .sum();
        Some(t * f + b)
    }

    /// Surrogate difference `F(y) − F(x)` over the free waypoints.
    fn objective_diff(&self, x: &[Point], y: &[Point]) -> Option<f64> {
        let bob = self.cfg.bob;
        let mut total = 0.0;
        for ((wx, wy), k) in x.iter().zip(y).zip(self.coeffs) {
            if !k.active {
                continue;
            }
            let dw = *wy - *wx;
            let ds = dw.dot(*wy + *wx - bob * 2.0);
            let vx = k.eve_lin.eval(*wx);
            let dv = k.eve_lin.grad.dot(dw);
            let (ax, bx) = (k.c3 + vx, k.c3 + k.c2 + vx);
            if ax + dv <= 0.0 {
                return None;
            }
            // −ln(1 + c2/(c3+v)) = ln(c3+v) − ln(c3+c2+v)
            total += k.b_lin * ds + (dv / ax).ln_1p() - (dv / bx).ln_1p();
        }
        Some(total)
    }

    /// Gradient and negated Hessian blocks of the barrier objective.
    fn derivatives(&self, t: f64, x: &[Point], slack: &[f64]) -> (Vec<V2>, Vec<M2>, Vec<M2>) {
        let m = x.len();
        let mut grad = vec![V2::zeros(); m];
        let mut diag = vec![M2::zeros(); m];
        let mut off = vec![M2::zeros(); m.saturating_sub(1)];

        for (j, (w, k)) in x.iter().zip(self.coeffs).enumerate() {
            if !k.active {
                continue;
            }
            let v = k.c3 + k.eve_lin.eval(*w);
            let vc = v + k.c2;
            let d1 = 1.0 / v - 1.0 / vc;
            let d2 = -1.0 / (v * v) + 1.0 / (vc * vc);
            let g = v2(k.eve_lin.grad);
            grad[j] += t * (2.0 * k.b_lin * v2(*w - self.cfg.bob) + d1 * g);
            diag[j] -= t * (2.0 * k.b_lin * M2::identity() + d2 * g * g.transpose());
        }

        for (i, s) in slack.iter().enumerate() {
            // hop i joins chain nodes i and i+1; free node k is x[k-1]
            let delta = v2(self.node(x, i + 1) - self.node(x, i));
            let neg_h = 2.0 / s * M2::identity() + 4.0 / (s * s) * delta * delta.transpose();
            let g = -2.0 / s * delta;
            let (a, b) = (i, i + 1);
            if a >= 1 {
                grad[a - 1] -= g;
                diag[a - 1] += neg_h;
            }
            if b <= m {
                grad[b - 1] += g;
                diag[b - 1] += neg_h;
            }
            if a >= 1 && b <= m {
                off[a - 1] -= neg_h;
            }
        }
        (grad, diag, off)
    }

    /// Newton-based barrier method; returns the waypoints and the final
    /// duality-gap bound.
    fn solve(&self, mut x: Vec<Point>, tol: f64) -> (Vec<Point>, f64) {
        let hops = self.hops() as f64;
        let mut t = 1.0;
        loop {
            self.center(t, &mut x);
            let gap = hops / t;
            if gap <= tol {
                return (x, gap);
            }
            t *= 10.0;
        }
    }

    fn center(&self, t: f64, x: &mut Vec<Point>) {
        for _ in 0..200 {
            let Some(slack) = self.hop_slacks(x) else { return };
            let (grad, diag, off) = self.derivatives(t, x, &slack);
            let Some(step) = solve_block_tridiagonal(&diag, &off, &grad) else { return };
            let decrement: f64 = grad.iter().zip(&step).map(|(g, s)| g.dot(s)).sum();
            if decrement.is_nan() || decrement <= 1e-12 {
                return;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-14 {
                let y: Vec<Point> = x
                    .iter()
                    .zip(&step)
                    .map(|(p, s)| Point::new(p.x + alpha * s.x, p.y + alpha * s.y))
                    .collect();
                if let Some(diff) = self.barrier_diff(t, x, &y, &slack) {
                    if diff >= 0.25 * alpha * decrement {
                        *x = y;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return;
            }
        }
    }
}

/// Solves `A·z = r` for symmetric positive-definite block-tridiagonal `A`
/// with 2×2 diagonal blocks `diag` and super-diagonal blocks `off`.
fn solve_block_tridiagonal(diag: &[M2], off: &[M2], rhs: &[V2]) -> Option<Vec<V2>> {
    let m = diag.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let mut s_inv = Vec::with_capacity(m);
    let mut y = Vec::with_capacity(m);
    let mut s = diag[0];
    let mut r = rhs[0];
    for k in 0..m {
        if k > 0 {
            // L = C_{k-1}ᵀ S_{k-1}⁻¹
            let l = off[k - 1].transpose() * s_inv[k - 1];
            s = diag[k] - l * off[k - 1];
            r = rhs[k] - l * y[k - 1];
        }
        s_inv.push(s.try_inverse()?);
        y.push(r);
    }
    let mut z = vec![V2::zeros(); m];
    z[m - 1] = s_inv[m - 1] * y[m - 1];
    for k in (0..m - 1).rev() {
        z[k] = s_inv[k] * (y[k] - off[k] * z[k + 1]);
    }
    z.iter().all(|v| v.x.is_finite() && v.y.is_finite()).then_some(z)
}
