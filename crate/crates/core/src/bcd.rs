//! Outer block-coordinate loop and the benchmark schemes.
//!
//! Blocks run in a fixed order: transmit power, jamming power, power split,
//! trajectory. Each block maximizes a tight lower bound of the objective, but
//! the per-slot `[·]⁺` of the secrecy rate is not part of those bounds, so
//! every candidate is checked against the exact average secrecy rate. A
//! candidate that lowers it is pulled back toward the current iterate
//! (`θ = 1, ½, ¼, …`); if none of the trial points helps, the block makes no
//! move.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::alice_power::solve_alice_power;
use crate::an_split::solve_alpha;
use crate::bob_power::solve_bob_power;
use crate::error::{Error, Result};
use crate::scenario::{baseline_trajectory, PowerLimits, ScenarioConfig, Trajectory};
use crate::secrecy::{asr_with_links, slot_links, PowerAllocation};
use crate::trajectory::solve_trajectory;

/// Trial step lengths tried by the ascent guard before giving up.
const GUARD_TRIES: usize = 10;

/// Split factor of the initial point and of the schemes that freeze it.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Which blocks a solve optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Everything: trajectory, both powers and the split.
    Jtdora,
    /// Both powers on the baseline trajectory, split fixed.
    Anopc,
    /// Trajectory only, powers and split fixed.
    Antd,
    /// Nothing; the initial point is evaluated.
    Anera,
    /// No artificial noise and no jamming; transmit power and trajectory.
    Tdpc,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [Self::Jtdora, Self::Anopc, Self::Antd, Self::Anera, Self::Tdpc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Jtdora => "JTDORA",
            Self::Anopc => "ANOPC",
            Self::Antd => "ANTD",
            Self::Anera => "ANERA",
            Self::Tdpc => "TDPC",
        }
    }

    fn blocks(self) -> Blocks {
        let b = |alice, bob, alpha, trajectory| Blocks {
            alice,
            bob,
            alpha,
            trajectory,
        };
        match self {
            Self::Jtdora => b(true, true, true, true),
            Self::Anopc => b(true, true, false, false),
            Self::Antd => b(false, false, false, true),
            Self::Anera => b(false, false, false, false),
            Self::Tdpc => b(true, false, false, true),
        }
    }

    /// Power limits the scheme operates under. Without jamming the whole
    /// average budget goes to the transmitter.
    pub fn limits(self, cfg: &ScenarioConfig) -> PowerLimits {
        let base = cfg.budgets.limits();
        match self {
            Self::Tdpc => PowerLimits {
                avg_a: cfg.budgets.p_ave_w,
                avg_b: 0.0,
                peak_a: base.peak_a,
                peak_b: 0.0,
            },
            _ => base,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
struct Blocks {
    alice: bool,
    bob: bool,
    alpha: bool,
    trajectory: bool,
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub scheme: SchemeKind,
    /// Exact ASR of the initial point followed by one entry per outer iteration.
    pub asr_trace: Vec<f64>,
    pub final_trajectory: Trajectory,
    pub final_alloc: PowerAllocation,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: f64,
}

impl SolveReport {
    pub fn final_asr(&self) -> f64 {
        *self.asr_trace.last().expect("trace holds the initial point")
    }
}

/// Baseline trajectory with the budget split evenly over slots and `α = ½`.
pub fn initial_point(cfg: &ScenarioConfig) -> Result<(Trajectory, PowerAllocation)> {
    cfg.validate()?;
    let traj = baseline_trajectory(cfg)?;
    let alloc = PowerAllocation::constant(
        cfg.n_slots,
        cfg.budgets.p_bar_a(),
        cfg.budgets.p_bar_b(),
        DEFAULT_ALPHA,
    );
    Ok((traj, alloc))
}

/// Starting point of `scheme`: [`initial_point`], except that the no-noise
/// scheme transmits the whole average budget with `α = 1` and no jamming.
pub fn scheme_initial_point(cfg: &ScenarioConfig, scheme: SchemeKind) -> Result<(Trajectory, PowerAllocation)> {
    let (traj, alloc) = initial_point(cfg)?;
    if scheme == SchemeKind::Tdpc {
        return Ok((traj, PowerAllocation::constant(cfg.n_slots, cfg.budgets.p_ave_w, 0.0, 1.0)));
    }
    Ok((traj, alloc))
}

/// Runs the scheme from its initial point until the fractional ASR increase
/// drops below `epsilon` or `max_outer_iters` is reached.
pub fn bcd_solve(cfg: &ScenarioConfig, scheme: SchemeKind) -> Result<SolveReport> {
    bcd_solve_observed(cfg, scheme, |_| {})
}

/// A variable block of the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Alice,
    Bob,
    Alpha,
    Trajectory,
}

/// State right after a block update (accepted or not).
#[derive(Debug, Clone, Copy)]
pub struct BlockEvent<'a> {
    /// One-based outer iteration.
    pub iteration: usize,
    pub block: Block,
    pub trajectory: &'a Trajectory,
    pub alloc: &'a PowerAllocation,
    pub asr: f64,
}

/// [`bcd_solve`] with a callback after every block update.
pub fn bcd_solve_observed<F>(cfg: &ScenarioConfig, scheme: SchemeKind, mut observe: F) -> Result<SolveReport>
where
    F: FnMut(BlockEvent<'_>),
{
    let clock = Instant::now();
    let (traj, alloc) = scheme_initial_point(cfg, scheme)?;
    let mut state = State::new(traj, alloc, cfg);
    let blocks = scheme.blocks();
    let limits = scheme.limits(cfg);
    let tol = &cfg.solver;

    let mut trace = vec![state.asr];
    let mut converged = !(blocks.alice || blocks.bob || blocks.alpha || blocks.trajectory);
    let mut iterations = 0;

    while !converged && iterations < tol.max_outer_iters {
        iterations += 1;
        let mut emit = |state: &State, block| {
            observe(BlockEvent {
                iteration: iterations,
                block,
                trajectory: &state.traj,
                alloc: &state.alloc,
                asr: state.asr,
            })
        };
        if blocks.alice {
            let p_a = solve_alice_power(&state.alloc, &state.links, &limits, tol)?;
            state.try_powers(|a| &mut a.p_a, &p_a);
            emit(&state, Block::Alice);
        }
        if blocks.bob {
            let p_b = solve_bob_power(&state.alloc, &state.links, &limits, tol)?;
            state.try_powers(|a| &mut a.p_b, &p_b);
            emit(&state, Block::Bob);
        }
        if blocks.alpha {
            let alpha = solve_alpha(&state.alloc, &state.links, tol)?;
            state.try_powers(|a| &mut a.alpha, &alpha);
            emit(&state, Block::Alpha);
        }
        if blocks.trajectory {
            let update = solve_trajectory(&state.traj, &state.alloc, cfg)?;
            if !update.null_step {
                state.try_trajectory(&update.trajectory, cfg);
            }
            emit(&state, Block::Trajectory);
        }
        let prev = *trace.last().expect("non-empty trace");
        trace.push(state.asr);
        converged = (state.asr - prev) / prev.max(1e-12) < tol.epsilon;
    }

    Ok(SolveReport {
        scheme,
        asr_trace: trace,
        final_trajectory: state.traj,
        final_alloc: state.alloc,
        iterations,
        converged,
        wall_time_s: clock.elapsed().as_secs_f64(),
    })
}

/// Current iterate with its cached links and exact ASR.
struct State {
    traj: Trajectory,
    alloc: PowerAllocation,
    links: Vec<crate::secrecy::SlotLink>,
    asr: f64,
}

impl State {
    fn new(traj: Trajectory, alloc: PowerAllocation, cfg: &ScenarioConfig) -> Self {
        let links = slot_links(&traj, cfg);
        let asr = asr_with_links(&links, &alloc);
        Self { traj, alloc, links, asr }
    }

    /// Replaces one allocation vector by `target`, or by the closest trial
    /// point toward it that does not lower the ASR.
    fn try_powers(&mut self, field: fn(&mut PowerAllocation) -> &mut Vec<f64>, target: &[f64]) {
        let current = field(&mut self.alloc).clone();
        let mut theta = 1.0;
        for _ in 0..GUARD_TRIES {
            let mut cand = self.alloc.clone();
            *field(&mut cand) = if theta == 1.0 {
                target.to_vec()
            } else {
                current.iter().zip(target).map(|(c, t)| c + theta * (t - c)).collect()
            };
            let asr = asr_with_links(&self.links, &cand);
            if asr >= self.asr {
                self.alloc = cand;
                self.asr = asr;
                return;
            }
            theta *= 0.5;
        }
    }

    fn try_trajectory(&mut self, target: &Trajectory, cfg: &ScenarioConfig) {
        let mut theta = 1.0;
        for _ in 0..GUARD_TRIES {
            let cand = if theta == 1.0 {
                target.clone()
            } else {
                Trajectory::new(
                    self.traj
                        .waypoints
                        .iter()
                        .zip(&target.waypoints)
                        .map(|(c, t)| c.lerp(*t, theta))
                        .collect(),
                )
            };
            let links = slot_links(&cand, cfg);
            let asr = asr_with_links(&links, &self.alloc);
            if asr >= self.asr {
                self.traj = cand;
                self.links = links;
                self.asr = asr;
                return;
            }
            theta *= 0.5;
        }
    }
}
