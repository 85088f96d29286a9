//! SINRs at the legitimate receiver and the eavesdropper, per-slot secrecy
//! rate and the average secrecy rate (ASR).
//!
//! Rates reported to callers are in bps/Hz (base-2 logs, including the ½
//! half-duplex factor and the `[·]⁺` clamp). The subproblem solvers work with
//! [`slot_log_gain`], the unclamped natural-log difference
//! `ln(1 + γ_B) − ln(1 + γ_E)`; [`rate_from_log_gain`] is the only place the
//! two scales meet.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::scenario::{channel_gain, PowerLimits, ScenarioConfig, Trajectory};

/// Transmit powers and power-split factors for every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl PowerAllocation {
    /// Same values in every slot.
    pub fn constant(n: usize, p_a: f64, p_b: f64, alpha: f64) -> Self {
        Self {
            p_a: vec![p_a; n],
            p_b: vec![p_b; n],
            alpha: vec![alpha; n],
        }
    }

    pub fn len(&self) -> usize {
        self.p_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_a.is_empty()
    }

    /// Checks C4–C8. `slack` is an absolute tolerance in watts applied to the
    /// power constraints (the average ones are scaled by N).
    pub fn check(&self, limits: &PowerLimits, slack: f64) -> Result<()> {
        let n = self.p_a.len();
        if self.p_b.len() != n || self.alpha.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.p_b.len().min(self.alpha.len()),
            });
        }
        if let Some(a) = self.alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::AlphaOutOfRange(*a));
        }
        let peak_ok = |v: &[f64], peak: f64| v.iter().all(|p| *p >= 0.0 && *p <= peak + slack);
        if !peak_ok(&self.p_a, limits.peak_a) || !peak_ok(&self.p_b, limits.peak_b) {
            return Err(Error::InvalidConfig("peak power constraint violated".into()));
        }
        let nf = n as f64;
        // summation rounding is tolerated on top of `slack`
        let over = |v: &[f64], avg: f64| v.iter().sum::<f64>() > nf * (avg * (1.0 + 1e-12) + slack);
        if over(&self.p_a, limits.avg_a) || over(&self.p_b, limits.avg_b)
        {
            return Err(Error::InvalidConfig("average power constraint violated".into()));
        }
        Ok(())
    }
}

/// Normalized gains of one slot: transmitter→receiver and transmitter→eavesdropper.
/// The receiver→transmitter gain equals `h_ab` by reciprocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotLink {
    pub h_ab: f64,
    pub h_ae: f64,
}

/// Per-slot links along a trajectory.
pub fn slot_links(traj: &Trajectory, cfg: &ScenarioConfig) -> Vec<SlotLink> {
    traj.waypoints
        .iter()
        .map(|w| SlotLink {
            h_ab: channel_gain(*w, cfg.bob, cfg),
            h_ae: channel_gain(*w, cfg.eve, cfg),
        })
        .collect()
}

/// SINR at the legitimate receiver, which cancels its own artificial noise.
pub fn sinr_bob(p_a: f64, p_b: f64, alpha: f64, h_ab: f64) -> f64 {
    alpha * p_a * h_ab * (p_b * h_ab + 1.0) / ((p_b + (1.0 - alpha) * p_a) * h_ab + 1.0)
}

/// SINR at the eavesdropper, which sees the forwarded noise as interference.
pub fn sinr_eve(p_a: f64, alpha: f64, h_ae: f64) -> f64 {
    alpha * p_a * h_ae / ((1.0 - alpha) * p_a * h_ae + 1.0)
}

/// `ln(1 + γ_B) − ln(1 + γ_E)` without clamping.
pub fn slot_log_gain(p_a: f64, p_b: f64, alpha: f64, link: SlotLink) -> f64 {
    sinr_bob(p_a, p_b, alpha, link.h_ab).ln_1p() - sinr_eve(p_a, alpha, link.h_ae).ln_1p()
}

/// Converts a natural-log gain to a clamped half-duplex rate in bps/Hz.
pub fn rate_from_log_gain(log_gain: f64) -> f64 {
    0.5 * log_gain.max(0.0) / LN_2
}

/// Instantaneous secrecy rate of one slot in bps/Hz.
pub fn slot_secrecy_rate(p_a: f64, p_b: f64, alpha: f64, link: SlotLink) -> f64 {
    let cb = sinr_bob(p_a, p_b, alpha, link.h_ab).ln_1p();
    let ce = sinr_eve(p_a, alpha, link.h_ae).ln_1p();
    rate_from_log_gain(cb - ce)
}

/// Average secrecy rate over the horizon in bps/Hz.
pub fn average_secrecy_rate(
    traj: &Trajectory,
    alloc: &PowerAllocation,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    let n = traj.len();
    for got in [alloc.p_a.len(), alloc.p_b.len(), alloc.alpha.len()] {
        if got != n {
            return Err(Error::LengthMismatch { expected: n, got });
        }
    }
    if n == 0 {
        return Ok(0.0);
    }
    Ok(asr_with_links(&slot_links(traj, cfg), alloc))
}

/// ASR for precomputed links; lengths must agree.
pub(crate) fn asr_with_links(links: &[SlotLink], alloc: &PowerAllocation) -> f64 {
    let total: f64 = links
        .iter()
        .enumerate()
        .map(|(i, l)| slot_secrecy_rate(alloc.p_a[i], alloc.p_b[i], alloc.alpha[i], *l))
        .sum();
    total / links.len() as f64
}

/// Noise-normalized powers of the three components of the signal a ground
/// node receives in the second phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceivedTerms {
    /// Information-bearing signal.
    pub info: f64,
    /// Forwarded artificial noise.
    pub artificial_noise: f64,
    /// Transmitter's receiver noise forwarded along with the AN.
    pub forwarded_noise: f64,
}

/// Term powers seen at a ground node with gain `h_ag`, when the forwarded
/// phase-one signal arrived over `h_ba`.
pub fn received_terms(p_a: f64, p_b: f64, alpha: f64, h_ba: f64, h_ag: f64) -> ReceivedTerms {
    let norm = p_b * h_ba + 1.0;
    ReceivedTerms {
        info: alpha * p_a * h_ag,
        artificial_noise: (1.0 - alpha) * p_a * p_b * h_ba * h_ag / norm,
        forwarded_noise: (1.0 - alpha) * p_a * h_ag / norm,
    }
}
