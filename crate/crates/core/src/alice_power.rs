//! Transmit-power block.
//!
//! Per slot the objective in the transmit power `p` is the difference of two
//! concave terms, `ln(1 + a·p/(p+b)) − ln(1 + c·p/(p+d))`. The subtracted
//! (eavesdropper) term is replaced by its tangent at the previous iterate,
//! which over-estimates it, giving a concave separable surrogate that is a
//! tight lower bound of the true objective. The surrogate is maximized
//! exactly under the average and peak limits by dual decomposition: a
//! closed-form per-slot maximizer for a fixed multiplier, and bisection on
//! the multiplier.
//!
//! Coefficients are kept as `a/b, 1/b, c/d, 1/d`, which stay finite when the
//! whole power carries information (`α = 1`).

use crate::error::{Error, Result};
use crate::scenario::{PowerLimits, SolverTolerances};
use crate::secrecy::{PowerAllocation, SlotLink};

/// Slot objective coefficients:
/// `ln(1 + bob_slope·p/(1 + bob_curv·p)) − ln(1 + eve_slope·p/(1 + eve_curv·p))`
/// plus the tangent slope `a_lin` of the eavesdropper term at the previous power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AliceSlotCoeffs {
    pub bob_slope: f64,
    pub bob_curv: f64,
    pub eve_slope: f64,
    pub eve_curv: f64,
    pub a_lin: f64,
}

impl AliceSlotCoeffs {
    /// Builds the slot coefficients for power-split `alpha`, receiver power
    /// `p_b`, and the tangent point `p_a_prev`.
    pub fn new(alpha: f64, p_b: f64, link: SlotLink, p_a_prev: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let mut c = Self {
            bob_slope: alpha * link.h_ab,
            bob_curv: (1.0 - alpha) * link.h_ab / (p_b * link.h_ab + 1.0),
            eve_slope: alpha * link.h_ae,
            eve_curv: (1.0 - alpha) * link.h_ae,
            a_lin: 0.0,
        };
        c.check()?;
        c.a_lin = c.eve_term_slope(p_a_prev);
        Ok(c)
    }

    /// From the `(a, b, c, d)` parametrization.
    pub fn from_abcd(a: f64, b: f64, c: f64, d: f64, p_a_prev: f64) -> Result<Self> {
        let mut k = Self {
            bob_slope: a / b,
            bob_curv: 1.0 / b,
            eve_slope: c / d,
            eve_curv: 1.0 / d,
            a_lin: 0.0,
        };
        k.check()?;
        k.a_lin = eve_term_linear_coeff(p_a_prev, c, d);
        Ok(k)
    }

    fn check(&self) -> Result<()> {
        let vals = [self.bob_slope, self.bob_curv, self.eve_slope, self.eve_curv];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::CoefficientCondition(format!("{self:?}")));
        }
        Ok(())
    }

    /// `ln(1 + a·p/(p+b))`
    pub fn bob_term(&self, p: f64) -> f64 {
        (self.bob_slope * p / (1.0 + self.bob_curv * p)).ln_1p()
    }

    /// `ln(1 + c·p/(p+d))`
    pub fn eve_term(&self, p: f64) -> f64 {
        (self.eve_slope * p / (1.0 + self.eve_curv * p)).ln_1p()
    }

    /// Derivative of [`Self::eve_term`].
    pub fn eve_term_slope(&self, p: f64) -> f64 {
        self.eve_slope / ((1.0 + self.eve_curv * p) * (1.0 + (self.eve_curv + self.eve_slope) * p))
    }

    /// Derivative of [`Self::bob_term`].
    pub fn bob_term_slope(&self, p: f64) -> f64 {
        self.bob_slope / ((1.0 + self.bob_curv * p) * (1.0 + (self.bob_curv + self.bob_slope) * p))
    }
}

/// `(a, b, c, d)` of the transmit-power subproblem. `alpha` is first clamped
/// to `[alpha_clamp, 1 − alpha_clamp]` so the `1/(1−α)` factors stay finite.
pub fn p1_coefficients(
    alpha: f64,
    p_b: f64,
    link: SlotLink,
    alpha_clamp: f64,
) -> Result<(f64, f64, f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let al = alpha.clamp(alpha_clamp, 1.0 - alpha_clamp);
    let r = al / (1.0 - al);
    let a = r * (1.0 + p_b * link.h_ab);
    let b = (p_b * link.h_ab + 1.0) / ((1.0 - al) * link.h_ab);
    let c = r;
    let d = 1.0 / ((1.0 - al) * link.h_ae);
    // concavity of ln(1 + a·p/(p+b)) needs a·b ≥ 0 with all terms positive
    if [a, b, c, d].iter().any(|v| !(v.is_finite() && *v > 0.0)) || a * b < 0.0 || c * d < 0.0 {
        return Err(Error::CoefficientCondition(format!(
            "a={a}, b={b}, c={c}, d={d}"
        )));
    }
    Ok((a, b, c, d))
}

/// Tangent slope `A` of `ln(1 + c·p/(p+d))` at `p_a_prev`.
pub fn eve_term_linear_coeff(p_a_prev: f64, c: f64, d: f64) -> f64 {
    c * d / ((p_a_prev + d) * (d + (c + 1.0) * p_a_prev))
}

/// Maximizer over `[0, p_hat]` of `bob_term(p) − (a_lin + mu)·p`.
pub fn slot_alice_power_given_dual(coeffs: &AliceSlotCoeffs, mu: f64, p_hat: f64) -> f64 {
    let price = coeffs.a_lin + mu;
    let s = coeffs.bob_slope;
    if price >= s {
        return 0.0;
    }
    if price <= 0.0 {
        return p_hat;
    }
    // stationarity: (1 + q p)(1 + (q + s) p) = s / price
    let q = coeffs.bob_curv;
    let a2 = q * (q + s);
    let a1 = 2.0 * q + s;
    let a0 = 1.0 - s / price;
    let root = -2.0 * a0 / (a1 + (a1 * a1 - 4.0 * a2 * a0).sqrt());
    root.clamp(0.0, p_hat)
}

/// Exact transmit-power objective (natural log, unclamped) summed over slots.
pub fn p1_objective(coeffs: &[AliceSlotCoeffs], p: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(p)
        .map(|(c, p)| c.bob_term(*p) - c.eve_term(*p))
        .sum()
}

/// Surrogate objective with the tangent replacing the eavesdropper term.
/// Includes the constants, so it equals [`p1_objective`] at the tangent point.
pub fn p2_objective(coeffs: &[AliceSlotCoeffs], p_prev: &[f64], p: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(p_prev.iter().zip(p))
        .map(|(c, (p0, p))| c.bob_term(*p) - c.eve_term(*p0) - c.a_lin * (p - p0))
        .sum()
}

/// Builds slot coefficients around the current allocation.
pub fn alice_coefficients(alloc: &PowerAllocation, links: &[SlotLink]) -> Result<Vec<AliceSlotCoeffs>> {
    links
        .iter()
        .enumerate()
        .map(|(i, l)| AliceSlotCoeffs::new(alloc.alpha[i], alloc.p_b[i], *l, alloc.p_a[i]))
        .collect()
}

/// Maximizes the surrogate under C5 (average) and C6 (peak) given the
/// slot coefficients.
pub fn solve_alice_dual(
    coeffs: &[AliceSlotCoeffs],
    avg: f64,
    peak: f64,
    bisection_tol: f64,
) -> Vec<f64> {
    let n = coeffs.len();
    let budget = n as f64 * avg;
    let at = |mu: f64| -> Vec<f64> {
        coeffs
            .iter()
            .map(|c| slot_alice_power_given_dual(c, mu, peak))
            .collect()
    };
    let total = |p: &[f64]| p.iter().sum::<f64>();

    let free = at(0.0);
    if total(&free) <= budget {
        return free;
    }
    let mut lo = 0.0_f64;
    let mut hi = coeffs
        .iter()
        .map(|c| c.bob_slope)
        .fold(0.0_f64, f64::max);
    let mut best = at(hi);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = at(mid);
        if total(&p) > budget {
            lo = mid;
        } else {
            hi = mid;
            let gap = budget - total(&p);
            best = p;
            if gap <= n as f64 * bisection_tol {
                break;
            }
        }
    }
    best
}

/// Transmit-power block update: returns the new `P_a`.
pub fn solve_alice_power(
    alloc: &PowerAllocation,
    links: &[SlotLink],
    limits: &PowerLimits,
    tol: &SolverTolerances,
) -> Result<Vec<f64>> {
    if links.len() != alloc.len() {
        return Err(Error::LengthMismatch {
            expected: alloc.len(),
            got: links.len(),
        });
    }
    let coeffs = alice_coefficients(alloc, links)?;
    Ok(solve_alice_dual(&coeffs, limits.avg_a, limits.peak_a, tol.bisection_tol))
}
