//! Jamming-power block.
//!
//! With everything else fixed, the receiver's power only enters the slot
//! objective through `ln(1 + (k0·p + k1)/(k2·p + k3))`, which is concave and
//! non-decreasing. The average-power constraint is dualized: for a given
//! multiplier `λ` each slot's maximizer has a closed form (a quadratic root),
//! and `λ` is found by bisection so that the budget is met.

use crate::error::{Error, Result};
use crate::scenario::{PowerLimits, SolverTolerances};
use crate::secrecy::{PowerAllocation, SlotLink};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobSlotCoeffs {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl BobSlotCoeffs {
    /// `k0·k3 − k1·k2`, the numerator of the objective's derivative.
    pub fn gain(&self) -> f64 {
        self.k0 * self.k3 - self.k1 * self.k2
    }

    pub fn objective(&self, p: f64) -> f64 {
        ((self.k0 * p + self.k1) / (self.k2 * p + self.k3)).ln_1p()
    }

    pub fn slope(&self, p: f64) -> f64 {
        self.gain() / ((self.k2 * p + self.k3) * ((self.k0 + self.k2) * p + self.k1 + self.k3))
    }
}

pub fn p3_coefficients(alpha: f64, p_a: f64, link: SlotLink) -> Result<BobSlotCoeffs> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let h = link.h_ab;
    Ok(BobSlotCoeffs {
        k0: alpha * p_a * h * h,
        k1: alpha * p_a * h,
        k2: h,
        k3: (1.0 - alpha) * p_a * h + 1.0,
    })
}

/// Per-slot maximizer of `objective(p) − λ·p` on `[0, p_hat]`.
pub fn bob_power_root(k: &BobSlotCoeffs, lambda: f64, p_hat: f64) -> f64 {
    let a2 = k.k2 * (k.k0 + k.k2);
    if a2 <= 0.0 {
        return 0.0;
    }
    let g = k.gain();
    if g <= 0.0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return p_hat;
    }
    let a1 = k.k1 * k.k2 + 2.0 * k.k2 * k.k3 + k.k0 * k.k3;
    let a0 = k.k3 * (k.k1 + k.k3) - g / lambda;
    if a0 >= 0.0 {
        return 0.0;
    }
    // (√(a1² − 4a0a2) − a1) / (2a2), rationalized to avoid cancellation
    let root = -2.0 * a0 / (a1 + (a1 * a1 - 4.0 * a0 * a2).sqrt());
    root.clamp(0.0, p_hat)
}

/// Sum of the jamming-power objective over slots.
pub fn p3_objective(coeffs: &[BobSlotCoeffs], p: &[f64]) -> f64 {
    coeffs.iter().zip(p).map(|(k, p)| k.objective(*p)).sum()
}

/// Maximizes the jamming-power objective under the average and peak limits.
pub fn solve_bob_dual(coeffs: &[BobSlotCoeffs], avg: f64, peak: f64, bisection_tol: f64) -> Vec<f64> {
    let n = coeffs.len();
    let budget = n as f64 * avg;
    if budget <= 0.0 {
        return vec![0.0; n];
    }
    let all_peak: Vec<f64> = coeffs
        .iter()
        .map(|k| if k.gain() > 0.0 && k.k2 > 0.0 { peak } else { 0.0 })
        .collect();
    let total = |p: &[f64]| p.iter().sum::<f64>();
    if total(&all_peak) <= budget {
        return all_peak;
    }
    let at = |lambda: f64| -> Vec<f64> {
        coeffs.iter().map(|k| bob_power_root(k, lambda, peak)).collect()
    };

    let mut lo = 1e-12_f64;
    while total(&at(lo)) <= budget && lo > 1e-300 {
        lo *= 1e-3;
    }
    let mut hi = 1.0_f64;
    let mut best = at(hi);
    while total(&best) > budget {
        hi *= 2.0;
        best = at(hi);
    }
    lo = lo.min(hi);
    for _ in 0..300 {
        let gap = budget - total(&best);
        if gap <= n as f64 * bisection_tol {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let p = at(mid);
        if total(&p) > budget {
            lo = mid;
        } else {
            hi = mid;
            best = p;
        }
    }
    best
}

/// Jamming-power block update: returns the new `P_b`.
pub fn solve_bob_power(
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
    let coeffs = bob_coefficients(alloc, links)?;
    Ok(solve_bob_dual(&coeffs, limits.avg_b, limits.peak_b, tol.bisection_tol))
}

pub fn bob_coefficients(alloc: &PowerAllocation, links: &[SlotLink]) -> Result<Vec<BobSlotCoeffs>> {
    links
        .iter()
        .enumerate()
        .map(|(i, l)| p3_coefficients(alloc.alpha[i], alloc.p_a[i], *l))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: BobSlotCoeffs = BobSlotCoeffs { k0: 5e4, k1: 5.0, k2: 1e4, k3: 6.0 };

    #[test]
    fn coefficient_examples() {
        let link = SlotLink { h_ab: 1e4, h_ae: 1.0 };
        let k = p3_coefficients(0.5, 1e-3, link).unwrap();
        assert!((k.k0 - 5e4).abs() < 1e-9);
        assert!((k.k1 - 5.0).abs() < 1e-12);
        assert_eq!(k.k2, 1e4);
        assert!((k.k3 - 6.0).abs() < 1e-12);
        let k = p3_coefficients(0.0, 1e-3, link).unwrap();
        assert_eq!((k.k0, k.k1), (0.0, 0.0));
        assert!((k.objective(0.0) - k.objective(3e-3)).abs() < 1e-15);
        let k = p3_coefficients(0.4, 0.0, link).unwrap();
        assert_eq!((k.k0, k.k1, k.k3), (0.0, 0.0, 1.0));
    }

    #[test]
    fn gain_positive_for_interior_alpha() {
        let link = SlotLink { h_ab: 2.5e3, h_ae: 1.0 };
        let k = p3_coefficients(0.3, 2e-3, link).unwrap();
        let expanded = 0.3 * 2e-3 * link.h_ab.powi(2) * 0.7 * 2e-3 * link.h_ab;
        assert!((k.gain() - expanded).abs() <= 1e-9 * expanded);
    }

    #[test]
    fn root_example_back_substitutes() {
        let p = bob_power_root(&K, 1000.0, 4e-3);
        assert!((p - 2.866e-4).abs() < 1e-7, "{p}");
        assert!((K.slope(p) - 1000.0).abs() <= 1e-3 * 1000.0);
    }

    #[test]
    fn root_limits() {
        let slope0 = K.gain() / (K.k3 * (K.k1 + K.k3));
        assert_eq!(bob_power_root(&K, slope0, 4e-3), 0.0);
        assert_eq!(bob_power_root(&K, slope0 * 2.0, 4e-3), 0.0);
        assert_eq!(bob_power_root(&K, 1e-12, 4e-3), 4e-3);
        let flat = BobSlotCoeffs { k0: 0.0, k1: 0.0, k2: 0.0, k3: 1.0 };
        assert_eq!(bob_power_root(&flat, 1.0, 4e-3), 0.0);
    }

    #[test]
    fn identical_slots_split_budget() {
        let p = solve_bob_dual(&[K; 4], 5e-4, 4e-3, 1e-14);
        for v in &p {
            assert!((v - 5e-4).abs() < 1e-12);
        }
    }

    #[test]
    fn single_slot_interior() {
        let p = solve_bob_dual(&[K], 2.866e-4, 4e-3, 1e-16);
        assert!((p[0] - 2.866e-4).abs() < 1e-15);
        assert!((K.slope(p[0]) - 1000.0).abs() < 1.0);
    }

    #[test]
    fn slack_budget_returns_peaks() {
        let p = solve_bob_dual(&[K; 3], 4e-3, 4e-3, 1e-14);
        assert!(p.iter().all(|v| *v == 4e-3));
    }
}
