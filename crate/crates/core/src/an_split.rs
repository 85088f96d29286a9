//! Power-split block: the fraction of the transmit power that carries
//! information, chosen per slot.
//!
//! With powers and positions fixed, slot `n` contributes `ln Ψ(α[n])` where
//! `Ψ(x) = (1 + γ_B)/(1 + γ_E)`. `Ψ` is quasi-concave on `[0, 1]`, so each
//! slot is maximized independently, by the stationary point of `Ψ` when it
//! exists and by golden-section search otherwise.

use crate::error::{Error, Result};
use crate::scenario::SolverTolerances;
use crate::secrecy::{PowerAllocation, SlotLink};

/// `γ1 = P_a·h_ab`, `γ2 = P_b·h_ab`, `γ3 = P_a·h_ae`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTriple {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl GammaTriple {
    pub fn new(p_a: f64, p_b: f64, link: SlotLink) -> Self {
        Self {
            g1: p_a * link.h_ab,
            g2: p_b * link.h_ab,
            g3: p_a * link.h_ae,
        }
    }
}

pub fn psi(x: f64, g: GammaTriple) -> f64 {
    let GammaTriple { g1, g2, g3 } = g;
    ((1.0 - x) * g3 + 1.0) * ((x * g2 + 1.0) * g1 + g2 + 1.0)
        / ((g3 + 1.0) * ((1.0 - x) * g1 + g2 + 1.0))
}

/// Stationary point of `Ψ`, clamped to `[0, 1]`.
///
/// Setting `dΨ/dx = 0` gives the quadratic
/// `γ1²γ2γ3·x² − 2γ1γ2γ3(1+γ1+γ2)·x + … = 0`; its smaller root is
/// `(1+γ1+γ2)/γ1 − √((γ2γ3+γ3−γ1)(1+γ2)(1+γ1+γ2)γ2γ3)/(γ1γ2γ3)`.
/// Returns `None` when a gamma is not positive or the radicand is not
/// positive; the caller must then search numerically.
pub fn alpha_closed_form(g: GammaTriple) -> Option<f64> {
    let GammaTriple { g1, g2, g3 } = g;
    if !(g1 > 0.0 && g2 > 0.0 && g3 > 0.0) {
        return None;
    }
    let u = 1.0 + g1 + g2;
    let radicand = (g2 * g3 + g3 - g1) * (1.0 + g2) * u * g2 * g3;
    if !radicand.is_finite() || radicand <= 0.0 {
        return None;
    }
    let x = u / g1 - radicand.sqrt() / (g1 * g2 * g3);
    x.is_finite().then(|| x.clamp(0.0, 1.0))
}

/// High-SNR approximation `1 − [√(r(1+r)) − r]` with `r = P_b/P_a`.
/// Diagnostic only; the solver does not use it.
pub fn alpha_high_snr(p_a: f64, p_b: f64) -> Result<f64> {
    if p_a.is_nan() || p_a <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "high-SNR split needs positive transmit power, got {p_a}"
        )));
    }
    let r = p_b / p_a;
    Ok((1.0 - ((r * (1.0 + r)).sqrt() - r)).clamp(0.0, 1.0))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]`; the endpoints are also compared
/// so a boundary maximum is returned exactly.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [lo, hi, mid]
        .into_iter()
        .fold((mid, f(mid)), |best, x| {
            let fx = f(x);
            if fx > best.1 {
                (x, fx)
            } else {
                best
            }
        })
        .0
}

/// Unclamped maximizer of `Ψ` on `[0, 1]` for one slot.
pub fn best_alpha(g: GammaTriple, tol: f64) -> f64 {
    alpha_closed_form(g).unwrap_or_else(|| golden_section_max(|x| psi(x, g).ln(), 0.0, 1.0, tol))
}

/// Power-split block update: returns the new `α`.
///
/// Each output lies in `[alpha_clamp, 1 − alpha_clamp]`, unless keeping the
/// previous value is at least as good (for instance when the slot carries no
/// transmit power and `Ψ ≡ 1`).
pub fn solve_alpha(alloc: &PowerAllocation, links: &[SlotLink], tol: &SolverTolerances) -> Result<Vec<f64>> {
    if links.len() != alloc.len() {
        return Err(Error::LengthMismatch {
            expected: alloc.len(),
            got: links.len(),
        });
    }
    let lo = tol.alpha_clamp;
    let hi = 1.0 - tol.alpha_clamp;
    Ok(links
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let prev = alloc.alpha[i];
            let g = GammaTriple::new(alloc.p_a[i], alloc.p_b[i], *link);
            if g.g1 <= 0.0 {
                return prev;
            }
            let cand = best_alpha(g, tol.inner_tol).clamp(lo, hi);
            if psi(cand, g).ln() >= psi(prev, g).ln() {
                cand
            } else {
                prev
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_argmax(g: GammaTriple, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        (0..=n)
            .map(|i| i as f64 * step)
            .fold((0.0, f64::NEG_INFINITY), |best, x| {
                let v = psi(x, g);
                if v > best.1 {
                    (x, v)
                } else {
                    best
                }
            })
            .0
    }

    #[test]
    fn psi_examples() {
        for g in [
            GammaTriple { g1: 3.0, g2: 0.2, g3: 9.0 },
            GammaTriple { g1: 10.0, g2: 10.0, g3: 10.0 },
        ] {
            assert!((psi(0.0, g) - 1.0).abs() < 1e-15);
        }
        let g = GammaTriple { g1: 10.0, g2: 10.0, g3: 10.0 };
        assert!((psi(1.0, g) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_grid_at_ten() {
        let g = GammaTriple { g1: 10.0, g2: 10.0, g3: 10.0 };
        let a = alpha_closed_form(g).unwrap();
        assert!((a - 0.580_131_584_642_934).abs() < 1e-12, "{a}");
        assert!((a - grid_argmax(g, 1e-5)).abs() < 1e-4);
    }

    #[test]
    fn closed_form_high_snr_limit() {
        let g = GammaTriple { g1: 1e7, g2: 1e7, g3: 1e7 };
        let a = alpha_closed_form(g).unwrap();
        assert!((a - (2.0 - 2f64.sqrt())).abs() < 1e-5, "{a}");
    }

    #[test]
    fn closed_form_boundary_signals_fallback() {
        // γ2γ3 + γ3 = γ1
        let g = GammaTriple { g1: 6.0, g2: 2.0, g3: 2.0 };
        assert!(alpha_closed_form(g).is_none());
        let g = GammaTriple { g1: 60.0, g2: 2.0, g3: 2.0 };
        assert!(alpha_closed_form(g).is_none());
        let best = best_alpha(g, 1e-10);
        assert!((best - grid_argmax(g, 1e-5)).abs() < 1e-4);
    }

    #[test]
    fn high_snr_examples() {
        assert!((alpha_high_snr(1.0, 1.0).unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((alpha_high_snr(1.0, 1e-12).unwrap() - 1.0).abs() < 1e-5);
        assert!((alpha_high_snr(1.0, 3.0).unwrap() - (1.0 - (12f64.sqrt() - 3.0))).abs() < 1e-14);
        assert!((alpha_high_snr(1.0, 3.0).unwrap() - 0.5359).abs() < 1e-4);
        assert!(alpha_high_snr(0.0, 1.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let tol = SolverTolerances::default();
        // γ = (10, 10, 10)
        let alloc = PowerAllocation::constant(1, 1e-3, 1e-3, 0.5);
        let link = SlotLink { h_ab: 1e4, h_ae: 1e4 };
        let a = solve_alpha(&alloc, &[link], &tol).unwrap();
        assert!((a[0] - 0.580_131_584_642_934).abs() < 1e-9);

        // eavesdropper practically blocked: all power to information
        let blocked = SlotLink { h_ab: 1e4, h_ae: 1e-9 };
        let a = solve_alpha(&alloc, &[blocked], &tol).unwrap();
        assert!(a[0] > 1.0 - 1e-5, "{}", a[0]);
        assert!(a[0] <= 1.0 - tol.alpha_clamp);
    }

    #[test]
    fn golden_finds_interior_and_boundary() {
        let x = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        let x = golden_section_max(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
