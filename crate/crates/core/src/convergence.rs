//! Rate of convergence σ to the equilibrium and the non-oscillatory regime.
//!
//! With `z = λ + a` and the substitutions `p = -aτ`, `q = -bτ`, the rightmost
//! root of `λ + a + b e^{-λτ} = 0` is real when `bτe^{aτ} <= 1/e` and complex
//! otherwise. The three candidate rates below cover the two cases.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::model::TaylorCoefficients;
use crate::solve::bisect;
use crate::{Error, Result};

const TOL: f64 = 1e-12;
const U_EDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    NonOscillatoryStable,
    OscillatoryStable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `min(σ₁, σ₂, σ₃)`, or zero in the unstable regime.
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub tau_star: f64,
    /// Angle solving `g(u) = bτe^{aτ}` when the rightmost root is complex.
    pub u2: Option<f64>,
    pub regime: Regime,
}

fn check(a: f64, b: f64, tau: f64) -> Result<()> {
    if !(a >= 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvariantViolation(format!(
            "a >= 0 and b > 0 required, got a = {a}, b = {b}"
        )));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvariantViolation(format!("tau > 0 required, got {tau}")));
    }
    Ok(())
}

fn tau_star_ab(a: f64, b: f64) -> f64 {
    // bτe^{aτ} is increasing and already exceeds 1/e at τ = 1/(eb).
    let target = 1.0 / E;
    bisect(|t| b * t * (a * t).exp() - target, 0.0, 1.0 / (E * b), TOL * 1e-3)
}

/// Delay τ* at which the convergence rate peaks: the root of `bτe^{aτ} = 1/e`.
pub fn tau_star(coeffs: &TaylorCoefficients) -> Result<f64> {
    let (a, b) = (coeffs.a(), coeffs.b());
    check(a, b, 1.0)?;
    Ok(tau_star_ab(a, b))
}

/// `g(u) = (u / sin u) e^{-u / tan u}`, increasing from `1/e` to `∞` on `(0, π)`.
pub fn g_aux(u: f64) -> f64 {
    (u / u.sin()) * (-u / u.tan()).exp()
}

/// `bτe^{aτ} <= 1/e`: every root is real in the rightmost position.
pub fn non_oscillatory(coeffs: &TaylorCoefficients) -> bool {
    non_oscillatory_ab(coeffs.a(), coeffs.b(), coeffs.tau)
}

fn non_oscillatory_ab(a: f64, b: f64, tau: f64) -> bool {
    b * tau * (a * tau).exp() <= 1.0 / E
}

fn unstable_ab(a: f64, b: f64, tau: f64) -> bool {
    a < b && tau >= (-a / b).acos() / (b * b - a * a).sqrt()
}

/// Table of regimes in τ for gain η.
pub fn classify_regime(coeffs: &TaylorCoefficients, eta: f64) -> Regime {
    let (a, b, tau) = (eta * coeffs.a(), eta * coeffs.b(), coeffs.tau);
    if non_oscillatory_ab(a, b, tau) {
        Regime::NonOscillatoryStable
    } else if unstable_ab(a, b, tau) {
        Regime::Unstable
    } else {
        Regime::OscillatoryStable
    }
}

/// Convergence rate at unit gain.
pub fn rate_of_convergence(coeffs: &TaylorCoefficients) -> Result<ConvergenceReport> {
    rate_of_convergence_at(coeffs, 1.0)
}

/// Convergence rate of `λ + ηa + ηb e^{-λτ} = 0`.
pub fn rate_of_convergence_at(coeffs: &TaylorCoefficients, eta: f64) -> Result<ConvergenceReport> {
    if !(eta > 0.0) {
        return Err(Error::InvariantViolation(format!("eta > 0 required, got {eta}")));
    }
    let (a, b, tau) = (eta * coeffs.a(), eta * coeffs.b(), coeffs.tau);
    check(a, b, tau)?;
    let tau_star = tau_star_ab(a, b);
    let kappa = b * tau * (a * tau).exp();
    let sigma1 = a + 1.0 / tau;
    let mut sigma2 = f64::INFINITY;
    let mut sigma3 = f64::INFINITY;
    let mut u2 = None;
    let regime;
    if kappa <= 1.0 / E {
        // s = (σ - a)τ on the principal branch s e^{-s} = κ, s ∈ (0, 1].
        let s = bisect(|s| s * (-s).exp() - kappa, 0.0, 1.0, TOL);
        sigma2 = a + s / tau;
        regime = Regime::NonOscillatoryStable;
    } else {
        let u = bisect(|u| g_aux(u) - kappa, U_EDGE, PI - U_EDGE, TOL);
        sigma3 = a + u / (tau * u.tan());
        u2 = Some(u);
        regime = if unstable_ab(a, b, tau) {
            Regime::Unstable
        } else {
            Regime::OscillatoryStable
        };
    }
    let sigma = if regime == Regime::Unstable {
        0.0
    } else {
        sigma1.min(sigma2).min(sigma3)
    };
    Ok(ConvergenceReport {
        sigma,
        sigma1,
        sigma2,
        sigma3,
        tau_star,
        u2,
        regime,
    })
}

/// `(τ, report)` for each delay in `taus`, keeping every other coefficient.
pub fn tau_sweep(
    coeffs: &TaylorCoefficients,
    eta: f64,
    taus: &[f64],
) -> Result<Vec<(f64, ConvergenceReport)>> {
    taus.iter()
        .map(|&tau| {
            let c = TaylorCoefficients { tau, ..*coeffs };
            rate_of_convergence_at(&c, eta).map(|r| (tau, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chareq;
    use proptest::prelude::*;

    fn lin(a: f64, b: f64, tau: f64) -> TaylorCoefficients {
        TaylorCoefficients::linear(a, b, tau)
    }

    #[test]
    fn tau_star_examples() {
        assert!((tau_star(&lin(0.0, 1.0, 1.0)).unwrap() - 0.367879441171442).abs() < 1e-12);
        assert!((tau_star(&lin(1.0, 1.0, 1.0)).unwrap() - 0.278464542761074).abs() < 1e-12);
        let t = tau_star(&lin(0.962724385043594, 9.0, 1.0)).unwrap();
        assert!((t - 0.039355745173568).abs() < 1e-12);
    }

    #[test]
    fn regime_table() {
        let c = |tau| lin(0.0, 1.0, tau);
        assert_eq!(classify_regime(&c(0.2), 1.0), Regime::NonOscillatoryStable);
        assert_eq!(classify_regime(&c(1.0), 1.0), Regime::OscillatoryStable);
        assert_eq!(classify_regime(&c(1.6), 1.0), Regime::Unstable);
        assert!(non_oscillatory(&c(0.3)));
        assert!(!non_oscillatory(&c(0.4)));
    }

    #[test]
    fn example1_is_oscillatory() {
        assert!(!non_oscillatory(&lin(0.962724385043594, 9.0, 0.187)));
    }

    #[test]
    fn rate_reference_values() {
        let r = rate_of_convergence(&lin(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::OscillatoryStable);
        assert!((r.u2.unwrap() - 1.337235701430690).abs() < 1e-10);
        assert!((r.sigma - 0.318131505204764).abs() < 1e-10);
        assert!(r.sigma2.is_infinite());

        let r = rate_of_convergence(&lin(0.0, 1.0, 1.0 / E)).unwrap();
        assert!((r.sigma - E).abs() < 1e-5);
    }

    #[test]
    fn small_delay_limit() {
        let r = rate_of_convergence(&lin(0.5, 2.0, 1e-7)).unwrap();
        assert!((r.sigma - 2.5).abs() < 1e-5);
    }

    #[test]
    fn continuity_at_tau_star() {
        let (a, b) = (0.4, 1.7);
        let ts = tau_star(&lin(a, b, 1.0)).unwrap();
        let peak = a + 1.0 / ts;
        let at = rate_of_convergence(&lin(a, b, ts)).unwrap();
        assert!((at.sigma - peak).abs() < 1e-6);
        // σ has a square-root cusp at τ*, so the one-sided limits converge slowly.
        let left = rate_of_convergence(&lin(a, b, ts * (1.0 - 1e-12))).unwrap();
        let right = rate_of_convergence(&lin(a, b, ts * (1.0 + 1e-12))).unwrap();
        assert!(left.sigma2.is_finite() && right.sigma3.is_finite());
        assert!((left.sigma - peak).abs() < 1e-4);
        assert!((right.sigma - peak).abs() < 1e-4);
    }

    #[test]
    fn unstable_reports_zero() {
        let r = rate_of_convergence(&lin(0.0, 1.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::Unstable);
        assert_eq!(r.sigma, 0.0);
    }

    #[test]
    fn invalid_coefficients() {
        assert!(rate_of_convergence(&lin(-1.0, 1.0, 1.0)).is_err());
        assert!(rate_of_convergence(&lin(0.0, 0.0, 1.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sigma_matches_rightmost_root(a in 0.0f64..2.0, gap in 0.1f64..3.0, frac in 0.02f64..0.95) {
            let b = a + gap;
            let tc = (-a / b).acos() / (b * b - a * a).sqrt();
            let c = lin(a, b, frac * tc);
            let r = rate_of_convergence(&c).unwrap();
            let root = chareq::rightmost_root(&c, 1.0).unwrap();
            prop_assert!((r.sigma * c.tau + root.re * c.tau).abs() < 1e-6,
                "sigma {} root {}", r.sigma, root.re);
        }

        #[test]
        fn realness_matches_regime(a in 0.0f64..2.0, gap in 0.1f64..3.0, tau in 0.01f64..1.5) {
            let b = a + gap;
            let c = lin(a, b, tau);
            let kappa = b * tau * (a * tau).exp();
            prop_assume!((kappa * E - 1.0).abs() > 0.02);
            let root = chareq::rightmost_root(&c, 1.0).unwrap();
            prop_assert_eq!(non_oscillatory(&c), root.im == 0.0);
        }
    }
}
