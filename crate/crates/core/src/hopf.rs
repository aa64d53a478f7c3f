//! Direction and stability of the Hopf bifurcation at η = η_c.
//!
//! Two independent routes produce the first Lyapunov coefficient μ₂: the
//! step-by-step center-manifold reduction ([`mu2_center_manifold`]) and the
//! fully expanded closed form in ε = a/b ([`mu2_closed_form`]). The sign
//! convention is that μ₂ > 0 means a supercritical bifurcation.
//!
//! μ₂ is measured against the normalized bifurcation parameter ν = η/η_c - 1,
//! so `alpha_prime` in a [`LyapunovReport`] is `η_c · Re dλ/dη`. With that
//! normalization μ₂ depends on ε and the Taylor coefficients only, not on τ.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chareq::{self, HopfPoint};
use crate::model::{self, ModelSpec, TaylorCoefficients};
use crate::{Error, Result};

/// |μ₂| below this is reported as degenerate.
pub const DEGENERATE_MU2: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleStability {
    Stable,
    Unstable,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub mu2: f64,
    /// Floquet exponent of the bifurcating cycle.
    pub beta2: f64,
    pub c1_0: Complex64,
    /// Crossing speed `η_c · Re dλ/dη` in the normalized parameter.
    pub alpha_prime: f64,
    pub g20: Complex64,
    pub g11: Complex64,
    pub g02: Complex64,
    pub g21: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    pub f: Complex64,
    pub direction: Direction,
    pub cycle_stability: CycleStability,
}

fn epsilon_of(coeffs: &TaylorCoefficients) -> Result<f64> {
    let (a, b) = (coeffs.a(), coeffs.b());
    if !(b > 0.0) {
        return Err(Error::DegenerateLinearization { a, b });
    }
    let eps = a / b;
    check_epsilon(eps)?;
    Ok(eps)
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::DegenerateEpsilon(eps));
    }
    Ok(())
}

/// Shared trigonometric quantities: `(ε̌, ε̂) = (√(1-ε²), acos(-ε))`.
fn eps_parts(eps: f64) -> (f64, f64) {
    ((1.0 - eps * eps).sqrt(), (-eps).acos())
}

/// Closed-form μ₂ as a function of ε, b and the nonlinear Taylor coefficients.
pub fn mu2_closed_form(coeffs: &TaylorCoefficients) -> Result<f64> {
    let eps = epsilon_of(coeffs)?;
    let b = coeffs.b();
    let (ec, eh) = eps_parts(eps);
    let e2 = eps * eps;
    let e3 = e2 * eps;
    let e4 = e3 * eps;
    let c = coeffs;

    let quad = c.xi_xx * c.xi_xx * (ec * (12.0 * eps - 18.0) + eh * (8.0 * e2 - 18.0 * eps + 4.0))
        + c.xi_xy
            * c.xi_xy
            * (ec * (4.0 * e3 - 14.0 * e2 + 11.0 * eps - 1.0)
                + eh * (-8.0 * e3 + 12.0 * e2 - 7.0 * eps + 3.0))
        + c.xi_yy
            * c.xi_yy
            * (ec * (-8.0 * e3 - 8.0 * e2 + 26.0 * eps - 4.0) + eh * (-4.0 * e2 - 12.0 * eps + 22.0))
        + c.xi_xy
            * c.xi_xx
            * (ec * (-18.0 * e2 + 33.0 * eps - 9.0) + eh * (-8.0 * e3 + 26.0 * e2 - 19.0 * eps + 7.0))
        + c.xi_xy
            * c.xi_yy
            * (ec * (8.0 * e4 + 8.0 * e3 - 32.0 * e2 + 19.0 * eps - 9.0)
                + eh * (4.0 * e3 + 20.0 * e2 - 37.0 * eps + 7.0))
        + c.xi_xx
            * c.xi_yy
            * (ec * (-12.0 * e2 + 30.0 * eps - 18.0) + eh * (16.0 * e2 - 30.0 * eps + 14.0));
    let quad_den = b * b * (1.0 + eps) * (1.0 - e2) * eh * (5.0 - 4.0 * eps);

    let cubic = c.xi_xxx * (-3.0 * ec - 3.0 * eh * eps)
        + c.xi_xyy * (-ec * (1.0 + 2.0 * e2) - 3.0 * eh * eps)
        + c.xi_xxy * (3.0 * ec * eps + eh * (1.0 + 2.0 * e2))
        + c.xi_yyy * (3.0 * ec * eps + 3.0 * eh);
    let cubic_den = b * (1.0 - e2) * eh;

    Ok(quad / quad_den + cubic / cubic_den)
}

/// Quadratic shape function: μ₂ = g̃(ε)/b² when `ξ_xx = ±1` is the only nonlinearity.
pub fn g_tilde(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    let (ec, eh) = eps_parts(eps);
    Ok((ec * (12.0 * eps - 18.0) + eh * (8.0 * eps * eps - 18.0 * eps + 4.0))
        / ((1.0 + eps) * (1.0 - eps * eps) * eh * (5.0 - 4.0 * eps)))
}

/// Cubic shape function: the `ξ_xxx / b` weight in μ₂.
pub fn h_tilde(eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    let (ec, eh) = eps_parts(eps);
    Ok((-3.0 * ec - 3.0 * eps * eh) / ((1.0 - eps * eps) * eh))
}

/// μ₂ for expansions whose only nonlinear terms are `ξ_xx` and `ξ_xxx`.
pub fn mu2_cubic(coeffs: &TaylorCoefficients) -> Result<f64> {
    let eps = epsilon_of(coeffs)?;
    let b = coeffs.b();
    Ok(coeffs.xi_xx * coeffs.xi_xx * g_tilde(eps)? / (b * b) + coeffs.xi_xxx * h_tilde(eps)? / b)
}

/// Simplified μ₂ for Nicholson's blowflies model.
pub fn nicholson_mu2(spec: &ModelSpec) -> Result<f64> {
    let p = match spec {
        ModelSpec::Nicholson(p) => p,
        other => {
            return Err(Error::InvalidSpec(format!(
                "nicholson model required, got {}",
                other.kind()
            )))
        }
    };
    spec.validate()?;
    let eps = 1.0 / ((p.p_rate / p.gamma).ln() - 1.0);
    check_epsilon(eps)?;
    Ok(nicholson_mu2_eps(eps, p.x0_size))
}

/// The Nicholson formula as a function of ε and the size scale x₀.
pub fn nicholson_mu2_eps(eps: f64, x0: f64) -> f64 {
    let (ec, eh) = eps_parts(eps);
    let e2 = eps * eps;
    let quad = (1.0 - eps) / ((1.0 + eps).powi(2) * eh * (5.0 - 4.0 * eps))
        * (ec * (-8.0 * e2 * eps - 8.0 * e2 + 26.0 * eps - 4.0) + eh * (-4.0 * e2 - 12.0 * eps + 22.0));
    let cubic = (2.0 * eps - 1.0) / ((1.0 - e2) * eh) * (3.0 * eps * ec + 3.0 * eh);
    (quad + cubic) / (x0 * x0)
}

pub fn classify(report: &LyapunovReport) -> (Direction, CycleStability) {
    classify_values(report.mu2, report.beta2)
}

fn classify_values(mu2: f64, beta2: f64) -> (Direction, CycleStability) {
    if !(mu2.abs() >= DEGENERATE_MU2) {
        return (Direction::Degenerate, CycleStability::Degenerate);
    }
    let direction = if mu2 > 0.0 {
        Direction::Supercritical
    } else {
        Direction::Subcritical
    };
    let stability = if beta2 < 0.0 {
        CycleStability::Stable
    } else {
        CycleStability::Unstable
    };
    (direction, stability)
}

/// Center-manifold reduction at the Hopf point `hopf`.
pub fn mu2_center_manifold(coeffs: &TaylorCoefficients, hopf: &HopfPoint) -> Result<LyapunovReport> {
    epsilon_of(coeffs)?;
    if coeffs.xi_x + coeffs.xi_y == 0.0 {
        return Err(Error::ZeroDenominator("xi_x + xi_y"));
    }
    let c = coeffs;
    let eta = hopf.eta_c;
    let w = hopf.omega0;
    let tau = c.tau;
    let i = Complex64::i();
    let em = (-i * w * tau).exp(); // e^{-iωτ}
    let ep = em.conj(); // e^{iωτ}

    let d = 1.0 / (1.0 + eta * tau * c.xi_y * ep);
    if !d.is_finite() {
        return Err(Error::ZeroDenominator("D"));
    }
    let dbe = d.conj() * eta;

    let g20 = dbe * (2.0 * c.xi_xx + 2.0 * c.xi_xy * em + 2.0 * c.xi_yy * em * em);
    let g11 = dbe * (2.0 * c.xi_xx + c.xi_xy * (em + ep) + 2.0 * c.xi_yy);
    let g02 = dbe * (2.0 * c.xi_xx + 2.0 * c.xi_xy * ep + 2.0 * c.xi_yy * ep * ep);

    let e_den = d.conj() * (eta * c.xi_x + eta * c.xi_y * em * em - 2.0 * i * w);
    if e_den.norm() == 0.0 {
        return Err(Error::ZeroDenominator("E"));
    }
    let e = -g20 / e_den;
    let f = -g11 / (d.conj() * eta * (c.xi_y + c.xi_x));

    let w20 = |theta: f64| {
        -g20 / (i * w) * (i * w * theta).exp() - g02.conj() / (3.0 * i * w) * (-i * w * theta).exp()
            + e * (2.0 * i * w * theta).exp()
    };
    let w11 = |theta: f64| {
        g11 / (i * w) * (i * w * theta).exp() - g11.conj() / (i * w) * (-i * w * theta).exp() + f
    };
    let (w20_0, w20_t) = (w20(0.0), w20(-tau));
    let (w11_0, w11_t) = (w11(0.0), w11(-tau));

    let g21 = dbe
        * (2.0 * c.xi_xx * (2.0 * w11_0 + w20_0)
            + c.xi_xy * (2.0 * w11_0 * em + w20_0 * ep + 2.0 * w11_t + w20_t)
            + c.xi_yy * (4.0 * w11_t * em + 2.0 * w20_t * ep)
            + 6.0 * c.xi_xxx
            + c.xi_xyy * (2.0 * em * em + 4.0)
            + c.xi_xxy * (2.0 * ep + 4.0 * em)
            + 6.0 * c.xi_yyy * em);

    let c1_0 = i / (2.0 * w) * (g20 * g11 - 2.0 * g11.norm_sqr() - g02.norm_sqr() / 3.0) + g21 / 2.0;
    let alpha_prime = eta * hopf.alpha_prime;
    let mu2 = -c1_0.re / alpha_prime;
    let beta2 = 2.0 * c1_0.re;
    let (direction, cycle_stability) = classify_values(mu2, beta2);
    Ok(LyapunovReport {
        mu2,
        beta2,
        c1_0,
        alpha_prime,
        g20,
        g11,
        g02,
        g21,
        d,
        e,
        f,
        direction,
        cycle_stability,
    })
}

/// Hopf point and Lyapunov report for a model spec.
pub fn lyapunov_report(spec: &ModelSpec) -> Result<(HopfPoint, LyapunovReport)> {
    let coeffs = model::taylor_coefficients(spec)?;
    let hopf = chareq::critical_eta(&coeffs)?;
    let report = mu2_center_manifold(&coeffs, &hopf)?;
    Ok((hopf, report))
}

/// Period of the bifurcating cycle at onset.
pub fn onset_period(hopf: &HopfPoint) -> f64 {
    2.0 * PI / hopf.omega0
}
