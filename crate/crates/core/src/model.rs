//! Concrete delay models, their equilibria and Taylor coefficients.
//!
//! Every model is written as `x'(t) = η f(x(t), x(t - τ))`. The Taylor
//! coefficients are those of `f` about the equilibrium, with the usual
//! factorial weights: `ξ_xx = f_xx / 2`, `ξ_xxx = f_xxx / 6`, `ξ_xy = f_xy`,
//! `ξ_xxy = f_xxy / 2` and so on.

use serde::{Deserialize, Serialize};

use crate::solve::bisect;
use crate::{Error, Result};

/// Parameters shared by the cubic and quadratic Boissonade-De Kepper variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdParams {
    /// Delayed feedback gain.
    pub k: f64,
    /// Linear coefficient.
    pub mu: f64,
    /// Constant forcing.
    pub lambda: f64,
    pub tau: f64,
}

/// Nicholson's blowflies: `N' = -γ N + p N(t-τ) exp(-N(t-τ)/x₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NicholsonParams {
    /// Per-capita death rate.
    pub gamma: f64,
    /// Maximum per-capita egg production rate.
    pub p_rate: f64,
    /// Population size of maximal reproduction.
    pub x0_size: f64,
    pub tau: f64,
}

/// Which delay model is being analysed.
///
/// `Generic` describes a model directly through its Taylor expansion; its state
/// is the deviation `u = x - x*`, so the equilibrium is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    #[serde(rename = "cubic")]
    CubicBd(BdParams),
    #[serde(rename = "quadratic")]
    QuadraticBd(BdParams),
    Nicholson(NicholsonParams),
    Generic(TaylorCoefficients),
}

/// Coefficients of the cubic Taylor expansion of `f` about the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub xi_x: f64,
    pub xi_y: f64,
    #[serde(default)]
    pub xi_xx: f64,
    #[serde(default)]
    pub xi_xy: f64,
    #[serde(default)]
    pub xi_yy: f64,
    #[serde(default)]
    pub xi_xxx: f64,
    #[serde(default)]
    pub xi_xxy: f64,
    #[serde(default)]
    pub xi_xyy: f64,
    #[serde(default)]
    pub xi_yyy: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub x_e: f64,
    /// Absolute value of the defining equation at `x_e`.
    pub residual: f64,
}

impl TaylorCoefficients {
    /// Linear coefficients only; every nonlinear term zero.
    pub fn linear(a: f64, b: f64, tau: f64) -> Self {
        Self {
            xi_x: -a,
            xi_y: -b,
            xi_xx: 0.0,
            xi_xy: 0.0,
            xi_yy: 0.0,
            xi_xxx: 0.0,
            xi_xxy: 0.0,
            xi_xyy: 0.0,
            xi_yyy: 0.0,
            tau,
        }
    }

    /// Instantaneous damping `a = -ξ_x`.
    pub fn a(&self) -> f64 {
        -self.xi_x
    }

    /// Delayed feedback strength `b = -ξ_y`.
    pub fn b(&self) -> f64 {
        -self.xi_y
    }

    /// `ε = a / b`.
    pub fn epsilon(&self) -> f64 {
        self.a() / self.b()
    }

    /// Checks `b > 0`, `a >= 0`, `b > a` and `τ > 0`.
    pub fn check_invariants(&self) -> Result<()> {
        let (a, b) = (self.a(), self.b());
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "tau > 0 required, got {}",
                self.tau
            )));
        }
        if !(b > 0.0) || !(a >= 0.0) || !(b > a) {
            return Err(Error::InvariantViolation(format!(
                "0 <= a < b required, got a = {a}, b = {b}"
            )));
        }
        Ok(())
    }

    /// The same expansion with every coefficient multiplied by `eta`, so that
    /// `η f` can be analysed at unit gain.
    pub fn scaled(&self, eta: f64) -> Self {
        Self {
            xi_x: eta * self.xi_x,
            xi_y: eta * self.xi_y,
            xi_xx: eta * self.xi_xx,
            xi_xy: eta * self.xi_xy,
            xi_yy: eta * self.xi_yy,
            xi_xxx: eta * self.xi_xxx,
            xi_xxy: eta * self.xi_xxy,
            xi_xyy: eta * self.xi_xyy,
            xi_yyy: eta * self.xi_yyy,
            tau: self.tau,
        }
    }

    /// Drops every nonlinear term.
    pub fn linearized(&self) -> Self {
        Self::linear(self.a(), self.b(), self.tau)
    }

    /// Evaluates the cubic polynomial `f(u, v)` in deviation coordinates.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.xi_x * u
            + self.xi_y * v
            + self.xi_xx * u * u
            + self.xi_xy * u * v
            + self.xi_yy * v * v
            + self.xi_xxx * u * u * u
            + self.xi_xxy * u * u * v
            + self.xi_xyy * u * v * v
            + self.xi_yyy * v * v * v
    }
}

impl ModelSpec {
    pub fn tau(&self) -> f64 {
        match self {
            ModelSpec::CubicBd(p) | ModelSpec::QuadraticBd(p) => p.tau,
            ModelSpec::Nicholson(p) => p.tau,
            ModelSpec::Generic(c) => c.tau,
        }
    }

    /// Copy of the model with a different delay.
    pub fn with_tau(mut self, tau: f64) -> Self {
        match &mut self {
            ModelSpec::CubicBd(p) | ModelSpec::QuadraticBd(p) => p.tau = tau,
            ModelSpec::Nicholson(p) => p.tau = tau,
            ModelSpec::Generic(c) => c.tau = tau,
        }
        self
    }

    /// Human-readable variant name, as used in config files.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::CubicBd(_) => "cubic",
            ModelSpec::QuadraticBd(_) => "quadratic",
            ModelSpec::Nicholson(_) => "nicholson",
            ModelSpec::Generic(_) => "generic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ModelSpec::CubicBd(p) | ModelSpec::QuadraticBd(p) => {
                if !all_finite(&[p.k, p.mu, p.lambda, p.tau]) {
                    return Err(Error::InvalidSpec("non-finite parameter".into()));
                }
                if !(p.k > 0.0) {
                    return Err(Error::InvalidSpec(format!("k > 0 required, got k = {}", p.k)));
                }
                if !(p.k > p.mu) {
                    return Err(Error::InvalidSpec(format!(
                        "k > mu required, got k = {}, mu = {}",
                        p.k, p.mu
                    )));
                }
                if !(p.tau > 0.0) {
                    return Err(Error::InvalidSpec(format!("tau > 0 required, got {}", p.tau)));
                }
            }
            ModelSpec::Nicholson(p) => {
                if !all_finite(&[p.gamma, p.p_rate, p.x0_size, p.tau]) {
                    return Err(Error::InvalidSpec("non-finite parameter".into()));
                }
                if !(p.gamma > 0.0 && p.p_rate > 0.0 && p.x0_size > 0.0) {
                    return Err(Error::InvalidSpec(
                        "gamma, p_rate and x0_size must be positive".into(),
                    ));
                }
                if !(p.p_rate > std::f64::consts::E * p.gamma) {
                    return Err(Error::InvalidSpec(format!(
                        "p_rate > e*gamma required, got p_rate = {}, gamma = {}",
                        p.p_rate, p.gamma
                    )));
                }
                if !(p.tau > 0.0) {
                    return Err(Error::InvalidSpec(format!("tau > 0 required, got {}", p.tau)));
                }
            }
            ModelSpec::Generic(c) => {
                let v = [
                    c.xi_x, c.xi_y, c.xi_xx, c.xi_xy, c.xi_yy, c.xi_xxx, c.xi_xxy, c.xi_xyy,
                    c.xi_yyy, c.tau,
                ];
                if !all_finite(&v) {
                    return Err(Error::InvalidSpec("non-finite coefficient".into()));
                }
                if !(c.tau > 0.0) {
                    return Err(Error::InvalidSpec(format!("tau > 0 required, got {}", c.tau)));
                }
            }
        }
        Ok(())
    }
}

fn cubic_poly(p: &BdParams, x: f64) -> f64 {
    x * x * x + (p.k - p.mu) * x + p.lambda
}

fn cubic_equilibrium(p: &BdParams) -> f64 {
    // k > mu makes the cubic strictly increasing, so the bracket holds exactly one root.
    let half_width = 1.0 + p.lambda.abs() + p.k;
    let mut x = bisect(|x| cubic_poly(p, x), -half_width, half_width, 1e-12);
    for _ in 0..3 {
        let slope = 3.0 * x * x + (p.k - p.mu);
        let step = cubic_poly(p, x) / slope;
        if step.is_finite() {
            x -= step;
        }
    }
    x
}

/// Both real roots of `x² + (k - μ)x + Λ = 0`, larger first.
pub fn quadratic_roots(p: &BdParams) -> Result<(f64, f64)> {
    let c = p.k - p.mu;
    let disc = c * c - 4.0 * p.lambda;
    if disc < 0.0 {
        return Err(Error::NoEquilibrium(format!(
            "discriminant (k-mu)^2 - 4*lambda = {disc} < 0"
        )));
    }
    let sq = disc.sqrt();
    // Stable form of the quadratic formula.
    let q = -0.5 * (c + c.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, p.lambda / q) };
    Ok((r1.max(r2), r1.min(r2)))
}

fn quadratic_linear_ok(p: &BdParams, x: f64) -> bool {
    let a = 2.0 * x - p.mu;
    a >= 0.0 && p.k > a
}

/// The equilibrium the analysis linearizes about.
pub fn equilibrium(spec: &ModelSpec) -> Result<EquilibriumReport> {
    spec.validate()?;
    match spec {
        ModelSpec::CubicBd(p) => {
            let x_e = cubic_equilibrium(p);
            Ok(EquilibriumReport {
                x_e,
                residual: cubic_poly(p, x_e).abs(),
            })
        }
        ModelSpec::QuadraticBd(p) => {
            let (hi, lo) = quadratic_roots(p)?;
            let x_e = if quadratic_linear_ok(p, hi) {
                hi
            } else if quadratic_linear_ok(p, lo) {
                lo
            } else {
                return Err(Error::InvariantViolation(format!(
                    "neither quadratic equilibrium ({hi}, {lo}) satisfies 0 <= 2x-mu < k"
                )));
            };
            let residual = (x_e * x_e + (p.k - p.mu) * x_e + p.lambda).abs();
            Ok(EquilibriumReport { x_e, residual })
        }
        ModelSpec::Nicholson(p) => {
            let x_e = p.x0_size * (p.p_rate / p.gamma).ln();
            let residual =
                (-p.gamma * x_e + p.p_rate * x_e * (-x_e / p.x0_size).exp()).abs();
            Ok(EquilibriumReport { x_e, residual })
        }
        ModelSpec::Generic(_) => Ok(EquilibriumReport {
            x_e: 0.0,
            residual: 0.0,
        }),
    }
}

/// Taylor coefficients of `f` about the equilibrium.
///
/// The Nicholson coefficients follow the closed-form list used by the
/// Nicholson Lyapunov-coefficient formula: `ξ_yy = -(γ/x₀)(2 - L)` and
/// `ξ_yyy = (γ/x₀²)(3 - L)` with `L = ln(p/γ)`. These are `f_yy` and `f_yyy`
/// themselves, i.e. twice and six times the factorial-weighted values.
pub fn taylor_coefficients(spec: &ModelSpec) -> Result<TaylorCoefficients> {
    let eq = equilibrium(spec)?;
    let x_e = eq.x_e;
    let coeffs = match spec {
        ModelSpec::CubicBd(p) => TaylorCoefficients {
            xi_x: -(3.0 * x_e * x_e - p.mu),
            xi_y: -p.k,
            xi_xx: -3.0 * x_e,
            xi_xxx: -1.0,
            ..TaylorCoefficients::linear(0.0, 0.0, p.tau)
        },
        ModelSpec::QuadraticBd(p) => TaylorCoefficients {
            xi_x: -(2.0 * x_e - p.mu),
            xi_y: -p.k,
            xi_xx: -1.0,
            ..TaylorCoefficients::linear(0.0, 0.0, p.tau)
        },
        ModelSpec::Nicholson(p) => {
            let l = (p.p_rate / p.gamma).ln();
            TaylorCoefficients {
                xi_x: -p.gamma,
                xi_y: p.gamma * (1.0 - l),
                xi_yy: -(p.gamma / p.x0_size) * (2.0 - l),
                xi_yyy: (p.gamma / (p.x0_size * p.x0_size)) * (3.0 - l),
                ..TaylorCoefficients::linear(0.0, 0.0, p.tau)
            }
        }
        ModelSpec::Generic(c) => *c,
    };
    coeffs.check_invariants()?;
    Ok(coeffs)
}

/// `η f(x, x_delayed)` exactly as the model defines it.
pub fn rhs(spec: &ModelSpec, x: f64, x_delayed: f64, eta: f64) -> f64 {
    let f = match spec {
        ModelSpec::CubicBd(p) => -(x * x * x - p.mu * x + p.lambda) - p.k * x_delayed,
        ModelSpec::QuadraticBd(p) => -(x * x - p.mu * x + p.lambda) - p.k * x_delayed,
        ModelSpec::Nicholson(p) => {
            -p.gamma * x + p.p_rate * x_delayed * (-x_delayed / p.x0_size).exp()
        }
        ModelSpec::Generic(c) => c.eval(x, x_delayed),
    };
    eta * f
}
