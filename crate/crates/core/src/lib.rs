//! Analysis of scalar delay differential equations `x'(t) = η f(x(t), x(t - τ))`.
//!
//! The crate covers the linear picture (Hopf point, stability verdicts, rate of
//! convergence, non-oscillatory regime), the first Lyapunov coefficient of the
//! Hopf bifurcation computed along two independent routes, and a method-of-steps
//! integrator used as a brute-force check on all of the above.
//!
//! ```
//! use dde_hopf::model::{self, BdParams, ModelSpec};
//! use dde_hopf::{chareq, hopf};
//!
//! let spec = ModelSpec::CubicBd(BdParams { k: 9.0, mu: 1.0, lambda: -7.0, tau: 0.187 });
//! let coeffs = model::taylor_coefficients(&spec).unwrap();
//! let hopf_point = chareq::critical_eta(&coeffs).unwrap();
//! assert!((hopf_point.eta_c - 1.0).abs() < 0.01);
//! let report = hopf::mu2_center_manifold(&coeffs, &hopf_point).unwrap();
//! assert_eq!(report.direction, hopf::Direction::Supercritical);
//! ```

pub mod chareq;
pub mod convergence;
pub mod dde_sim;
pub mod error;
pub mod hopf;
pub mod model;
mod solve;

pub use error::{Error, Result};
pub use model::{ModelSpec, TaylorCoefficients};
