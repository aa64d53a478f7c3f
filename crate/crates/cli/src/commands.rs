use std::io::Write;
use std::path::PathBuf;

use dde_hopf::chareq::{self, ComplexRoot, HopfPoint, RootSearchRegion, StabilityVerdict};
use dde_hopf::convergence::{self, ConvergenceReport, Regime};
use dde_hopf::dde_sim::{self, LimitCycleMetrics, SimConfig, SweepPoint, Verdict};
use dde_hopf::hopf::{self, CycleStability, Direction, LyapunovReport};
use dde_hopf::model::{self, EquilibriumReport, ModelSpec, TaylorCoefficients};
use dde_hopf::Error;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Axis, Format, Loaded, RunConfig, SimSection};
use crate::output::OutDir;
use crate::CliError;

pub struct Context {
    loaded: Loaded,
    out: PathBuf,
    format: Format,
}

impl Context {
    pub fn new(loaded: Loaded, out: Option<PathBuf>, format: Option<Format>) -> Self {
        let out = out
            .or_else(|| loaded.config.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let format = format.or(loaded.config.output.format).unwrap_or(Format::Csv);
        Context { loaded, out, format }
    }

    fn config(&self) -> &RunConfig {
        &self.loaded.config
    }

    fn model(&self) -> &ModelSpec {
        &self.loaded.config.model
    }

    fn eta(&self) -> f64 {
        self.config().analysis.eta.unwrap_or(1.0)
    }

    fn out_dir(&self) -> Result<OutDir, CliError> {
        OutDir::create(self.out.clone())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    format: Format,
    config: &'a RunConfig,
    config_text: &'a str,
    outputs: Vec<String>,
}

fn finish(ctx: &Context, mut out: OutDir, command: &'static str) -> Result<(), CliError> {
    let manifest = Manifest {
        tool: "dde-hopf",
        version: env!("CARGO_PKG_VERSION"),
        command,
        format: ctx.format,
        config: ctx.config(),
        config_text: &ctx.loaded.raw,
        outputs: out.written().to_vec(),
    };
    out.json("manifest.json", &manifest)
}

#[derive(Serialize)]
struct Stability {
    eta: f64,
    verdict: StabilityVerdict,
    sufficient_condition: bool,
    non_oscillatory: bool,
    regime: Regime,
}

#[derive(Serialize)]
struct Classification {
    direction: Direction,
    cycle_stability: CycleStability,
}

#[derive(Serialize)]
struct AnalysisReport {
    model: ModelSpec,
    equilibrium: EquilibriumReport,
    taylor: TaylorCoefficients,
    hopf: HopfPoint,
    stability: Stability,
    convergence: ConvergenceReport,
    lyapunov: LyapunovReport,
    mu2_closed_form: f64,
    nicholson_mu2: Option<f64>,
    classification: Classification,
}

pub fn analyze(ctx: &Context) -> Result<(), CliError> {
    let spec = ctx.model();
    let equilibrium = model::equilibrium(spec)?;
    let taylor = model::taylor_coefficients(spec)?;
    let hopf_point = chareq::critical_eta(&taylor)?;
    let eta = ctx.eta();
    let scaled = taylor.scaled(eta);
    let stability = Stability {
        eta,
        verdict: chareq::stability_verdict(&taylor, eta)?,
        sufficient_condition: chareq::sufficient_stable(&taylor, eta),
        non_oscillatory: convergence::non_oscillatory(&scaled),
        regime: convergence::classify_regime(&taylor, eta),
    };
    let convergence = convergence::rate_of_convergence_at(&taylor, eta)?;
    let lyapunov = hopf::mu2_center_manifold(&taylor, &hopf_point)?;
    let (direction, cycle_stability) = hopf::classify(&lyapunov);
    let nicholson_mu2 = match spec {
        ModelSpec::Nicholson(_) => Some(hopf::nicholson_mu2(spec)?),
        _ => None,
    };
    let report = AnalysisReport {
        model: *spec,
        equilibrium,
        taylor,
        hopf: hopf_point,
        stability,
        convergence,
        lyapunov,
        mu2_closed_form: hopf::mu2_closed_form(&taylor)?,
        nicholson_mu2,
        classification: Classification {
            direction,
            cycle_stability,
        },
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    // A closed pipe on stdout is not a failure; the report is also on disk.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    let mut out = ctx.out_dir()?;
    out.json("analysis.json", &report)?;
    finish(ctx, out, "analyze")
}

#[derive(Serialize)]
struct RocRow {
    tau: f64,
    sigma: f64,
    sigma1: f64,
    sigma2: f64,
    sigma3: f64,
    tau_star: f64,
    regime: Regime,
}

#[derive(Serialize)]
struct BifurcationRow {
    eta: f64,
    amplitude: f64,
    period: Option<f64>,
    verdict: Verdict,
}

impl From<SweepPoint> for BifurcationRow {
    fn from(p: SweepPoint) -> Self {
        BifurcationRow {
            eta: p.eta,
            amplitude: p.amplitude,
            period: p.period,
            verdict: p.verdict,
        }
    }
}

#[derive(Serialize)]
struct ShapeRow {
    epsilon: f64,
    g_tilde: f64,
    h_tilde: f64,
    /// μ₂ of the configured model's `ξ_xx`, `ξ_xxx` and `b` with `a = εb`.
    mu2: f64,
}

#[derive(Serialize)]
struct NicholsonRow {
    epsilon: f64,
    mu2: f64,
}

/// Initial value used when the config gives none: slightly off equilibrium.
fn default_x_init(x_e: f64) -> f64 {
    x_e + 0.1 * x_e.abs().max(1.0)
}

fn sim_config(ctx: &Context, section: Option<&SimSection>, eta: f64) -> Result<SimConfig, CliError> {
    let x_e = model::equilibrium(ctx.model())?.x_e;
    let tau = ctx.model().tau();
    Ok(section
        .cloned()
        .unwrap_or_default()
        .resolve(tau, eta, default_x_init(x_e)))
}

pub fn sweep(ctx: &Context) -> Result<(), CliError> {
    let section = ctx
        .config()
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let grid = section.points()?;
    let spec = ctx.model();
    let mut out = ctx.out_dir()?;
    match section.axis {
        Axis::Tau => {
            let taylor = model::taylor_coefficients(spec)?;
            let eta = ctx.eta();
            let rows = grid
                .par_iter()
                .map(|&tau| {
                    let r = convergence::rate_of_convergence_at(&TaylorCoefficients { tau, ..taylor }, eta)?;
                    Ok(RocRow {
                        tau,
                        sigma: r.sigma,
                        sigma1: r.sigma1,
                        sigma2: r.sigma2,
                        sigma3: r.sigma3,
                        tau_star: r.tau_star,
                        regime: r.regime,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            out.table("roc_sweep", &rows, ctx.format)?;
        }
        Axis::Eta => {
            spec.validate()?;
            let base = sim_config(ctx, ctx.config().sim.as_ref(), grid[0])?;
            let points = if section.continuation {
                dde_sim::sweep_bifurcation(spec, &grid, &base, true)?
            } else {
                grid.par_iter()
                    .map(|&eta| {
                        let cfg = SimConfig { eta, ..base };
                        let m = dde_sim::metrics(&dde_sim::integrate(spec, &cfg)?);
                        Ok(SweepPoint {
                            eta,
                            amplitude: m.amplitude,
                            period: m.period,
                            verdict: m.verdict,
                        })
                    })
                    .collect::<Result<Vec<_>, Error>>()?
            };
            let rows: Vec<BifurcationRow> = points.into_iter().map(Into::into).collect();
            out.table("bifurcation", &rows, ctx.format)?;
        }
        Axis::Epsilon => {
            let taylor = model::taylor_coefficients(spec)?;
            let b = taylor.b();
            let x0 = match spec {
                ModelSpec::Nicholson(p) => p.x0_size,
                _ => 1.0,
            };
            let mut shape = Vec::with_capacity(grid.len());
            let mut nich = Vec::with_capacity(grid.len());
            for &eps in &grid {
                let g = hopf::g_tilde(eps)?;
                let h = hopf::h_tilde(eps)?;
                shape.push(ShapeRow {
                    epsilon: eps,
                    g_tilde: g,
                    h_tilde: h,
                    mu2: taylor.xi_xx * taylor.xi_xx * g / (b * b) + taylor.xi_xxx * h / b + 0.0,
                });
                nich.push(NicholsonRow {
                    epsilon: eps,
                    mu2: hopf::nicholson_mu2_eps(eps, x0),
                });
            }
            out.table("gtilde", &shape, ctx.format)?;
            out.table("nicholson_mu2", &nich, ctx.format)?;
        }
    }
    finish(ctx, out, "sweep")
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    x: f64,
}

#[derive(Serialize)]
struct MetricsReport {
    x_e: f64,
    config: SimConfig,
    #[serde(flatten)]
    metrics: LimitCycleMetrics,
}

pub fn simulate(ctx: &Context) -> Result<(), CliError> {
    let spec = ctx.model();
    let section = ctx.config().sim.clone().unwrap_or_default();
    let stride = section.stride.unwrap_or(1);
    if stride == 0 {
        return Err(CliError::Config("sim.stride must be positive".into()));
    }
    let cfg = sim_config(ctx, Some(&section), ctx.eta())?;
    let (traj, failure) = match dde_sim::integrate(spec, &cfg) {
        Ok(t) => (t, None),
        Err(Error::Divergence { t, trajectory }) => (
            *trajectory,
            Some(CliError::Runtime(format!("trajectory diverged at t = {t}"))),
        ),
        Err(e) => return Err(e.into()),
    };
    let mut out = ctx.out_dir()?;
    let rows: Vec<TrajectoryRow> = traj
        .times
        .iter()
        .zip(&traj.values)
        .step_by(stride)
        .map(|(&t, &x)| TrajectoryRow { t, x })
        .collect();
    out.table("trajectory", &rows, ctx.format)?;
    let report = MetricsReport {
        x_e: traj.x_e,
        config: cfg,
        metrics: dde_sim::metrics(&traj),
    };
    out.json("metrics.json", &report)?;
    finish(ctx, out, "simulate")?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn roots(ctx: &Context) -> Result<(), CliError> {
    let spec = ctx.model();
    let taylor = model::taylor_coefficients(spec)?;
    let section = ctx.config().roots.clone().unwrap_or_default();
    let eta = section.eta.unwrap_or_else(|| ctx.eta());
    if !(eta > 0.0) {
        return Err(CliError::Config(format!("roots.eta must be positive, got {eta}")));
    }
    let default = RootSearchRegion::around_rightmost(&taylor, eta);
    let region = RootSearchRegion {
        re_min: section.re_min.unwrap_or(default.re_min),
        re_max: section.re_max.unwrap_or(default.re_max),
        im_max: section.im_max.unwrap_or(default.im_max),
    };
    let found: Vec<ComplexRoot> = chareq::rightmost_roots(&taylor, eta, &region).map_err(|e| match e {
        Error::InvariantViolation(m) => CliError::Config(m),
        other => other.into(),
    })?;
    let mut out = ctx.out_dir()?;
    out.table("roots", &found, ctx.format)?;
    finish(ctx, out, "roots")
}
