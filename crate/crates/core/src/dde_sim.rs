//! Fixed-step RK4 integration of `x'(t) = η f(x(t), x(t - τ))` by the method
//! of steps, plus summary metrics of the resulting trajectory.
//!
//! Delayed values come from cubic Hermite interpolation between stored
//! samples, using the slope recorded at each step. The grid is uniform and no
//! step is ever adapted, so a run is bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::model::{self, ModelSpec};
use crate::{Error, Result};

/// |x| beyond which a run is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub eta: f64,
    /// Constant history on `[-τ, 0]`.
    pub x_init: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Leading share of the run ignored by [`metrics`].
    pub transient_fraction: f64,
}

impl SimConfig {
    /// Defaults for delay `tau`: `dt = τ/100`, `t_end = 2000τ`, half the run discarded.
    pub fn for_delay(tau: f64, eta: f64, x_init: f64) -> Self {
        SimConfig {
            eta,
            x_init,
            t_end: 2000.0 * tau,
            dt: tau / 100.0,
            transient_fraction: 0.5,
        }
    }

    pub fn validate(&self, tau: f64) -> Result<()> {
        let finite = [self.eta, self.x_init, self.t_end, self.dt, self.transient_fraction]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite value".into()));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta > 0 required, got {}", self.eta)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt > 0 required, got {}", self.dt)));
        }
        if self.dt > tau / 20.0 {
            return Err(Error::StepTooLarge {
                dt: self.dt,
                limit: tau / 20.0,
            });
        }
        if self.t_end < 50.0 * tau {
            return Err(Error::InvalidConfig(format!(
                "t_end >= 50 tau required, got t_end = {} with tau = {tau}",
                self.t_end
            )));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::InvalidConfig(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            )));
        }
        Ok(())
    }
}

/// State on `[-τ, 0]` before the run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum History {
    Constant(f64),
    /// Uniform samples ending at `t = 0`, with their slopes.
    Tabulated {
        dt: f64,
        values: Vec<f64>,
        derivatives: Vec<f64>,
    },
}

impl History {
    /// The last `τ` (plus a margin) of `traj`, shifted so that its final sample sits at 0.
    pub fn from_tail(traj: &Trajectory) -> Self {
        let tau = traj.model.tau();
        let dt = traj.config.dt;
        let need = (tau / dt).ceil() as usize + 3;
        let n = traj.values.len();
        let start = n.saturating_sub(need);
        History::Tabulated {
            dt,
            values: traj.values[start..].to_vec(),
            derivatives: traj.derivatives[start..].to_vec(),
        }
    }

    fn at_zero(&self) -> f64 {
        match self {
            History::Constant(x) => *x,
            History::Tabulated { values, .. } => *values.last().unwrap_or(&0.0),
        }
    }

    fn eval(&self, s: f64) -> f64 {
        match self {
            History::Constant(x) => *x,
            History::Tabulated {
                dt,
                values,
                derivatives,
            } => {
                let n = values.len();
                if n == 0 {
                    return 0.0;
                }
                // position measured from the first sample
                let pos = (s + (n - 1) as f64 * dt) / dt;
                if pos <= 0.0 {
                    return values[0];
                }
                let j = (pos.floor() as usize).min(n.saturating_sub(2));
                if n == 1 {
                    return values[0];
                }
                hermite(
                    values[j],
                    derivatives[j],
                    values[j + 1],
                    derivatives[j + 1],
                    *dt,
                    pos - j as f64,
                )
            }
        }
    }
}

fn hermite(x0: f64, d0: f64, x1: f64, d1: f64, h: f64, th: f64) -> f64 {
    let th2 = th * th;
    let th3 = th2 * th;
    let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    let h10 = th3 - 2.0 * th2 + th;
    let h01 = -2.0 * th3 + 3.0 * th2;
    let h11 = th3 - th2;
    h00 * x0 + h10 * h * d0 + h01 * x1 + h11 * h * d1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `x'(t)` at each sample.
    pub derivatives: Vec<f64>,
    pub model: ModelSpec,
    pub config: SimConfig,
    /// Equilibrium of the model, used as the reference level by [`metrics`].
    pub x_e: f64,
    pub diverged: bool,
}

struct Integrator<'a> {
    spec: &'a ModelSpec,
    eta: f64,
    tau: f64,
    dt: f64,
    history: &'a History,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl Integrator<'_> {
    fn delayed(&self, t: f64) -> f64 {
        let s = t - self.tau;
        if s <= 0.0 {
            return self.history.eval(s);
        }
        let pos = s / self.dt;
        let last = self.values.len() - 1;
        let j = (pos.floor() as usize).min(last.saturating_sub(1));
        hermite(
            self.values[j],
            self.derivatives[j],
            self.values[j + 1],
            self.derivatives[j + 1],
            self.dt,
            pos - j as f64,
        )
    }

    fn f(&self, x: f64, t: f64) -> f64 {
        model::rhs(self.spec, x, self.delayed(t), self.eta)
    }
}

/// Integrates from a constant history `config.x_init`.
pub fn integrate(spec: &ModelSpec, config: &SimConfig) -> Result<Trajectory> {
    integrate_from(spec, config, &History::Constant(config.x_init))
}

/// Integrates from an arbitrary history.
///
/// On divergence the partial trajectory, flagged `diverged`, travels inside
/// [`Error::Divergence`].
pub fn integrate_from(spec: &ModelSpec, config: &SimConfig, history: &History) -> Result<Trajectory> {
    spec.validate()?;
    let tau = spec.tau();
    config.validate(tau)?;
    let x_e = model::equilibrium(spec)?.x_e;
    let dt = config.dt;
    let steps = (config.t_end / dt).round() as usize;

    let mut it = Integrator {
        spec,
        eta: config.eta,
        tau,
        dt,
        history,
        values: Vec::with_capacity(steps + 1),
        derivatives: Vec::with_capacity(steps + 1),
    };
    let x0 = history.at_zero();
    it.values.push(x0);
    it.derivatives.push(it.f(x0, 0.0));

    let mut diverged_at = None;
    for n in 0..steps {
        let t = n as f64 * dt;
        let x = it.values[n];
        let k1 = it.derivatives[n];
        let k2 = it.f(x + 0.5 * dt * k1, t + 0.5 * dt);
        let k3 = it.f(x + 0.5 * dt * k2, t + 0.5 * dt);
        let k4 = it.f(x + dt * k3, t + dt);
        let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() || next.abs() > DIVERGENCE_BOUND {
            diverged_at = Some(t + dt);
            break;
        }
        let slope = it.f(next, t + dt);
        it.values.push(next);
        it.derivatives.push(slope);
    }

    let values = it.values;
    let derivatives = it.derivatives;
    let times = (0..values.len()).map(|n| n as f64 * dt).collect();
    let traj = Trajectory {
        times,
        values,
        derivatives,
        model: *spec,
        config: *config,
        x_e,
        diverged: diverged_at.is_some(),
    };
    match diverged_at {
        Some(t) => Err(Error::Divergence {
            t,
            trajectory: Box::new(traj),
        }),
        None => Ok(traj),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergedToEquilibrium,
    LimitCycle,
    Diverged,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleMetrics {
    pub verdict: Verdict,
    /// Half the peak-to-peak range after the transient.
    pub amplitude: f64,
    /// Mean spacing of cycle maxima, for limit cycles.
    pub period: Option<f64>,
    /// Fitted exponential decay rate of `|x - x_e|`.
    pub decay_rate: Option<f64>,
}

const CONVERGED_RANGE: f64 = 1e-6;
const CYCLE_TOL: f64 = 0.01;
const CYCLES_COMPARED: usize = 10;
const FIT_FLOOR: f64 = 1e-11;

pub fn metrics(traj: &Trajectory) -> LimitCycleMetrics {
    let n = traj.values.len();
    let start = ((traj.config.transient_fraction * n as f64) as usize).min(n.saturating_sub(1));
    let window = &traj.values[start..];
    let (lo, hi) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = if window.is_empty() { 0.0 } else { hi - lo };
    let amplitude = 0.5 * range;
    let scale = traj.x_e.abs().max(1.0);

    if traj.diverged {
        return LimitCycleMetrics {
            verdict: Verdict::Diverged,
            amplitude,
            period: None,
            decay_rate: None,
        };
    }
    if range < CONVERGED_RANGE * scale {
        return LimitCycleMetrics {
            verdict: Verdict::ConvergedToEquilibrium,
            amplitude,
            period: None,
            decay_rate: decay_rate(traj, start),
        };
    }
    let cycles = cycles(&traj.values, start, traj.config.dt, 0.5 * (lo + hi));
    if cycles.len() > CYCLES_COMPARED {
        let last = &cycles[cycles.len() - CYCLES_COMPARED..];
        let amps: Vec<f64> = last.iter().map(|c| c.amplitude).collect();
        let mean = amps.iter().sum::<f64>() / amps.len() as f64;
        let spread = amps.iter().fold(0.0f64, |m, &a| m.max(a)) - amps.iter().fold(f64::INFINITY, |m, &a| m.min(a));
        if mean > 0.0 && spread <= CYCLE_TOL * mean {
            let first = cycles[0].peak_time;
            let lastt = cycles[cycles.len() - 1].peak_time;
            let period = (lastt - first) / (cycles.len() - 1) as f64;
            return LimitCycleMetrics {
                verdict: Verdict::LimitCycle,
                amplitude,
                period: Some(period),
                decay_rate: None,
            };
        }
    }
    LimitCycleMetrics {
        verdict: Verdict::Undetermined,
        amplitude,
        period: None,
        decay_rate: decay_rate(traj, start),
    }
}

struct Cycle {
    peak_time: f64,
    amplitude: f64,
}

/// Splits the signal at upward crossings of `mid`; each complete cycle
/// contributes its parabolically refined maximum and half its range.
fn cycles(values: &[f64], start: usize, dt: f64, mid: f64) -> Vec<Cycle> {
    let mut ups = Vec::new();
    for i in start.max(1)..values.len() {
        if values[i - 1] < mid && values[i] >= mid {
            ups.push(i);
        }
    }
    let mut out = Vec::new();
    for w in ups.windows(2) {
        let seg = &values[w[0]..w[1]];
        let (mut imax, mut vmax, mut vmin) = (0, f64::NEG_INFINITY, f64::INFINITY);
        for (k, &v) in seg.iter().enumerate() {
            if v > vmax {
                vmax = v;
                imax = k;
            }
            vmin = vmin.min(v);
        }
        let i = w[0] + imax;
        let mut t = i as f64 * dt;
        let mut peak = vmax;
        if i > 0 && i + 1 < values.len() {
            let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            if denom < 0.0 {
                let off = 0.5 * (y0 - y2) / denom;
                if off.abs() <= 1.0 {
                    t += off * dt;
                    peak = y1 - 0.25 * (y0 - y2) * off;
                }
            }
        }
        out.push(Cycle {
            peak_time: t,
            amplitude: 0.5 * (peak - vmin),
        });
    }
    out
}

/// Least-squares slope of `log|x - x_e|`, on local maxima of `|x - x_e|`
/// when the deviation oscillates and on every sample otherwise.
fn decay_rate(traj: &Trajectory, start: usize) -> Option<f64> {
    let floor = FIT_FLOOR * traj.x_e.abs().max(1.0);
    let dev: Vec<f64> = traj.values.iter().map(|x| x - traj.x_e).collect();
    let fit = |from: usize| -> Option<f64> {
        let seg = &dev[from..];
        let crossings = seg.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        let mut pts: Vec<(f64, f64)> = Vec::new();
        if crossings >= 2 {
            for i in 1..seg.len().saturating_sub(1) {
                let (p, c, n) = (seg[i - 1].abs(), seg[i].abs(), seg[i + 1].abs());
                if c > floor && c >= p && c > n {
                    pts.push((traj.times[from + i], c.ln()));
                }
            }
        } else {
            for (i, &d) in seg.iter().enumerate() {
                if d.abs() > floor {
                    pts.push((traj.times[from + i], d.abs().ln()));
                }
            }
        }
        if pts.len() < 3 {
            return None;
        }
        let m = pts.len() as f64;
        let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mt, my) = (st / m, sy / m);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &(t, y) in &pts {
            sxy += (t - mt) * (y - my);
            sxx += (t - mt) * (t - mt);
        }
        (sxx > 0.0).then(|| -sxy / sxx)
    };
    fit(start).or_else(|| {
        // The deviation may already sit below the floor after the transient;
        // fall back to the run after its first few delays.
        let tau_steps = (traj.model.tau() / traj.config.dt).ceil() as usize;
        fit((5 * tau_steps).min(dev.len().saturating_sub(1)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eta: f64,
    pub amplitude: f64,
    pub period: Option<f64>,
    pub verdict: Verdict,
}

/// Runs [`integrate`] and [`metrics`] at every η of an ascending grid.
///
/// With `continuation`, each run starts from the tail of the previous one,
/// which keeps the state on a large cycle once it has jumped there.
pub fn sweep_bifurcation(
    spec: &ModelSpec,
    eta_grid: &[f64],
    config: &SimConfig,
    continuation: bool,
) -> Result<Vec<SweepPoint>> {
    if eta_grid.is_empty() {
        return Err(Error::InvalidConfig("empty eta grid".into()));
    }
    if eta_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("eta grid must be strictly ascending".into()));
    }
    let mut history = History::Constant(config.x_init);
    let mut out = Vec::with_capacity(eta_grid.len());
    for &eta in eta_grid {
        let cfg = SimConfig { eta, ..*config };
        let traj = integrate_from(spec, &cfg, &history)?;
        let m = metrics(&traj);
        out.push(SweepPoint {
            eta,
            amplitude: m.amplitude,
            period: m.period,
            verdict: m.verdict,
        });
        if continuation {
            history = History::from_tail(&traj);
        }
    }
    Ok(out)
}
