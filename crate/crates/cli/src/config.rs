use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dde_hopf::dde_sim::SimConfig;
use dde_hopf::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub sweep: Option<SweepSection>,
    pub sim: Option<SimSection>,
    pub roots: Option<RootsSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Gain at which stability and convergence are reported; 1 if absent.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Tau,
    Eta,
    Epsilon,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Axis,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    /// Explicit grid; overrides start/stop/count.
    pub grid: Option<Vec<f64>>,
    /// Start each η run from the tail of the previous one.
    #[serde(default)]
    pub continuation: bool,
}

impl SweepSection {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        let pts = match &self.grid {
            Some(g) => g.clone(),
            None => {
                let (Some(start), Some(stop), Some(count)) = (self.start, self.stop, self.count) else {
                    return Err(CliError::Config(
                        "sweep needs either grid or start, stop and count".into(),
                    ));
                };
                match count {
                    0 => Vec::new(),
                    1 => vec![start],
                    n => (0..n)
                        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                        .collect(),
                }
            }
        };
        if pts.is_empty() {
            return Err(CliError::Config("sweep grid is empty".into()));
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(CliError::Config("sweep grid has non-finite points".into()));
        }
        if pts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Config("sweep grid must be strictly ascending".into()));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub eta: Option<f64>,
    pub x_init: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub transient_fraction: Option<f64>,
    /// Write every n-th sample to the trajectory file.
    pub stride: Option<usize>,
}

impl SimSection {
    /// Fills unset fields from the defaults for `tau`; the initial value
    /// defaults to `fallback_x`.
    pub fn resolve(&self, tau: f64, default_eta: f64, fallback_x: f64) -> SimConfig {
        let base = SimConfig::for_delay(tau, self.eta.unwrap_or(default_eta), self.x_init.unwrap_or(fallback_x));
        SimConfig {
            t_end: self.t_end.unwrap_or(base.t_end),
            dt: self.dt.unwrap_or(base.dt),
            transient_fraction: self.transient_fraction.unwrap_or(base.transient_fraction),
            ..base
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsSection {
    pub eta: Option<f64>,
    pub re_min: Option<f64>,
    pub re_max: Option<f64>,
    pub im_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A parsed config together with the exact text it came from.
pub struct Loaded {
    pub config: RunConfig,
    pub raw: String,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        toml::from_str(&raw).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Loaded { config, raw })
}
