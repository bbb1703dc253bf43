//! Experiment description read from a TOML file.
//!
//! ```toml
//! model = "relative"            # or "masked"
//! policies = ["max-st", "min-st", "rand-st"]
//! trials = 1000
//! seed = 7
//!
//! [graph]
//! source = "watts-strogatz"     # "erdos-renyi", or a path to a src,dst,weight CSV
//! m = 50
//! degree = 4
//! rewire = 0.2                  # default 0.2
//! weight_lo = 0.5               # optional uniform edge weights
//! weight_hi = 1.5
//!
//! [noise]
//! sigma2 = 1.0                  # omitted when sweeping inv_sigma2
//! csv = "noise.csv"             # masked model: per-node multipliers of sigma2
//!
//! [sweep]
//! var = "inv_sigma2"            # "m" or "d"
//! grid = [1.0, 10.0, 100.0]
//!
//! [band]                        # masked model only
//! r = 5
//! d = 15
//!
//! [signal]                      # optional fixed ground truth
//! csv = "theta.csv"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sampling::{NodePolicy, TreePolicy};
use crate::simkit::generators::WeightRange;

pub const DEFAULT_REWIRE: f64 = 0.2;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    policies: Vec<String>,
    trials: usize,
    seed: u64,
    graph: RawGraph,
    #[serde(default)]
    noise: RawNoise,
    sweep: RawSweep,
    band: Option<RawBand>,
    signal: Option<RawSignal>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    source: String,
    m: Option<usize>,
    degree: Option<usize>,
    p: Option<f64>,
    rewire: Option<f64>,
    weight_lo: Option<f64>,
    weight_hi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma2: Option<f64>,
    csv: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    var: String,
    grid: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    r: usize,
    d: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    /// `m` is `None` when the vertex count is the sweep variable.
    WattsStrogatz {
        m: Option<usize>,
        degree: usize,
        rewire: f64,
    },
    ErdosRenyi {
        m: Option<usize>,
        p: f64,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Relative,
    Masked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    InvSigma2,
    M,
    D,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVar::InvSigma2 => "inv_sigma2",
            SweepVar::M => "m",
            SweepVar::D => "d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Tree(TreePolicy),
    /// Measure every edge of the physical graph.
    Full,
    Node(NodePolicy),
}

impl Policy {
    pub fn tag(&self) -> &'static str {
        match self {
            Policy::Tree(p) => p.tag(),
            Policy::Full => "full",
            Policy::Node(p) => p.tag(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub weights: WeightRange,
    pub model: Model,
    /// Noise variance, absent when swept.
    pub sigma2: Option<f64>,
    /// Per-node multipliers of `sigma2` (masked model).
    pub noise_csv: Option<PathBuf>,
    pub policies: Vec<Policy>,
    pub sweep_var: SweepVar,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub band_r: Option<usize>,
    /// Sample budget, absent when swept.
    pub band_d: Option<usize>,
    pub signal_csv: Option<PathBuf>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn reject(present: bool, key: &str, why: &str) -> Result<()> {
    if present {
        Err(cfg_err(format!("key `{key}` is not allowed {why}")))
    } else {
        Ok(())
    }
}

fn require<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| cfg_err(format!("missing key `{key}`")))
}

fn as_count(v: f64, key: &str, min: usize) -> Result<usize> {
    if v.fract() != 0.0 || v < min as f64 || !v.is_finite() {
        return Err(cfg_err(format!("`{key}` grid value {v} must be an integer >= {min}")));
    }
    Ok(v as usize)
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| cfg_err(e.message().to_string()))?;
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }
        };

        let model = match raw.model.as_str() {
            "relative" => Model::Relative,
            "masked" => Model::Masked,
            other => {
                return Err(cfg_err(format!(
                    "`model` must be `relative` or `masked`, got `{other}`"
                )))
            }
        };
        let sweep_var = match raw.sweep.var.as_str() {
            "inv_sigma2" => SweepVar::InvSigma2,
            "m" => SweepVar::M,
            "d" => SweepVar::D,
            other => {
                return Err(cfg_err(format!(
                    "`sweep.var` must be inv_sigma2, m or d, got `{other}`"
                )))
            }
        };
        if raw.sweep.grid.is_empty() {
            return Err(cfg_err("`sweep.grid` is empty"));
        }
        if raw.trials == 0 {
            return Err(cfg_err("`trials` must be at least 1"));
        }
        for &v in &raw.sweep.grid {
            match sweep_var {
                SweepVar::InvSigma2 if !(v > 0.0 && v.is_finite()) => {
                    return Err(cfg_err(format!("`sweep.grid` value {v} must be a positive 1/sigma2")))
                }
                SweepVar::M => {
                    as_count(v, "sweep.grid", 2)?;
                }
                SweepVar::D => {
                    as_count(v, "sweep.grid", 1)?;
                }
                _ => {}
            }
        }

        let g = raw.graph;
        let swept_m = sweep_var == SweepVar::M;
        if swept_m {
            reject(g.m.is_some(), "graph.m", "when sweeping m")?;
        }
        let m = if swept_m { None } else { g.m };
        let graph = match g.source.as_str() {
            "watts-strogatz" => {
                reject(g.p.is_some(), "graph.p", "for watts-strogatz")?;
                if !swept_m {
                    require(g.m, "graph.m")?;
                }
                let rewire = g.rewire.unwrap_or(DEFAULT_REWIRE);
                if !(0.0..=1.0).contains(&rewire) {
                    return Err(cfg_err(format!("`graph.rewire` = {rewire} outside [0, 1]")));
                }
                GraphSource::WattsStrogatz {
                    m,
                    degree: require(g.degree, "graph.degree")?,
                    rewire,
                }
            }
            "erdos-renyi" => {
                reject(g.degree.is_some(), "graph.degree", "for erdos-renyi")?;
                reject(g.rewire.is_some(), "graph.rewire", "for erdos-renyi")?;
                if !swept_m {
                    require(g.m, "graph.m")?;
                }
                let p = require(g.p, "graph.p")?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(cfg_err(format!("`graph.p` = {p} outside (0, 1]")));
                }
                GraphSource::ErdosRenyi { m, p }
            }
            path => {
                reject(swept_m, "sweep.var = \"m\"", "with a graph file")?;
                for (present, key) in [
                    (g.m.is_some(), "graph.m"),
                    (g.degree.is_some(), "graph.degree"),
                    (g.p.is_some(), "graph.p"),
                    (g.rewire.is_some(), "graph.rewire"),
                    (g.weight_lo.is_some(), "graph.weight_lo"),
                    (g.weight_hi.is_some(), "graph.weight_hi"),
                ] {
                    reject(present, key, "with a graph file")?;
                }
                GraphSource::File(resolve(path))
            }
        };
        let weights = match (g.weight_lo, g.weight_hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) if lo > 0.0 && lo <= hi && hi.is_finite() => Some((lo, hi)),
            (Some(lo), Some(hi)) => return Err(cfg_err(format!("bad weight range [{lo}, {hi}]"))),
            _ => return Err(cfg_err("`graph.weight_lo` and `graph.weight_hi` go together")),
        };

        let sigma2 = if sweep_var == SweepVar::InvSigma2 {
            reject(raw.noise.sigma2.is_some(), "noise.sigma2", "when sweeping inv_sigma2")?;
            None
        } else {
            let s = require(raw.noise.sigma2, "noise.sigma2")?;
            let ok = match model {
                Model::Relative => s >= 0.0 && s.is_finite(),
                Model::Masked => s > 0.0 && s.is_finite(),
            };
            if !ok {
                return Err(cfg_err(format!("`noise.sigma2` = {s} is not a valid variance")));
            }
            Some(s)
        };

        if raw.policies.is_empty() {
            return Err(cfg_err("`policies` is empty"));
        }
        let mut policies = Vec::new();
        for name in &raw.policies {
            let p = match model {
                Model::Relative if name == "full" => Policy::Full,
                Model::Relative => Policy::Tree(
                    name.parse()
                        .map_err(|_| cfg_err(format!("policy `{name}` is not one of max-st, min-st, rand-st, full")))?,
                ),
                Model::Masked => Policy::Node(name.parse().map_err(|_| {
                    cfg_err(format!(
                        "policy `{name}` is not one of greedy, a-design, e-design, random"
                    ))
                })?),
            };
            if policies.contains(&p) {
                return Err(cfg_err(format!("policy `{name}` listed twice")));
            }
            policies.push(p);
        }

        let (band_r, band_d) = match model {
            Model::Relative => {
                reject(raw.band.is_some(), "band", "for the relative model")?;
                reject(raw.noise.csv.is_some(), "noise.csv", "for the relative model")?;
                reject(sweep_var == SweepVar::D, "sweep.var = \"d\"", "for the relative model")?;
                (None, None)
            }
            Model::Masked => {
                let band = require(raw.band, "band.r")?;
                if band.r == 0 {
                    return Err(cfg_err("`band.r` must be at least 1"));
                }
                let d = if sweep_var == SweepVar::D {
                    reject(band.d.is_some(), "band.d", "when sweeping d")?;
                    None
                } else {
                    Some(require(band.d, "band.d")?)
                };
                (Some(band.r), d)
            }
        };

        Ok(ExperimentConfig {
            graph,
            weights,
            model,
            sigma2,
            noise_csv: raw.noise.csv.as_deref().map(resolve),
            policies,
            sweep_var,
            grid: raw.sweep.grid,
            trials: raw.trials,
            seed: raw.seed,
            band_r,
            band_d,
            signal_csv: raw.signal.as_ref().map(|s| resolve(&s.csv)),
        })
    }
}
