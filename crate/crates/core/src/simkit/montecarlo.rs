//! Monte Carlo engine: for every sweep value and policy, place measurements, simulate
//! `trials` datasets, estimate, and compare the mean Dirichlet energy of the error with
//! the bound.
//!
//! Randomness is keyed so that results do not depend on scheduling. Trial `t` at grid
//! point `g` draws from a ChaCha20 stream keyed by `(seed, g)` with stream id `t`, so all
//! policies at one grid point see the same signals and noise. Trials run on a rayon pool
//! and are reduced in trial order.

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{relative_crb_trace, FisherInfo};
use crate::error::{Error, Result};
use crate::estimators::{CmlEstimator, RelativeEstimator};
use crate::graph::Graph;
use crate::metrics::{dirichlet_energy_pairwise, mean_and_se};
use crate::sampling::{select_nodes, spanning_tree_policy};
use crate::simkit::config::{ExperimentConfig, GraphSource, Model, Policy, SweepVar};
use crate::simkit::generators::{gen_erdos_renyi, gen_watts_strogatz};
use crate::simkit::io::{load_graph_csv, load_node_noise_csv, load_signal_csv};
use crate::simkit::sampler::{relative_measurements, GaussianNoise};
use crate::spectrum::{decompose, GraphSignal};

/// Identifies the random streams; printed in every output header.
pub const PRNG_ID: &str = "chacha20 (rand_chacha 0.9) + ziggurat normals (rand_distr 0.5)";

const DOMAIN_TRIAL: u64 = 1;
const DOMAIN_GRAPH: u64 = 2;
const DOMAIN_POLICY: u64 = 3;

fn key(seed: u64, grid: u64, domain: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&grid.to_le_bytes());
    k[16..24].copy_from_slice(&domain.to_le_bytes());
    k
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, grid: usize, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(key(seed, grid as u64, DOMAIN_TRIAL));
    rng.set_stream(trial as u64);
    rng
}

/// A 64-bit seed for the graph generator or a randomized policy.
fn derived_seed(seed: u64, grid: usize, domain: u64) -> u64 {
    ChaCha20Rng::from_seed(key(seed, grid as u64, domain)).next_u64()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRecord {
    pub sweep_value: f64,
    pub policy: String,
    /// Mean Dirichlet energy of the estimation error.
    pub mean_energy: f64,
    /// Sample standard deviation of the energies over `sqrt(trials)`.
    pub se_energy: f64,
    pub crb_trace: f64,
    pub trials: usize,
    pub wall_time: Duration,
}

impl MonteCarloRecord {
    pub fn empirical_root_wmse(&self) -> f64 {
        self.mean_energy.sqrt()
    }

    /// Delta-method standard error of the root.
    pub fn root_se(&self) -> f64 {
        if self.mean_energy > 0.0 {
            self.se_energy / (2.0 * self.mean_energy.sqrt())
        } else {
            0.0
        }
    }

    pub fn crb_root(&self) -> f64 {
        self.crb_trace.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub seed: u64,
    pub sweep_var: SweepVar,
    pub records: Vec<MonteCarloRecord>,
}

impl MonteCarloResult {
    pub const HEADER: &'static str = "sweep_value,policy,empirical_root_wmse,se,crb_root,trials";

    /// CSV with `#` metadata lines. Timing is left out so that output is reproducible.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# graphcrb {}\n# prng: {}\n# seed: {}\n# sweep: {}\n{}\n",
            env!("CARGO_PKG_VERSION"),
            PRNG_ID,
            self.seed,
            self.sweep_var.name(),
            Self::HEADER
        );
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.sweep_value,
                r.policy,
                r.empirical_root_wmse(),
                r.root_se(),
                r.crb_root(),
                r.trials
            ));
        }
        s
    }
}

struct GridPoint {
    graph: Graph,
    sigma2: f64,
    d: Option<usize>,
}

fn build_graph(cfg: &ExperimentConfig, file_graph: Option<&Graph>, grid: usize, value: f64) -> Result<Graph> {
    let structural = if cfg.sweep_var == SweepVar::M { grid } else { 0 };
    let seed = derived_seed(cfg.seed, structural, DOMAIN_GRAPH);
    let swept_m = (cfg.sweep_var == SweepVar::M).then_some(value as usize);
    match &cfg.graph {
        GraphSource::WattsStrogatz { m, degree, rewire } => {
            let m = swept_m.or(*m).expect("validated config");
            gen_watts_strogatz(m, *degree, *rewire, seed, cfg.weights)
        }
        GraphSource::ErdosRenyi { m, p } => {
            let m = swept_m.or(*m).expect("validated config");
            gen_erdos_renyi(m, *p, seed, cfg.weights)
        }
        GraphSource::File(_) => Ok(file_graph.expect("graph file loaded").clone()),
    }
}

fn standard_normal(n: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn run_trials<F>(trials: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

struct Outcome {
    crb_trace: f64,
    energies: Vec<f64>,
}

fn run_relative(
    cfg: &ExperimentConfig,
    pt: &GridPoint,
    policy: Policy,
    grid: usize,
    truth: Option<&GraphSignal>,
) -> Result<Outcome> {
    let g = &pt.graph;
    let m = g.num_vertices();
    let laplacian = g.laplacian();
    let structural = if cfg.sweep_var == SweepVar::InvSigma2 { 0 } else { grid };
    let meas = match policy {
        Policy::Full => g.clone(),
        Policy::Tree(p) => {
            let seed = derived_seed(cfg.seed, structural, DOMAIN_POLICY);
            spanning_tree_policy(g, p, seed, pt.sigma2)?.tree_graph(m)?
        }
        Policy::Node(_) => unreachable!("validated config"),
    };
    let crb_trace = relative_crb_trace(&laplacian, &meas, pt.sigma2)?;
    let est = RelativeEstimator::new(&meas, Some(0))?;
    let sd = pt.sigma2.sqrt();
    let energies = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, grid, t);
        let theta = match truth {
            Some(s) => s.clone(),
            None => GraphSignal(standard_normal(m, &mut rng)),
        };
        let x = relative_measurements(&meas, &theta)? + standard_normal(meas.num_edges(), &mut rng) * sd;
        let hat = est.estimate(&x)?;
        dirichlet_energy_pairwise(&GraphSignal(hat.0 - theta.0), g)
    })?;
    Ok(Outcome { crb_trace, energies })
}

fn run_masked(
    cfg: &ExperimentConfig,
    pt: &GridPoint,
    policy: Policy,
    grid: usize,
    truth: Option<&GraphSignal>,
    profile: Option<&DVector<f64>>,
) -> Result<Outcome> {
    let g = &pt.graph;
    let m = g.num_vertices();
    let laplacian = g.laplacian();
    let spec = decompose(&laplacian)?;
    let r = cfg.band_r.expect("validated config");
    let d = pt.d.expect("validated config");
    let variances = match profile {
        Some(p) if p.len() != m => {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
        Some(p) => p * pt.sigma2,
        None => DVector::from_element(m, pt.sigma2),
    };
    let j = FisherInfo::diagonal(variances.clone())?;
    let node_policy = match policy {
        Policy::Node(p) => p,
        _ => unreachable!("validated config"),
    };
    let structural = if cfg.sweep_var == SweepVar::InvSigma2 { 0 } else { grid };
    let placed = select_nodes(
        node_policy,
        &spec,
        r,
        d,
        &j,
        derived_seed(cfg.seed, structural, DOMAIN_POLICY),
    )?;
    let s = &placed.subset;
    let cov = DMatrix::from_diagonal(&DVector::from_iterator(s.len(), s.iter().map(|&i| variances[i])));
    let est = CmlEstimator::new(&spec, r, s, &cov)?;
    let noise = GaussianNoise::new(&cov)?;
    let low = spec.low_band(r);
    let energies = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, grid, t);
        let theta = match truth {
            Some(sig) => sig.0.clone(),
            None => &low * standard_normal(r, &mut rng),
        };
        let x = DVector::from_iterator(s.len(), s.iter().map(|&i| theta[i])) + noise.draw(&mut rng);
        let (hat, _) = est.estimate(&x)?;
        dirichlet_energy_pairwise(&GraphSignal(hat.0 - theta), g)
    })?;
    Ok(Outcome {
        crb_trace: placed.crb_trace,
        energies,
    })
}

fn run_inner(cfg: &ExperimentConfig) -> Result<MonteCarloResult> {
    let file_graph = match &cfg.graph {
        GraphSource::File(p) => Some(load_graph_csv(p)?),
        _ => None,
    };
    let truth = cfg.signal_csv.as_deref().map(load_signal_csv).transpose()?;
    let profile = cfg.noise_csv.as_deref().map(load_node_noise_csv).transpose()?;
    let mut records = Vec::new();
    for (grid, &value) in cfg.grid.iter().enumerate() {
        let at = |e: Error| Error::AtGridPoint {
            index: grid + 1,
            value,
            source: Box::new(e),
        };
        let graph = build_graph(cfg, file_graph.as_ref(), grid, value).map_err(at)?;
        if let Some(s) = &truth {
            if s.len() != graph.num_vertices() {
                return Err(at(Error::DimensionMismatch {
                    expected: graph.num_vertices(),
                    found: s.len(),
                }));
            }
        }
        let pt = GridPoint {
            sigma2: match cfg.sweep_var {
                SweepVar::InvSigma2 => 1.0 / value,
                _ => cfg.sigma2.expect("validated config"),
            },
            d: match cfg.sweep_var {
                SweepVar::D => Some(value as usize),
                _ => cfg.band_d,
            },
            graph,
        };
        for &policy in &cfg.policies {
            let start = Instant::now();
            let out = match cfg.model {
                Model::Relative => run_relative(cfg, &pt, policy, grid, truth.as_ref()),
                Model::Masked => run_masked(cfg, &pt, policy, grid, truth.as_ref(), profile.as_ref()),
            }
            .map_err(at)?;
            let (mean_energy, se_energy) = mean_and_se(&out.energies);
            records.push(MonteCarloRecord {
                sweep_value: value,
                policy: policy.tag().to_string(),
                mean_energy,
                se_energy,
                crb_trace: out.crb_trace,
                trials: cfg.trials,
                wall_time: start.elapsed(),
            });
        }
    }
    Ok(MonteCarloResult {
        seed: cfg.seed,
        sweep_var: cfg.sweep_var,
        records,
    })
}

/// Runs the experiment on `threads` worker threads (0 picks the rayon default). The
/// result does not depend on `threads`.
pub fn run_monte_carlo(cfg: &ExperimentConfig, threads: usize) -> Result<MonteCarloResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| run_inner(cfg))
}

/// Loads a config file and runs it.
pub fn run_config_file(path: impl AsRef<Path>, threads: usize) -> Result<MonteCarloResult> {
    run_monte_carlo(&ExperimentConfig::load(path)?, threads)
}
