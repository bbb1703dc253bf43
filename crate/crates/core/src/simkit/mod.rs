//! Random graphs, data samplers, file I/O and the Monte Carlo experiment engine.

pub mod config;
pub mod generators;
pub mod io;
pub mod montecarlo;
pub mod sampler;

pub use config::ExperimentConfig;
pub use generators::{gen_erdos_renyi, gen_watts_strogatz};
pub use montecarlo::{run_monte_carlo, MonteCarloRecord, MonteCarloResult};
pub use sampler::{sample_masked, sample_relative, GaussianNoise};
